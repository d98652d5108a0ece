"""Upper (Frostman) and lower ball-mass estimates for lattice measures."""
import math
from fractions import Fraction

import numpy as np

from ..errors import EmptySchedule, PointOffSupport
from ..exact import at_least_power
from ..measures import ball_masses
from ..rng import stream
from .report import ExperimentReport


def loglog_fit(xs, ys):
    """Least-squares slope and intercept of log y against log x, with the max residual.

    Pairs with a non-positive coordinate are dropped; fewer than two pairs give nan.
    """
    pts = [(math.log(float(x)), math.log(float(y))) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len(pts) < 2:
        return {"slope": math.nan, "intercept": math.nan, "residual": math.nan}
    lx, ly = np.array(pts).T
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = float(np.max(np.abs(ly - (slope * lx + icpt))))
    return {"slope": float(slope), "intercept": float(icpt), "residual": resid}


def _power(x, e):
    return float(x) ** float(e)


def center_schedule(mu, count, rng, support_share=Fraction(1, 2), box=None):
    """Integer centers at the measure's scale: part support atoms, the rest uniform lattice points.

    `box` is the side of the cube [0, box]^d holding the support (defaults to the atoms' extent).
    """
    if count < 1:
        raise EmptySchedule("no centers requested")
    k = min(len(mu), int(count * support_share))
    pick = np.sort(rng.choice(len(mu), size=k, replace=False)) if k else np.empty(0, dtype=np.int64)
    hi = int(mu.points.max()) if box is None else int(box * mu.scale)
    rest = rng.integers(0, hi + 1, size=(count - k, mu.d), dtype=np.int64)
    return np.concatenate([mu.points[pick], rest])


def frostman_fit(mu, target, radii, centers, center_den=None, declared=None, scale_index=None,
                 name="frostman_fit"):
    """Sup over centers of mu(B(x, rho)) / rho^target for every rho in `radii`.

    Radii are exact rationals; centers are integer rows at `center_den` (default: the measure's scale).
    """
    radii = [Fraction(r) for r in radii]
    centers = np.asarray(centers, dtype=np.int64).reshape(-1, mu.d)
    if not radii or len(centers) == 0:
        raise EmptySchedule("frostman_fit needs at least one radius and one center")
    den = mu.scale if center_den is None else int(center_den)
    idx = list(range(1, len(radii) + 1)) if scale_index is None else list(scale_index)
    rep = ExperimentReport(name, {"target": target, "radii": radii, "centers": len(centers)})
    sups, ratios = [], []
    for rho in radii:
        masses = ball_masses(mu, centers, den, rho * rho)
        top = max(masses)
        sups.append(top)
        ratios.append(float(top) / _power(rho, target))
    C_sup = max(ratios)
    rep.scalar("C_sup", C_sup)
    rep.add_series("sup_ball_mass", zip(idx, sups))
    rep.add_series("ratio", zip(idx, ratios))
    fit = loglog_fit(radii, sups)
    rep.scalar("slope", fit["slope"])
    rep.scalar("slope_residual", fit["residual"])
    if declared is not None:
        rep.scalar("C_declared", declared)
        rep.tolerance("frostman_relative", 1e-9)
        rep.verdict("frostman_constant", C_sup <= float(declared) * (1 + 1e-9), "frostman_relative",
                    f"C_sup={C_sup:.6g} declared={float(declared):.6g}")
    return rep


def _support_rows(mu, points):
    have = {tuple(int(v) for v in p) for p in mu.points}
    for p in points:
        t = tuple(int(v) for v in p)
        if t not in have:
            raise PointOffSupport(f"point {t} (scale {mu.scale}) is not an atom of the measure")


def lower_mass_check(mu, points, exponent, eps_list, rho2_list, floors=None, scale_index=None,
                     name="lower_mass_check"):
    """min over points of mu(B(x, rho)) / rho^(exponent + eps), for every eps and squared radius.

    `floors`, when given, holds one exact bound per radius as (coef, base, expo), meaning
    coef * base^expo; every ball mass is compared against it in exact arithmetic.
    """
    points = np.asarray(points, dtype=np.int64).reshape(-1, mu.d)
    rho2_list = [Fraction(r) for r in rho2_list]
    if len(points) == 0 or not rho2_list:
        raise EmptySchedule("lower_mass_check needs points and radii")
    _support_rows(mu, points)
    idx = list(range(1, len(rho2_list) + 1)) if scale_index is None else list(scale_index)
    rep = ExperimentReport(name, {"exponent": exponent, "eps": list(eps_list),
                                  "rho2": rho2_list, "points": len(points)})
    mins = []
    floor_ok, witness = True, ""
    for j, rho2 in enumerate(rho2_list):
        masses = ball_masses(mu, points, mu.scale, rho2)
        mins.append(min(masses))
        if floors is not None:
            coef, base, expo = floors[j]
            for p, m in zip(points, masses):
                if not at_least_power(m / Fraction(coef), base, expo):
                    if floor_ok:
                        witness = f"radius^2={rho2} point={tuple(int(v) for v in p)} mass={m}"
                    floor_ok = False
                    break
    rep.add_series("min_ball_mass", zip(idx, mins))
    for eps in eps_list:
        vals = [float(m) / float(r2) ** ((float(exponent) + float(eps)) / 2) for m, r2 in zip(mins, rho2_list)]
        rep.scalar(f"min_ratio[eps={eps}]", min(vals))
        rep.add_series(f"ratio[eps={eps}]", zip(idx, vals))
    rep.tolerance("exact", 0)
    rep.verdict("positive", all(m > 0 for m in mins), "exact")
    if floors is not None:
        rep.verdict("floor", floor_ok, "exact", witness)
    return rep


def salem_frostman(family, centers=1000, seed=0):
    """Frostman fit of the deepest level over radii 1/MM_k at the family's reported constant."""
    mu = family.measure(family.depth)
    MM = family.scales.MM
    rng = stream(seed, "frostman-centers", family.depth)
    cs = center_schedule(mu, centers, rng, box=family.scales.r)
    return frostman_fit(mu, family.exponent, [Fraction(1, MM[k]) for k in range(1, family.depth + 1)],
                        cs, declared=family.frostman_constant)


def salem_lower_mass(family, count=100, seed=0, eps_list=(0, Fraction(1, 10))):
    """Lower mass at support atoms: mu(B(x, r sqrt(d) / MM_k)) >= 1 / prod_{j<=k} T_j exactly."""
    N = family.depth
    mu = family.measure(N)
    d, r, MM = family.scales.d, family.scales.r, family.scales.MM
    rng = stream(seed, "lower-points", N)
    pick = np.sort(rng.choice(len(mu), size=min(count, len(mu)), replace=False))
    rho2 = [Fraction(r * r * d, MM[k] ** 2) for k in range(1, N + 1)]
    floors = [(Fraction(1, family.lower_mass_floor(k)), 1, 0) for k in range(1, N + 1)]
    return lower_mass_check(mu, mu.points[pick], family.exponent, eps_list, rho2, floors)


def heavy_core_lower_mass(hc, n=None, eps_list=(0, Fraction(1, 10))):
    """Core points at level n: mu_n(B(x, r sqrt(d) / MM_n)) >= c^n MM_n^-alpha exactly."""
    n = hc.depth if n is None else n
    mu = hc.measure(n)
    d, r, MM = hc.scales.d, hc.scales.r, hc.scales.MM[n]
    rho2 = [Fraction(r * r * d, MM ** 2)]
    floors = [(hc.core_floor(n), MM, -hc.alpha)]
    return lower_mass_check(mu, hc.core_points(n), hc.alpha, eps_list, rho2, floors, scale_index=[n])
