"""Resonance lower bounds on Bohr sets and the localized L^2 / L^4 energies of the grid factor."""
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import EmptyBohrSet
from ..measures import DiscreteMeasure, convolve, difference_set, fourier_eval, fourier_grid
from .fits import loglog_fit
from .report import ExperimentReport

# full-period FFT cross-checks are skipped above this many frequencies
FFT_LIMIT = 1 << 22


def _window(bundle, k):
    return bundle.bohr_spacing(k), bundle.window_width(k)


def dist_to_multiple(x, L):
    """Exact dist(x / L, Z) for rationals x and L."""
    t = Fraction(x) / L
    return abs(t - round(t))


def in_bohr_window(bundle, n, xi):
    """dist(xi_l / L_k, Z) < 1 / (2 Mb_k Mt_k) for all k <= n and every coordinate."""
    for k in range(1, n + 1):
        L, w = _window(bundle, k)
        if any(dist_to_multiple(x, L) >= w for x in xi):
            return False
    return True


def _interval_inside(bundle, n, center, half):
    """The closed interval center +- half lies in one window at every level k <= n."""
    for k in range(1, n + 1):
        L, w = _window(bundle, k)
        j = round(Fraction(center) / L)
        if abs(center - j * L) + half >= w * L:
            return False
    return True


def bohr_level(bundle, n, c, theta):
    """Largest m <= n with 4 MM_m <= c theta^n MM_n."""
    MM = bundle.scales.MM
    reach = Fraction(c) * Fraction(theta) ** n * MM[n]
    m = 0
    for k in range(1, n + 1):
        if 4 * MM[k] <= reach:
            m = k
    return m, reach


@dataclass
class BohrSet:
    n: int
    m: int
    c: Fraction
    theta: Fraction
    half_box: Fraction
    interval_half: Fraction
    centers: list
    rejected: list
    separation: Fraction
    points: list

    @property
    def volume_lower(self):
        d = len(self.points[0]) if self.points else 1
        return (2 * self.interval_half * len(self.centers)) ** d

    def float_points(self):
        return np.array([[float(v) for v in p] for p in self.points], dtype=np.float64)


def bohr_points(bundle, n, c=Fraction(1, 2), theta=Fraction(1, 2), max_points=4096):
    """Certified points of the Bohr set inside the box [-c theta^n MM_n, c theta^n MM_n]^d.

    Candidate intervals are t + sum_{k<=m} L_k a_k with |t| <= A/8 and 0 <= a_k < Qb_k.
    An interval is kept only when every one of its points meets all window conditions
    and lies in the box; each kept interval contributes its center and both endpoints.
    """
    c, theta = Fraction(c), Fraction(theta)
    m, reach = bohr_level(bundle, n, c, theta)
    if m == 0:
        raise EmptyBohrSet(f"level {n}: no m >= 1 with 4 MM_m <= c theta^n MM_n = {float(reach):.4g}")
    d = bundle.scales.d
    half = Fraction(bundle.A, 8)
    ranges = [range(bundle.levels[k - 1].Q_bar) for k in range(1, m + 1)]
    Ls = [bundle.bohr_spacing(k) for k in range(1, m + 1)]
    kept, rejected = [], []
    for a in itertools.product(*ranges):
        g = sum(L * ak for L, ak in zip(Ls, a))
        if abs(g) + half <= reach and _interval_inside(bundle, n, g, half):
            kept.append(g)
        else:
            rejected.append(g)
    if not kept:
        raise EmptyBohrSet(f"level {n}: none of the {len(rejected)} candidate intervals is certified")
    kept.sort()
    sep = min((b - a for a, b in zip(kept, kept[1:])), default=None)
    axis = sorted({v for g in kept for v in (g - half, Fraction(g), g + half)})
    pts = list(itertools.islice(itertools.product(axis, repeat=d), max_points))
    return BohrSet(n, m, c, theta, reach, half, kept, rejected, sep, pts)


def bohr_report(bundle, bohr):
    rep = ExperimentReport("bohr_points", {"level": bohr.n, "c": bohr.c, "theta": bohr.theta})
    rep.tolerance("exact", 0)
    d = bundle.scales.d
    rep.scalar("m", bohr.m)
    rep.scalar("certified_intervals", len(bohr.centers))
    rep.scalar("rejected_intervals", len(bohr.rejected))
    rep.scalar("volume_lower", bohr.volume_lower)
    formula = Fraction(bundle.A, 4) ** d
    for k in range(1, bohr.m + 1):
        formula *= bundle.levels[k - 1].Q_bar ** d
    rep.scalar("volume_formula", formula)
    rep.verdict("points_in_window", all(in_bohr_window(bundle, bohr.n, p) for p in bohr.points), "exact")
    rep.verdict("points_in_box", all(abs(v) <= bohr.half_box for p in bohr.points for v in p), "exact")
    if bohr.separation is not None:
        rep.verdict("separation", bohr.separation > Fraction(bundle.A, 4), "exact",
                    f"min gap {bohr.separation}")
    return rep


def resonance_check(bundle, n, xi_list, rel_tol=1e-9):
    """|(grid * eta)^(xi)| >= 2^(-dn) prod Mb_k^d / T_k at every xi, closed form against direct sum."""
    xi = np.asarray([[float(v) for v in p] for p in xi_list], dtype=np.float64).reshape(-1, bundle.scales.d)
    closed = bundle.resonance_transform(n, xi)
    direct = fourier_eval(bundle.resonance_measure(n), xi)
    floor = bundle.resonance_floor(n)
    rep = ExperimentReport("resonance_check", {"level": n, "points": len(xi)})
    rep.tolerance("closed_vs_direct", rel_tol)
    rep.tolerance("float_rounding", 1e-12)
    rel = np.abs(closed - direct) / np.maximum(np.abs(direct), 1e-300)
    rep.scalar("floor", floor)
    rep.scalar("max_relative_gap", float(rel.max()) if len(rel) else 0.0)
    mags = np.abs(closed)
    worst = float(mags.min()) if len(mags) else math.inf
    rep.scalar("min_abs_transform", worst)
    below = [i for i, v in enumerate(mags) if Fraction(float(v)) * (1 + Fraction(1, 10 ** 12)) < floor]
    rep.verdict("closed_vs_direct", bool(np.all(rel <= rel_tol)), "closed_vs_direct")
    rep.verdict("resonance_floor", not below, "float_rounding",
                "" if not below else f"{len(below)} points below, first xi={xi[below[0]].tolist()}")
    return rep


def tent(x):
    """Fejer tent max(0, 1 - |x|/2): the self-convolution of a box, so its inverse transform is >= 0."""
    return np.maximum(0.0, 1.0 - np.abs(x) / 2.0)


def reflected(mu):
    return DiscreteMeasure.from_atoms(mu.d, mu.scale, mu.level, -mu.points, mu.num, mu.den)


def energy_identities(mu):
    """Exact period integrals of |mu^|^2 and |mu^|^4 and the Cauchy-Schwarz floor."""
    M = mu.scale
    d = mu.d
    auto = convolve(mu, reflected(mu))
    l2 = sum((m * m for m in mu.masses()), Fraction(0)) * M ** d
    l4 = sum((m * m for m in auto.masses()), Fraction(0)) * M ** d
    ndiff = len(difference_set(mu.points))
    return {"l2": l2, "l4": l4, "support": len(mu), "differences": ndiff, "autocorrelation": auto}


def wn_vn_energy(bundle, n, c=Fraction(1, 4), grid=10 ** 4, rel_tol=1e-9):
    """Window-localized energies W = phi |grid^|^2 and V = phi |grid^|^4 at level n.

    phi is the tensor tent of half-width 2 c MM_n.
    """
    mu = bundle.grid_measure(n)
    d, M = mu.d, mu.scale
    c = Fraction(c)
    per_axis = max(2, math.ceil(grid ** (1.0 / d)))
    half = 2 * float(c) * M
    axis = np.linspace(-half, half, per_axis)
    h = axis[1] - axis[0]
    xi = np.array(np.meshgrid(*[axis] * d, indexing="ij")).reshape(d, -1).T
    phi = np.prod(tent(xi / (float(c) * M)), axis=1)
    direct = fourier_eval(mu, xi)
    closed = bundle.grid_transform(n, xi)
    F = np.abs(direct) ** 2
    W = phi * F
    V = phi * F * F
    rep = ExperimentReport("wn_vn_energy", {"level": n, "c": c, "grid": len(xi)})
    rep.tolerance("pointwise", 1e-12)
    rep.tolerance("exact", 0)
    rep.tolerance("closed_vs_direct", rel_tol)
    slack = 1e-12
    rep.verdict("window_bounds", bool(np.all(V >= -slack) and np.all(V <= W + slack) and np.all(W <= 1 + slack)),
                "pointwise")
    gap = float(np.max(np.abs(closed - direct)))
    rep.scalar("closed_form_gap", gap)
    rep.verdict("grid_closed_form", gap <= rel_tol, "closed_vs_direct")
    rep.scalar("integral_W", float(W.sum() * h ** d))
    rep.scalar("integral_V", float(V.sum() * h ** d))
    ids = energy_identities(mu)
    rep.scalar("period_l2", ids["l2"])
    rep.scalar("period_l4", ids["l4"])
    rep.scalar("support_size", ids["support"])
    rep.scalar("difference_count", ids["differences"])
    rep.verdict("parseval_l2", ids["l2"] == Fraction(M ** d, ids["support"]), "exact")
    cs = Fraction(M ** d, ids["differences"])
    rep.verdict("cauchy_schwarz_floor", ids["l4"] >= cs, "exact", f"l4={float(ids['l4']):.6g} floor={float(cs):.6g}")
    if M ** d <= FFT_LIMIT:
        vals = np.abs(fourier_grid(mu, 1, M)) ** 2
        fft2 = float(vals.mean()) * M ** d
        fft4 = float((vals * vals).mean()) * M ** d
        rep.scalar("fft_l2", fft2)
        rep.scalar("fft_l4", fft4)
        ok = (abs(fft2 - float(ids["l2"])) <= rel_tol * float(ids["l2"])
              and abs(fft4 - float(ids["l4"])) <= rel_tol * float(ids["l4"]))
        rep.verdict("parseval_fft", ok, "closed_vs_direct")
    return rep


def energy_exponents(bundle, c=Fraction(1, 4)):
    """Slopes of the exact period energies against MM_n across levels."""
    d = bundle.scales.d
    rep = ExperimentReport("energy_exponents", {"levels": bundle.depth})
    l2, l4, MM = [], [], []
    for n in range(1, bundle.depth + 1):
        ids = energy_identities(bundle.grid_measure(n))
        l2.append(ids["l2"])
        l4.append(ids["l4"])
        MM.append(bundle.scales.MM[n])
    rep.add_series("period_l2", zip(range(1, bundle.depth + 1), l2))
    rep.add_series("period_l4", zip(range(1, bundle.depth + 1), l4))
    p = bundle.params
    rep.scalar("expected_exponent", d - float(p.alpha) + float(p.beta))
    rep.scalar("slope_l2", loglog_fit(MM, l2)["slope"])
    rep.scalar("slope_l4", loglog_fit(MM, l4)["slope"])
    return rep
