"""Sharpness experiments: lower bounds for L^p -> L^q norms of convolution and restriction.

Each experiment returns an ExperimentReport with one ratio per scale index and a
trend verdict.  Exterior points of the admissible region should produce a
strictly increasing ratio; interior points a ratio that does not grow by more
than 5% between consecutive scales.
"""
import math
from fractions import Fraction

import numpy as np

from ..errors import EmptyBohrSet, MissingTestData
from ..measures import (CubeUnion, ball_masses, difference_set, fourier_eval,
                        measure_conv_indicator, neighborhood_volume, sup_inner_radius)
from ..rng import stream
from .regions import ExponentRegion, reciprocal
from .report import ExperimentReport
from .resonance import bohr_points

GROWTH_SLACK = 0.05


def strictly_increasing(values):
    return all(b > a for a, b in zip(values, values[1:]))


def non_increasing_within(values, slack=GROWTH_SLACK):
    return all(b <= a * (1 + slack) for a, b in zip(values, values[1:]))


def _power(x, e):
    """x^e for a nonnegative rational or float; exponent 0 gives 1 even at x = 0."""
    if e == 0:
        return 1.0
    x = float(x)
    return 0.0 if x == 0 else math.exp(float(e) * math.log(x))


def _ball_volume(d):
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _trend_verdict(rep, ratios, exponent, label="ratio"):
    """Exterior (negative exponent): strict growth. Otherwise growth capped at 5%."""
    vals = [v for _, v in ratios]
    rep.tolerance("trend", GROWTH_SLACK)
    rep.scalar("trend_exponent", exponent)
    if exponent < 0:
        rep.scalar("expected_trend", "increasing")
        rep.verdict(f"{label}_trend", strictly_increasing(vals), "trend",
                    "exterior point: ratio strictly increasing across scales")
    else:
        rep.scalar("expected_trend", "bounded")
        rep.verdict(f"{label}_trend", non_increasing_within(vals), "trend",
                    "interior point: ratio grows by at most 5% between scales")


def _cube_samples(centers, m, count, rng):
    """Lattice points x drawn from the union of cubes c + [-m, m]^d, with multiplicities.

    Draw a center uniformly and an offset uniformly; the number of centers
    whose cube contains x gives the inverse inclusion weight.
    """
    centers = np.asarray(centers, dtype=np.int64)
    d = centers.shape[1]
    idx = rng.integers(0, len(centers), size=count)
    off = rng.integers(-m, m + 1, size=(count, d))
    xs = centers[idx] + off
    mult = np.array([int(np.all(np.abs(centers - x) <= m, axis=1).sum()) for x in xs])
    cells = len(centers) * (2 * m + 1) ** d
    return xs, mult, cells


def _lattice_lq(values, mult, cells, scale, d, q):
    """Horvitz-Thompson estimate of (scale^-d sum_x g(x)^q)^(1/q) over the union's lattice points."""
    v = np.asarray([float(x) for x in values])
    if q == math.inf:
        return float(v.max())
    total = cells * np.mean(v ** q / mult) / float(scale) ** d
    return float(total ** (1.0 / q))


def _q_of(b):
    return math.inf if b == 0 else float(1 / b)


def conv_sharpness_geometric(fm, a, b, levels=None, samples=16, seed=0):
    """Convolution experiment on a factorized measure at (1/p, 1/q) = (a, b).

    Works at the deepest level N.  For delta = 1/MM_k the test function is the
    indicator of the sup-norm 2 delta-neighbourhood of E_N - E_N; the lower bound
    is min mu_bar(B(z0, delta)) |(supp mu_N)_delta|^b / |(E_N - E_N)_2delta|^a.
    """
    a, b = Fraction(a), Fraction(b)
    params = fm.params
    d = fm.scales.d
    region = ExponentRegion.of(params.alpha, params.beta, d)
    N = fm.depth
    S = fm.scales.MM[N]
    mu = fm.measure(N)
    rand = fm.random_measure(N)
    diff = difference_set(fm.grid_support(N))
    levels = list(levels or range(1, N + 1))
    exponent = region.beta + (d - region.alpha) * b - (d - region.alpha + region.beta) * a
    rep = ExperimentReport("conv-sharpness-geometric", params.to_dict(), params.seed)
    rep.scalar("point", [a, b])
    rep.scalar("in_region", region.in_delta(a, b))
    rep.scalar("depth", N)
    rep.scalar("difference_count", len(diff))
    rep.tolerance("pointwise", 0)
    rep.tolerance("quadrature", 0)
    rng = stream(seed, "conv-geo", N)
    ratios, floors, vols, fnorms, quad = [], [], [], [], []
    pointwise_ok = True
    quad_ok = True
    for k in levels:
        m = S // fm.scales.MM[k]
        delta = Fraction(m, S)
        fvol = neighborhood_volume(diff, S, 2 * delta)
        svol = neighborhood_volume(mu.points, S, delta)
        floor = min(ball_masses(rand, rand.points, rand.scale, delta * delta))
        fnorm = _power(fvol, a)
        ratio = float(floor) * _power(svol, b) / fnorm
        ratios.append((k, ratio))
        floors.append((k, floor))
        vols.append((k, svol))
        fnorms.append((k, fvol))
        ind = CubeUnion(diff, S, 2 * m)
        xs, mult, cells = _cube_samples(mu.points, m, samples, rng)
        vals = measure_conv_indicator(mu, ind, xs)
        if min(vals) < floor:
            pointwise_ok = False
        est = _lattice_lq(vals, mult, cells, S, d, _q_of(b)) / fnorm
        quad.append((k, est))
        if est < ratio * (1 - 1e-9):
            quad_ok = False
    rep.add_series("ratio", ratios)
    rep.add_series("ball_floor", floors)
    rep.add_series("support_volume", vols)
    rep.add_series("test_volume", fnorms)
    rep.add_series("ratio_quadrature", quad)
    rep.verdict("pointwise_floor", pointwise_ok, "pointwise",
                "(mu * f)(x) >= ball floor at sampled x in the support neighbourhood")
    rep.verdict("lower_below_quadrature", quad_ok, "quadrature",
                "lower bound does not exceed the sampled norm estimate")
    _trend_verdict(rep, ratios, exponent)
    return rep


def conv_sharpness_nongeometric(hc, a, b, levels=None, samples=16, seed=0):
    """Convolution experiment on a heavy-core measure at (1/p, 1/q) = (a, b).

    Test function: indicator of B(0, 2 delta).  The lower bound is
    min over core points x0 of mu_N(B(x0, delta)) times |F_delta'|^b over
    |B(0, 2 delta)|^a, where F is the depth-N core and delta' the radius of the
    largest sup-norm cube inside B(0, delta).
    """
    a, b = Fraction(a), Fraction(b)
    params = hc.params
    d = hc.scales.d
    region = ExponentRegion.of(hc.alpha, hc.beta, d)
    N = hc.depth
    S = hc.scales.MM[N]
    mu = hc.measure(N)
    core = hc.core_points(N)
    levels = list(levels or range(1, N + 1))
    exponent = region.alpha + (d - 2 * region.alpha + region.beta) * b - d * a
    rep = ExperimentReport("conv-sharpness-nongeometric", params.to_dict(), params.seed)
    rep.scalar("point", [a, b])
    rep.scalar("in_region", region.in_pent(a, b))
    rep.scalar("depth", N)
    rep.scalar("core_size", len(core))
    rep.tolerance("pointwise", 0)
    rep.tolerance("quadrature", 0)
    rng = stream(seed, "conv-nongeo", N)
    ratios, floors, vols, quad = [], [], [], []
    pointwise_ok = True
    quad_ok = True
    for k in levels:
        m = S // hc.scales.MM[k]
        delta = Fraction(m, S)
        inner = sup_inner_radius(m, d)
        svol = neighborhood_volume(core, S, Fraction(inner, S)) if inner else Fraction(0)
        floor = min(ball_masses(mu, core, S, delta * delta))
        fnorm = _power(_ball_volume(d) * float(2 * delta) ** d, a)
        ratio = float(floor) * _power(svol, b) / fnorm
        ratios.append((k, ratio))
        floors.append((k, floor))
        vols.append((k, svol))
        if inner:
            xs, mult, cells = _cube_samples(core, inner, samples, rng)
            vals = ball_masses(mu, xs, S, 4 * delta * delta)
            if min(vals) < floor:
                pointwise_ok = False
            est = _lattice_lq(vals, mult, cells, S, d, _q_of(b)) / fnorm
            quad.append((k, est))
            if est < ratio * (1 - 1e-9):
                quad_ok = False
    rep.add_series("ratio", ratios)
    rep.add_series("core_floor", floors)
    rep.add_series("core_volume", vols)
    rep.add_series("ratio_quadrature", quad)
    rep.verdict("pointwise_floor", pointwise_ok, "pointwise",
                "mu(B(x, 2 delta)) >= core floor at sampled x near the core")
    rep.verdict("lower_below_quadrature", quad_ok, "quadrature",
                "lower bound does not exceed the sampled norm estimate")
    _trend_verdict(rep, ratios, exponent)
    return rep


def _exact(x):
    """Floats go through their shortest decimal form so 7.6 compares as 38/5."""
    if isinstance(x, float) and math.isfinite(x):
        return Fraction(repr(x))
    return x


def _restriction_trend(rep, ratios, region, p, q):
    threshold = region.restriction_threshold(_exact(p))
    q = _exact(q)
    expect = q < threshold
    vals = [v for _, v in ratios]
    rep.scalar("threshold_q", threshold)
    rep.scalar("expected_trend", "increasing" if expect else "not increasing")
    rep.scalar("observed_increasing", strictly_increasing(vals))
    rep.tolerance("trend", 0)
    rep.verdict("trend_matches_threshold", strictly_increasing(vals) == expect, "trend",
                "ratio strictly increases exactly when q lies below the threshold")


def _box_quadrature(bundle, n, q, half, max_points):
    d = bundle.scales.d
    per_axis = max(2, int(max_points ** (1.0 / d)))
    h = max(0.25, 2 * half / per_axis)
    axis = np.arange(-half, half + 1e-12, h)
    pts = np.array(np.meshgrid(*[axis] * d, indexing="ij")).reshape(d, -1).T
    vals = np.abs(bundle.resonance_transform(n, pts))
    if q == math.inf:
        return float(vals.max())
    return float((np.sum(vals ** q) * h ** d) ** (1.0 / q))


def restriction_geometric(bundle, p, q, c=Fraction(1, 2), theta=None, shift_samples=64,
                          max_points=2 * 10 ** 6, seed=0):
    """Restriction ratio ||(f_n dmu)^||_q / ||f_n||_{L^p(mu)} per level of a restriction bundle.

    f_n is the indicator of the leaves whose first n random digits stay in the
    arithmetic subtree, so ||f_n||_p = eta_total(n)^(1/p).  The numerator is a
    quadrature of the closed-form resonance transform over the box
    [-c theta^n MM_n, c theta^n MM_n]^d; a certified Bohr set gives a rigorous
    lower bound when one exists.
    """
    params = bundle.params
    d = bundle.scales.d
    r = bundle.scales.r
    theta = Fraction(1, 2 ** (d + 2)) if theta is None else Fraction(theta)
    region = ExponentRegion.of(params.alpha, params.beta, d)
    rep = ExperimentReport("restriction-geometric", params.to_dict(), params.seed)
    rep.scalar("p", p)
    rep.scalar("q", q)
    rep.scalar("c", c)
    rep.scalar("theta", theta)
    rep.tolerance("shift", 1e-9)
    inv_p = reciprocal(p)
    inv_q = float(reciprocal(q))
    N = bundle.depth
    rng = stream(seed, "restriction-geo", N)
    ratios, lowers, masses = [], [], []
    shift_ok = True
    for n in range(1, N + 1):
        tau = bundle.eta_total(n)
        if tau == 0:
            raise MissingTestData(f"level {n}: the arithmetic subtree carries no mass")
        fnorm = _power(tau, inv_p)
        half = float(c * theta ** n * bundle.scales.MM[n])
        num = _box_quadrature(bundle, n, q, half, max_points)
        ratios.append((n, num / fnorm))
        masses.append((n, tau))
        try:
            bohr = bohr_points(bundle, n, c, theta)
            low = float(bundle.resonance_floor(n)) * float(bohr.volume_lower) ** inv_q / fnorm
            lowers.append((n, low))
        except EmptyBohrSet:
            pass
        # compare the depth-N test measure with the level-n closed form
        sub = bundle.prefix_test_measure(n)
        xi = rng.uniform(-half, half, size=(shift_samples, d)) if half > 0 else np.zeros((1, d))
        direct = fourier_eval(sub, xi)
        closed = bundle.resonance_transform(n, xi)
        cap = float(tau) * np.minimum(2.0, 2 * math.pi * (r + 1) * np.abs(xi).sum(axis=1)
                                      / bundle.scales.MM[n])
        if np.any(np.abs(direct - closed) > cap + 1e-9):
            shift_ok = False
    rep.add_series("ratio", ratios)
    rep.add_series("ratio_bohr_lower", lowers)
    rep.add_series("test_mass", masses)
    rep.scalar("bohr_levels", [n for n, _ in lowers])
    rep.verdict("small_shift", shift_ok, "shift",
                "depth-N test transform stays within the shift bound of the closed form")
    _restriction_trend(rep, ratios, region, p, q)
    return rep


def restriction_nongeometric(fam, p, q, samples=256, seed=0):
    """Restriction ratio per component of a nongeometric family.

    Lower bound: c' w_n^(1/p') |I_n^d|^(1/q) / W^(1/p') with c' the transform
    floor on the resonance box.  A Monte Carlo quadrature over the box gives the
    matching estimate and checks the floor at every sample.
    """
    params = fam.params
    d = fam.d
    region = ExponentRegion.of(params.alpha, params.beta, d)
    rep = ExperimentReport("restriction-nongeometric", params.to_dict(), params.seed)
    rep.scalar("p", p)
    rep.scalar("q", q)
    rep.scalar("transform_floor", fam.transform_floor)
    rep.tolerance("box_floor", 0)
    inv_dual = float(1 - reciprocal(p))
    inv_q = float(reciprocal(q))
    W = float(fam.total_weight)
    rng = stream(seed, "restriction-nongeo", fam.depth)
    lows, quads, vols, lengths = [], [], [], []
    floor_ok = True
    for i, lev in enumerate(fam.levels, start=1):
        w = float(lev.weight)
        vol = fam.box_volume(i)
        vols.append((lev.n, vol))
        lengths.append((lev.n, _power(vol, Fraction(1, d)) / (4.0 ** lev.n / lev.rho)))
        share = (w / W) ** inv_dual
        lows.append((lev.n, float(fam.transform_floor) * share * _power(vol, inv_q)))
        xi = fam.box_samples(i, samples, rng)
        vals = np.abs(fourier_eval(fam.component(i), xi))
        if vals.min() < float(fam.transform_floor):
            floor_ok = False
        if q == math.inf:
            est = float(vals.max())
        else:
            est = float((float(vol) * np.mean(vals ** q)) ** inv_q)
        quads.append((lev.n, share * est))
    rep.add_series("ratio", lows)
    rep.add_series("ratio_quadrature", quads)
    rep.add_series("box_volume", vols)
    # realized constant in |I_n| ~ 4^n / rho_n per coordinate
    rep.add_series("box_length_constant", lengths)
    rep.verdict("box_floor", floor_ok, "box_floor",
                "component transform stays above the floor at every box sample")
    _restriction_trend(rep, lows, region, p, q)
    return rep


def restriction_experiment(obj, p, q, **kw):
    """Dispatch on the construction: bundles with an arithmetic subtree or nongeometric families."""
    if hasattr(obj, "eta_total"):
        return restriction_geometric(obj, p, q, **kw)
    if hasattr(obj, "transform_floor"):
        return restriction_nongeometric(obj, p, q, **kw)
    raise MissingTestData(f"{type(obj).__name__} carries no restriction test data")
