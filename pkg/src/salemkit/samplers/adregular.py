"""Random alpha-regular point clouds in dyadic boxes.

A point a in {0..2^n-1}^d is read bit by bit.  At bit level j the first s_j
coordinates are free and the remaining ones are fixed by a random key zeta,
where s_j counts how many more free coordinates alpha-scaling allows.  Every
fiber of the key is a Cartesian product of per-coordinate value sets shifted
by the fixed bits, so sampling a fiber never enumerates the whole box.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import BelowMinimumScale, DegenerateAlpha, NotDyadic
from ..exact import as_fraction, at_least_power


def _ceil_frac(x):
    return -((-x.numerator) // x.denominator)


def minimal_n0(d, r, alpha):
    """Smallest n0 >= 1 with 2^((d-alpha) n0) >= r^d, decided exactly."""
    alpha = as_fraction(alpha)
    if not 0 < alpha < d:
        raise DegenerateAlpha(f"alpha={alpha} must lie in (0, {d})")
    p, q = alpha.numerator, alpha.denominator
    n0 = 1
    # 2^((dq - p) n0) >= r^(dq)
    while 2 ** ((d * q - p) * n0) < r ** (d * q):
        n0 += 1
    return n0


def ad_constant(d, r, alpha):
    """Explicit constant for the size and counting bounds, with its three ingredients."""
    alpha = as_fraction(alpha)
    n0 = minimal_n0(d, r, alpha)
    a = float(alpha)
    t_scale = 2.0 ** (d - a + 1)
    upper = 3.0 ** d * 2.0 ** (1 + (d - a) * n0 + a)
    lower = (2.0 * math.sqrt(d)) ** a
    # minimality of n0 forces 2^((d-alpha)(n0-1)) < r^d, the companion inequality
    companion = at_least_power(Fraction(r ** d), 2, (d - alpha) * (n0 - 1))
    return {"C0": max(t_scale, upper, lower), "t_scale": t_scale, "upper_count": upper,
            "lower_count": lower, "n0": n0, "n0_two_sided": companion}


@dataclass(frozen=True)
class ADPlan:
    d: int
    r: int
    alpha: Fraction
    n: int
    n0: int
    free_counts: tuple
    C0: float

    @property
    def M(self):
        return 1 << self.n

    @property
    def log2_T(self):
        return sum(self.free_counts)

    @property
    def T(self):
        return 1 << self.log2_T

    def free_bits(self, coord):
        """Bit levels at which the given coordinate is free."""
        return [j for j, s in enumerate(self.free_counts) if coord < s]

    def fixed_bits(self, coord):
        return [j for j, s in enumerate(self.free_counts) if coord >= s]

    def key_length(self):
        return sum(self.d - s for s in self.free_counts)


def _log2_exact(M):
    M = int(M)
    if M < 1 or M & (M - 1):
        raise NotDyadic(f"M={M} is not a power of two")
    return M.bit_length() - 1


def ad_plan(d, r, alpha, M):
    alpha = as_fraction(alpha)
    n0 = minimal_n0(d, r, alpha)
    n = _log2_exact(M)
    if n < n0:
        raise BelowMinimumScale(f"M=2^{n} is below the minimal scale 2^{n0}")
    free = []
    for j in range(n):
        if j < n - n0:
            free.append(_ceil_frac(alpha * (j + 1)) - _ceil_frac(alpha * j))
        else:
            free.append(d)
    return ADPlan(d, r, alpha, n, n0, tuple(free), ad_constant(d, r, alpha)["C0"])


def _coord_values(bits):
    vals = np.zeros(1, dtype=np.int64)
    for j in bits:
        vals = np.concatenate([vals, vals + (1 << j)])
    return np.sort(vals)


def fiber(plan, key_bits):
    """The fiber of a key: key_bits[i] lists the fixed bits of coordinate i in increasing level order."""
    axes = []
    for i in range(plan.d):
        fixed = plan.fixed_bits(i)
        shift = sum(int(b) << j for j, b in zip(fixed, key_bits[i]))
        axes.append(_coord_values(plan.free_bits(i)) + shift)
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def ad_seed_sample(d, r, alpha, M, rng):
    plan = ad_plan(d, r, alpha, M)
    key = [rng.integers(0, 2, size=len(plan.fixed_bits(i))) for i in range(d)]
    return fiber(plan, key)


def ad_regular_sample(d, r, alpha, M, rng):
    """Seed fiber shifted by a sum of r-1 independent uniforms on {0..M-1}^d."""
    A = ad_seed_sample(d, r, alpha, M, rng)
    if r > 1:
        shift = rng.integers(0, M, size=(r - 1, d), dtype=np.int64).sum(axis=0)
    else:
        shift = np.zeros(d, dtype=np.int64)
    return A + shift


def T_scale_holds(plan):
    """r^d M^alpha <= T <= C0 r^d M^alpha, the lower side exactly."""
    lower = at_least_power(Fraction(plan.T, plan.r ** plan.d), plan.M, plan.alpha)
    upper = plan.T <= plan.C0 * plan.r ** plan.d * plan.M ** float(plan.alpha) * (1 + 1e-12)
    return lower and upper


def _box_sums(occ, half):
    """Sums of occ over boxes [x-half, x+half]^d for every cell x, via separable prefix sums."""
    out = occ.astype(np.int64)
    for ax in range(occ.ndim):
        pad = [(0, 0)] * occ.ndim
        pad[ax] = (half + 1, half)
        c = np.cumsum(np.pad(out, pad), axis=ax)
        n = occ.shape[ax]
        hi = np.take(c, np.arange(2 * half + 1, 2 * half + 1 + n), axis=ax)
        lo = np.take(c, np.arange(0, n), axis=ax)
        out = hi - lo
    return out


def _window_max(occ, width):
    """Largest number of occupied cells in any axis-parallel window with `width` cells per side."""
    out = occ.astype(np.int64)
    for ax in range(occ.ndim):
        pad = [(0, 0)] * occ.ndim
        pad[ax] = (width, width)
        c = np.cumsum(np.pad(out, pad), axis=ax)
        out = np.take(c, np.arange(width, c.shape[ax]), axis=ax) - \
            np.take(c, np.arange(0, c.shape[ax] - width), axis=ax)
    return int(out.max())


def counting_certificate(points, alpha, C0, radii, exact=False):
    """Certify both counting bounds for a finite set S of lattice points.

    Upper: every open ball of radius R lies in an open cube meeting at most ceil(2R)
    integers per coordinate, so the largest window count bounds sup_x #(S cap B(x,R)).
    Lower: for x in S the closed cube of half-width k with k^2 d < R^2 lies inside
    B(x,R); cube counts failing the bound are recounted exactly in the Euclidean ball.
    """
    from .. import kernels

    pts = np.asarray(points, dtype=np.int64)
    d = pts.shape[1]
    a = float(alpha)
    lo = pts.min(axis=0)
    shape = tuple(pts.max(axis=0) - lo + 1)
    occ = np.zeros(shape, dtype=np.int64)
    rel = pts - lo
    occ[tuple(rel.T)] = 1
    upper_ratio = 0.0
    lower_ratio = math.inf
    recounted = 0
    for R in radii:
        width = math.ceil(2 * R)
        u = _window_max(occ, width)
        upper_ratio = max(upper_ratio, u / R ** a)
        k = 0
        while (k + 1) ** 2 * d < R * R:
            k += 1
        counts = _box_sums(occ, k)[tuple(rel.T)].astype(np.float64)
        need = counts * C0 < R ** a
        if exact or need.any():
            idx = np.arange(len(pts)) if exact else np.flatnonzero(need)
            counts[idx] = exact_ball_counts(occ, rel[idx], R * R, kernels)
            recounted += len(idx)
        lower_ratio = min(lower_ratio, float((counts / R ** a).min()))
    return {
        "upper_max_ratio": upper_ratio,
        "lower_min_ratio": lower_ratio,
        "upper_ok": upper_ratio <= C0 * (1 + 1e-12),
        "lower_ok": lower_ratio * C0 >= 1 - 1e-12,
        "recounted": recounted,
    }


def exact_ball_counts(occ, centers, R2, kernels=None):
    """Exact #{y occupied : |y - c|^2 < R2} for integer grid centers c (d <= 2 via rows)."""
    if kernels is None:
        from .. import kernels
    d = occ.ndim
    centers = np.asarray(centers, dtype=np.int64)
    if d == 1:
        grid = occ.reshape(1, -1)
        cen = np.stack([np.zeros(len(centers), dtype=np.int64), centers[:, 0]], axis=1)
    elif d == 2:
        grid = occ
        cen = centers
    else:
        pts = np.argwhere(occ).astype(np.int64)
        return kernels.ball_sums(np.ascontiguousarray(pts), np.ones(len(pts), dtype=np.int64),
                                 np.ascontiguousarray(centers), 1, int(R2))
    cum = np.zeros((grid.shape[0], grid.shape[1] + 1), dtype=np.int64)
    cum[:, 1:] = np.cumsum(grid, axis=1)
    return kernels.grid_disc_counts(np.ascontiguousarray(cum), np.ascontiguousarray(cen), int(R2))
