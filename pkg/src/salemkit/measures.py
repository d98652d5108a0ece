"""Finite atomic measures on the lattice (1/scale) Z^d with exact rational masses.

Atoms are kept as a lexicographically sorted integer array together with
integer numerators over one common denominator, reduced so that the
representation of a measure is unique.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from . import kernels
from .errors import EmptyGrid, LevelMismatch, MixedDepths, NonLatticeDelta, ParseError
from .samplers.pmf import char_m, dirichlet
from .scales import lattice_point

_I64_SAFE = 1 << 62


def _lexsort_rows(points):
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.lexsort(points.T[::-1])


def _sum_by_group(inverse, num, n_groups):
    num = np.asarray(num, dtype=object)
    small = len(num) == 0 or max(abs(int(v)) for v in (num.max(), num.min())) * len(num) < _I64_SAFE
    out = np.zeros(n_groups, dtype=np.int64 if small else object)
    np.add.at(out, inverse, num.astype(np.int64) if small else num)
    return out.astype(object)


class DiscreteMeasure:
    __slots__ = ("d", "scale", "level", "points", "num", "den", "_fw")

    def __init__(self, d, scale, level, points, num, den):
        self.d = int(d)
        self.scale = int(scale)
        self.level = int(level)
        self.points = points
        self.num = num
        self.den = int(den)
        self._fw = None

    @classmethod
    def from_atoms(cls, d, scale, level, points, num, den):
        """Aggregate repeated points, drop zero masses, sort and reduce."""
        pts = np.asarray(points, dtype=np.int64).reshape(-1, d)
        num = np.asarray(num, dtype=object).reshape(-1)
        if len(pts):
            uniq, inv = np.unique(pts, axis=0, return_inverse=True)
            tot = _sum_by_group(inv.reshape(-1), num, len(uniq))
        else:
            uniq, tot = pts, num
        keep = np.array([v != 0 for v in tot], dtype=bool)
        uniq, tot = uniq[keep], tot[keep]
        if any(v < 0 for v in tot):
            raise ValueError("negative mass")
        g = gcd(int(den), *[int(v) for v in tot]) if len(tot) else int(den)
        tot = np.array([int(v) // g for v in tot], dtype=object)
        order = _lexsort_rows(uniq)
        return cls(d, scale, level, np.ascontiguousarray(uniq[order]), tot[order], int(den) // g)

    @classmethod
    def from_fractions(cls, d, scale, level, mapping):
        items = list(mapping.items())
        D = 1
        for _, m in items:
            D = lcm(D, Fraction(m).denominator)
        pts = [p for p, _ in items]
        num = [Fraction(m).numerator * (D // Fraction(m).denominator) for _, m in items]
        return cls.from_atoms(d, scale, level, np.array(pts, dtype=np.int64).reshape(-1, d), num, D)

    @classmethod
    def dirac(cls, d, scale=1, level=0, point=None):
        pt = np.zeros((1, d), dtype=np.int64) if point is None else np.array([point], dtype=np.int64)
        return cls(d, scale, level, pt, np.array([1], dtype=object), 1)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return (self.d == other.d and self.scale == other.scale and self.den == other.den
                and np.array_equal(self.points, other.points)
                and all(int(a) == int(b) for a, b in zip(self.num, other.num))
                and len(self.num) == len(other.num))

    def __repr__(self):
        return f"DiscreteMeasure(d={self.d}, level={self.level}, scale={self.scale}, atoms={len(self)})"

    @property
    def total_mass(self):
        return Fraction(int(sum(int(v) for v in self.num)), self.den)

    @property
    def is_probability(self):
        return self.total_mass == 1

    def masses(self):
        return [Fraction(int(v), self.den) for v in self.num]

    def atoms(self):
        return {tuple(int(v) for v in p): Fraction(int(m), self.den) for p, m in zip(self.points, self.num)}

    def mass_at(self, point):
        return self.atoms().get(tuple(int(v) for v in point), Fraction(0))

    def float_weights(self):
        if self._fw is None:
            self._fw = np.array([int(v) / self.den for v in self.num], dtype=np.float64)
        return self._fw

    def int_weights(self):
        """Numerators as int64 when their sum fits, else None."""
        total = sum(int(v) for v in self.num)
        if total >= _I64_SAFE:
            return None
        return np.array([int(v) for v in self.num], dtype=np.int64)

    def coordinates(self):
        """Atom locations as floats."""
        return self.points / float(self.scale)

    def restrict(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return DiscreteMeasure.from_atoms(self.d, self.scale, self.level, self.points[mask],
                                          self.num[mask], self.den)

    def rescaled(self, new_scale):
        """Same measure on the finer lattice (1/new_scale) Z^d; new_scale must be a multiple."""
        if new_scale % self.scale:
            raise LevelMismatch(f"scale {new_scale} is not a multiple of {self.scale}")
        f = new_scale // self.scale
        return DiscreteMeasure(self.d, new_scale, self.level, self.points * f, self.num, self.den)

    def scaled_by(self, factor):
        """Push-forward by x -> factor * x with rational factor, keeping integer atoms."""
        factor = Fraction(factor)
        new_scale = self.scale * factor.denominator
        return DiscreteMeasure(self.d, new_scale, self.level, self.points * factor.numerator,
                               self.num, self.den).canonical()

    def translated(self, shift):
        """Push-forward by x -> x + shift with a rational shift vector."""
        shift = [Fraction(s) for s in shift]
        D = 1
        for s in shift:
            D = lcm(D, s.denominator)
        new_scale = lcm(self.scale, D)
        f = new_scale // self.scale
        off = np.array([int(s * new_scale) for s in shift], dtype=np.int64)
        return DiscreteMeasure(self.d, new_scale, self.level, self.points * f + off, self.num, self.den)

    def canonical(self):
        """Reduce the lattice scale by any common factor of all coordinates."""
        g = self.scale
        for v in np.unique(np.abs(self.points)):
            g = gcd(g, int(v))
            if g == 1:
                return self
        return DiscreteMeasure(self.d, self.scale // g, self.level, self.points // g, self.num, self.den)

    def scaled_mass(self, factor):
        factor = Fraction(factor)
        return DiscreteMeasure.from_atoms(self.d, self.scale, self.level, self.points,
                                          [int(v) * factor.numerator for v in self.num],
                                          self.den * factor.denominator)


def measure_from_leaves(scales, leaf_set):
    leaves = leaf_set.leaves
    depths = {len(w) for w, _ in leaves}
    if len(depths) > 1:
        raise MixedDepths(f"leaves have depths {sorted(depths)}")
    n = depths.pop() if depths else 0
    acc = {}
    for w, m in leaves:
        a = lattice_point(scales, w)
        acc[a] = acc.get(a, Fraction(0)) + m
    return DiscreteMeasure.from_fractions(scales.d, scales.MM[n], n, acc)


def convolve(mu, nu):
    if mu.d != nu.d or mu.scale != nu.scale:
        raise LevelMismatch(f"cannot convolve scale {mu.scale} with scale {nu.scale}")
    ii, jj = np.meshgrid(np.arange(len(mu)), np.arange(len(nu)), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    pts = mu.points[ii] + nu.points[jj]
    num = mu.num[ii] * nu.num[jj]
    return DiscreteMeasure.from_atoms(mu.d, mu.scale, max(mu.level, nu.level), pts, num, mu.den * nu.den)


def fourier_eval(mu, xi):
    """mu^(xi) = sum_a m_a exp(-2 pi i (a/scale).xi); xi of shape (d,) or (J, d)."""
    xi = np.asarray(xi, dtype=np.float64)
    single = xi.ndim == 1
    xi2 = np.ascontiguousarray(xi.reshape(-1, mu.d))
    out = kernels.exp_sum(np.ascontiguousarray(mu.points), mu.float_weights(), 1.0 / mu.scale, xi2)
    return complex(out[0]) if single else out


def fourier_grid(mu, K, period):
    """mu^ at every xi in (1/K) Z^d cap [0, period)^d, as an array of shape (K*period,)*d.

    Requires scale | period, so that each atom sits on a DFT bin.
    """
    if period % mu.scale:
        raise LevelMismatch(f"period {period} is not a multiple of scale {mu.scale}")
    N = K * period
    f = period // mu.scale
    arr = np.zeros((N,) * mu.d, dtype=np.complex128)
    idx = np.mod(mu.points * f, N)
    np.add.at(arr, tuple(idx.T), mu.float_weights())
    return np.fft.fftn(arr)


@dataclass(frozen=True)
class KernelPhi:
    r: int
    d: int


def phi_hat(kernel, xi):
    """((1 - e^{-2 pi i t}) / (2 pi i t))^r multiplied over coordinates, 1 at t = 0."""
    xi = np.asarray(xi, dtype=np.float64)
    per = np.exp(-1j * np.pi * xi) * np.sinc(xi)
    return np.prod(per ** kernel.r, axis=-1)


def phi_hat_scaled(kernel, scales, n, xi):
    return phi_hat(kernel, np.asarray(xi, dtype=np.float64) / scales.MM[n])


def _rational_vector(x):
    fr = [Fraction(v) for v in x]
    D = 1
    for f in fr:
        D = lcm(D, f.denominator)
    return [int(f * D) for f in fr], D


def ball_masses(mu, centers, center_den, rho2):
    """Exact masses of open balls B(c/center_den, sqrt(rho2)) for integer rows c of `centers`."""
    rho2 = Fraction(rho2)
    centers = np.asarray(centers, dtype=object).reshape(-1, mu.d)
    cd = int(center_den)
    P, Q = rho2.numerator, rho2.denominator
    rhs = P * (mu.scale * cd) ** 2
    pmax = int(np.abs(mu.points).max()) if len(mu) else 0
    cmax = max((abs(int(v)) for v in centers.ravel()), default=0)
    bound = pmax * cd + cmax * mu.scale
    w = mu.int_weights()
    fits = (w is not None and rhs < _I64_SAFE and Q * mu.d * bound * bound < _I64_SAFE)
    if fits:
        sums = kernels.ball_sums(np.ascontiguousarray(mu.points * cd),
                                 w, np.ascontiguousarray((centers * mu.scale).astype(np.int64)),
                                 int(Q), int(rhs))
        return [Fraction(int(s), mu.den) for s in sums]
    # float distances settle all but near-boundary atoms; those are decided exactly
    unit = float(mu.scale * cd)
    fpts = mu.points.astype(np.float64) * cd / unit
    frho2 = float(rho2)
    out = []
    for c in centers:
        fc = np.array([float(int(v)) for v in c]) / cd
        s = ((fpts - fc) ** 2).sum(axis=1)
        inside = s < frho2 * (1 - 1e-9)
        unsure = np.flatnonzero(~inside & (s <= frho2 * (1 + 1e-9)))
        total = sum(int(v) for v in mu.num[inside])
        ci = np.array([int(v) * mu.scale for v in c], dtype=object)
        for i in unsure:
            diff = mu.points[i].astype(object) * cd - ci
            if Q * int((diff * diff).sum()) < rhs:
                total += int(mu.num[i])
        out.append(Fraction(total, mu.den))
    return out


def ball_mass(mu, x, rho=None, rho2=None):
    """mu(B(x, rho)) for the open Euclidean ball, exact; give rho or its square rho2."""
    if rho2 is None:
        rho2 = Fraction(rho) ** 2
    c, D = _rational_vector(x)
    return ball_masses(mu, [c], D, rho2)[0]


def increment_D(mu_n, mu_prev, scales, n, xi):
    """mu_n^(xi) - m_n(xi / MM_n) mu_{n-1}^(xi)."""
    if mu_n.scale != scales.MM[n] or mu_prev.scale != scales.MM[n - 1]:
        raise LevelMismatch(f"measures are not at levels {n} and {n - 1}")
    xi = np.asarray(xi, dtype=np.float64)
    m = char_m(scales, n, xi / scales.MM[n])
    return fourier_eval(mu_n, xi) - m * fourier_eval(mu_prev, xi)


def increment_grid(mu_n, mu_prev, scales, n, K):
    """Increment on the net (1/K) Z^d cap [0, MM_n)^d, one FFT per measure."""
    if mu_n.scale != scales.MM[n] or mu_prev.scale != scales.MM[n - 1]:
        raise LevelMismatch(f"measures are not at levels {n} and {n - 1}")
    period = scales.MM[n]
    a = fourier_grid(mu_n, K, period)
    b = fourier_grid(mu_prev, K, period)
    N = K * period
    t = np.arange(N) / (K * float(period))
    per = dirichlet(scales.factor(n), t) ** scales.r
    m = per
    for _ in range(1, mu_n.d):
        m = np.multiply.outer(m, per)
    return a - m * b


def difference_set(points):
    pts = np.asarray(points, dtype=np.int64)
    diff = (pts[:, None, :] - pts[None, :, :]).reshape(-1, pts.shape[1])
    uniq = np.unique(diff, axis=0)
    return uniq[_lexsort_rows(uniq)]


def lattice_radius(delta, scale):
    """Integer m with delta = m / scale, or NonLatticeDelta."""
    m = Fraction(delta) * scale
    if m.denominator != 1 or m <= 0:
        raise NonLatticeDelta(f"delta={delta} is not a positive multiple of 1/{scale}")
    return int(m)


def dilate(points, lo_off, hi_off):
    """Boolean grid of integer positions c with a + lo_off <= c <= a + hi_off for some row a.

    Returns the grid and the integer vector of its origin.
    """
    pts = np.asarray(points, dtype=np.int64)
    base = pts.min(axis=0) + lo_off
    top = pts.max(axis=0) + hi_off
    w = hi_off - lo_off + 1
    grid = np.zeros(tuple(top - base + 1), dtype=np.int64)
    grid[tuple((pts + lo_off - base).T)] = 1
    for ax in range(pts.shape[1]):
        n = grid.shape[ax]
        pad = [(0, 0)] * pts.shape[1]
        pad[ax] = (w, 0)
        c = np.cumsum(np.pad(grid, pad), axis=ax)
        grid = np.take(c, np.arange(w, w + n), axis=ax) - np.take(c, np.arange(0, n), axis=ax)
        grid = (grid > 0).astype(np.int64)
    return grid.astype(bool), base


def neighborhood_volume(points, scale, delta):
    """Lebesgue measure of the union of cubes a/scale + [-delta, delta]^d, exact."""
    m = lattice_radius(delta, scale)
    pts = np.asarray(points, dtype=np.int64)
    if len(pts) == 0:
        return Fraction(0)
    d = pts.shape[1]
    if d == 1:
        a = np.unique(pts[:, 0])
        lo = a - m
        hi = a + m
        # merge sorted intervals [lo, hi]
        gaps = lo[1:] > hi[:-1]
        starts = np.concatenate([[lo[0]], lo[1:][gaps]])
        ends = np.concatenate([hi[:-1][gaps], [hi[-1]]])
        cells = int((ends - starts).sum())
    else:
        # the cube about a covers the unit cells c with a - m <= c <= a + m - 1
        occ, _ = dilate(pts, -m, m - 1)
        cells = int(occ.sum())
    return Fraction(cells, scale ** d)


def sup_inner_radius(m, d):
    """Largest k with k^2 d <= m^2: the sup-norm cube of half-width k fits in the closed Euclidean ball."""
    k = math.isqrt((m * m) // d)
    while (k + 1) ** 2 * d <= m * m:
        k += 1
    while k * k * d > m * m:
        k -= 1
    return k


class CubeUnion:
    """Union of closed cubes c/scale + [-m/scale, m/scale]^d, queried at lattice points."""

    def __init__(self, centers, scale, m):
        self.scale = int(scale)
        self.m = int(m)
        pts = np.asarray(centers, dtype=np.int64)
        self.d = pts.shape[1]
        self.grid, self.lo = dilate(pts, -self.m, self.m)

    def contains(self, y):
        """Membership of integer points y (rows, at this union's scale)."""
        y = np.asarray(y, dtype=np.int64).reshape(-1, self.d)
        rel = y - self.lo
        ok = np.all((rel >= 0) & (rel < np.array(self.grid.shape)), axis=1)
        out = np.zeros(len(y), dtype=bool)
        out[ok] = self.grid[tuple(rel[ok].T)]
        return out


def measure_conv_indicator(mu, indicator, x_points):
    """(mu * 1_A)(x) = sum_a m_a 1_A(x - a) for lattice points x at the indicator's scale."""
    if indicator.scale % mu.scale:
        raise LevelMismatch("indicator lattice must refine the measure lattice")
    f = indicator.scale // mu.scale
    atoms = mu.points * f
    w = mu.masses()
    out = []
    for x in np.asarray(x_points, dtype=np.int64).reshape(-1, mu.d):
        inside = indicator.contains(x[None, :] - atoms)
        out.append(sum((wi for wi, b in zip(w, inside) if b), Fraction(0)))
    return out


def grid_points(lo, hi, h):
    """Regular grid lo + h k inside the box [lo, hi]^d, with integer-free float coordinates."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    axes = [np.arange(a, b + 1e-12, h) for a, b in zip(lo, hi)]
    if any(len(a) == 0 for a in axes):
        raise EmptyGrid("grid box contains no points")
    return np.array(np.meshgrid(*axes, indexing="ij")).reshape(len(axes), -1).T


def grid_lp_norm(values, h, d, p):
    v = np.abs(np.asarray(values, dtype=np.float64)).ravel()
    if v.size == 0:
        raise EmptyGrid("no grid values")
    if p == math.inf:
        return float(v.max())
    return float((np.sum(v ** p) * h ** d) ** (1.0 / p))


def dump_measure(mu):
    lines = [f"{mu.d} {mu.level} {mu.scale}"]
    for p, m in zip(mu.points, mu.num):
        f = Fraction(int(m), mu.den)
        lines.append(" ".join(str(int(v)) for v in p) + f" {f.numerator} {f.denominator}")
    return "\n".join(lines) + "\n"


def load_measure(text):
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ParseError("empty measure file")
    try:
        d, level, scale = (int(v) for v in rows[0])
    except ValueError as exc:
        raise ParseError(f"bad header: {' '.join(rows[0])}") from exc
    if d < 1 or scale < 1:
        raise ParseError("header must give d >= 1 and scale >= 1")
    pts, fr = [], []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != d + 2:
            raise ParseError(f"line {i}: expected {d + 2} fields, got {len(row)}")
        try:
            vals = [int(v) for v in row]
        except ValueError as exc:
            raise ParseError(f"line {i}: non-integer field") from exc
        if vals[-1] <= 0 or vals[-2] <= 0:
            raise ParseError(f"line {i}: mass must be a positive fraction")
        pts.append(vals[:d])
        fr.append(Fraction(vals[-2], vals[-1]))
    D = 1
    for f in fr:
        D = lcm(D, f.denominator)
    num = [f.numerator * (D // f.denominator) for f in fr]
    mu = DiscreteMeasure.from_atoms(d, scale, level, np.array(pts, dtype=np.int64).reshape(-1, d), num, D)
    if len(mu) != len(pts):
        raise ParseError("repeated atom")
    return mu
