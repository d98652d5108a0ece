"""Digit distributions and the Dirichlet kernel."""
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np


def uniform_sum_counts(M, r):
    """Number of ways to write v = y_1 + ... + y_r with y_i in {0..M-1}, for v = 0..r(M-1)."""
    counts = [1]
    for _ in range(r):
        nxt = [0] * (len(counts) + M - 1)
        run = 0
        # sliding window sum of width M
        for v in range(len(nxt)):
            if v < len(counts):
                run += counts[v]
            if v - M >= 0 and v - M < len(counts):
                run -= counts[v - M]
            nxt[v] = run
        counts = nxt
    return tuple(counts)


@dataclass(frozen=True)
class Pmf:
    """Law of Y_1 + ... + Y_r for independent uniforms on {0..M-1}^d, as exact integers over M^(rd)."""
    level: int
    r: int
    M: int
    d: int
    counts: tuple

    @property
    def coord_den(self):
        return self.M ** self.r

    @property
    def den(self):
        return self.M ** (self.r * self.d)

    def q(self, v):
        if not 0 <= v < len(self.counts):
            return Fraction(0)
        return Fraction(self.counts[v], self.coord_den)

    def prob(self, u):
        return reduce(lambda acc, v: acc * self.q(v), u, Fraction(1))

    def numerator(self, u):
        """Integer weight of u over the common denominator M^(rd)."""
        out = 1
        for v in u:
            if not 0 <= v < len(self.counts):
                return 0
            out *= self.counts[v]
        return out

    def table(self):
        """All support points (lexicographic) with integer numerators over den."""
        K = len(self.counts)
        axes = [np.arange(K, dtype=np.int64)] * self.d
        pts = np.array(np.meshgrid(*axes, indexing="ij")).reshape(self.d, -1).T
        c = np.array(self.counts, dtype=object)
        num = np.ones(len(pts), dtype=object)
        for j in range(self.d):
            num = num * c[pts[:, j]]
        return pts, num, self.den

    def max_prob(self):
        return Fraction(max(self.counts), self.coord_den) ** self.d


def pmf(scales, n):
    M = scales.factor(n)
    return Pmf(n, scales.r, M, scales.d, uniform_sum_counts(M, scales.r))


def dirichlet(N, t):
    """Normalized geometric sum (1/N) sum_{j<N} exp(-2 pi i j t), vectorized over t."""
    t = np.asarray(t, dtype=np.float64)
    x = t - np.round(t)
    s = np.sin(np.pi * x)
    small = np.abs(x) < 1e-7
    safe = np.where(small, 1.0, s)
    ratio = np.where(small, 1.0 - (np.pi * x) ** 2 * (N * N - 1) / 6.0,
                     np.sin(np.pi * N * x) / (N * safe))
    return np.exp(-1j * np.pi * (N - 1) * x) * ratio


def char_m(scales, n, xi):
    """m_n(xi) = prod_l D_{M_n}(xi_l)^r; xi has shape (..., d)."""
    xi = np.asarray(xi, dtype=np.float64)
    M = scales.factor(n)
    vals = dirichlet(M, xi) ** scales.r
    return np.prod(vals, axis=-1)


def sample_digit_sum(M, r, d, rng, size=None):
    """Draw Y_1 + ... + Y_r with Y_i uniform on {0..M-1}^d."""
    shape = (r, d) if size is None else (r, size, d)
    return rng.integers(0, M, size=shape, dtype=np.int64).sum(axis=0)


def dirichlet_lower_holds(N, t):
    """Check |D_N(t)| >= 1/2 wherever dist(t, Z) < 1/(2N)."""
    t = np.asarray(t, dtype=np.float64)
    dist = np.abs(t - np.round(t))
    mask = dist < 1.0 / (2 * N)
    return bool(np.all(np.abs(dirichlet(N, t[mask])) >= 0.5))


