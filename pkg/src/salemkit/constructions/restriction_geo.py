"""Grid factor convolved with a random factor that carries a thin arithmetic subtree.

Per level the integers obey M = A * Mt * Mb * L * qb, Qb = L * qb and
Qt = Mb * Qb.  The grid factor uses the digits Qt {0..Mt-1}^d.  The random
factor follows the fixed set H_n along the arithmetic subtree (digits
Qb {0..Mb-1}^d at every level) and an independent two-partition draw at every
other node.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from ..errors import (DegenerateParameters, InfeasibleMarginals, NonIncreasingScales,
                      SubtreeNotSparse)
from ..exact import ceil_scaled_power, floor_scaled_power
from ..measures import DiscreteMeasure, convolve
from ..rng import node_rng
from ..samplers.blocks import cell_labels, digit_box, is_block_sparse, modular
from ..samplers.pmf import dirichlet, pmf
from ..samplers.twopartition import two_partition_decompose, two_partition_draw
from ..scales import make_scales
from .factorization import combine_trees
from .presets import resolve_overrides
from .tree import grow


@dataclass(frozen=True)
class RestrictionLevel:
    R: int
    grid_side: int
    arith_side: int
    L: int
    q: int
    M: int
    T: int
    Q_bar: int
    Q_tilde: int


def restriction_levels(params, coefs):
    d, r, a, b = params.d, params.r, params.alpha, params.beta
    A = int(coefs["A"])
    R0, step = int(coefs["R0"]), int(coefs["R_step"])
    out = []
    for n in range(1, params.depth + 1):
        R = R0 + step * n
        grid_side = ceil_scaled_power(coefs["mt_coef"], R, (a - b) / d)
        arith_side = floor_scaled_power(coefs["mb_coef"], R, b / (2 * d))
        L = ceil_scaled_power(coefs["B"], R, b / (2 * d))
        q = floor_scaled_power(coefs["q_coef"], R, (d - a) / d)
        for name, v in (("Mt", grid_side), ("Mb", arith_side), ("L", L), ("qb", q)):
            if v < 1:
                raise DegenerateParameters(f"level {n}: derived {name} = {v} < 1 at R_n = {R}")
        M = A * grid_side * arith_side * L * q
        T = ceil_scaled_power(coefs["T_coef"], M, b)
        if T > (r * (M - 1) + 1) ** d:
            raise DegenerateParameters(f"level {n}: T = {T} exceeds the digit box")
        out.append(RestrictionLevel(R, grid_side, arith_side, L, q, M, T, L * q, arith_side * L * q))
    return out


def identities_hold(lev, A):
    return (lev.M == A * lev.grid_side * lev.arith_side * lev.L * lev.q
            and lev.Q_bar == lev.L * lev.q and lev.Q_tilde == lev.arith_side * lev.Q_bar)


def light_blocks(lev, d, r):
    """(Mb L)^d >= r^d T: every q-block class mod Qt carries p-mass at most 1/T."""
    return (lev.arith_side * lev.L) ** d >= r ** d * lev.T


def arithmetic_digits(lev, d):
    return lev.Q_bar * digit_box(lev.arith_side, 1, d)


def is_arithmetic_digit(u, lev):
    return all(v % lev.Q_bar == 0 and v // lev.Q_bar < lev.arith_side for v in u)


def fixed_offspring(lev, d, r):
    """Arithmetic digits plus the lexicographically smallest digit of each unused
    class of q-blocks mod Qt, classes taken in lexicographic order, up to T points."""
    base = arithmetic_digits(lev, d)
    box = digit_box(lev.M, r, d)
    kind = modular(lev.q, lev.Q_tilde)
    used = {tuple(int(v) for v in k) for k in kind.keys(base)}
    keys = kind.keys(box)
    first = {}
    for u, k in zip(box, keys):
        k = tuple(int(v) for v in k)
        if k not in used and k not in first:
            first[k] = u
    need = lev.T - len(base)
    if need < 0 or len(first) < need:
        raise SubtreeNotSparse(
            f"only {len(first)} free block classes for {need} extra points (T = {lev.T})")
    extra = [first[k] for k in sorted(first)[:need]]
    H = np.concatenate([base, np.array(extra, dtype=np.int64).reshape(-1, d)])
    H = H[np.lexsort(H.T[::-1])]
    if not is_block_sparse(H, kind):
        raise SubtreeNotSparse("fixed offspring set is not block sparse")
    return H


@dataclass
class RestrictionGeoBundle:
    params: object
    scales: object
    A: int
    levels: tuple
    fixed_sets: list
    grid_tree: object
    random_tree: object
    combined_tree: object
    pair_index: list
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def depth(self):
        return self.scales.depth

    def _get(self, key, n, make):
        if (key, n) not in self._cache:
            self._cache[(key, n)] = make(n)
        return self._cache[(key, n)]

    def grid_measure(self, n):
        return self._get("grid", n, self.grid_tree.measure)

    def random_measure(self, n):
        return self._get("random", n, self.random_tree.measure)

    def measure(self, n):
        return self._get("combined", n, self.combined_tree.measure)

    @property
    def measures(self):
        return [self.measure(n) for n in range(1, self.depth + 1)]

    def arithmetic_mask(self, n):
        """Depth-n combined leaves whose random-factor prefix lies in the arithmetic subtree."""
        levs = self.levels
        words = self.combined_tree.words[n]
        table = self.pair_index[n] if n else {(): ((), ())}
        out = np.zeros(len(words), dtype=bool)
        for i, w in enumerate(words):
            rw = table[w][1]
            out[i] = all(is_arithmetic_digit(u, levs[k]) for k, u in enumerate(rw))
        return out

    def _leaf_measure(self, depth, mask):
        ms = [m for m, keep in zip(self.combined_tree.masses[depth], mask) if keep]
        den = 1
        for m in ms:
            den = lcm(den, m.denominator)
        num = [m.numerator * (den // m.denominator) for m in ms]
        return DiscreteMeasure.from_atoms(self.scales.d, self.scales.MM[depth], depth,
                                          self.combined_tree.points[depth][mask], num, den)

    def test_measure(self, n):
        """Sub-measure of mu_n carried by arithmetic leaves."""
        return self._get("test", n, lambda n: self._leaf_measure(n, self.arithmetic_mask(n)))

    def prefix_test_measure(self, n, depth=None):
        """Sub-measure of mu_depth on leaves whose first n random-factor digits are arithmetic."""
        depth = self.depth if depth is None else depth
        levs = self.levels

        def make(key):
            words = self.combined_tree.words[depth]
            table = self.pair_index[depth]
            mask = np.array([all(is_arithmetic_digit(u, levs[k]) for k, u in enumerate(table[w][1][:n]))
                             for w in words], dtype=bool)
            return self._leaf_measure(depth, mask)
        return self._get("prefix_test", (n, depth), make)

    def eta(self, n):
        """Convolution over k <= n of (1/T_k) sum of unit masses at the arithmetic digits / MM_k."""
        def make(n):
            d = self.scales.d
            pts = np.zeros((1, d), dtype=np.int64)
            den = 1
            for k in range(1, n + 1):
                lev = self.levels[k - 1]
                D = arithmetic_digits(lev, d)
                pts = (pts[:, None, :] * lev.M + D[None, :, :]).reshape(-1, d)
                den *= lev.T
            return DiscreteMeasure.from_atoms(d, self.scales.MM[n], n, pts, [1] * len(pts), den)
        return self._get("eta", n, make)

    def eta_total(self, n):
        out = Fraction(1)
        for lev in self.levels[:n]:
            out *= Fraction(lev.arith_side ** self.scales.d, lev.T)
        return out

    def resonance_measure(self, n):
        return convolve(self.grid_measure(n), self.eta(n))

    def bohr_spacing(self, k):
        lev = self.levels[k - 1]
        return self.A * lev.arith_side * lev.grid_side * self.scales.MM[k - 1]

    def window_width(self, k):
        """Bohr condition at level k: dist(xi / spacing_k, Z) < 1 / (2 Mb_k Mt_k)."""
        lev = self.levels[k - 1]
        return Fraction(1, 2 * lev.arith_side * lev.grid_side)

    def grid_transform(self, n, xi):
        """Closed form of the grid factor's transform, a product of Dirichlet kernels."""
        xi = np.asarray(xi, dtype=np.float64)
        out = np.ones(xi.shape[:-1], dtype=np.complex128)
        for k in range(1, n + 1):
            lev = self.levels[k - 1]
            arg = xi / (self.A * lev.grid_side * self.scales.MM[k - 1])
            out = out * np.prod(dirichlet(lev.grid_side, arg), axis=-1)
        return out

    def resonance_transform(self, n, xi):
        """Closed form of (grid * eta)^ as a product of Dirichlet kernels of length Mb Mt."""
        xi = np.asarray(xi, dtype=np.float64)
        d = self.scales.d
        out = np.full(xi.shape[:-1], float(self.eta_total(n)), dtype=np.complex128)
        for k in range(1, n + 1):
            lev = self.levels[k - 1]
            N = lev.arith_side * lev.grid_side
            out = out * np.prod(dirichlet(N, xi / self.bohr_spacing(k)), axis=-1)
        return out

    def resonance_floor(self, n):
        """2^(-dn) prod_k Mb_k^d / T_k."""
        return Fraction(1, 2 ** (self.scales.d * n)) * self.eta_total(n)

    def metadata(self):
        d, r = self.scales.d, self.scales.r
        return {
            "scales": list(self.scales.M),
            "A": self.A,
            "levels": [dict(lev.__dict__, light_blocks=light_blocks(lev, d, r)) for lev in self.levels],
            "bohr_spacing": [self.bohr_spacing(k) for k in range(1, self.depth + 1)],
            "window_width": [str(self.window_width(k)) for k in range(1, self.depth + 1)],
            "fixed_sets": [[list(map(int, u)) for u in H] for H in self.fixed_sets],
        }


def build_restriction_geometric(params):
    d, r = params.d, params.r
    coefs = resolve_overrides(params, "restriction-geo")
    A = int(coefs["A"])
    levels = tuple(restriction_levels(params, coefs))
    try:
        scales = make_scales(d, r, [lev.M for lev in levels])
    except NonIncreasingScales as exc:
        raise DegenerateParameters(f"derived scales are not increasing: {exc}") from exc
    fixed = [fixed_offspring(lev, d, r) for lev in levels]
    dists = []
    for n, lev in enumerate(levels, start=1):
        ground, nums, den = pmf(scales, n).table()
        singles = np.arange(len(ground))
        classes = cell_labels(ground, modular(lev.q, lev.Q_tilde))
        try:
            dists.append(two_partition_decompose(ground, singles, classes, lev.T, nums, den))
        except InfeasibleMarginals as exc:
            raise DegenerateParameters(f"level {n}: two-partition sampling infeasible ({exc})") from exc
    seed = params.seed

    def random_children(n, word):
        lev = levels[n - 1]
        if all(is_arithmetic_digit(u, levels[k]) for k, u in enumerate(word)):
            # deterministic branch: consumes no randomness
            return fixed[n - 1]
        dist = dists[n - 1]
        return dist.ground[two_partition_draw(dist, node_rng(seed, "bar", n, word))]

    grids = [lev.Q_tilde * digit_box(lev.grid_side, 1, d) for lev in levels]
    grid_tree = grow(scales, 1, scales.depth, lambda n, w: grids[n - 1])
    random_tree = grow(scales, r, scales.depth, random_children)
    combined, pairs = combine_trees(scales, grids, random_tree,
                                    [lev.q for lev in levels], [lev.Q_tilde for lev in levels])
    return RestrictionGeoBundle(params, scales, A, levels, fixed, grid_tree, random_tree,
                                combined, pairs)
