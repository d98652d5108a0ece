"""Convolution factorization mu = grid * random.

The grid factor places M~_n^d equally spaced digits Q_n apart.  The random
factor draws, per node, a T_n-subset of the order-r digit box that is sparse
for b_n-blocks and for q_n-blocks taken modulo Q_n; the draw comes from an
exact convex decomposition of T_n p_n.  Because the grid lives in Q_n Z^d and
the random set separates residues, each combined offspring set is the
bijective sumset of the two.
"""
from dataclasses import dataclass, field
import numpy as np

from ..errors import DegenerateParameters, DivisibilityViolated, InfeasibleMarginals
from ..exact import ceil_scaled_power, floor_scaled_power
from ..measures import convolve, difference_set
from ..rng import node_rng
from ..samplers.blocks import (cell_labels, digit_box, is_block_sparse, modular, plain,
                               residue_separated_sum)
from ..samplers.pmf import pmf
from ..samplers.twopartition import two_partition_decompose, two_partition_draw
from ..scales import make_scales
from .presets import resolve_overrides
from .salem import build_salem
from .tree import grow


@dataclass(frozen=True)
class FactorLevel:
    M: int
    grid_side: int
    q: int
    Q: int
    T: int
    b: int


def factor_levels(params, M_list, coefs):
    d, r, a, b = params.d, params.r, params.alpha, params.beta
    out = []
    for n, M in enumerate(M_list, start=1):
        grid_side = ceil_scaled_power(coefs["mt_coef"], M, (a - b) / d)
        q = floor_scaled_power(coefs["q_coef"], M, 1 - a / d)
        Q = q * floor_scaled_power(coefs["Q_coef"], M, b / d)
        T = ceil_scaled_power(coefs["T_coef"], M, b)
        bs = floor_scaled_power(coefs["b_coef"], M, 1 - b / d)
        lev = FactorLevel(M, grid_side, q, Q, T, bs)
        for name in ("grid_side", "q", "Q", "T", "b"):
            if getattr(lev, name) < 1:
                raise DegenerateParameters(
                    f"level {n}: derived {name} = {getattr(lev, name)} < 1 at M_n = {M}")
        if Q % q:
            raise DivisibilityViolated(f"level {n}: q = {q} does not divide Q = {Q}")
        if grid_side * Q >= M:
            raise DegenerateParameters(
                f"level {n}: grid reach {grid_side} * {Q} is not below M_n = {M}")
        if T > (r * (M - 1) + 1) ** d:
            raise DegenerateParameters(f"level {n}: T = {T} exceeds the digit box")
        out.append(lev)
    return out


def factor_schedule(params, coefs):
    if params.schedule:
        return list(params.schedule[:params.depth])
    M0 = int(coefs["M0"])
    return [M0 + n for n in range(1, params.depth + 1)]


@dataclass
class RandomLevel:
    """Per-level ground set, partitions and the exact decomposition of T p_n."""
    ground: np.ndarray
    b_labels: np.ndarray
    r_labels: np.ndarray
    dist: object


def random_level(scales, n, lev):
    d, r = scales.d, scales.r
    P = pmf(scales, n)
    ground, nums, den = P.table()
    b_lab = cell_labels(ground, plain(lev.b))
    r_lab = cell_labels(ground, modular(lev.q, lev.Q))
    try:
        dist = two_partition_decompose(ground, b_lab, r_lab, lev.T, nums, den)
    except InfeasibleMarginals as exc:
        raise DegenerateParameters(f"level {n}: two-partition sampling infeasible ({exc})") from exc
    return RandomLevel(ground, b_lab, r_lab, dist)


def grid_digits(lev, d):
    return lev.Q * digit_box(lev.grid_side, 1, d)


@dataclass
class FactorizedMeasure:
    params: object
    scales: object
    levels: tuple
    grid_tree: object
    random_tree: object
    combined_tree: object
    pair_index: list
    shortcut: bool = False
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

    def grid_support(self, n):
        return self.grid_measure(n).points

    def difference_bound(self, n):
        """prod_k (2 M~_k)^d, the cap on #(E_n - E_n)."""
        out = 1
        for lev in self.levels[:n]:
            out *= (2 * lev.grid_side) ** self.scales.d
        return out

    def difference_count(self, n):
        return len(difference_set(self.grid_support(n)))

    def factorization_holds(self, n):
        return convolve(self.grid_measure(n), self.random_measure(n)) == self.measure(n)

    def combined_sparsity(self):
        """First (level, word, pair) whose combined offspring set fails q_n-sparsity, or None."""
        if self.shortcut:
            return None
        for word, kids in self.combined_tree.assignment.children.items():
            lev = self.levels[len(word)]
            pts = np.asarray(kids, dtype=np.int64)
            if not is_block_sparse(pts, plain(lev.q)):
                return len(word) + 1, word
        return None

    def metadata(self):
        return {
            "scales": list(self.scales.M),
            "shortcut": self.shortcut,
            "levels": [lev.__dict__ for lev in self.levels],
        }


def combine_trees(scales, grids, random_tree, q_list, Q_list):
    """Offspring tree of grid * random, with every offspring set a certified bijective sumset.

    Returns the tree and, per level, a map from combined word to (grid word, random word).
    """
    pairs = [{(): ((), ())}]

    def children(n, word):
        if len(pairs) == n:
            pairs.append({})
        gw, rw = pairs[n - 1][word]
        grid = grids[n - 1]
        rk = np.asarray(random_tree.assignment.children[rw], dtype=np.int64)
        sums, idx = residue_separated_sum(grid, rk, q_list[n - 1], Q_list[n - 1])
        table = pairs[n]
        for s, (i, j) in zip(sums, idx):
            table[word + (tuple(int(v) for v in s),)] = (
                gw + (tuple(int(v) for v in grid[i]),),
                rw + (tuple(int(v) for v in rk[j]),))
        return sums

    tree = grow(scales, scales.r + 1, scales.depth, children)
    return tree, pairs


def _dirac_tree(scales, depth):
    d = scales.d
    return grow(scales, 1, depth, lambda n, w: np.zeros((1, d), dtype=np.int64))


def build_geometric_factorization(params):
    """Grid factor, random factor and their convolution up to params.depth."""
    d, r = params.d, params.r
    coefs = resolve_overrides(params, "geo-factorization")
    if params.alpha == params.beta:
        fam = build_salem(params, exponent=params.beta, tag="bar")
        grid = _dirac_tree(fam.scales, fam.depth)
        return FactorizedMeasure(params, fam.scales, (), grid, fam.tree, fam.tree, [], shortcut=True)
    M_list = factor_schedule(params, coefs)
    scales = make_scales(d, r, M_list)
    levels = tuple(factor_levels(params, M_list, coefs))
    rand = [random_level(scales, n, lev) for n, lev in enumerate(levels, start=1)]
    grids = [grid_digits(lev, d) for lev in levels]
    seed = params.seed

    def random_children(n, word):
        lv = rand[n - 1]
        S = two_partition_draw(lv.dist, node_rng(seed, "bar", n, word))
        return lv.ground[S]

    grid_tree = grow(scales, 1, scales.depth, lambda n, w: grids[n - 1])
    random_tree = grow(scales, r, scales.depth, random_children)

    combined, pairs = combine_trees(scales, grids, random_tree,
                                    [lev.q for lev in levels], [lev.Q for lev in levels])
    return FactorizedMeasure(params, scales, levels, grid_tree, random_tree, combined, pairs)
