"""Weighted trees whose mass concentrates on a thin core at every scale.

Each node's offspring is the union of a beta-regular cloud and an s-regular
core cloud.  The core edges carry total mass lambda_n, the rest 1 - lambda_n.
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import LambdaTooLarge
from ..exact import at_least_power, at_most_power, dyadic_ceil, dyadic_floor
from ..rng import node_rng
from ..samplers.adregular import ad_plan, ad_regular_sample, minimal_n0
from ..samplers.pmf import sample_digit_sum
from ..scales import default_dyadic_schedule, make_scales
from .presets import resolve_overrides
from .tree import grow


@dataclass
class HeavyCoreMeasure:
    params: object
    scales: object
    alpha: Fraction
    beta: Fraction
    s: Fraction
    c: Fraction
    lambdas: tuple
    beta_T: tuple
    core_T: tuple
    tree: object
    core: list
    beta_sets: dict
    core_sets: dict
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def depth(self):
        return self.scales.depth

    def measure(self, n):
        if n not in self._cache:
            self._cache[n] = self.tree.measure(n)
        return self._cache[n]

    @property
    def measures(self):
        return [self.measure(n) for n in range(1, self.depth + 1)]

    def core_points(self, n):
        """Lattice points (scale MM_n) of the depth-n core leaves."""
        return self.tree.points[n][self.core[n]]

    def core_floor(self, n):
        """c^n, the factor in front of MM_n^-alpha in the core mass bound."""
        return self.c ** n

    def metadata(self):
        return {
            "scales": list(self.scales.M),
            "c": str(self.c),
            "lambdas": [str(x) for x in self.lambdas],
            "beta_profile": list(self.beta_T),
            "core_profile": list(self.core_T),
            "core_leaves": [len(c) for c in self.core],
        }


def default_core_constant(scales, alpha, beta_T, core_T):
    """Largest dyadic c keeping lambda_n <= 1/4 and every edge mass below r^-d M_n^-alpha."""
    d, r = scales.d, scales.r
    cand = []
    for n in range(1, scales.depth + 1):
        M = scales.factor(n)
        cand.append(M ** float(alpha) / (4 * core_T[n - 1]))
        cand.append(r ** -d - M ** float(alpha) / beta_T[n - 1])
    c = dyadic_floor(min(cand) * (1 - 1e-9), bits=40)
    while c > 0 and not _core_constant_ok(scales, alpha, beta_T, core_T, c):
        c /= 2
    return c


def _core_constant_ok(scales, alpha, beta_T, core_T, c):
    d, r = scales.d, scales.r
    for n in range(1, scales.depth + 1):
        M = scales.factor(n)
        # M^alpha <= betaT (r^-d - c)
        if not at_least_power(beta_T[n - 1] * (Fraction(1, r ** d) - c), M, alpha):
            return False
        # c sT M^-alpha <= 1/4
        if not at_least_power(Fraction(1, 4) / (c * core_T[n - 1]), M, -alpha):
            return False
    return True


def core_lambda(c, sT, M, alpha):
    """Dyadic rational lambda >= c sT M^-alpha, checked exactly."""
    lam = dyadic_ceil(c * sT * float(M) ** -float(alpha) * (1 + 1e-12), bits=60)
    while not at_least_power(lam / (c * sT), M, -alpha):
        lam += Fraction(1, 1 << 60)
    return lam


def build_heavy_core(params):
    d, r = params.d, params.r
    alpha, beta = params.alpha, params.beta
    s = params.core_exponent
    n0 = minimal_n0(d, r, beta)
    if s > 0:
        n0 = max(n0, minimal_n0(d, r, s))
    offset = resolve_overrides(params, "heavy-core").get("level_offset", 0)
    if offset == "auto":
        # start the schedule at 2^7 so the core cloud is visibly thinner than the bulk
        offset = max(0, 6 - n0)
    offset = int(offset)
    M_list = list(params.schedule) if params.schedule else default_dyadic_schedule(n0 + offset, params.depth)
    scales = make_scales(d, r, M_list[:params.depth])
    N = scales.depth
    beta_T = tuple(ad_plan(d, r, beta, scales.factor(n)).T for n in range(1, N + 1))
    core_T = tuple(ad_plan(d, r, s, scales.factor(n)).T if s > 0 else 1 for n in range(1, N + 1))
    c = params.overrides.get("c")
    c = default_core_constant(scales, alpha, beta_T, core_T) if c is None else Fraction(c)
    if c <= 0:
        raise LambdaTooLarge("no positive core constant is admissible at this truncation")
    lambdas = tuple(core_lambda(c, core_T[n - 1], scales.factor(n), alpha) for n in range(1, N + 1))
    for n, lam in enumerate(lambdas, start=1):
        if not 0 < lam < Fraction(1, 2):
            raise LambdaTooLarge(f"lambda_{n} = {float(lam):.4g} is not below 1/2; lower c")
    seed = params.seed
    beta_sets, core_sets = {}, {}

    def sets(n, word):
        if word not in beta_sets:
            M = scales.factor(n)
            B = ad_regular_sample(d, r, beta, M, node_rng(seed, "beta", n, word))
            rng = node_rng(seed, "core", n, word)
            C = ad_regular_sample(d, r, s, M, rng) if s > 0 else sample_digit_sum(M, r, d, rng)[None, :]
            beta_sets[word] = {tuple(int(v) for v in u) for u in B}
            core_sets[word] = {tuple(int(v) for v in u) for u in C.reshape(-1, d)}
        return beta_sets[word], core_sets[word]

    def children(n, word):
        B, C = sets(n, word)
        return np.array(sorted(B | C), dtype=np.int64).reshape(-1, d)

    def edge_masses(n, word, kids):
        B, C = sets(n, word)
        lam = lambdas[n - 1]
        wb = (1 - lam) / beta_T[n - 1]
        wc = lam / core_T[n - 1]
        out = []
        for u in kids:
            t = tuple(int(v) for v in u)
            out.append((wb if t in B else 0) + (wc if t in C else 0))
        return out

    tree = grow(scales, r, N, children, edge_masses)
    core = [np.array([0])]
    for n in range(1, N + 1):
        parent = tree.index(n - 1)
        prev = set(core[-1].tolist())
        idx = []
        for i, w in enumerate(tree.words[n]):
            if parent[w[:-1]] in prev and w[-1] in core_sets[w[:-1]]:
                idx.append(i)
        core.append(np.array(idx, dtype=np.int64))
    return HeavyCoreMeasure(params, scales, alpha, beta, s, c, lambdas, beta_T, core_T, tree, core,
                            beta_sets, core_sets)


def cylinder_bound_holds(hc):
    """Every realized cylinder: tau([w]) <= r^(-d|w|) MM_|w|^(-alpha), exactly."""
    d, r = hc.scales.d, hc.scales.r
    for n in range(1, hc.depth + 1):
        MM = hc.scales.MM[n]
        for m in hc.tree.masses[n]:
            if not at_most_power(m * r ** (d * n), MM, -hc.alpha):
                return False
    return True
