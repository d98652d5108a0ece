"""Uniform random Cantor-type measures built from alpha-regular offspring clouds."""
import math
from dataclasses import dataclass, field

from ..rng import node_rng
from ..samplers.adregular import ad_constant, ad_plan, ad_regular_sample, minimal_n0
from ..scales import default_dyadic_schedule, make_scales
from .presets import resolve_overrides
from .tree import grow


@dataclass
class SalemFamily:
    params: object
    scales: object
    exponent: object
    n0: int
    plans: tuple
    tree: object
    C0: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def depth(self):
        return self.scales.depth

    @property
    def profile(self):
        return tuple(p.T for p in self.plans)

    def measure(self, n):
        if n not in self._cache:
            self._cache[n] = self.tree.measure(n)
        return self._cache[n]

    @property
    def measures(self):
        return [self.measure(n) for n in range(1, self.depth + 1)]

    @property
    def frostman_constant(self):
        """Upper constant for mu(B(x, 1/MM_k)) <= C (1/MM_k)^alpha, any k <= depth."""
        d, r, a = self.scales.d, self.scales.r, float(self.exponent)
        reach = r * math.sqrt(d) + 1
        return (r + 2) ** d * self.C0 * reach ** a / r ** d

    def lower_mass_floor(self, k):
        """Mass of any depth-k cylinder: 1 / prod_{j<=k} T_j."""
        out = 1
        for p in self.plans[:k]:
            out *= p.T
        return out

    def metadata(self):
        return {
            "scales": list(self.scales.M),
            "n0": self.n0,
            "profile": list(self.profile),
            "C0": self.C0,
            "frostman_constant": self.frostman_constant,
            "offspring": {"levels": self.depth,
                          "nodes": sum(len(w) for w in self.tree.words[:-1])},
        }


def salem_scales(d, r, exponent, depth, schedule=None, offset=0):
    n0 = minimal_n0(d, r, exponent)
    M = list(schedule) if schedule else default_dyadic_schedule(n0 + offset, depth)
    if len(M) < depth:
        raise ValueError(f"schedule has {len(M)} levels, depth {depth} requested")
    return make_scales(d, r, M[:depth]), n0


def build_salem(params, exponent=None, tag="salem", schedule=None):
    d, r = params.d, params.r
    exponent = params.alpha if exponent is None else exponent
    offset = int(resolve_overrides(params, "salem").get("level_offset", 0))
    scales, n0 = salem_scales(d, r, exponent, params.depth, schedule or params.schedule, offset)
    plans = tuple(ad_plan(d, r, exponent, scales.factor(n)) for n in range(1, scales.depth + 1))
    seed = params.seed

    def children(n, word):
        rng = node_rng(seed, tag, n, word)
        return ad_regular_sample(d, r, exponent, scales.factor(n), rng)

    tree = grow(scales, r, scales.depth, children)
    return SalemFamily(params, scales, exponent, n0, plans, tree, ad_constant(d, r, exponent)["C0"])
