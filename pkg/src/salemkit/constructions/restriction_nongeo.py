"""Weighted sum of shrunken, replicated copies of a beta-dimensional Salem measure.

Component n (numbered from 1 + component_offset) places rho_n^d copies of sigma, each shrunk by 4^-n, on the grid
(2^n rho_n)^-1 {0..rho_n-1}^d, all translated by t_n along the first axis.
The translations keep the components' supports disjoint.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from ..errors import ScaleAlignment
from ..exact import ceil_scaled_power, dyadic_floor
from ..measures import DiscreteMeasure, fourier_eval
from .presets import resolve_overrides
from .salem import build_salem, salem_scales


def copies_per_axis(n, d, alpha, beta):
    """ceil(2^(n (2 alpha - beta) / d))."""
    return ceil_scaled_power(1, 2, n * (2 * alpha - beta) / d)


def offset(n, d):
    """t_n as a rational first coordinate: 100 d (1 - 2^(1-n))."""
    return 100 * d * (1 - Fraction(1, 2 ** (n - 1)))


def component_weight(n, beta, with_square):
    w = dyadic_floor(Fraction(2.0 ** (-float(beta) * n)), bits=48)
    return w / (n * n) if with_square else w


def box_length(n, rho, c):
    """Exact length of {t in [-c 4^n, c 4^n] : dist(2^-n t, rho Z) <= 1/4}."""
    half = c * 4 ** n
    unit = 2 ** n
    j_hi = math.floor((half / unit + Fraction(1, 4)) / rho)
    total = Fraction(0)
    for j in range(-j_hi, j_hi + 1):
        lo = max(-half, unit * (j * rho - Fraction(1, 4)))
        hi = min(half, unit * (j * rho + Fraction(1, 4)))
        if hi > lo:
            total += hi - lo
    return total


@dataclass
class NongeoLevel:
    n: int
    rho: int
    sigma_depth: int
    scale: int
    weight: Fraction


@dataclass
class NongeoRestrictionFamily:
    params: object
    sigma: object
    levels: list
    components: list
    total_weight: Fraction
    box_constant: Fraction
    transform_floor: Fraction
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def depth(self):
        return len(self.levels)

    @property
    def d(self):
        return self.params.d

    def sigma_measure(self, i):
        """Truncated sigma used by the i-th component, rescaled into [0,1]^d."""
        lev = self.levels[i - 1]
        return self.sigma.measure(lev.sigma_depth).scaled_by(Fraction(1, self.params.r))

    def sigma_transform(self, i, eta):
        return fourier_eval(self.sigma_measure(i), eta)

    def component(self, i):
        return self.components[i - 1]

    def measure(self):
        """Normalized mixture sum_n w_n nu_n / W over the built components."""
        if "mu" not in self._cache:
            S, D = 1, 1
            share = [lev.weight / self.total_weight for lev in self.levels]
            for nu, w in zip(self.components, share):
                S = lcm(S, nu.scale)
                D = lcm(D, (w / nu.den).denominator)
            pts, num = [], []
            for nu, w in zip(self.components, share):
                f = w / nu.den * D
                pts.append(nu.points * (S // nu.scale))
                num.extend(int(v) * f.numerator for v in nu.num)
            self._cache["mu"] = DiscreteMeasure.from_atoms(self.d, S, self.depth,
                                                           np.concatenate(pts), num, D)
        return self._cache["mu"]

    @property
    def measures(self):
        return list(self.components)

    def box(self, i):
        """Resonance box description: half-width c 4^n and residue condition modulo rho_n 2^n."""
        lev = self.levels[i - 1]
        n = lev.n
        return {"level": n, "c": self.box_constant, "half_width": self.box_constant * 4 ** n,
                "rho": lev.rho, "period": lev.rho * 2 ** n, "window": Fraction(2 ** n, 4)}

    def box_volume(self, i):
        lev = self.levels[i - 1]
        return box_length(lev.n, lev.rho, self.box_constant) ** self.d

    def box_samples(self, i, count, rng):
        """Samples from the resonance box of the i-th component."""
        lev = self.levels[i - 1]
        unit = 2.0 ** lev.n
        half = float(self.box_constant) * 4.0 ** lev.n
        j_hi = int(math.floor((half / unit + 0.25) / lev.rho))
        centers = np.arange(-j_hi, j_hi + 1) * lev.rho * unit
        out = np.empty((count, self.d))
        for j in range(self.d):
            c = rng.choice(centers, size=count)
            t = c + rng.uniform(-0.25 * unit, 0.25 * unit, size=count)
            out[:, j] = np.clip(t, -half, half)
        return out

    def metadata(self):
        return {
            "sigma_scales": list(self.sigma.scales.M),
            "levels": [{"n": lv.n, "rho": lv.rho, "sigma_depth": lv.sigma_depth, "scale": lv.scale,
                        "weight": str(lv.weight)} for lv in self.levels],
            "total_weight": str(self.total_weight),
            "box_constant": str(self.box_constant),
            "transform_floor": str(self.transform_floor),
            "sigma_frostman_constant": self.sigma.frostman_constant,
            "sigma_rescale": f"1/{self.params.r}",
            "frostman_factors": {"r^alpha": self.params.r ** float(self.params.alpha),
                                 "r^beta": self.params.r ** float(self.params.beta)},
        }


def sigma_depths(params, levels_needed):
    """Smallest sigma truncation k with MM_k >= 2^(3n) rho_n, for every component n."""
    d, r, beta = params.d, params.r, params.beta
    offset_levels = int(resolve_overrides(params, "salem").get("level_offset", 0))
    cap = len(params.schedule) if params.schedule else 12
    scales, _ = salem_scales(d, r, beta, cap, params.schedule, offset_levels)
    out = []
    for n, rho in levels_needed:
        target = 2 ** (3 * n) * rho
        k = next((k for k in range(1, scales.depth + 1) if scales.MM[k] >= target), None)
        if k is None:
            raise ScaleAlignment(f"component {n}: no sigma truncation reaches scale {target}")
        out.append(k)
    return out


def build_restriction_nongeometric(params):
    d, r, alpha, beta = params.d, params.r, params.alpha, params.beta
    coefs = resolve_overrides(params, "restriction-nongeo")
    with_square = "n^-2" in str(coefs.get("weight_decay", ""))
    first = int(coefs.get("component_offset", 0)) + 1
    ns = list(range(first, first + params.depth))
    rhos = [copies_per_axis(n, d, alpha, beta) for n in ns]
    ks = sigma_depths(params, list(zip(ns, rhos)))
    sigma_params = params.with_changes(construction="salem", depth=max(ks))
    sigma = build_salem(sigma_params, exponent=beta, tag="sigma")
    levels, comps = [], []
    for n, rho, k in zip(ns, rhos, ks):
        MM = sigma.scales.MM[k]
        S = lcm(4 ** n * r * MM, 2 ** n * rho, 2 ** max(n - 1, 0))
        base = sigma.measure(k)
        grid = np.array(np.meshgrid(*[np.arange(rho, dtype=np.int64)] * d, indexing="ij")).reshape(d, -1).T
        t = np.zeros(d, dtype=np.int64)
        t[0] = int(offset(n, d) * S)
        z = grid * (S // (2 ** n * rho))
        a = base.points * (S // (4 ** n * r * MM))
        pts = (t[None, None, :] + z[:, None, :] + a[None, :, :]).reshape(-1, d)
        num = np.tile(base.num, len(grid))
        nu = DiscreteMeasure.from_atoms(d, S, n, pts, num, base.den * rho ** d)
        comps.append(nu)
        levels.append(NongeoLevel(n, rho, k, S, component_weight(n, beta, with_square)))
    W = sum((lv.weight for lv in levels), Fraction(0))
    return NongeoRestrictionFamily(params, sigma, levels, comps, W,
                                   Fraction(1, 6 * d), Fraction(1, 2 ** (d + 1)))
