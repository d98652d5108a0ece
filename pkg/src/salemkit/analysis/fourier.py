"""Fourier decay profiles and concentration of the martingale increments."""
import math
from fractions import Fraction

import numpy as np

from ..measures import DiscreteMeasure, fourier_eval, increment_grid
from ..rng import stream
from .fits import loglog_fit
from .report import ExperimentReport


def net_constant(r, d):
    """Spacing constant of the frequency net, in units of MM_n^-exponent."""
    return Fraction(1, 16 * (r + 1) * d)


def annulus_samples(d, lo, hi, count, rng):
    """`count` frequencies with lo <= |xi| < hi, uniform direction, uniform radius."""
    radius = rng.uniform(lo, hi, size=count)
    if d == 1:
        return (radius * rng.choice([-1.0, 1.0], size=count))[:, None]
    g = rng.standard_normal((count, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * radius[:, None]


def fourier_decay_profile(mu, exponent, per_annulus=64, seed=0, declared=None, max_frequency=None):
    """Per dyadic annulus 2^j <= |xi| < 2^(j+1), max and median of |xi|^exponent |mu^(xi)|.

    Frequencies stop at max_frequency, by default half the lattice scale: past it the
    transform of a lattice measure repeats.
    """
    top = mu.scale / 2 if max_frequency is None else float(max_frequency)
    rng = stream(seed, "decay-profile", mu.level)
    rep = ExperimentReport("fourier_decay_profile", {"exponent": exponent, "per_annulus": per_annulus,
                                                     "max_frequency": top}, seed)
    maxima, medians, mids = [], [], []
    j = 0
    while 2 ** j < top:
        lo, hi = 2.0 ** j, min(2.0 ** (j + 1), top)
        xi = annulus_samples(mu.d, lo, hi, per_annulus, rng)
        vals = np.linalg.norm(xi, axis=1) ** float(exponent) * np.abs(fourier_eval(mu, xi))
        maxima.append(float(vals.max()))
        medians.append(float(np.median(vals)))
        mids.append(math.sqrt(lo * hi))
        j += 1
    rep.add_series("annulus_max", enumerate(maxima))
    rep.add_series("annulus_median", enumerate(medians))
    rep.scalar("profile_max", max(maxima) if maxima else math.nan)
    rep.scalar("slope_of_max", loglog_fit(mids, maxima)["slope"])
    if declared is not None:
        rep.tolerance("declared_B", declared)
        rep.verdict("decay_bound", max(maxima) <= float(declared), "declared_B",
                    f"max={max(maxima):.4g}")
    return rep


def hoeffding_envelope(net_size, B, T_product, MM, exponent):
    """4 #net exp(-B^2 T_product MM^(-2 exponent) / 16), a bound on P(sup_net MM^exponent |D| > B)."""
    x = B * B * T_product * float(MM) ** (-2 * float(exponent)) / 16
    return 4 * net_size * math.exp(-x)


def increment_sup(family, n, exponent, net=None):
    """(MM_n^exponent * max over the net of |D_n|, max |D_n|, net size, K)."""
    scales = family.scales
    d, r = scales.d, scales.r
    MM = scales.MM[n]
    c = net_constant(r, d) if net is None else Fraction(net)
    K = max(1, math.ceil(float(MM) ** float(exponent) / float(c)))
    prev = family.measure(n - 1) if n > 1 else DiscreteMeasure.dirac(d, 1, 0)
    D = increment_grid(family.measure(n), prev, scales, n, K)
    top = float(np.abs(D).max())
    return float(MM) ** float(exponent) * top, top, (K * MM) ** d, K


def increment_concentration(families, exponent, B=8, slack=0.05, net=None, levels=None):
    """Exceedance frequency of sup_net MM_n^exponent |D_n| > B over seed replicas, per level.

    Two envelopes are reported.  The conditional one multiplies T_1..T_{n-1}, the
    number of independent parent nodes.  The verdict uses the smaller one, whose
    product also includes T_n.
    """
    fam0 = families[0]
    scales = fam0.scales
    levels = list(range(1, fam0.depth + 1)) if levels is None else list(levels)
    rep = ExperimentReport("increment_concentration",
                           {"exponent": exponent, "B": B, "replicas": len(families),
                            "net_constant": net_constant(scales.r, scales.d) if net is None else net,
                            "scales": list(scales.M)})
    rep.tolerance("envelope_slack", slack)
    rep.tolerance("mass_bound", 2)
    freq, env, env_full, worst, raw = [], [], [], [], []
    bound_ok = True
    for n in levels:
        sups = []
        for fam in families:
            s, top, size, K = increment_sup(fam, n, exponent, net)
            sups.append(s)
            bound_ok &= top <= 2 + 1e-12
        profile = fam0.profile
        T_prev = math.prod(profile[:n - 1])
        T_all = math.prod(profile[:n])
        e = hoeffding_envelope(size, B, T_prev, scales.MM[n], exponent)
        f = sum(s > B for s in sups) / len(sups)
        strict = min(1.0, hoeffding_envelope(size, B, T_all, scales.MM[n], exponent)) + slack
        freq.append(f)
        env.append(min(1.0, e) + slack)
        raw.append(e)
        env_full.append(strict)
        worst.append(max(sups))
        rep.verdict(f"level_{n}", f <= strict, "envelope_slack",
                    f"exceedance={f:.4g} envelope={strict:.4g} net={size}")
    rep.add_series("exceedance", zip(levels, freq))
    rep.add_series("envelope_conditional", zip(levels, env))
    rep.add_series("envelope_raw", zip(levels, raw))
    rep.add_series("envelope", zip(levels, env_full))
    rep.add_series("max_scaled_sup", zip(levels, worst))
    rep.verdict("increment_mass_bound", bound_ok, "mass_bound")
    return rep
