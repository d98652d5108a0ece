"""Verification suites: the checks that apply to each construction, folded into one report."""
from fractions import Fraction

import numpy as np

from ..constructions.factorization import grid_digits
from ..constructions.heavy_core import cylinder_bound_holds
from ..constructions.restriction_geo import identities_hold, light_blocks
from ..errors import EmptyBohrSet
from ..measures import fourier_eval
from ..rng import stream
from ..samplers.blocks import modular, plain
from .fits import heavy_core_lower_mass, salem_frostman, salem_lower_mass
from .fourier import fourier_decay_profile, increment_concentration
from .report import ExperimentReport
from .resonance import bohr_points, bohr_report, resonance_check, wn_vn_energy
from .sparsity import sparsity_certificate


def _suite(obj, name):
    params = obj.params
    return ExperimentReport(f"verify-{name}", params.to_dict(), params.seed)


def salem_suite(fam, centers=1000, points=100, seed=0, B=8):
    rep = _suite(fam, "salem")
    rep.merge(salem_frostman(fam, centers=centers, seed=seed), "frostman")
    rep.merge(salem_lower_mass(fam, count=points, seed=seed), "lower_mass")
    N = fam.depth
    half = Fraction(fam.exponent) / 2
    rep.merge(fourier_decay_profile(fam.measure(N), half, seed=seed), "decay")
    rep.merge(increment_concentration([fam], half, B=B), "increment")
    return rep


def heavy_core_suite(hc):
    rep = _suite(hc, "heavy-core")
    for n in range(1, hc.depth + 1):
        rep.merge(heavy_core_lower_mass(hc, n), f"core_mass[{n}]")
    rep.tolerance("exact", 0)
    rep.verdict("cylinder_bound", cylinder_bound_holds(hc), "exact",
                "every cylinder mass at most r^-dn MM_n^-alpha")
    rep.scalar("core_constant", hc.c)
    return rep


def factorization_suite(fm):
    rep = _suite(fm, "geo-factorization")
    rep.tolerance("exact", 0)
    N = fm.depth
    rep.verdict("factorization", all(fm.factorization_holds(n) for n in range(1, N + 1)), "exact",
                "grid * random equals the combined measure atom for atom")
    clash = fm.combined_sparsity()
    rep.verdict("combined_sparse", clash is None, "exact", "" if clash is None else f"node {clash}")
    counts = [(n, fm.difference_count(n)) for n in range(1, N + 1)]
    rep.add_series("difference_count", counts)
    rep.add_series("difference_bound", [(n, fm.difference_bound(n)) for n in range(1, N + 1)])
    rep.verdict("difference_count", all(c <= fm.difference_bound(n) for n, c in counts), "exact")
    if fm.levels:
        d = fm.scales.d
        grid_kinds = {n: [("Q", plain(lev.Q))] for n, lev in enumerate(fm.levels, start=1)}
        rep.merge(sparsity_certificate(fm.grid_tree, grid_kinds), "grid_sparse")
        rand_kinds = {n: [("b", plain(lev.b)), ("q mod Q", modular(lev.q, lev.Q))]
                      for n, lev in enumerate(fm.levels, start=1)}
        rep.merge(sparsity_certificate(fm.random_tree, rand_kinds), "random_sparse")
        rep.scalar("grid_sizes", [len(grid_digits(lev, d)) for lev in fm.levels])
    return rep


def restriction_geo_suite(bundle, c=Fraction(1, 2), theta=Fraction(1, 2), energy_c=Fraction(1, 4)):
    rep = _suite(bundle, "restriction-geo")
    rep.tolerance("exact", 0)
    d, r = bundle.scales.d, bundle.scales.r
    rep.verdict("identities", all(identities_hold(lev, bundle.A) for lev in bundle.levels), "exact",
                "M = A Mt Mb L q, Qb = L q, Qt = Mb Qb at every level")
    rep.scalar("light_blocks", [light_blocks(lev, d, r) for lev in bundle.levels])
    kinds = {n: [("q mod Qt", modular(lev.q, lev.Q_tilde))] for n, lev in enumerate(bundle.levels, start=1)}
    rep.merge(sparsity_certificate(bundle.random_tree, kinds), "random_sparse")
    empty = []
    for n in range(1, bundle.depth + 1):
        origin = np.zeros((1, d))
        try:
            bohr = bohr_points(bundle, n, c, theta)
            rep.merge(bohr_report(bundle, bohr), f"bohr[{n}]")
            xi = np.concatenate([origin, bohr.float_points()])
        except EmptyBohrSet:
            empty.append(n)
            xi = origin
        rep.merge(resonance_check(bundle, n, xi), f"resonance[{n}]")
        rep.merge(wn_vn_energy(bundle, n, energy_c), f"energy[{n}]")
    rep.scalar("levels_without_bohr_points", empty)
    return rep


def restriction_nongeo_suite(fam, samples=128, seed=0):
    rep = _suite(fam, "restriction-nongeo")
    rep.tolerance("box_floor", 0)
    rng = stream(seed, "verify-nongeo", fam.depth)
    floor = float(fam.transform_floor)
    mins = []
    for i, lev in enumerate(fam.levels, start=1):
        xi = fam.box_samples(i, samples, rng)
        mins.append((lev.n, float(np.abs(fourier_eval(fam.component(i), xi)).min())))
    rep.add_series("box_min_transform", mins)
    rep.verdict("box_floor", all(v >= floor for _, v in mins), "box_floor",
                f"floor={floor}")
    rep.tolerance("mass", 1e-12)
    rep.verdict("probability", fam.measure().is_probability, "mass")
    rep.merge(salem_frostman(fam.sigma, centers=200, seed=seed), "sigma_frostman")
    return rep


SUITES = {
    "salem": salem_suite,
    "heavy-core": heavy_core_suite,
    "geo-factorization": factorization_suite,
    "restriction-geo": restriction_geo_suite,
    "restriction-nongeo": restriction_nongeo_suite,
}


def run_suite(obj):
    return SUITES[obj.params.construction](obj)
