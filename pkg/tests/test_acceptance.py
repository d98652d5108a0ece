"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run directly (`python tests/test_acceptance.py`) for the summary alone.
"""
import hashlib
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from salemkit.analysis import (ExponentRegion, bohr_points, conv_sharpness_geometric,
                               conv_sharpness_nongeometric, increment_concentration, resonance_check,
                               wn_vn_energy)
from salemkit.analysis.fits import heavy_core_lower_mass, salem_frostman, salem_lower_mass
from salemkit.analysis.report import plain
from salemkit.analysis.suites import factorization_suite
from salemkit.constructions import ConstructionParams, build
from salemkit.constructions.heavy_core import cylinder_bound_holds
from salemkit.measures import KernelPhi, dump_measure, phi_hat_scaled
from salemkit.rng import stream
from salemkit.samplers.adregular import (ad_plan, ad_regular_sample, counting_certificate, minimal_n0,
                                         T_scale_holds)
from salemkit.samplers.pmf import char_m, dirichlet_lower_holds
from salemkit.samplers.twopartition import flow_network, two_partition_decompose
from salemkit.scales import make_scales

SEED = 20240601


def params(**kw):
    doc = {"d": 1, "r": 2, "depth": 3, "seed": SEED}
    doc.update(kw)
    return ConstructionParams.from_dict(doc)


def digest(*parts):
    h = hashlib.sha256()
    for p in parts:
        h.update(p if isinstance(p, bytes) else json.dumps(plain(p), sort_keys=True).encode())
    return h.digest()


def reports_digest(*reports):
    return digest(*[r.to_json().encode() for r in reports])


# ---------------------------------------------------------------- criteria

def refinement_identity():
    worst = 0.0
    for d, r, M in [(1, 2, [4, 8, 16, 32]), (2, 3, [4, 8, 16])]:
        s = make_scales(d, r, M)
        k = KernelPhi(r, d)
        rng = stream(SEED, "acceptance-refinement", d)
        for n in range(1, s.depth + 1):
            xi = rng.uniform(-4 * s.MM[n], 4 * s.MM[n], size=(1000, d))
            lhs = phi_hat_scaled(k, s, n - 1, xi)
            rhs = char_m(s, n, xi / s.MM[n]) * phi_hat_scaled(k, s, n, xi)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst <= 1e-10, f"max gap {worst:.2e}", None, 1


def dirichlet_lower():
    rng = stream(SEED, "acceptance-dirichlet")
    bad = []
    for N in range(2, 65):
        w = 1.0 / (2 * N)
        t = rng.integers(-50, 51, size=1000) + rng.uniform(-w, w, size=1000) * (1 - 1e-12)
        if not dirichlet_lower_holds(N, t):
            bad.append(N)
    return not bad, f"violations at N={bad}" if bad else "no violations", None, 1


def _instance(rng):
    K = int(rng.integers(8, 201))
    num = rng.integers(1, 6, size=K)
    den = int(num.sum())
    q = int(rng.integers(1, 4))
    m = int(rng.integers(max(2, K // 8), K + 1))
    b = np.arange(K) // q
    rr = rng.permutation(np.arange(K) % m)
    cell_max = max(np.bincount(b, weights=num).max(), np.bincount(rr, weights=num).max())
    T = max(1, int(den // cell_max))
    return K, b, rr, T, num, den


def two_partition_sampling():
    rng = stream(SEED, "acceptance-two-partition")
    checked, failures, blob = 0, [], []
    for i in range(50):
        K, b, rr, T, num, den = _instance(rng)
        dist = two_partition_decompose(list(range(K)), b, rr, T, [int(v) for v in num], den)
        ok = dist.marginals() == [T * Fraction(int(v), den) for v in num]
        ok &= sum(dist.weights) == 1
        ok &= len(dist.atoms) <= flow_network(dist.b_labels, dist.r_labels).n_arcs + 1
        for S in dist.atoms:
            ok &= len(S) == T and len(set(b[S])) == T and len(set(rr[S])) == T
        checked += 1
        if not ok:
            failures.append(i)
        blob.append([K, T, [list(map(int, S)) for S in dist.atoms], [str(w) for w in dist.weights]])
    return not failures, f"{checked} instances, failures {failures}", digest(blob), 30


def ad_regular_sampling():
    r = 2
    bad, runs, blob = [], 0, []
    for d in (1, 2):
        for ai, alpha in enumerate((Fraction(3, 10), Fraction(1, 2), Fraction(4, 5) * d)):
            n0 = minimal_n0(d, r, alpha)
            for n in range(n0, n0 + 4):
                M = 2 ** n
                plan = ad_plan(d, r, alpha, M)
                radii = [2 ** j for j in range(n + 1)]
                scale_ok = T_scale_holds(plan)
                for rep in range(100):
                    S = ad_regular_sample(d, r, alpha, M, stream(SEED, "acceptance-ad", d, ai, n, rep))
                    cert = counting_certificate(S, alpha, plan.C0, radii)
                    ok = scale_ok and len(np.unique(S, axis=0)) == plan.T and cert["upper_ok"] and cert["lower_ok"]
                    runs += 1
                    if not ok:
                        bad.append((d, str(alpha), n, rep))
                    blob.append(hashlib.sha256(np.ascontiguousarray(S).tobytes()).hexdigest())
    return not bad, f"{runs} realizations, failures {bad[:3]}", digest(blob), 60


def salem_frostman_lower():
    fam = build(params(construction="salem", alpha="1/2"))
    up = salem_frostman(fam, centers=1000, seed=SEED)
    low = salem_lower_mass(fam, count=100, seed=SEED)
    ok = up.passed and low.passed and bool(up.verdicts) and bool(low.verdicts)
    detail = f"C_sup={up.scalars['C_sup']:.4g} <= C={fam.frostman_constant:.4g}; lower floor exact"
    return ok, detail, reports_digest(up, low), 60


def heavy_core():
    hc = build(params(construction="heavy-core", alpha="3/10", beta="1/2"))
    reps = [heavy_core_lower_mass(hc, n) for n in range(1, hc.depth + 1)]
    cyl = cylinder_bound_holds(hc)
    ok = cyl and all(r.passed for r in reps)
    floor_verdicts = sum(1 for r in reps for v in r.verdicts if v.name == "floor")
    return ok and floor_verdicts == hc.depth, f"c={hc.c}, core floors exact at 3 levels, cylinder bound {cyl}", \
        reports_digest(*reps), 30


def geometric_factorization():
    fm = build(params(construction="geo-factorization", alpha="4/5", beta="2/5"))
    rep = factorization_suite(fm)
    names = {v.name for v in rep.verdicts}
    need = {"factorization", "combined_sparse", "difference_count"}
    return rep.passed and need <= names, "atom-exact, sparse, difference bound exact", \
        digest(rep.to_json().encode(), *[dump_measure(m).encode() for m in fm.measures]), 30


def fourier_decay_statistical():
    base = params(construction="salem", alpha="1/2", schedule=[8, 16, 32])
    fams = [build(base.with_changes(seed=SEED + i)) for i in range(32)]
    rep = increment_concentration(fams, Fraction(1, 4), B=8, slack=0.05)
    ex = [v for _, v in rep.series["exceedance"]]
    env = [v for _, v in rep.series["envelope"]]
    return rep.passed, f"exceedance {ex} vs envelope {[round(e, 4) for e in env]}", reports_digest(rep), 300


def resonance():
    bundle = build(params(construction="restriction-geo", alpha="4/5", beta="2/5", depth=2))
    bohr = bohr_points(bundle, 2)
    rep = resonance_check(bundle, 2, bohr.points)
    return rep.passed, (f"{len(bohr.points)} Bohr points, min |transform| {rep.scalars['min_abs_transform']:.4g}"
                        f" >= floor {float(rep.scalars['floor']):.4g}, rel gap {rep.scalars['max_relative_gap']:.1e}"), \
        reports_digest(rep), 30


def energy():
    bundle = build(params(construction="restriction-geo", alpha="4/5", beta="2/5", depth=2))
    reps = [wn_vn_energy(bundle, n, grid=10 ** 4) for n in (1, 2)]
    names = {v.name for r in reps for v in r.verdicts}
    ok = all(r.passed for r in reps) and {"parseval_l2", "cauchy_schwarz_floor", "window_bounds"} <= names
    return ok, "Parseval and Cauchy-Schwarz exact, 0 <= V <= W <= 1 on 10^4 points", reports_digest(*reps), 60


def sharpness_trends():
    fm = build(params(construction="geo-factorization", alpha="4/5", beta="2/5"))
    hc = build(params(construction="heavy-core", alpha="3/10", beta="1/2"))
    cases = [
        ("geometric exterior", conv_sharpness_geometric, fm, (Fraction(1), Fraction(0)), False),
        ("geometric interior", conv_sharpness_geometric, fm, (Fraction(7, 12), Fraction(5, 12)), True),
        ("nongeometric exterior", conv_sharpness_nongeometric, hc, (Fraction(19, 20), Fraction(1, 20)), False),
        ("nongeometric interior", conv_sharpness_nongeometric, hc, (Fraction(11, 20), Fraction(9, 20)), True),
    ]
    reps, notes, ok = [], [], True
    for label, fn, obj, (a, b), inside in cases:
        rep = fn(obj, a, b, seed=SEED)
        ratios = [v for _, v in rep.series["ratio"]]
        trend = next(v for v in rep.verdicts if v.name == "ratio_trend")
        good = trend.passed and rep.scalars["in_region"] == inside and len(ratios) >= 3
        ok &= good
        notes.append(f"{label} {'ok' if good else 'FAIL'} [{', '.join(f'{x:.3g}' for x in ratios)}]")
        reps.append(rep)
    return ok, "; ".join(notes), reports_digest(*reps), 300


def region_geometry():
    triples = [(Fraction(3, 10), Fraction(1, 2), 1), (Fraction(2, 5), Fraction(3, 5), 1),
               (Fraction(3, 4), Fraction(1), 2), (Fraction(1), Fraction(3, 2), 2),
               (Fraction(5, 4), Fraction(2), 3)]
    rng = stream(SEED, "acceptance-regions")
    mismatches = 0
    for t in triples:
        R = ExponentRegion.of(*t)
        for _ in range(10 ** 4):
            a = Fraction(int(rng.integers(0, 1001)), 1000)
            b = Fraction(int(rng.integers(0, 1001)), 1000)
            for reg in ("delta", "trap", "pent"):
                mismatches += R.contains(reg, a, b) != R.in_hull(reg, a, b)
    vertex_ok = all(ExponentRegion.of(d - 1, d - 1, d).C == (Fraction(d, d + 1), Fraction(1, d + 1))
                    for d in (2, 3, 4, 5))
    return mismatches == 0 and vertex_ok, f"{mismatches} mismatches over 5x10^4 points, vertex {vertex_ok}", None, 10


CRITERIA = {
    1: ("refinement identity", refinement_identity),
    2: ("Dirichlet lower bound", dirichlet_lower),
    3: ("two-partition sampling", two_partition_sampling),
    4: ("AD-regular sampling", ad_regular_sampling),
    5: ("Frostman and lower mass", salem_frostman_lower),
    6: ("heavy core", heavy_core),
    7: ("geometric factorization", geometric_factorization),
    8: ("Fourier decay statistics", fourier_decay_statistical),
    9: ("resonance", resonance),
    10: ("energy identities", energy),
    11: ("sharpness trends", sharpness_trends),
    12: ("region geometry", region_geometry),
}

ARTIFACTS = {}


def run(cid):
    name, fn = CRITERIA[cid]
    t0 = time.perf_counter()
    ok, detail, artifact, budget = fn()
    elapsed = time.perf_counter() - t0
    if artifact is not None:
        ARTIFACTS[cid] = artifact
    within = elapsed <= budget
    return ok and within, f"{name}: {detail} ({elapsed:.1f}s, budget {budget}s)"


def reproducibility():
    t0 = time.perf_counter()
    missing = [cid for cid, (_, fn) in CRITERIA.items() if cid not in ARTIFACTS]
    for cid in missing:
        run(cid)
    first = dict(ARTIFACTS)
    changed = []
    for cid in sorted(first):
        _, detail, artifact, _ = CRITERIA[cid][1]()
        if artifact != first[cid]:
            changed.append(cid)
    elapsed = time.perf_counter() - t0
    return not changed, (f"reproducibility: {len(first)} randomized runs repeated, "
                         f"differing {changed} ({elapsed:.1f}s)")


def _line(cid, ok, text):
    return f"ACCEPTANCE {cid:02d} {'PASS' if ok else 'FAIL'} {text}"


@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid, capsys):
    ok, text = run(cid)
    with capsys.disabled():
        print("\n" + _line(cid, ok, text))
    assert ok, text


def test_criterion_13_reproducibility(capsys):
    ok, text = reproducibility()
    with capsys.disabled():
        print("\n" + _line(13, ok, text))
    assert ok, text


if __name__ == "__main__":
    results = []
    for cid in sorted(CRITERIA):
        ok, text = run(cid)
        print(_line(cid, ok, text), flush=True)
        results.append(ok)
    ok, text = reproducibility()
    print(_line(13, ok, text))
    results.append(ok)
    sys.exit(0 if all(results) else 1)
