from fractions import Fraction

import numpy as np
import pytest

from salemkit.constructions import ConstructionParams, build
from salemkit.constructions.factorization import grid_digits
from salemkit.constructions.heavy_core import cylinder_bound_holds
from salemkit.constructions.restriction_geo import arithmetic_digits, identities_hold
from salemkit.constructions.restriction_nongeo import box_length, offset
from salemkit.errors import InvalidParameters, InvalidS, LambdaTooLarge, ParseError
from salemkit.measures import convolve, dump_measure, fourier_eval
from salemkit.samplers.blocks import is_block_sparse, modular
from salemkit.exact import at_least_power


def P(**kw):
    doc = {"d": 1, "r": 2, "depth": 2, "seed": 3}
    doc.update(kw)
    return ConstructionParams.from_dict(doc)


@pytest.fixture(scope="module")
def salem():
    return build(P(construction="salem", alpha="1/2", depth=3, seed=7))


@pytest.fixture(scope="module")
def heavy():
    return build(P(construction="heavy-core", alpha="3/10", beta="1/2", depth=2))


@pytest.fixture(scope="module")
def factorized():
    return build(P(construction="geo-factorization", alpha="4/5", beta="2/5"))


@pytest.fixture(scope="module")
def bundle():
    return build(P(construction="restriction-geo", alpha="4/5", beta="2/5"))


@pytest.fixture(scope="module")
def nongeo():
    return build(P(construction="restriction-nongeo", alpha="3/10", beta="1/2"))


@pytest.mark.parametrize("doc, err", [
    ({"construction": "salem", "alpha": 1}, InvalidParameters),
    ({"construction": "salem", "alpha": 0}, InvalidParameters),
    ({"construction": "heavy-core", "alpha": "3/10", "beta": "1/2", "s": "1/2"}, InvalidS),
    ({"construction": "heavy-core", "alpha": "1/5", "beta": "1/2"}, InvalidParameters),
    ({"construction": "geo-factorization", "alpha": "2/5", "beta": "4/5"}, InvalidParameters),
    ({"construction": "salem", "alpha": "1/2", "r": 1}, InvalidParameters),
    ({"construction": "nope", "alpha": "1/2"}, InvalidParameters),
])
def test_parameter_validation(doc, err):
    with pytest.raises(err):
        P(**doc)


def test_missing_key_is_parse_error():
    with pytest.raises(ParseError):
        ConstructionParams.from_dict({"construction": "salem"})


def test_params_round_trip():
    p = P(construction="heavy-core", alpha="3/10", beta="1/2", overrides={"c": "1/64"})
    assert ConstructionParams.from_dict(p.to_dict()) == p


def test_salem_profile_and_masses(salem):
    for n, mu in enumerate(salem.measures, start=1):
        assert mu.is_probability
        assert len(salem.tree.words[n]) == salem.lower_mass_floor(n)
        assert len(mu) <= len(salem.tree.words[n])
    # uniform system: every depth-k cylinder has mass 1 / prod T
    for k in range(1, 4):
        assert set(salem.tree.masses[k]) == {Fraction(1, salem.lower_mass_floor(k))}


def test_determinism(salem):
    again = build(salem.params)
    assert [dump_measure(a) for a in again.measures] == [dump_measure(b) for b in salem.measures]
    other = build(salem.params.with_changes(seed=8))
    assert other.measure(3) != salem.measure(3)


def test_heavy_core_structure(heavy):
    for n in range(1, heavy.depth + 1):
        assert 0 < heavy.lambdas[n - 1] < Fraction(1, 2)
        assert heavy.measure(n).is_probability
    for word, kids in heavy.tree.assignment.children.items():
        got = {tuple(int(v) for v in u) for u in kids}
        assert heavy.core_sets[word] <= got
        assert heavy.beta_sets[word] | heavy.core_sets[word] == got
    assert cylinder_bound_holds(heavy)


def test_heavy_core_edge_mass_normalization(heavy):
    idx = [heavy.tree.index(n) for n in range(heavy.depth + 1)]
    for n in range(1, heavy.depth + 1):
        sums = {}
        for w, m in zip(heavy.tree.words[n], heavy.tree.masses[n]):
            sums[w[:-1]] = sums.get(w[:-1], 0) + m
        for parent, total in sums.items():
            assert total == heavy.tree.masses[n - 1][idx[n - 1][parent]]


def test_heavy_core_lambda_too_large():
    with pytest.raises(LambdaTooLarge):
        build(P(construction="heavy-core", alpha="3/10", beta="1/2", overrides={"c": 100}))


def test_factorization_exact(factorized):
    fm = factorized
    for n in range(1, fm.depth + 1):
        assert convolve(fm.grid_measure(n), fm.random_measure(n)) == fm.measure(n)
        assert fm.difference_count(n) <= fm.difference_bound(n)
        xi = np.random.default_rng(n).uniform(-50, 50, size=(20, 1))
        lhs = fourier_eval(fm.measure(n), xi)
        rhs = fourier_eval(fm.grid_measure(n), xi) * fourier_eval(fm.random_measure(n), xi)
        assert np.allclose(lhs, rhs, atol=1e-10)
    assert fm.combined_sparsity() is None
    for lev in fm.levels:
        assert lev.Q % lev.q == 0
        assert len(grid_digits(lev, 1)) == lev.grid_side


def test_factorization_equal_exponents_shortcut():
    fm = build(P(construction="geo-factorization", alpha="1/2", beta="1/2"))
    assert fm.shortcut
    assert len(fm.grid_measure(2)) == 1
    assert fm.factorization_holds(2)


def test_restriction_geo_structure(bundle):
    d = 1
    for lev, H in zip(bundle.levels, bundle.fixed_sets):
        assert identities_hold(lev, bundle.A)
        assert len(H) == lev.T
        assert {tuple(u) for u in arithmetic_digits(lev, d).tolist()} <= {tuple(u) for u in H.tolist()}
        assert is_block_sparse(H, modular(lev.q, lev.Q_tilde))
    for n in range(1, bundle.depth + 1):
        # rational product oracle
        want = Fraction(1)
        for lev in bundle.levels[:n]:
            want *= Fraction(lev.arith_side, lev.T)
        assert bundle.eta(n).total_mass == want == bundle.eta_total(n)
        assert bundle.measure(n).is_probability
        test = bundle.test_measure(n)
        assert 0 < test.total_mass <= 1


def test_restriction_geo_closed_form(bundle):
    xi = np.random.default_rng(0).uniform(-1e4, 1e4, size=(200, 1))
    for n in range(1, bundle.depth + 1):
        direct = fourier_eval(bundle.grid_measure(n), xi)
        assert np.max(np.abs(direct - bundle.grid_transform(n, xi))) <= 1e-10
        res = fourier_eval(bundle.resonance_measure(n), xi)
        assert np.max(np.abs(res - bundle.resonance_transform(n, xi))) <= 1e-10


def test_nongeo_components(nongeo):
    fam = nongeo
    d = fam.d
    spans = []
    for i, nu in enumerate(fam.components, start=1):
        assert nu.is_probability
        pts = nu.points / nu.scale
        spans.append((pts[:, 0].min(), pts[:, 0].max()))
        n = fam.levels[i - 1].n
        assert pts[:, 0].min() >= float(offset(n, d)) - 1e-12
    for (lo1, hi1), (lo2, hi2) in zip(spans, spans[1:]):
        assert hi1 < lo2
    assert fam.measure().is_probability


def test_nongeo_transform_bounds(nongeo):
    fam = nongeo
    rng = np.random.default_rng(2)
    for i, lev in enumerate(fam.levels, start=1):
        xi = rng.uniform(-4.0 ** lev.n * 4, 4.0 ** lev.n * 4, size=(200, 1))
        comp = np.abs(fourier_eval(fam.component(i), xi))
        sig = np.abs(fam.sigma_transform(i, xi / 4.0 ** lev.n))
        assert np.all(comp <= sig + 1e-12)
        box = fam.box_samples(i, 200, rng)
        assert np.abs(fourier_eval(fam.component(i), box)).min() >= float(fam.transform_floor)


def test_box_length_oracle():
    # rho = 1, n = 1: the whole interval [-4c, 4c] within 1/2 of 2Z when c = 1/16
    assert box_length(1, 1, Fraction(1, 16)) == Fraction(1, 2)
    fine = 20000
    n, rho, c = 2, 3, Fraction(1, 6)
    half = c * 16
    grid = [-half + (2 * half) * (k + Fraction(1, 2)) / fine for k in range(fine)]
    hits = sum(1 for t in grid if abs(t / 4 - rho * round(t / 4 / rho)) <= Fraction(1, 4))
    assert abs(float(box_length(n, rho, c)) - float(2 * half * hits / fine)) < 1e-3
