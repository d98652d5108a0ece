import math
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from salemkit import _kernels_py, kernels
from salemkit.errors import EmptyGrid, LevelMismatch, MixedDepths, NonLatticeDelta, ParseError
from salemkit.measures import (CubeUnion, DiscreteMeasure, KernelPhi, ball_mass, ball_masses, convolve,
                               difference_set, dump_measure, fourier_eval, grid_lp_norm, grid_points,
                               increment_D, increment_grid, load_measure, measure_conv_indicator,
                               measure_from_leaves, neighborhood_volume, phi_hat, phi_hat_scaled,
                               sup_inner_radius)
from salemkit.samplers.pmf import char_m
from salemkit.scales import TreeLeafSet, make_scales


def uniform(points, scale=1, d=1):
    pts = np.array(points, dtype=np.int64).reshape(-1, d)
    return DiscreteMeasure.from_atoms(d, scale, 0, pts, [1] * len(pts), len(pts))


@st.composite
def measures(draw, d=1, scale=12, max_atoms=8):
    k = draw(st.integers(1, max_atoms))
    pts = draw(st.lists(st.lists(st.integers(-20, 20), min_size=d, max_size=d), min_size=k, max_size=k))
    num = draw(st.lists(st.integers(1, 9), min_size=k, max_size=k))
    return DiscreteMeasure.from_atoms(d, scale, 1, np.array(pts), num, sum(num))


def test_leaves_aggregate():
    s = make_scales(1, 2, [2, 3])
    leaves = TreeLeafSet(2, ((((1,), (0,)), Fraction(1, 4)), (((0,), (3,)), Fraction(1, 4)),
                             (((0,), (0,)), Fraction(1, 2))))
    mu = measure_from_leaves(s, leaves)
    assert mu.atoms() == {(3,): Fraction(1, 2), (0,): Fraction(1, 2)}
    assert mu.total_mass == leaves.total_mass()
    with pytest.raises(MixedDepths):
        measure_from_leaves(s, TreeLeafSet(2, ((((0,),), 1), (((0,), (0,)), 1))))


def test_convolve_examples():
    mu = uniform([0, 1], scale=2)
    assert convolve(DiscreteMeasure.dirac(1, 2), mu) == mu
    assert convolve(mu, mu).masses() == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]
    with pytest.raises(LevelMismatch):
        convolve(mu, uniform([0], scale=3))


@settings(max_examples=40)
@given(measures(d=2), measures(d=2))
def test_convolution_duality_and_mass(mu, nu):
    c = convolve(mu, nu)
    assert c.total_mass == mu.total_mass * nu.total_mass
    xi = np.random.default_rng(len(mu)).uniform(-30, 30, size=(10, 2))
    assert np.allclose(fourier_eval(c, xi), fourier_eval(mu, xi) * fourier_eval(nu, xi), atol=1e-10)
    assert np.all(np.abs(fourier_eval(mu, xi)) <= float(mu.total_mass) + 1e-12)


def test_fourier_examples():
    mu = uniform([0, 1], scale=2)
    assert np.isclose(fourier_eval(mu, np.array([0.0])), 1)
    assert np.isclose(fourier_eval(DiscreteMeasure.dirac(2), np.array([3.3, -1.7])), 1)
    assert abs(fourier_eval(mu, np.array([1.0]))) < 1e-15


def test_phi_hat_and_refinement():
    k = KernelPhi(3, 2)
    assert np.isclose(phi_hat(k, np.zeros(2)), 1)
    rng = np.random.default_rng(1)
    xi = rng.uniform(-200, 200, size=(1000, 2))
    vals = np.abs(phi_hat(k, xi))
    # per-coordinate |sinc(t)| <= min(1, 1/(pi|t|))
    bound = np.prod(np.minimum(1, 1 / (np.pi * np.abs(xi))) ** 3, axis=1)
    assert np.all(vals <= bound + 1e-15)
    s = make_scales(2, 3, [4, 8, 16])
    for n in (2, 3):
        lhs = phi_hat_scaled(k, s, n - 1, xi)
        rhs = char_m(s, n, xi / s.MM[n]) * phi_hat_scaled(k, s, n, xi)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_ball_mass_examples():
    mu = uniform([0, 3, 7], scale=10)
    assert ball_mass(mu, [Fraction(1, 2)], rho=10) == 1
    assert ball_mass(mu, [Fraction(3, 10)], rho=Fraction(1, 10)) == Fraction(1, 3)
    # open ball: an atom at distance exactly rho is excluded
    assert ball_mass(mu, [0], rho=Fraction(3, 10)) == Fraction(1, 3)


@settings(max_examples=40)
@given(measures(d=2, scale=7), st.lists(st.integers(-60, 60), min_size=2, max_size=2), st.integers(1, 400))
def test_ball_mass_linear_scan(mu, c, r2num):
    rho2 = Fraction(r2num, 49)
    x = [Fraction(v, 3) for v in c]
    ref = sum((m for a, m in mu.atoms().items()
               if sum((Fraction(ai, 7) - xi) ** 2 for ai, xi in zip(a, x)) < rho2), Fraction(0))
    assert ball_mass(mu, x, rho2=rho2) == ref


def test_ball_masses_large_lattice_matches_exact():
    # coordinates this large force the exact fallback path
    big = 1 << 40
    mu = DiscreteMeasure.from_atoms(1, big, 3, np.array([[0], [big // 2], [big - 1]]), [1, 1, 1], 3)
    # atoms at distance exactly 1/2 sit on the open boundary and are excluded
    out = ball_masses(mu, [[big // 2 - 1], [0]], big, Fraction(1, 2) ** 2)
    assert out == [Fraction(2, 3), Fraction(1, 3)]


def test_increment_examples():
    s = make_scales(1, 2, [4, 8])
    mu1 = uniform([0, 3, 5], scale=4)
    mu2 = DiscreteMeasure.from_atoms(1, 32, 2, np.array([[0], [7], [24], [30], [41], [44]]), [1] * 6, 6)
    assert abs(increment_D(mu2, mu1, s, 2, np.array([0.0]))) < 1e-12
    xi = np.random.default_rng(0).uniform(-100, 100, size=(200, 1))
    D = increment_D(mu2, mu1, s, 2, xi)
    assert np.allclose(D, increment_D(mu2, mu1, s, 2, xi + 32), atol=1e-10)
    assert np.all(np.abs(D) <= 2)
    with pytest.raises(LevelMismatch):
        increment_D(mu1, mu2, s, 2, xi)


def test_increment_grid_matches_direct():
    s = make_scales(1, 2, [4, 8])
    mu1 = uniform([0, 3, 5], scale=4)
    mu2 = DiscreteMeasure.from_atoms(1, 32, 2, np.array([[0], [7], [24], [30], [41], [44]]), [1] * 6, 6)
    K = 3
    G = increment_grid(mu2, mu1, s, 2, K)
    xi = (np.arange(K * 32) / K)[:, None]
    # the DFT runs with the opposite sign convention at lattice frequencies j / K
    direct = increment_D(mu2, mu1, s, 2, xi)
    assert np.allclose(np.abs(G), np.abs(direct), atol=1e-9)


def test_neighborhood_volume_examples():
    assert neighborhood_volume([[5]], 10, Fraction(1, 10)) == Fraction(2, 10)
    assert neighborhood_volume([[5, 5]], 10, Fraction(1, 10)) == Fraction(4, 100)
    assert neighborhood_volume([[0], [10]], 10, Fraction(2, 10)) == 2 * Fraction(4, 10)
    with pytest.raises(NonLatticeDelta):
        neighborhood_volume([[0]], 10, Fraction(1, 20))


@settings(max_examples=40)
@given(st.lists(st.lists(st.integers(0, 12), min_size=2, max_size=2), min_size=1, max_size=6), st.integers(1, 3))
def test_neighborhood_volume_cell_oracle(pts, m):
    cells = set()
    for a in pts:
        for i in range(a[0] - m, a[0] + m):
            for j in range(a[1] - m, a[1] + m):
                cells.add((i, j))
    assert neighborhood_volume(pts, 5, Fraction(m, 5)) == Fraction(len(cells), 25)


def test_difference_sets():
    assert difference_set([[0]]).tolist() == [[0]]
    assert difference_set([[0], [1]]).ravel().tolist() == [-1, 0, 1]


def test_sup_inner_radius():
    assert sup_inner_radius(5, 1) == 5
    assert sup_inner_radius(5, 2) == 3
    for m in range(1, 40):
        for d in (1, 2, 3):
            k = sup_inner_radius(m, d)
            assert k * k * d <= m * m < (k + 1) ** 2 * d


def test_grid_norms():
    pts = grid_points([0], [1], 0.25)
    assert len(pts) == 5
    assert grid_lp_norm(np.ones(4), 0.25, 1, 3) == pytest.approx(1)
    assert grid_lp_norm([1, -4, 2], 0.1, 1, math.inf) == 4
    with pytest.raises(EmptyGrid):
        grid_lp_norm([], 1, 1, 2)


def test_conv_indicator_with_dirac():
    A = CubeUnion(np.array([[3], [9]]), 4, 1)
    x = np.arange(-2, 14)[:, None]
    vals = measure_conv_indicator(DiscreteMeasure.dirac(1, 4), A, x)
    assert [v == 1 for v in vals] == list(A.contains(x))


@settings(max_examples=30)
@given(measures())
def test_serialization_round_trip(mu):
    text = dump_measure(mu)
    assert load_measure(text) == mu
    assert dump_measure(load_measure(text)) == text


@pytest.mark.parametrize("text", ["", "1 0\n", "1 0 4\n1 2\n", "1 0 4\n1 -1 2\n", "1 0 4\nx 1 2\n"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        load_measure(text)


def test_backends_agree():
    rng = np.random.default_rng(4)
    pts = rng.integers(-500, 500, size=(300, 2)).astype(np.int64)
    w = rng.random(300)
    xi = rng.uniform(-20, 20, size=(50, 2))
    assert np.allclose(kernels.exp_sum(pts, w, 1 / 97, xi), _kernels_py.exp_sum(pts, w, 1 / 97, xi))
    wi = rng.integers(1, 9, size=300).astype(np.int64)
    cen = rng.integers(-500, 500, size=(40, 2)).astype(np.int64)
    assert np.array_equal(kernels.ball_sums(pts, wi, cen, 3, 90000), _kernels_py.ball_sums(pts, wi, cen, 3, 90000))


def test_pure_python_switch():
    code = "from salemkit import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, SALEMKIT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True,
                         env={k: v for k, v in os.environ.items() if k != "SALEMKIT_PURE_PYTHON"})
    assert out.stdout.strip() == "cython"
