import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from salemkit.errors import (BelowMinimumScale, DegenerateAlpha, InfeasibleMarginals,
                             ModulusNotDivisible, NotAPartition, NotDyadic, PreconditionViolated)
from salemkit.rng import node_rng, stream
from salemkit.samplers.adregular import (ad_constant, ad_plan, ad_regular_sample, ad_seed_sample,
                                         counting_certificate, fiber, minimal_n0, T_scale_holds)
from salemkit.samplers.blocks import (build_partition_blocks, digit_box, is_block_sparse, modular,
                                      plain, residue_separated_sum)
from salemkit.samplers.pmf import char_m, dirichlet, dirichlet_lower_holds, pmf
from salemkit.samplers.twopartition import (flow_network, two_partition_decompose,
                                            two_partition_draw)
from salemkit.scales import make_scales


# pmf and kernels

def test_pmf_two_uniform_bits():
    P = pmf(make_scales(1, 2, [2]), 1)
    assert [P.q(v) for v in range(3)] == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]


def test_pmf_order_one_is_uniform():
    P = pmf(make_scales(2, 1, [3]), 1)
    assert all(P.prob((a, b)) == Fraction(1, 9) for a in range(3) for b in range(3))


@given(st.integers(2, 12), st.integers(1, 4), st.integers(1, 2))
def test_pmf_normalized_and_bounded(M, r, d):
    P = pmf(make_scales(d, r, [M]), 1)
    # brute-force r-fold convolution oracle for one coordinate
    ref = {0: Fraction(1)}
    for _ in range(r):
        nxt = {}
        for v, m in ref.items():
            for y in range(M):
                nxt[v + y] = nxt.get(v + y, 0) + m / M
        ref = nxt
    assert all(P.q(v) == m for v, m in ref.items())
    assert sum(ref.values()) == 1
    pts, num, den = P.table()
    assert sum(num) == den
    assert max(num) * M ** d <= den


def test_dirichlet_values():
    assert np.allclose(dirichlet(7, 0.0), 1)
    assert abs(dirichlet(2, 0.5)) < 1e-15


@given(st.integers(1, 64), st.floats(-50, 50, allow_nan=False))
def test_dirichlet_matches_direct_sum(N, t):
    direct = np.exp(-2j * np.pi * np.arange(N) * t).sum() / N
    assert abs(dirichlet(N, t) - direct) < 1e-9


def test_dirichlet_lower_bound_grid():
    t = np.linspace(-3, 3, 20001)
    assert all(dirichlet_lower_holds(N, t) for N in range(1, 65))


def test_char_m_examples_and_direct_sum():
    s = make_scales(1, 2, [2])
    assert np.isclose(char_m(s, 1, np.array([0.0])), 1)
    assert abs(char_m(s, 1, np.array([0.5]))) < 1e-15
    s = make_scales(2, 3, [5])
    P = pmf(s, 1)
    pts, num, den = P.table()
    w = np.array([int(v) / den for v in num])
    rng = np.random.default_rng(3)
    for xi in rng.uniform(-4, 4, size=(50, 2)):
        direct = np.sum(w * np.exp(-2j * np.pi * (pts @ xi)))
        assert abs(char_m(s, 1, xi) - direct) <= 1e-12 * max(1, abs(direct))


# AD-regular sampling

def test_seed_example_fibers():
    plan = ad_plan(1, 2, Fraction(1, 2), 16)
    assert minimal_n0(1, 2, Fraction(1, 2)) == 2
    assert plan.T == 8 and 2 ** plan.key_length() == 2
    fibers = [fiber(plan, [list(bits)]) for bits in product((0, 1), repeat=plan.key_length())]
    union = np.sort(np.concatenate(fibers).ravel())
    # the fibers tile {0..15}: each point lies in exactly one, so P(a in A) = T / M
    assert np.array_equal(union, np.arange(16))
    for A in fibers:
        assert len(A) == 8
        for k in range(5):
            # dyadic cubes of side 2^k meet A in between 1 and C0 2^(k/2) points
            counts = np.bincount(A[:, 0] >> k, minlength=16 >> k)
            hit = counts[counts > 0]
            assert hit.max() <= plan.C0 * 2 ** (k / 2)


def test_ad_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(NotDyadic):
        ad_seed_sample(1, 2, Fraction(1, 2), 12, rng)
    with pytest.raises(BelowMinimumScale):
        ad_seed_sample(1, 2, Fraction(1, 2), 2, rng)
    with pytest.raises(DegenerateAlpha):
        ad_plan(1, 2, Fraction(1), 16)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(1, Fraction(3, 10)), (1, Fraction(1, 2)), (2, Fraction(1, 2)), (2, Fraction(8, 5))]),
       st.integers(0, 2), st.integers(0, 10 ** 6))
def test_ad_sample_size_and_counts(case, extra, seed):
    d, alpha = case
    r = 2
    n0 = minimal_n0(d, r, alpha)
    M = 2 ** (n0 + extra)
    plan = ad_plan(d, r, alpha, M)
    S = ad_regular_sample(d, r, alpha, M, np.random.default_rng(seed))
    assert len(np.unique(S, axis=0)) == plan.T
    assert T_scale_holds(plan)
    radii = [2 ** j for j in range(int(math.log2(M)) + 1)]
    cert = counting_certificate(S, alpha, plan.C0, radii)
    assert cert["upper_ok"] and cert["lower_ok"]


def test_shift_preserves_ball_counts():
    rng = node_rng(5, "t", 1)
    S = ad_regular_sample(1, 3, Fraction(1, 2), 32, rng)
    A = S - S.min(axis=0)
    for x, R in [(10, 4), (33.5, 7)]:
        v = int(S.min())
        assert np.sum(np.abs(S[:, 0] - x) < R) == np.sum(np.abs(A[:, 0] - (x - v)) < R)


def test_ad_marginals_monte_carlo():
    d, r, alpha, M = 1, 2, Fraction(1, 2), 16
    plan = ad_plan(d, r, alpha, M)
    P = pmf(make_scales(d, r, [M]), 1)
    draws = 10 ** 4
    rng = stream(11, "marginals")
    hits = np.zeros(r * (M - 1) + 1)
    for _ in range(draws):
        S = ad_regular_sample(d, r, alpha, M, rng)
        hits[S[:, 0]] += 1
    for u in range(len(hits)):
        p = min(1.0, plan.T * float(P.q(u)))
        se = math.sqrt(max(p * (1 - p), 1e-12) / draws)
        assert abs(hits[u] / draws - p) <= 4 * se + 1e-9


def test_ad_constant_reports_n0():
    info = ad_constant(1, 2, Fraction(1, 2))
    assert info["n0"] == 2 and info["C0"] >= info["t_scale"]


# blocks

def test_partition_blocks():
    D = np.arange(4).reshape(-1, 1)
    assert [list(c) for c in build_partition_blocks(plain(2), D)] == [[0, 1], [2, 3]]
    assert [list(c) for c in build_partition_blocks(modular(1, 2), D)] == [[0, 2], [1, 3]]
    with pytest.raises(ModulusNotDivisible):
        modular(2, 3)


@given(st.integers(1, 4), st.integers(1, 4), st.integers(2, 6), st.integers(1, 3))
def test_modular_cell_count(q, k, M, r):
    Q = q * k
    box = digit_box(M, r, 1)
    assert len(build_partition_blocks(modular(q, Q), box)) <= Q // q


def test_block_sparse_examples():
    assert is_block_sparse([[0], [2]], plain(2))
    assert not is_block_sparse([[0], [1]], plain(2))
    assert is_block_sparse([[0], [1]], modular(1, 2))


def test_residue_separated_sum():
    sums, idx = residue_separated_sum([[0], [2]], [[0], [1]], 1, 2)
    assert sums.ravel().tolist() == [0, 1, 2, 3]
    assert len({tuple(p) for p in idx.tolist()}) == 4
    sums, _ = residue_separated_sum([[0]], [[1], [5]], 1, 3)
    assert sums.ravel().tolist() == [1, 5]
    with pytest.raises(PreconditionViolated) as err:
        residue_separated_sum([[0]], [[0], [2]], 1, 2)
    assert err.value.witness == ((0,), (2,))


@settings(max_examples=40)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 4), st.data())
def test_residue_sum_is_bijective(q, k, grid, data):
    Q = q * k
    # one point per residue block class mod Q gives a sparse set
    classes = data.draw(st.lists(st.integers(0, k - 1), unique=True, min_size=1, max_size=k))
    Abar = [[c * q + data.draw(st.integers(0, q - 1)) + Q * data.draw(st.integers(0, 3))] for c in classes]
    Atil = [[Q * j * (4 + 1)] for j in range(grid)]
    sums, idx = residue_separated_sum(Atil, Abar, q, Q)
    assert len(sums) == len(Atil) * len(Abar)
    assert is_block_sparse(sums, plain(q))


# two-partition decomposition

def _check_dist(dist, K, p):
    T = dist.T
    assert sum(dist.weights) == 1 and all(w > 0 for w in dist.weights)
    assert dist.marginals() == [T * Fraction(v) for v in p]
    net = flow_network(dist.b_labels, dist.r_labels)
    assert len(dist.atoms) <= net.n_arcs + 1
    for S in dist.atoms:
        assert len(S) == T
        assert len(set(dist.b_labels[S])) == T and len(set(dist.r_labels[S])) == T


def test_forced_single_atom():
    dist = two_partition_decompose(list(range(4)), np.arange(4), np.arange(4), 4, [Fraction(1, 4)] * 4)
    assert len(dist.atoms) == 1 and list(dist.atoms[0]) == [0, 1, 2, 3]
    rng = np.random.default_rng(0)
    assert all(list(two_partition_draw(dist, rng)) == [0, 1, 2, 3] for _ in range(5))


def test_rows_and_columns():
    ground = [(0, 0), (0, 1), (1, 0), (1, 1)]
    dist = two_partition_decompose(ground, [0, 0, 1, 1], [0, 1, 0, 1], 2, [Fraction(1, 4)] * 4)
    atoms = sorted(tuple(int(i) for i in S) for S in dist.atoms)
    assert atoms == [(0, 3), (1, 2)]
    assert dist.weights == (Fraction(1, 2), Fraction(1, 2))


def test_three_point_example():
    p = [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)]
    dist = two_partition_decompose("abc", [[0], [1], [2]], [[0, 1], [2]], 2, p)
    atoms = sorted(tuple(int(i) for i in S) for S in dist.atoms)
    assert atoms == [(0, 2), (1, 2)]
    assert dist.marginals() == [Fraction(1, 2), Fraction(1, 2), 1]


def test_infeasible_and_bad_partition():
    with pytest.raises(InfeasibleMarginals):
        two_partition_decompose("abc", [0, 0, 1], [0, 1, 2], 2, [Fraction(1, 3)] * 3)
    with pytest.raises(NotAPartition):
        two_partition_decompose("abc", [[0], [0, 1], [2]], [0, 1, 2], 1, [Fraction(1, 3)] * 3)


def test_draw_frequencies():
    ground = [(0, 0), (0, 1), (1, 0), (1, 1)]
    dist = two_partition_decompose(ground, [0, 0, 1, 1], [0, 1, 0, 1], 2, [Fraction(1, 4)] * 4)
    rng = stream(2, "draws")
    n = 10 ** 4
    first = sum(int(two_partition_draw(dist, rng)[0]) == int(dist.atoms[0][0]) for _ in range(n))
    assert abs(first / n - 0.5) <= 4 * math.sqrt(0.25 / n)


@st.composite
def feasible_instance(draw):
    side = draw(st.integers(2, 5))
    q = draw(st.integers(1, 2))
    M = draw(st.integers(2, 4))
    r = draw(st.integers(1, 2))
    s = make_scales(1, r, [M])
    pts, num, den = pmf(s, 1).table()
    b = pts[:, 0] // q
    rr = pts[:, 0] % side
    # largest T keeping every block at mass <= 1/T
    mb = max(sum(int(num[i]) for i in range(len(pts)) if b[i] == c) for c in set(b))
    mr = max(sum(int(num[i]) for i in range(len(pts)) if rr[i] == c) for c in set(rr))
    T = max(1, den // max(mb, mr))
    return pts, b, rr, T, num, den


@settings(max_examples=50, deadline=None)
@given(feasible_instance())
def test_decomposition_properties(inst):
    pts, b, rr, T, num, den = inst
    dist = two_partition_decompose(pts, b, rr, T, num, den)
    _check_dist(dist, len(pts), [Fraction(int(v), den) for v in num])
