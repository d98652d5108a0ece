"""Exact convex decomposition of two-partition marginals into sparse T-subsets.

Elements u of a ground set are arcs B(u) -> R(u) of the network
source -> B-cells -> R-cells -> sink with unit capacities.  A fractional flow
y = T p of value T is written as a convex combination of integral flows of
value T (vertex peeling).  Tracking the unnormalized leftover z = W y keeps
every quantity an integer over the denominator of p, so no rational growth
occurs.  Between rounds the current integral flow is repaired along residual
paths instead of being recomputed.
"""
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from ..errors import InfeasibleMarginals, NotAPartition


@dataclass(frozen=True)
class FlowNetwork:
    n_b: int
    n_r: int
    tail: np.ndarray
    head: np.ndarray

    SOURCE = 0
    SINK = 1

    @property
    def n_nodes(self):
        return 2 + self.n_b + self.n_r

    @property
    def n_arcs(self):
        return len(self.tail)

    def u_slice(self, K):
        return slice(self.n_b, self.n_b + K)

    def is_circulation_value(self, g, T):
        """Conservation at interior nodes and flow value T."""
        bal = np.zeros(self.n_nodes, dtype=np.int64)
        np.add.at(bal, self.head, g)
        np.subtract.at(bal, self.tail, g)
        return bool(np.all(bal[2:] == 0) and bal[self.SINK] == T)


def flow_network(b_labels, r_labels):
    b = np.asarray(b_labels, dtype=np.int64)
    r = np.asarray(r_labels, dtype=np.int64)
    n_b = int(b.max()) + 1 if len(b) else 0
    n_r = int(r.max()) + 1 if len(r) else 0
    tail = np.concatenate([np.zeros(n_b, dtype=np.int64), 2 + b, 2 + n_b + np.arange(n_r)])
    head = np.concatenate([2 + np.arange(n_b), 2 + n_b + r, np.ones(n_r, dtype=np.int64)])
    return FlowNetwork(n_b, n_r, tail, head)


@dataclass(frozen=True)
class SamplingDistribution:
    ground: object
    T: int
    atoms: tuple
    weight_num: tuple
    den: int
    b_labels: np.ndarray
    r_labels: np.ndarray

    @property
    def weights(self):
        return tuple(Fraction(w, self.den) for w in self.weight_num)

    def marginals(self):
        K = len(self.b_labels)
        acc = [0] * K
        for S, w in zip(self.atoms, self.weight_num):
            for u in S:
                acc[u] += w
        return [Fraction(a, self.den) for a in acc]

    def atom_points(self, i):
        return np.asarray(self.ground)[self.atoms[i]]


def _labels(K, cells, name):
    flat = len(cells) == K and all(isinstance(c, (int, np.integer)) for c in cells)
    if flat:
        arr = np.asarray(cells, dtype=np.int64)
    else:
        arr = np.full(K, -1, dtype=np.int64)
        for i, cell in enumerate(cells):
            for u in cell:
                u = int(u)
                if not 0 <= u < K:
                    raise NotAPartition(f"{name}: index {u} outside the ground set")
                if arr[u] != -1:
                    raise NotAPartition(f"{name}: element {u} lies in two cells")
                arr[u] = i
    if len(arr) != K or np.any(arr < 0):
        raise NotAPartition(f"{name}: cells do not cover the ground set")
    _, arr = np.unique(arr, return_inverse=True)
    return arr.reshape(-1).astype(np.int64)


def _integer_masses(p, den):
    if den is not None:
        return [int(v) for v in p], int(den)
    fr = [Fraction(v) for v in p]
    D = 1
    for f in fr:
        D = lcm(D, f.denominator)
    return [f.numerator * (D // f.denominator) for f in fr], D


class _Peeler:
    def __init__(self, net, K, z, W):
        self.net = net
        self.K = K
        self.z = z
        self.W = W
        nb, nr = net.n_b, net.n_r
        self.b_of = net.tail[nb:nb + K] - 2
        self.r_of = net.head[nb:nb + K] - 2 - nb
        self.deg_b = self._group(self.b_of, nb)
        self.deg_r = self._group(self.r_of, nr)
        self.g = np.zeros(net.n_arcs, dtype=np.int64)
        self.out_arcs = [[] for _ in range(net.n_nodes)]
        self.in_arcs = [[] for _ in range(net.n_nodes)]
        for a, (x, y) in enumerate(zip(net.tail.tolist(), net.head.tolist())):
            self.out_arcs[x].append(a)
            self.in_arcs[y].append(a)
        self.tail = net.tail.tolist()
        self.head = net.head.tolist()

    def _group(self, labels, n):
        out = np.zeros(n, dtype=self.z.dtype)
        np.add.at(out, labels, self.z)
        return out

    def bounds(self):
        W = self.W
        full = np.concatenate([self.deg_b, self.z, self.deg_r])
        lo = (full == W).astype(np.int64)
        up = (full > 0).astype(np.int64)
        return lo, up

    def _path(self, src, dst, skip, lo, up):
        g = self.g
        prev = {src: None}
        queue = deque([src])
        while queue:
            x = queue.popleft()
            if x == dst:
                break
            for a in self.out_arcs[x]:
                if a != skip and g[a] < up[a]:
                    y = self.head[a]
                    if y not in prev:
                        prev[y] = (a, 1, x)
                        queue.append(y)
            for a in self.in_arcs[x]:
                if a != skip and g[a] > lo[a]:
                    y = self.tail[a]
                    if y not in prev:
                        prev[y] = (a, -1, x)
                        queue.append(y)
        if dst not in prev:
            return None
        steps = []
        y = dst
        while prev[y] is not None:
            a, sgn, x = prev[y]
            steps.append((a, sgn))
            y = x
        return steps

    def max_flow(self, T, up):
        """Augment along shortest paths from source to sink until the value reaches T."""
        lo = np.zeros_like(up)
        value = 0
        while value < T:
            steps = self._path(FlowNetwork.SOURCE, FlowNetwork.SINK, -1, lo, up)
            if steps is None:
                return value
            for a, sgn in steps:
                self.g[a] += sgn
            value += 1
        return value

    def repair(self, lo, up):
        while True:
            bad = np.flatnonzero((self.g > up) | (self.g < lo))
            if len(bad) == 0:
                return
            e = int(bad[0])
            if self.g[e] > up[e]:
                src, dst, delta = self.tail[e], self.head[e], -1
            else:
                src, dst, delta = self.head[e], self.tail[e], 1
            steps = self._path(src, dst, e, lo, up)
            if steps is None:
                raise InfeasibleMarginals("no integral flow in the current face")
            for a, sgn in steps:
                self.g[a] += sgn
            self.g[e] += delta


def two_partition_decompose(ground, B, R, T, p, den=None):
    """Convex decomposition of T p into T-subsets meeting every B-cell and R-cell at most once.

    B and R are label arrays (one cell id per element) or lists of index cells.
    p is a sequence of rationals summing to 1, or integer numerators over `den`.
    """
    K = len(ground)
    T = int(T)
    b = _labels(K, B, "B")
    r = _labels(K, R, "R")
    num, D = _integer_masses(p, den)
    if any(v < 0 for v in num) or sum(num) != D:
        raise InfeasibleMarginals("masses must be nonnegative and sum to 1")
    if not 1 <= T <= K:
        raise InfeasibleMarginals(f"target size {T} outside 1..{K}")
    big = T * D * max(K, 1) >= (1 << 62)
    z = np.array([T * v for v in num], dtype=object if big else np.int64)
    net = flow_network(b, r)
    pe = _Peeler(net, K, z, D)
    if pe.deg_b.max() > D or pe.deg_r.max() > D:
        raise InfeasibleMarginals("a block carries mass above 1/T")
    lo, up = pe.bounds()
    if pe.max_flow(T, up) < T:
        raise InfeasibleMarginals("no integral flow of value T")
    pe.repair(lo, up)
    us = net.u_slice(K)
    nb = net.n_b
    atoms = []
    weights = []
    while pe.W > 0:
        g = pe.g
        gu = g[us]
        gb = g[:nb]
        gr = g[nb + K:]
        cands = [pe.W]
        if np.any(gu == 1):
            cands.append(pe.z[gu == 1].min())
        if np.any(gu == 0):
            cands.append(pe.W - pe.z[gu == 0].max())
        if np.any(gb == 0):
            cands.append(pe.W - pe.deg_b[gb == 0].max())
        if np.any(gr == 0):
            cands.append(pe.W - pe.deg_r[gr == 0].max())
        mu = min(int(c) for c in cands)
        atoms.append(np.flatnonzero(gu == 1))
        weights.append(mu)
        pe.z = pe.z - mu * gu
        pe.deg_b = pe.deg_b - mu * gb
        pe.deg_r = pe.deg_r - mu * gr
        pe.W -= mu
        if pe.W == 0:
            break
        lo, up = pe.bounds()
        pe.repair(lo, up)
    return SamplingDistribution(ground, T, tuple(atoms), tuple(weights), D, b, r)


def _uniform_below(D, rng):
    """Uniform integer in [0, D) for arbitrary positive D."""
    if D < (1 << 62):
        return int(rng.integers(0, D))
    bits = D.bit_length()
    while True:
        v = 0
        got = 0
        while got < bits:
            v = (v << 31) | int(rng.integers(0, 1 << 31))
            got += 31
        v >>= got - bits
        if v < D:
            return v


def two_partition_draw(dist, rng):
    """Index array of one atom drawn with probability proportional to its weight."""
    u = _uniform_below(dist.den, rng)
    acc = 0
    for S, w in zip(dist.atoms, dist.weight_num):
        acc += w
        if u < acc:
            return S
    return dist.atoms[-1]
