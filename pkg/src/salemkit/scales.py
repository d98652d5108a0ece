"""Scale sequences, digit words, coding points and offspring trees.

A word of length n is a tuple of n digits, each digit a tuple of d integers.
Its coding point X(w) = sum_k w_k / MM_k is stored exactly as the integer
lattice point MM_n * X(w).
"""
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (DepthExceedsScales, DigitOutOfRange, MissingChildren,
                     MixedDepths, NonIncreasingScales, ScaleTooSmall,
                     ValidationError)


@dataclass(frozen=True)
class ScaleSequence:
    d: int
    r: int
    M: tuple
    MM: tuple

    @property
    def depth(self):
        return len(self.M)

    def scale(self, n):
        """Prefix product MM_n (MM_0 = 1)."""
        return self.MM[n]

    def factor(self, n):
        """M_n for 1 <= n <= depth."""
        if not 1 <= n <= self.depth:
            raise DepthExceedsScales(f"level {n} outside 1..{self.depth}")
        return self.M[n - 1]

    def digit_bound(self, n, s):
        """Largest digit value s*(M_n - 1) in D_n^[s]."""
        return s * (self.factor(n) - 1)


def make_scales(d, r, M_list):
    d = int(d)
    r = int(r)
    if d < 1:
        raise ValidationError("dimension must be a positive integer")
    if r < 1:
        raise ValidationError("digit order must be a positive integer")
    M = tuple(int(m) for m in M_list)
    if not M:
        raise ValidationError("scale list is empty")
    for m in M:
        if m < 2:
            raise ScaleTooSmall(f"scale factor {m} < 2")
    for a, b in zip(M, M[1:]):
        if b <= a:
            raise NonIncreasingScales(f"scale factors must strictly increase: {a} then {b}")
    MM = [1]
    for m in M:
        MM.append(MM[-1] * m)
    return ScaleSequence(d, r, M, tuple(MM))


def default_dyadic_schedule(n0, N):
    if n0 < 1 or N < 1:
        raise ValidationError("need n0 >= 1 and N >= 1")
    return [2 ** (n0 + n) for n in range(1, N + 1)]


def telescoping_residual(scales, n, N):
    """sum_{n<k<=N} r(M_k-1)/MM_k + r/MM_N - r/MM_n; identically zero."""
    r = scales.r
    total = sum(Fraction(r * (scales.M[k - 1] - 1), scales.MM[k]) for k in range(n + 1, N + 1))
    return total + Fraction(r, scales.MM[N]) - Fraction(r, scales.MM[n])


def _check_word(scales, word, s):
    if len(word) > scales.depth:
        raise DepthExceedsScales(f"word length {len(word)} exceeds depth {scales.depth}")
    for k, digit in enumerate(word, start=1):
        if len(digit) != scales.d:
            raise DigitOutOfRange(f"digit {digit} at level {k} has wrong dimension")
        top = scales.digit_bound(k, s)
        for v in digit:
            if not 0 <= v <= top:
                raise DigitOutOfRange(f"digit {digit} at level {k} outside [0, {top}]")


def lattice_point(scales, word, s=None):
    """Integer vector MM_n * X(w) for a word of length n."""
    s = scales.r if s is None else s
    _check_word(scales, word, s)
    a = [0] * scales.d
    for k, digit in enumerate(word, start=1):
        m = scales.M[k - 1]
        a = [ai * m + ui for ai, ui in zip(a, digit)]
    return tuple(a)


def coding_point(scales, word, s=None):
    """Exact coding point X(w) together with its lattice representative MM_n * X(w)."""
    a = lattice_point(scales, word, s)
    n = len(word)
    x = tuple(Fraction(ai, scales.MM[n]) for ai in a)
    return x, a


@dataclass
class OffspringAssignment:
    """Children per node; edge masses default to uniform 1/#children.

    children maps a word (tuple of digits) to a tuple of digits.
    edge_mass, when present, maps a word to a tuple of Fractions aligned with children.
    """
    order: int
    depth: int
    children: dict = field(default_factory=dict)
    edge_mass: dict | None = None

    def masses(self, node):
        kids = self.children[node]
        if self.edge_mass is None:
            return (Fraction(1, len(kids)),) * len(kids)
        return self.edge_mass[node]

    def profile(self):
        """Per-level set of offspring counts over materialized nodes."""
        prof = {}
        for node, kids in self.children.items():
            prof.setdefault(len(node) + 1, set()).add(len(kids))
        return prof

    def validate(self):
        for node, kids in self.children.items():
            if len(set(kids)) != len(kids):
                raise ValidationError(f"repeated child digit at node {node}")
            ms = self.masses(node)
            if len(ms) != len(kids):
                raise ValidationError(f"edge masses misaligned at node {node}")
            if any(m <= 0 or m > 1 for m in ms):
                raise ValidationError(f"edge mass outside (0,1] at node {node}")
            if sum(ms) != 1:
                raise ValidationError(f"edge masses at node {node} do not sum to 1")
        return True


@dataclass(frozen=True)
class TreeLeafSet:
    depth: int
    leaves: tuple

    def total_mass(self):
        return sum((m for _, m in self.leaves), Fraction(0))


def expand_tree(scales, assignment, n):
    if n > scales.depth or n > assignment.depth:
        raise DepthExceedsScales(f"depth {n} exceeds available levels")
    frontier = [((), Fraction(1))]
    for level in range(n):
        nxt = []
        for word, mass in frontier:
            kids = assignment.children.get(word)
            if kids is None:
                raise MissingChildren(f"no children for node {word} at depth {level}")
            for u, k in zip(kids, assignment.masses(word)):
                nxt.append((word + (tuple(u),), mass * k))
        frontier = nxt
    return TreeLeafSet(n, tuple(frontier))


def max_lattice_multiplicity(scales, leaf_set):
    leaves = leaf_set.leaves if isinstance(leaf_set, TreeLeafSet) else leaf_set
    depths = {len(w) for w, _ in leaves}
    if len(depths) > 1:
        raise MixedDepths(f"leaves have depths {sorted(depths)}")
    counts = Counter(lattice_point(scales, w) for w, _ in leaves)
    return max(counts.values()) if counts else 0


def all_words(scales, n, s=None):
    """Every word of length n over D^[s] (small instances only)."""
    s = scales.r if s is None else s
    words = [()]
    d = scales.d
    for k in range(1, n + 1):
        top = scales.digit_bound(k, s)
        grid = [tuple(int(v) for v in row) for row in
                np.array(np.meshgrid(*[np.arange(top + 1)] * d, indexing="ij")).reshape(d, -1).T]
        words = [w + (u,) for w in words for u in grid]
    return words
