"""Level-by-level growth of offspring trees with exact cumulative masses."""
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from ..measures import DiscreteMeasure
from ..scales import OffspringAssignment


@dataclass
class GrownTree:
    scales: object
    order: int
    words: list = field(default_factory=list)
    points: list = field(default_factory=list)
    masses: list = field(default_factory=list)
    assignment: OffspringAssignment = None

    @property
    def depth(self):
        return len(self.words) - 1

    def measure(self, n):
        """Truncated measure at level n: atoms at the coding points of the depth-n words."""
        ms = self.masses[n]
        den = 1
        for m in ms:
            den = lcm(den, m.denominator)
        num = [m.numerator * (den // m.denominator) for m in ms]
        return DiscreteMeasure.from_atoms(self.scales.d, self.scales.MM[n], n, self.points[n], num, den)

    def index(self, n):
        return {w: i for i, w in enumerate(self.words[n])}


def grow(scales, order, depth, children, edge_masses=None):
    """children(n, word) -> (k, d) digit array; edge_masses(n, word, kids) -> k Fractions or None."""
    d = scales.d
    tree = GrownTree(scales, order)
    tree.words.append([()])
    tree.points.append(np.zeros((1, d), dtype=np.int64))
    tree.masses.append([Fraction(1)])
    assign = OffspringAssignment(order, depth, {}, {} if edge_masses else None)
    for n in range(1, depth + 1):
        M = scales.factor(n)
        words, pts, masses = [], [], []
        for word, a, m in zip(tree.words[-1], tree.points[-1], tree.masses[-1]):
            kids = np.asarray(children(n, word), dtype=np.int64).reshape(-1, d)
            kid_tuples = tuple(tuple(int(v) for v in u) for u in kids)
            assign.children[word] = kid_tuples
            if edge_masses:
                ks = tuple(edge_masses(n, word, kids))
                assign.edge_mass[word] = ks
            else:
                ks = (Fraction(1, len(kids)),) * len(kids)
            base = a * M
            for u, k in zip(kid_tuples, ks):
                words.append(word + (u,))
                masses.append(m * k)
            pts.append(base[None, :] + kids)
        tree.words.append(words)
        tree.points.append(np.concatenate(pts, axis=0))
        tree.masses.append(masses)
    tree.assignment = assign
    return tree
