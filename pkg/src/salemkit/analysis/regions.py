"""Exponent regions in the (1/p, 1/q) square, with exact rational membership.

Each region has two independent descriptions: a list of half-planes and the
convex hull of its vertex list.  Both are evaluated in exact arithmetic so
they can be cross-checked point by point.
"""
import functools
import math
from dataclasses import dataclass
from fractions import Fraction

from ..exact import as_fraction

REGIONS = ("delta", "trap", "pent")


def _frac(x):
    return as_fraction(x)


def reciprocal(p):
    """1/p with 1/inf = 0, exact for rational p."""
    if p == math.inf or p == "inf":
        return Fraction(0)
    return 1 / _frac(p)


@dataclass(frozen=True)
class ExponentRegion:
    alpha: Fraction
    beta: Fraction
    d: int

    @classmethod
    def of(cls, alpha, beta, d):
        return cls(_frac(alpha), _frac(beta), int(d))

    @property
    def critical_p(self):
        """p_{alpha,beta} = (2(d - alpha) + beta) / ((d - alpha) + beta)."""
        g = self.d - self.alpha
        return (2 * g + self.beta) / (g + self.beta)

    @property
    def C(self):
        p = self.critical_p
        return (1 / p, 1 - 1 / p)

    @property
    def D(self):
        return ((self.d + self.beta) / (2 * self.d), Fraction(1, 2))

    @property
    def D_dual(self):
        return (Fraction(1, 2), (self.d - self.beta) / (2 * self.d))

    @property
    def q_star(self):
        return (4 * self.d - 4 * self.alpha + 2 * self.beta) / self.beta

    def restriction_threshold(self, p):
        """(2d - 2 alpha + beta) p' / beta; restriction fails for q below it."""
        inv_dual = 1 - reciprocal(p)
        if inv_dual == 0:
            return math.inf
        return (2 * self.d - 2 * self.alpha + self.beta) / (self.beta * inv_dual)

    # half-plane descriptions; (a, b) = (1/p, 1/q)

    def _delta_planes(self, alpha, a, b):
        g = self.d - alpha
        return (b <= a and self.beta + g * b >= (g + self.beta) * a
                and (g + self.beta) * b >= g * a)

    def in_delta(self, a, b):
        return _in_square(a, b) and self._delta_planes(self.alpha, _frac(a), _frac(b))

    def in_delta_beta(self, a, b):
        """Delta_{beta,beta}."""
        return _in_square(a, b) and self._delta_planes(self.beta, _frac(a), _frac(b))

    def in_trap(self, a, b):
        a, b = _frac(a), _frac(b)
        return self.in_delta_beta(a, b) and a - b <= self.beta / (2 * self.d)

    def in_pent(self, a, b):
        a, b = _frac(a), _frac(b)
        al, be, d = self.alpha, self.beta, self.d
        s = d - 2 * al + be
        return self.in_delta_beta(a, b) and al + s * b >= d * a and be - al + d * b >= s * a

    def contains(self, region, a, b):
        return {"delta": self.in_delta, "trap": self.in_trap, "pent": self.in_pent}[region](a, b)

    def contains_pq(self, region, p, q):
        return self.contains(region, reciprocal(p), reciprocal(q))

    def vertices(self, region):
        o, one = (Fraction(0), Fraction(0)), (Fraction(1), Fraction(1))
        if region == "delta":
            return [o, one, self.C]
        if region == "trap":
            return [o, one, self.D, self.D_dual]
        if region == "pent":
            return [o, one, self.D, self.D_dual, self.C]
        raise KeyError(region)

    def in_hull(self, region, a, b):
        return _in_convex_polygon(_region_hull(self, region), (_frac(a), _frac(b)))


@functools.lru_cache(maxsize=256)
def _region_hull(region_obj, region):
    return _integer_edges(tuple(convex_hull(region_obj.vertices(region))))


def _in_square(a, b):
    return 0 <= a <= 1 and 0 <= b <= 1


def _cross(o, u, v):
    return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])


def convex_hull(points):
    """Counter-clockwise hull (monotone chain), collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def hull_contains(vertices, point):
    """Closed convex hull membership, exact."""
    return _in_convex_polygon(_integer_edges(tuple(convex_hull(vertices))), point)


def _integer_edges(hull):
    """Hull with each edge as integer (u, v, w): the point (x, y) lies inside iff u x + v y + w >= 0."""
    if len(hull) < 3:
        return hull, None
    edges = []
    for i in range(len(hull)):
        p, q = hull[i], hull[(i + 1) % len(hull)]
        u, v = -(q[1] - p[1]), q[0] - p[0]
        w = -(u * p[0] + v * p[1])
        den = math.lcm(*(Fraction(c).denominator for c in (u, v, w)))
        edges.append(tuple(int(Fraction(c) * den) for c in (u, v, w)))
    return hull, tuple(edges)


def _in_convex_polygon(polygon, point):
    hull, edges = polygon
    if edges is not None:
        x, y = Fraction(point[0]), Fraction(point[1])
        den = math.lcm(x.denominator, y.denominator)
        xn, yn = x.numerator * (den // x.denominator), y.numerator * (den // y.denominator)
        return all(u * xn + v * yn + w * den >= 0 for u, v, w in edges)
    if len(hull) == 1:
        return point == hull[0]
    a, b = hull
    if _cross(a, b, point) != 0:
        return False
    return min(a, b) <= point <= max(a, b)
