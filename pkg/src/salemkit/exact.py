"""Exact rational helpers for comparisons involving rational powers of integers."""
import math
from fractions import Fraction


def as_fraction(x):
    """Exact rational for an int, Fraction, decimal string or float (read by its shortest repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def _cmp_pow(x, base, expo):
    """Sign of x - base**expo for x >= 0 rational, base > 0 rational, expo rational."""
    x = Fraction(x)
    base = Fraction(base)
    expo = Fraction(expo)
    if x < 0:
        return -1
    p, q = expo.numerator, expo.denominator
    lhs = x ** q
    rhs = base ** p
    return (lhs > rhs) - (lhs < rhs)


def at_least_power(x, base, expo):
    """True iff x >= base**expo, decided exactly."""
    return _cmp_pow(x, base, expo) >= 0


def at_most_power(x, base, expo):
    """True iff x <= base**expo, decided exactly."""
    return _cmp_pow(x, base, expo) <= 0


def floor_scaled_power(c, base, expo):
    """Largest integer k >= 0 with k <= c * base**expo."""
    c = Fraction(c)
    if c <= 0:
        return 0
    est = float(c) * float(base) ** float(expo)
    k = max(int(math.floor(est)) - 2, 0)
    while _cmp_pow(Fraction(k + 1) / c, base, expo) <= 0:
        k += 1
    while k > 0 and _cmp_pow(Fraction(k) / c, base, expo) > 0:
        k -= 1
    return k


def ceil_scaled_power(c, base, expo):
    """Smallest integer k >= 0 with k >= c * base**expo."""
    c = Fraction(c)
    if c <= 0:
        return 0
    est = float(c) * float(base) ** float(expo)
    k = max(int(math.ceil(est)) + 2, 0)
    while k > 0 and _cmp_pow(Fraction(k - 1) / c, base, expo) >= 0:
        k -= 1
    while _cmp_pow(Fraction(k) / c, base, expo) < 0:
        k += 1
    return k


def dyadic_floor(x, bits=60):
    """Largest multiple of 2**-bits not exceeding the positive rational x."""
    x = Fraction(x)
    return Fraction(math.floor(x * (1 << bits)), 1 << bits)


def dyadic_ceil(x, bits=60):
    x = Fraction(x)
    return Fraction(math.ceil(x * (1 << bits)), 1 << bits)
