"""Exact scalar helpers shared across modules.

Coordinates of rotations and points are carried as ``fractions.Fraction``
so that orbit positions like frac(n * alpha) are computed by exact integer
arithmetic and only rounded once, when a value is finally consumed by
floating point.  This keeps coordinate error at one ulp even for exponents
of size 3**1000.
"""

from __future__ import annotations

from fractions import Fraction
from math import cos, pi, sin

Rational = int | float | str | Fraction

TWO_PI = 2.0 * pi


def to_fraction(value: Rational) -> Fraction:
    """Convert to an exact rational.

    Strings are parsed as exact decimals (or "p/q" fractions); floats are
    taken at their exact binary value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, (float, str)):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def frac(x: Fraction) -> Fraction:
    """Reduce an exact rational to [0, 1)."""
    return x - (x.numerator // x.denominator)


def frac_scaled(n: int, alpha: Fraction) -> float:
    """frac(n * alpha) computed by exact integer arithmetic, then rounded.

    Safe for arbitrarily large n: the product and reduction happen on
    integers, so no precision is lost before the final division.
    """
    num = (n * alpha.numerator) % alpha.denominator
    return num / alpha.denominator


def frac_scaled_exact(n: int, alpha: Fraction) -> Fraction:
    """frac(n * alpha) as an exact rational."""
    return Fraction((n * alpha.numerator) % alpha.denominator, alpha.denominator)


def cis(t: float) -> complex:
    """exp(2 pi i t)."""
    a = TWO_PI * t
    return complex(cos(a), sin(a))


def cis_frac(x: Fraction) -> complex:
    """exp(2 pi i x) for an exact rational, reduced mod 1 before rounding."""
    return cis(float(frac(x)))
