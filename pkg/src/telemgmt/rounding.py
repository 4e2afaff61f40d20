"""Exact decimal rounding for reported metrics.

Reports quote percentages and means to two decimals. Rounding through
binary floats breaks ties unpredictably (and breaks the complement
identity availability(u,d) + availability(d,u) = 100), so ratios are
carried as exact fractions and rounded half-to-even here.
"""

from __future__ import annotations

from fractions import Fraction


def round_frac(value: Fraction | int, digits: int = 2) -> float:
    """Round a non-negative exact fraction half-to-even at `digits` decimals."""
    x = Fraction(value)
    if x < 0:
        raise ValueError("expected a non-negative value")
    scale = 10 ** digits
    scaled = x * scale
    whole, rem = divmod(scaled.numerator, scaled.denominator)
    half = Fraction(rem, scaled.denominator) - Fraction(1, 2)
    if half > 0 or (half == 0 and whole % 2 == 1):
        whole += 1
    return whole / scale
