"""Exact rational arithmetic backend and "p/q" string (de)serialization.

Every quantity in this package is an exact rational.  gmpy2's mpq is used
when available (roughly 10x faster than fractions.Fraction on the small
denominators that dominate here); the stdlib Fraction is a drop-in
fallback.  Code elsewhere must only rely on the common surface:
arithmetic operators, comparisons, hashing, and the .numerator /
.denominator attributes.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as Q


ZERO = Q(0)
ONE = Q(1)


def rat(value) -> Q:
    """Coerce ints, rationals, or 'p/q' strings to the backend rational."""
    if isinstance(value, str):
        return Q(value.strip())
    return Q(value)


def rat_str(value) -> str:
    """Render a rational in lowest terms, 'p/q' or plain 'p' for integers."""
    q = Q(value)
    n, d = int(q.numerator), int(q.denominator)
    return str(n) if d == 1 else f"{n}/{d}"
