"""Scalar backends.

Two scalar types flow through the package: exact rationals (``gmpy2.mpq``,
always in lowest terms with positive denominator) and binary64 floats.
Arithmetic is written once against ordinary Python operators; only zero
tests, conversions and serialization need to know which backend a value
belongs to.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Any, Union

import gmpy2
from gmpy2 import mpq

MPQ = type(mpq(0))
Scalar = Union[MPQ, float]

#: default relative tolerance for the float backend
DEFAULT_RTOL = 2.0**-40

EXACT = "exact"
FLOAT = "float"


def is_exact(value: Any) -> bool:
    return isinstance(value, (MPQ, int, Rational, type(gmpy2.mpz(0)))) and not isinstance(value, bool)


def exact(value: Any) -> MPQ:
    """Convert ``value`` to an exact rational.

    Accepts ints, Fractions, mpq, and strings such as ``"-3/4"`` or ``"0.25"``.
    Floats are converted exactly (every binary64 value is a dyadic rational).
    """
    if isinstance(value, MPQ):
        return value
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            return mpq(s)
        return mpq(Fraction(s))
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot represent {value!r} exactly")
        return mpq(Fraction(value))
    return mpq(value)


def to_backend(value: Any, backend: str) -> Scalar:
    if backend == EXACT:
        return exact(value)
    if backend == FLOAT:
        return float(exact(value)) if isinstance(value, str) else float(value)
    raise ValueError(f"unknown backend {backend!r}")


def backend_of(*values: Any) -> str:
    """``"exact"`` if every value is exact, else ``"float"``."""
    return EXACT if all(is_exact(v) for v in values) else FLOAT


def is_zero(value: Scalar, scale: float = 1.0, rtol: float = DEFAULT_RTOL) -> bool:
    """Backend-aware zero test.

    Exact values use literal equality. Floats are zero when
    ``|value| <= rtol * scale``; the caller supplies ``scale``.
    """
    if is_exact(value):
        return value == 0
    return abs(value) <= rtol * scale


def sign(value: Scalar, scale: float = 1.0, rtol: float = DEFAULT_RTOL) -> int:
    """Sign with the backend's zero test applied first."""
    if is_zero(value, scale, rtol):
        return 0
    return 1 if value > 0 else -1


def factorial(k: int, like: Scalar = None) -> Scalar:
    f = math.factorial(k)
    if like is not None and not is_exact(like):
        return float(f)
    return mpq(f)


def fmt(value: Any) -> Any:
    """JSON-ready form: exact rationals as ``"p/q"`` strings, floats as-is.

    Integers among exact values render without a denominator (``"3"``).
    """
    if isinstance(value, complex):
        return [fmt(value.real), fmt(value.imag)]
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, bool) or value is None:
        return value
    if is_exact(value):
        return str(exact(value))
    return value


def parse(value: Any, backend: str | None = None) -> Scalar:
    """Inverse of :func:`fmt`. Strings are exact, numbers are floats.

    ``backend`` forces the result type.
    """
    if backend is not None:
        return to_backend(value, backend)
    if isinstance(value, str):
        if value in ("inf", "-inf", "nan"):
            return float(value)
        return exact(value)
    if isinstance(value, int):
        return mpq(value)
    return float(value)


def bits(value: Scalar) -> int:
    """Bit size of an exact rational (numerator + denominator); 64 for floats."""
    if is_exact(value):
        q = exact(value)
        return int(q.numerator).bit_length() + int(q.denominator).bit_length()
    return 64


def unify(values) -> tuple[list, str]:
    """Coerce a collection to a single backend.

    mpq mixed with float would silently produce ``gmpy2.mpfr``; any float
    in the input therefore demotes every value to float.
    """
    values = list(values)
    if all(is_exact(v) for v in values):
        return [exact(v) for v in values], EXACT
    return [float(v) for v in values], FLOAT


def like(value: Any, reference: Scalar) -> Scalar:
    """``value`` in the backend of ``reference``."""
    return exact(value) if is_exact(reference) else float(value)
