"""Truncated Taylor expansions (jets).

A :class:`Jet` of order ``N`` at ``x`` stores the Taylor coefficients
``F_k = D^k f(x) / k!`` for ``k = 0..N``.  Binary operations truncate to the
smaller order; nothing is ever padded with zeros behind the caller's back.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import BasePointMismatch, CriticalPoint, OrderTooSmall, PreconditionError
from .scalar import (
    EXACT,
    FLOAT,
    Scalar,
    exact,
    fmt,
    is_exact,
    is_zero,
    parse,
    unify,
)


@dataclass(frozen=True)
class Jet:
    base: Scalar
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ValueError("a jet needs at least one coefficient")
        values, backend = unify([self.base, *self.coeffs])
        object.__setattr__(self, "base", values[0])
        object.__setattr__(self, "coeffs", tuple(values[1:]))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_exact(self) -> bool:
        return is_exact(self.base)

    @property
    def backend(self) -> str:
        return EXACT if self.is_exact else FLOAT

    @property
    def value(self) -> Scalar:
        return self.coeffs[0]

    def derivative(self, k: int) -> Scalar:
        """``D^k f(base)``."""
        return math.factorial(k) * self.coeffs[k]

    def derivatives(self) -> list:
        return [self.derivative(k) for k in range(len(self.coeffs))]

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderTooSmall(f"cannot extend a jet of order {self.order} to {order}")
        return Jet(self.base, self.coeffs[: order + 1])

    def scale(self) -> float:
        """Magnitude used by float zero tests."""
        return max(1.0, max(abs(float(c)) for c in self.coeffs))

    def slope_vanishes(self) -> bool:
        """``Df(base) == 0``; floats are compared with the value, not the tail,
        so that steep high-order terms do not swamp a healthy slope."""
        return is_zero(self.coeffs[1], max(1.0, abs(float(self.coeffs[0]))))

    def to_float(self) -> "Jet":
        return Jet(float(self.base), tuple(float(c) for c in self.coeffs))

    def __add__(self, other: "Jet") -> "Jet":
        return jet_add(self, other)

    def __sub__(self, other: "Jet") -> "Jet":
        return jet_add(self, -other)

    def __neg__(self) -> "Jet":
        return Jet(self.base, tuple(-c for c in self.coeffs))

    def __mul__(self, other: "Jet") -> "Jet":
        return jet_mul(self, other)

    def __truediv__(self, other: "Jet") -> "Jet":
        return jet_div(self, other)

    def to_dict(self) -> dict:
        return {"base": fmt(self.base), "order": self.order, "coeffs": [fmt(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, data: dict, backend: str | None = None) -> "Jet":
        coeffs = tuple(parse(c, backend) for c in data["coeffs"])
        if "order" in data and data["order"] != len(coeffs) - 1:
            raise ValueError(f"order {data['order']} does not match {len(coeffs)} coefficients")
        return cls(parse(data["base"], backend), coeffs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str, backend: str | None = None) -> "Jet":
        return cls.from_dict(json.loads(text), backend)


# ----------------------------------------------------------------------
# constructors

def constant(base: Scalar, value: Scalar, order: int) -> Jet:
    zero = value * 0
    return Jet(base, (value,) + (zero,) * order)


def identity(base: Scalar, order: int) -> Jet:
    """Jet of ``z -> z`` at ``base``."""
    if order == 0:
        return Jet(base, (base,))
    one = base * 0 + 1
    return Jet(base, (base, one) + (one * 0,) * (order - 1))


def from_derivatives(base: Scalar, derivs: Sequence[Scalar]) -> Jet:
    """Build a jet from raw derivatives ``f(x), Df(x), ..., D^N f(x)``."""
    values, _ = unify(derivs)
    return Jet(base, tuple(v / math.factorial(k) for k, v in enumerate(values)))


def polynomial(coeffs: Sequence[Scalar], at: Scalar, order: int) -> Jet:
    """Jet at ``at`` of the polynomial ``sum coeffs[k] z^k`` (coefficients about 0)."""
    values, _ = unify([at, *coeffs])
    at, c = values[0], values[1:]
    # repeated synthetic division gives the Taylor shift
    c = list(c) or [at * 0]
    out = []
    for _ in range(order + 1):
        if not c:
            out.append(at * 0)
            continue
        acc = c[-1]
        quotient = [acc]
        for coef in reversed(c[:-1]):
            acc = acc * at + coef
            quotient.append(acc)
        out.append(quotient.pop())
        c = list(reversed(quotient))
    return Jet(at, tuple(out))


def exp_jet(base: Scalar, order: int) -> Jet:
    """Jet of ``exp`` at ``base``; exact only at ``base == 0``."""
    if is_exact(base) and base == 0:
        return Jet(exact(0), tuple(exact(1) / math.factorial(k) for k in range(order + 1)))
    e = math.exp(float(base))
    return Jet(float(base), tuple(e / math.factorial(k) for k in range(order + 1)))


# ----------------------------------------------------------------------
# arithmetic

def _same_base(a: Scalar, b: Scalar) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    a, b = float(a), float(b)
    return is_zero(a - b, max(1.0, abs(a), abs(b)), 1e-12)


def _pair(a: Jet, b: Jet) -> tuple[Jet, Jet]:
    if a.is_exact == b.is_exact:
        return a, b
    return a.to_float(), b.to_float()


def _check_base(a: Jet, b: Jet) -> None:
    if not _same_base(a.base, b.base):
        raise BasePointMismatch(f"jets based at {a.base} and {b.base}")


def jet_add(a: Jet, b: Jet) -> Jet:
    a, b = _pair(a, b)
    _check_base(a, b)
    n = min(a.order, b.order)
    return Jet(a.base, tuple(a.coeffs[k] + b.coeffs[k] for k in range(n + 1)))


def _cauchy(a: Sequence, b: Sequence, n: int) -> list:
    return [sum((a[i] * b[k - i] for i in range(k + 1)), a[0] * 0) for k in range(n + 1)]


def jet_mul(a: Jet, b: Jet) -> Jet:
    a, b = _pair(a, b)
    _check_base(a, b)
    n = min(a.order, b.order)
    return Jet(a.base, tuple(_cauchy(a.coeffs, b.coeffs, n)))


def _series_div(a: Sequence, b: Sequence, n: int) -> list:
    q = []
    for k in range(n + 1):
        acc = a[k]
        for j in range(1, k + 1):
            acc -= b[j] * q[k - j]
        q.append(acc / b[0])
    return q


def jet_div(a: Jet, b: Jet) -> Jet:
    a, b = _pair(a, b)
    _check_base(a, b)
    if is_zero(b.coeffs[0], 1.0):  # the tail says nothing about the constant term
        raise ZeroDivisionError("divisor jet has a vanishing constant term")
    n = min(a.order, b.order)
    return Jet(a.base, tuple(_series_div(a.coeffs, b.coeffs, n)))


def scalar_mul(a: Jet, c: Scalar) -> Jet:
    values, _ = unify([a.base, c, *a.coeffs])
    base, c, coeffs = values[0], values[1], values[2:]
    return Jet(base, tuple(c * v for v in coeffs))


def _compose_coeffs(outer: Sequence, inner_shifted: Sequence, n: int) -> list:
    """Coefficients of ``outer(h)`` where ``h`` has zero constant term."""
    zero = inner_shifted[0] * 0
    result = [zero] * (n + 1)
    # Horner in h: result = (((o_n) h + o_{n-1}) h + ...) + o_0
    for k in range(n, -1, -1):
        result = _cauchy(result, inner_shifted, n)
        result[0] = result[0] + outer[k]
    return result


def jet_compose(outer: Jet, inner: Jet) -> Jet:
    """Jet of ``outer o inner`` at ``inner.base``.

    ``outer`` must be expanded at ``inner``'s value.
    """
    outer, inner = _pair(outer, inner)
    if not _same_base(outer.base, inner.coeffs[0]):
        raise BasePointMismatch(
            f"outer jet is based at {outer.base} but inner jet has value {inner.coeffs[0]}"
        )
    n = min(outer.order, inner.order)
    h = [inner.coeffs[0] * 0] + list(inner.coeffs[1 : n + 1])
    return Jet(inner.base, tuple(_compose_coeffs(outer.coeffs, h, n)))


def jet_reverse(f: Jet) -> Jet:
    """Jet of the local inverse of ``f``, based at ``f(base)``.

    Solves ``g(f(z)) = z`` one coefficient at a time; the system is
    triangular with diagonal ``F_1^k``.
    """
    n = f.order
    c = f.coeffs
    if n == 0:
        raise PreconditionError("reversion needs a jet of order at least 1")
    if f.slope_vanishes():
        raise CriticalPoint(f"Df vanishes at {f.base}")
    zero = c[0] * 0
    h = [zero] + list(c[1:])
    # powers[k] = h^k truncated to order n
    powers = [[zero + 1] + [zero] * n, h[:]]
    for _ in range(2, n + 1):
        powers.append(_cauchy(powers[-1], h, n))
    g = [f.base, 1 / c[1]]
    for m in range(2, n + 1):
        acc = zero
        for k in range(1, m):
            acc += g[k] * powers[k][m]
        g.append(-acc / powers[m][m])
    return Jet(c[0], tuple(g[: n + 1]))
