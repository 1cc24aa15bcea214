"""Dense univariate polynomials as coefficient lists, lowest degree first.

Works over exact rationals or floats.  ``gcd`` and ``divmod`` are only
meaningful over the exact backend.
"""

from __future__ import annotations

from typing import Sequence

from .scalar import is_exact, is_zero


def trim(p: Sequence) -> list:
    p = list(p)
    while len(p) > 1 and is_zero(p[-1], 1.0, 0.0 if is_exact(p[-1]) else 1e-300):
        p.pop()
    return p


def degree(p: Sequence) -> int:
    """Degree, with ``-1`` for the zero polynomial."""
    p = trim(p)
    if len(p) == 1 and p[0] == 0:
        return -1
    return len(p) - 1


def add(p: Sequence, q: Sequence) -> list:
    n = max(len(p), len(q))
    zero = (list(p) + list(q))[0] * 0
    return trim([(p[i] if i < len(p) else zero) + (q[i] if i < len(q) else zero) for i in range(n)])


def neg(p: Sequence) -> list:
    return [-c for c in p]


def sub(p: Sequence, q: Sequence) -> list:
    return add(p, neg(q))


def scale(p: Sequence, c) -> list:
    return trim([c * v for v in p])


def mul(p: Sequence, q: Sequence) -> list:
    zero = p[0] * 0
    out = [zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def power(p: Sequence, k: int) -> list:
    out = [p[0] * 0 + 1]
    for _ in range(k):
        out = mul(out, p)
    return out


def shift_down(p: Sequence) -> list:
    """``p(t) / t`` for ``p`` with zero constant term."""
    if len(p) == 1:
        return [p[0] * 0]
    return list(p[1:])


def times_t(p: Sequence) -> list:
    return trim([p[0] * 0] + list(p))


def evaluate(p: Sequence, t):
    acc = p[-1] * 0 + p[-1]
    for c in reversed(p[:-1]):
        acc = acc * t + c
    return acc


def taylor_shift(p: Sequence, c) -> list:
    """Coefficients of ``t -> p(t + c)``."""
    out = list(p)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] = out[j] + c * out[j + 1]
    return out


def compose(p: Sequence, q: Sequence) -> list:
    """Coefficients of ``p(q(t))``."""
    out = [p[-1]]
    for c in reversed(p[:-1]):
        out = add(mul(out, q), [c])
    return trim(out)


def divmod_(p: Sequence, q: Sequence) -> tuple[list, list]:
    p, q = trim(p), trim(q)
    if degree(q) < 0:
        raise ZeroDivisionError("polynomial division by zero")
    zero = q[0] * 0
    rem = list(p)
    dq = len(q) - 1
    if len(rem) - 1 < dq:
        return [zero], rem
    quot = [zero] * (len(rem) - dq)
    lead = q[-1]
    for i in range(len(rem) - 1 - dq, -1, -1):
        coef = rem[i + dq] / lead
        quot[i] = coef
        if coef != 0:
            for j in range(dq + 1):
                rem[i + j] -= coef * q[j]
    return trim(quot), trim(rem[:dq] or [zero])


def gcd(p: Sequence, q: Sequence) -> list:
    """Monic gcd by Euclid's algorithm (exact backend)."""
    a, b = trim(p), trim(q)
    while degree(b) >= 0:
        a, b = b, divmod_(a, b)[1]
    if degree(a) < 0:
        return a
    return [c / a[-1] for c in a]
