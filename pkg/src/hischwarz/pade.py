"""Hankel determinants and diagonal Padé approximants.

The ``d``-th approximant of a jet is found by solving the ``d x d`` linear
system for the denominator coefficients ``Q_1..Q_d``

    F_l + sum_{i=1}^{d} Q_i F_{l-i} = 0,        l = d+1 .. 2d

and reading off the numerator ``P_l = F_l + sum_{i<=l} Q_i F_{l-i}``.
Exact jets go through fraction-free (Bareiss) elimination on an integer
scaling of the system; float jets use LU with partial pivoting.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import gmpy2
import numpy as np

from . import poly
from .errors import NotNormal, OrderTooSmall, PoleError
from .jets import Jet
from .scalar import (
    DEFAULT_RTOL,
    EXACT,
    Scalar,
    exact,
    fmt,
    is_exact,
    is_zero,
    parse,
    unify,
)


class _Infinity:
    """The point at infinity on the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


# ----------------------------------------------------------------------
# fraction-free linear algebra

def _integerize_rows(rows: Sequence[Sequence]) -> tuple[list[list], list]:
    """Scale each row by the lcm of its denominators; returns rows and scales."""
    out, scales = [], []
    for row in rows:
        lcm = gmpy2.mpz(1)
        for v in row:
            lcm = gmpy2.lcm(lcm, exact(v).denominator)
        out.append([gmpy2.mpz(exact(v) * lcm) for v in row])
        scales.append(lcm)
    return out, scales


def _bareiss(m: list[list], ncols: int) -> tuple[list[list], int]:
    """In-place fraction-free elimination on an integer matrix.

    Returns the reduced matrix and the permutation sign, which is 0 when
    the leading ``ncols`` columns are rank deficient.
    """
    n = len(m)
    sign, prev = 1, gmpy2.mpz(1)
    for k in range(min(n, ncols)):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            return m, 0
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, len(m[i])):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = gmpy2.mpz(0)
        prev = m[k][k]
    return m, sign


def bareiss_det(matrix: Sequence[Sequence]) -> gmpy2.mpq:
    """Exact determinant of a rational matrix; ``1`` for the empty matrix."""
    n = len(matrix)
    if n == 0:
        return exact(1)
    rows, scales = _integerize_rows(matrix)
    m, sign = _bareiss(rows, n)
    if sign == 0:
        return exact(0)
    denom = gmpy2.mpz(1)
    for s in scales:
        denom *= s
    return gmpy2.mpq(sign * m[n - 1][n - 1], denom)


def bareiss_solve(matrix: Sequence[Sequence], rhs: Sequence) -> list | None:
    """Exact solution of ``matrix @ x = rhs``; ``None`` when singular."""
    n = len(matrix)
    if n == 0:
        return []
    rows, _ = _integerize_rows([list(r) + [b] for r, b in zip(matrix, rhs)])
    m, sign = _bareiss(rows, n)
    if sign == 0 or m[n - 1][n - 1] == 0:
        return None
    x = [exact(0)] * n
    for i in range(n - 1, -1, -1):
        acc = gmpy2.mpq(m[i][n])
        for j in range(i + 1, n):
            acc -= m[i][j] * x[j]
        x[i] = acc / m[i][i]
    return x


def determinant(matrix: Sequence[Sequence]) -> Scalar:
    """Backend-dispatching determinant."""
    if len(matrix) == 0:
        return exact(1)
    values, backend = unify(v for row in matrix for v in row)
    if backend == EXACT:
        return bareiss_det(matrix)
    return float(np.linalg.det(np.array(matrix, dtype=float)))


# ----------------------------------------------------------------------
# Hankel matrices

@dataclass(frozen=True)
class HankelMatrix:
    """``M_d(x, f)``: entries ``F_{i+j+1}`` for ``i, j = 0..d-1``."""

    dimension: int
    entries: tuple
    base: Scalar

    def det(self) -> Scalar:
        return determinant(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float).reshape(self.dimension, self.dimension)

    def scale(self) -> float:
        if self.dimension == 0:
            return 1.0
        return max(1.0, max(abs(float(v)) for row in self.entries for v in row))


def hankel_matrix(f: Jet, d: int) -> HankelMatrix:
    if d < 0:
        raise ValueError("dimension must be non-negative")
    if f.order < 2 * d - 1:
        raise OrderTooSmall(f"M_{d} needs a jet of order {2 * d - 1}, got {f.order}")
    F = f.coeffs
    entries = tuple(tuple(F[i + j + 1] for j in range(d)) for i in range(d))
    return HankelMatrix(d, entries, f.base)


def hankel_det(f: Jet, d: int) -> Scalar:
    """``det M_d(x, f)``; the empty determinant (``d = 0``) is 1."""
    if d == 0:
        return exact(1) if f.is_exact else 1.0
    return hankel_matrix(f, d).det()


def _normality_scale(f: Jet, d: int) -> float:
    mags = [abs(float(c)) for c in f.coeffs[1 : 2 * d]]
    return max(mags + [1.0]) ** d


def is_normal(f: Jet, d: int, rtol: float = DEFAULT_RTOL) -> bool:
    """Whether ``det M_d(x, f)`` is nonzero under the backend's zero test.

    The float threshold ``rtol * (max |F_k|)^d`` is a heuristic.
    """
    if f.order < 2 * d:
        raise OrderTooSmall(f"normality of order {d} needs a jet of order {2 * d}, got {f.order}")
    if d == 0:
        return True
    return not is_zero(hankel_det(f, d), _normality_scale(f, d), rtol)


# ----------------------------------------------------------------------
# rational maps

@dataclass(frozen=True)
class RationalMap:
    """``p(z - base) / q(z - base)`` with ``q(0) = 1``."""

    p: tuple
    q: tuple
    base: Scalar

    def __post_init__(self):
        values, _ = unify([self.base, *self.p, *self.q])
        base, rest = values[0], values[1:]
        p, q = poly.trim(rest[: len(self.p)]), poly.trim(rest[len(self.p):])
        if is_exact(base):
            ok = q[0] == 1
        else:
            ok = abs(q[0] - 1.0) <= 1e-12
        if not ok:
            raise ValueError(f"denominator must satisfy q(0) = 1, got {q[0]}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "p", tuple(p))
        object.__setattr__(self, "q", tuple(q))

    @classmethod
    def from_fraction(cls, p: Sequence, q: Sequence, base: Scalar) -> "RationalMap":
        """Normalize an arbitrary pair so that the denominator is 1 at ``base``."""
        q0 = q[0]
        if q0 == 0:
            raise PoleError(f"denominator vanishes at the base point {base}")
        return cls(tuple(c / q0 for c in p), tuple(c / q0 for c in q), base)

    @property
    def is_exact(self) -> bool:
        return is_exact(self.base)

    @property
    def value(self) -> Scalar:
        return self.p[0]

    @property
    def slope(self) -> Scalar:
        """Derivative at the base point."""
        p1 = self.p[1] if len(self.p) > 1 else self.p[0] * 0
        q1 = self.q[1] if len(self.q) > 1 else self.q[0] * 0
        return p1 - self.p[0] * q1

    def jet(self, order: int) -> Jet:
        """Taylor expansion at the base point."""
        zero = self.q[0] * 0
        p = list(self.p[: order + 1]) + [zero] * max(0, order + 1 - len(self.p))
        q = list(self.q[: order + 1]) + [zero] * max(0, order + 1 - len(self.q))
        return Jet(self.base, tuple(p)) / Jet(self.base, tuple(q))

    def recentre(self, new_base: Scalar) -> "RationalMap":
        """The same map written in powers of ``z - new_base``."""
        values, _ = unify([self.base, new_base])
        shift = values[1] - values[0]
        p = poly.taylor_shift(list(self.p), shift)
        q = poly.taylor_shift(list(self.q), shift)
        if is_zero(q[0], max(1.0, max(abs(float(c)) for c in q))):
            reduced = self.reduced()
            if reduced is not self:
                return reduced.recentre(new_base)
            raise PoleError(f"pole at {new_base}")
        return RationalMap.from_fraction(p, q, values[1])

    def jet_at(self, z: Scalar, order: int) -> Jet:
        return self.recentre(z).jet(order)

    def reduced(self) -> "RationalMap":
        """Cancel common factors (exact backend; floats are returned as-is)."""
        if not self.is_exact:
            return self
        g = poly.gcd(self.p, self.q)
        if poly.degree(g) <= 0:
            return self
        p, _ = poly.divmod_(self.p, g)
        q, _ = poly.divmod_(self.q, g)
        return RationalMap.from_fraction(p, q, self.base)

    @property
    def degree(self) -> int:
        return rational_degree(self)

    def __call__(self, z):
        return rational_eval(self, z)

    def evaluate_array(self, z: np.ndarray) -> np.ndarray:
        """Vectorized complex evaluation; poles come back as ``inf``."""
        t = np.asarray(z, dtype=complex) - float(self.base)
        num = np.polyval([float(c) for c in reversed(self.p)], t)
        den = np.polyval([float(c) for c in reversed(self.q)], t)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = num / den
        return np.where(den == 0, np.inf, out)

    def to_float(self) -> "RationalMap":
        return RationalMap(tuple(float(c) for c in self.p), tuple(float(c) for c in self.q), float(self.base))

    def to_dict(self) -> dict:
        return {"base": fmt(self.base), "p": [fmt(c) for c in self.p], "q": [fmt(c) for c in self.q]}

    @classmethod
    def from_dict(cls, data: dict, backend: str | None = None) -> "RationalMap":
        return cls(
            tuple(parse(c, backend) for c in data["p"]),
            tuple(parse(c, backend) for c in data["q"]),
            parse(data["base"], backend),
        )


def rational_eval(R: RationalMap, z):
    """``p(z - x) / q(z - x)``, or :data:`INFINITY` at a pole."""
    if R.is_exact and is_exact(z):
        t = exact(z) - R.base
        num, den = poly.evaluate(list(R.p), t), poly.evaluate(list(R.q), t)
    else:
        t = (complex(z) if isinstance(z, complex) else float(z)) - float(R.base)
        num = poly.evaluate([float(c) for c in R.p], t)
        den = poly.evaluate([float(c) for c in R.q], t)
    if den == 0:
        reduced = R.reduced()
        if num == 0 and reduced is not R:
            return rational_eval(reduced, z)
        return INFINITY
    return num / den


def rational_degree(R: RationalMap) -> int:
    """Degree after cancelling common factors.

    Float maps cannot be reduced reliably; their unreduced degree is
    returned with a warning.
    """
    if not R.is_exact:
        warnings.warn("float rational map: degree computed without gcd reduction", RuntimeWarning,
                      stacklevel=2)
    else:
        R = R.reduced()
    return max(poly.degree(R.p), poly.degree(R.q), 0)


def mobius(a: Scalar, b: Scalar, c: Scalar, d: Scalar, base: Scalar) -> RationalMap:
    """``z -> (a z + b) / (c z + d)`` expanded at ``base``."""
    values, _ = unify([a, b, c, d, base])
    a, b, c, d, base = values
    p = poly.taylor_shift([b, a], base)
    q = poly.taylor_shift([d, c], base)
    return RationalMap.from_fraction(p, q, base)


def compose(outer: RationalMap, inner: RationalMap) -> RationalMap:
    """``outer o inner`` as a rational map at ``inner.base``.

    ``outer`` is re-expanded at ``inner``'s value first, so the composite's
    denominator is automatically 1 at the base point.
    """
    outer = outer.recentre(inner.value)
    u = poly.sub(list(inner.p), poly.scale(list(inner.q), inner.value))
    m = max(len(outer.p), len(outer.q)) - 1
    qi = list(inner.q)

    def homogenize(coeffs):
        zero = qi[0] * 0
        total = [zero]
        for k, a in enumerate(coeffs):
            if a == 0:
                continue
            term = poly.scale(poly.mul(poly.power(u, k), poly.power(qi, m - k)), a)
            total = poly.add(total, term)
        return total

    return RationalMap.from_fraction(homogenize(outer.p), homogenize(outer.q), inner.base)


# ----------------------------------------------------------------------
# Padé approximants

def _coincides(R: RationalMap, f: Jet, order: int) -> bool:
    r = R.jet(order)
    if f.is_exact and R.is_exact:
        return r.coeffs == f.coeffs[: order + 1]
    scale = f.scale()
    return all(is_zero(a - b, scale, 1e-8) for a, b in zip(r.coeffs, f.coeffs[: order + 1]))


def _solve(matrix: list[list], rhs: list, exact_backend: bool):
    if exact_backend:
        return bareiss_solve(matrix, rhs)
    a = np.array(matrix, dtype=float)
    try:
        return [float(v) for v in np.linalg.solve(a, np.array(rhs, dtype=float))]
    except np.linalg.LinAlgError:
        return None


def _classify_singular(f: Jet, d: int, rtol: float = DEFAULT_RTOL) -> NotNormal:
    """Decide whether a singular order-``d`` system still has an approximant.

    Over floats the search uses the same tolerant normality test.
    """
    for k in range(d - 1, -1, -1):
        if is_normal(f, k, rtol):
            lower = pade_approximant(f, k, rtol=rtol)
            if _coincides(lower, f, 2 * d):
                return NotNormal(
                    f"not normal of order {d} at {f.base}; the approximant degenerates to degree {k}",
                    level=d, subcase="degenerate", approximant=lower,
                )
            break
    return NotNormal(f"no Padé approximant of order {d} at {f.base}", level=d, subcase="nonexistent")


def pade_approximant(f: Jet, d: int, *, row_order: Sequence[int] | None = None,
                     allow_degenerate: bool = False, rtol: float = DEFAULT_RTOL) -> RationalMap:
    """The ``d``-th diagonal Padé approximant of ``f`` at its base point.

    Raises :class:`NotNormal` when the system is singular.  With
    ``allow_degenerate`` a lower-degree approximant that still coincides to
    order ``2d`` is returned instead.  ``row_order``
    permutes the equations before elimination.
    """
    if f.order < 2 * d:
        raise OrderTooSmall(f"order-{d} approximant needs a jet of order {2 * d}, got {f.order}")
    F = f.coeffs
    one = F[0] * 0 + 1
    if d == 0:
        return RationalMap((F[0],), (one,), f.base)
    if not is_normal(f, d, rtol):
        err = _classify_singular(f, d, rtol)
        if allow_degenerate and err.subcase == "degenerate":
            return err.approximant
        raise err
    rows = list(range(d + 1, 2 * d + 1))
    if row_order is not None:
        rows = [rows[i] for i in row_order]
    matrix = [[F[l - i] for i in range(1, d + 1)] for l in rows]
    rhs = [-F[l] for l in rows]
    Q = _solve(matrix, rhs, f.is_exact)
    if Q is None:
        raise NotNormal(f"singular Padé system of order {d} at {f.base}", level=d)
    q = [one] + list(Q)
    p = [F[l] + sum((q[i] * F[l - i] for i in range(1, l + 1)), F[0] * 0) for l in range(d + 1)]
    R = RationalMap(tuple(p), tuple(q), f.base)
    if not _coincides(R, f, 2 * d):
        raise NotNormal(f"approximant of order {d} fails the coincidence check", level=d)
    return R
