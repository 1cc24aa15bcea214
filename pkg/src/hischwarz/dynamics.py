"""Interval maps, orbits, first-entry events and the inverse-branch scan.

Orbits of polynomial maps at rational points are carried as unreduced
integer pairs ``(p, q)``.  Denominators square at every step, so after
twenty iterations they have tens of millions of bits and a single gcd costs
more than the whole orbit.  Forward jets transported along such an orbit are
kept the same way: one integer vector over a common denominator.  Exact
Schwarzians of inverse branches are assembled as :class:`PowerProduct`
values, which keep big factors apart until something forces them together.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpq, mpz

from . import poly
from .errors import CriticalOrbit, CriticalPoint, OrbitEscape, PreconditionError
from .jets import Jet, identity, jet_compose, jet_reverse, polynomial
from .schwarzian import DEFINED, SchwarzianSequence, schwarzian_recursive
from .scalar import EXACT, FLOAT, Scalar, exact, fmt, is_exact

MPZ = type(mpz(0))


# ----------------------------------------------------------------------
# exact values with huge factors

def _log2_int(n) -> float:
    n = abs(mpz(n))
    k = n.bit_length()
    if k <= 1000:
        return math.log2(int(n))
    shift = k - 64
    return math.log2(int(n >> shift)) + shift


class PowerProduct:
    """An exact rational ``coeff * prod(base ** e)`` kept in factored form.

    Bases are positive integers; signs live in ``coeff``.  Products and
    quotients only add exponents, so equal factors cancel without being
    multiplied out.  Comparisons fall back to full expansion only when
    logarithms cannot separate the operands.
    """

    __slots__ = ("coeff", "factors")

    def __init__(self, coeff=1, factors: Iterable = ()):
        coeff = mpq(coeff)
        merged: dict = {}
        for base, e in factors:
            if e == 0:
                continue
            base = mpz(base)
            if base == 0:
                if e < 0:
                    raise ZeroDivisionError("zero factor with negative exponent")
                coeff, merged = mpq(0), {}
                break
            if base < 0:
                base = -base
                if e % 2:
                    coeff = -coeff
            if base != 1:
                merged[base] = merged.get(base, 0) + e
        self.coeff = coeff
        self.factors = () if coeff == 0 else tuple((b, e) for b, e in merged.items() if e)

    @classmethod
    def of(cls, value) -> "PowerProduct":
        if isinstance(value, PowerProduct):
            return value
        return cls(exact(value))

    def sign(self) -> int:
        return (self.coeff > 0) - (self.coeff < 0)

    def __mul__(self, other):
        other = PowerProduct.of(other)
        return PowerProduct(self.coeff * other.coeff, self.factors + other.factors)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = PowerProduct.of(other)
        if other.coeff == 0:
            raise ZeroDivisionError("division by zero")
        return PowerProduct(self.coeff / other.coeff, self.factors + tuple((b, -e) for b, e in other.factors))

    def __neg__(self):
        return PowerProduct(-self.coeff, self.factors)

    def __pow__(self, n: int):
        if n < 0 and self.coeff == 0:
            raise ZeroDivisionError("zero to a negative power")
        return PowerProduct(self.coeff**n, tuple((b, e * n) for b, e in self.factors))

    def log2(self) -> float:
        """``log2 |self|``; ``-inf`` for zero."""
        if self.coeff == 0:
            return -math.inf
        c = abs(self.coeff)
        total = _log2_int(c.numerator) - _log2_int(c.denominator)
        return total + sum(e * _log2_int(b) for b, e in self.factors)

    def __float__(self) -> float:
        if self.coeff == 0:
            return 0.0
        lg = self.log2()
        if lg > 1023:
            return math.copysign(math.inf, self.sign())
        return math.copysign(2.0**lg, self.sign())

    def as_fraction(self) -> tuple:
        """Expanded ``(numerator, denominator)``, not reduced."""
        num, den = mpz(self.coeff.numerator), mpz(self.coeff.denominator)
        for b, e in self.factors:
            if e > 0:
                num *= b**e
            else:
                den *= b ** (-e)
        return num, den

    def to_mpq(self):
        num, den = self.as_fraction()
        return mpq(num, den)

    def bit_size(self) -> int:
        c = self.coeff
        own = int(c.numerator).bit_length() + int(c.denominator).bit_length()
        return own + sum(abs(e) * b.bit_length() for b, e in self.factors)

    def _compare(self, other) -> int:
        other = PowerProduct.of(other)
        a, b = self.sign(), other.sign()
        if a != b or a == 0:
            return (a > b) - (a < b)
        la, lb = self.log2(), other.log2()
        if abs(la - lb) > 1e-6 * max(1.0, abs(la), abs(lb)):
            bigger = 1 if la > lb else -1
            return bigger * a
        ratio = self / other
        num, den = ratio.as_fraction()
        if num == den:
            return 0
        return (1 if abs(num) > abs(den) else -1) * a

    def __eq__(self, other):
        if not isinstance(other, (PowerProduct, int, MPZ, type(mpq(0)), Fraction)):
            return NotImplemented
        return self._compare(other) == 0

    def __hash__(self):
        return hash((self.coeff, self.factors))

    def __lt__(self, other):
        return self._compare(other) < 0

    def __le__(self, other):
        return self._compare(other) <= 0

    def __gt__(self, other):
        return self._compare(other) > 0

    def __ge__(self, other):
        return self._compare(other) >= 0

    def __repr__(self):
        return f"PowerProduct({self.coeff}, {len(self.factors)} factors, ~{float(self):.6g})"


def _show(value, limit: int = 4096):
    """JSON form of an exact value: exact string when small, float otherwise."""
    if value is None:
        return None
    if isinstance(value, PowerProduct):
        if value.bit_size() <= limit:
            return fmt(value.to_mpq())
        return fmt(float(value))
    return fmt(value)


# ----------------------------------------------------------------------
# maps

@dataclass(frozen=True)
class CriticalPointInfo:
    """A zero of ``Df`` in ``[0, 1]``; ``order`` is its multiplicity."""

    point: Scalar
    order: float
    exact: bool

    def to_dict(self) -> dict:
        return {"point": fmt(self.point), "order": fmt(self.order), "exact": self.exact}


def _integerize(coeffs: Sequence) -> tuple[list, MPZ]:
    L = mpz(1)
    for c in coeffs:
        L = gmpy2.lcm(L, mpz(c.denominator))
    return [mpz(c * L) for c in coeffs], L


@dataclass(frozen=True)
class IntervalMap:
    """A self-map of ``[0, 1]``.

    Either a polynomial (``poly``, coefficients about 0, lowest first) or the
    composite ``psi o q o phi`` with ``q(y) = ((y+a)^alpha - a^alpha) /
    ((1+a)^alpha - a^alpha)`` and polynomial ``phi``, ``psi``.  Build
    instances with :func:`polynomial_map`, :func:`logistic`,
    :func:`q_family` or :func:`composite_map`; they validate the invariants.
    """

    name: str
    poly: tuple | None = None
    phi: tuple | None = None
    alpha: Scalar | None = None
    a: Scalar | None = None
    psi: tuple | None = None
    critical_points: tuple = ()
    integer_form: tuple | None = field(default=None, compare=False, repr=False)

    @property
    def kind(self) -> str:
        return "polynomial" if self.poly is not None else "composite"

    @property
    def is_exact(self) -> bool:
        if self.poly is not None:
            return all(is_exact(c) for c in self.poly)
        return _q_is_exact(self.alpha, self.a) and all(is_exact(c) for c in self.phi + self.psi)

    @property
    def backend(self) -> str:
        return EXACT if self.is_exact else FLOAT

    def _coerce(self, x):
        return exact(x) if self.is_exact and is_exact(x) else float(x)

    def __call__(self, x):
        x = self._coerce(x)
        if self.poly is not None:
            return poly.evaluate(list(self.poly), x)
        y = poly.evaluate(list(self.phi), x)
        return poly.evaluate(list(self.psi), _q_value(self.alpha, self.a, y))

    def jet(self, x, order: int) -> Jet:
        x = self._coerce(x)
        if self.poly is not None:
            return polynomial(self.poly, x, order)
        inner = polynomial(self.phi, x, order)
        mid = jet_compose(_q_jet(self.alpha, self.a, inner.value, order), inner)
        return jet_compose(polynomial(self.psi, mid.value, order), mid)

    def derivative(self, x):
        return self.jet(x, 1).coeffs[1]

    def expanded(self) -> "IntervalMap":
        """The same map as a polynomial (integer ``alpha`` only)."""
        if self.poly is not None:
            return self
        if not _q_is_exact(self.alpha, self.a):
            raise PreconditionError("only integer exponents expand to polynomials")
        alpha, a = int(self.alpha), exact(self.a)
        norm = (1 + a) ** alpha - a**alpha
        q = [exact(math.comb(alpha, k)) * a ** (alpha - k) / norm for k in range(alpha + 1)]
        q[0] = exact(0)
        full = poly.compose(list(self.psi), poly.compose(q, list(self.phi)))
        return polynomial_map(full, name=f"{self.name} (expanded)")

    def to_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind,
               "critical_points": [c.to_dict() for c in self.critical_points]}
        if self.poly is not None:
            out["coefficients"] = [fmt(c) for c in self.poly]
        else:
            out.update(phi=[fmt(c) for c in self.phi], psi=[fmt(c) for c in self.psi],
                       alpha=fmt(self.alpha), a=fmt(self.a))
        return out


def _q_is_exact(alpha, a) -> bool:
    return is_exact(alpha) and exact(alpha).denominator == 1 and is_exact(a)


def _q_norm(alpha, a):
    return (1 + a) ** alpha - a**alpha


def _q_value(alpha, a, y):
    if _q_is_exact(alpha, a) and is_exact(y):
        alpha, a, y = int(alpha), exact(a), exact(y)
    else:
        alpha, a, y = float(alpha), float(a), float(y)
        if y + a < 0:
            raise PreconditionError(f"q is undefined at {y}")
    return ((y + a) ** alpha - a**alpha) / _q_norm(alpha, a)


def _q_jet(alpha, a, y, order: int) -> Jet:
    """Jet of ``q_{alpha,a}`` at ``y`` from the binomial series of ``(y+a+t)^alpha``."""
    if _q_is_exact(alpha, a) and is_exact(y):
        n, a, y = int(alpha), exact(a), exact(y)
        u, norm = y + a, _q_norm(n, a)
        coeffs = [(u**n - a**n) / norm]
        for k in range(1, order + 1):
            coeffs.append(exact(math.comb(n, k)) * u ** (n - k) / norm if k <= n else exact(0))
        return Jet(y, tuple(coeffs))
    al, a, y = float(alpha), float(a), float(y)
    u, norm = y + a, _q_norm(al, a)
    if u <= 0:
        if float(al).is_integer():
            n = int(al)
            coeffs = [(u**n - a**n) / norm] + [math.comb(n, k) * u ** (n - k) / norm if k <= n else 0.0
                                                 for k in range(1, order + 1)]
            return Jet(y, tuple(coeffs))
        raise CriticalPoint(f"q is not analytic at {y}")
    coeffs, binom = [(u**al - a**al) / norm], 1.0
    for k in range(1, order + 1):
        binom *= (al - k + 1) / k
        coeffs.append(binom * u ** (al - k) / norm)
    return Jet(y, tuple(coeffs))


def _real_roots(coeffs: Sequence, lo: float, hi: float) -> list[float]:
    """Real roots of a polynomial (lowest-first coefficients) in ``[lo, hi]``."""
    c = [float(v) for v in poly.trim(coeffs)]
    if len(c) < 2:
        return []
    roots = np.roots(c[::-1])
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-7 * max(1.0, abs(r.real)) and lo - 1e-12 <= r.real <= hi + 1e-12:
            out.append(min(max(float(r.real), lo), hi))
    return sorted(out)


def _cluster(values: list[float], radius: float = 1e-4) -> list[tuple[float, int]]:
    groups: list[list[float]] = []
    for v in sorted(values):
        if groups and v - groups[-1][-1] <= radius:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [(sum(g) / len(g), len(g)) for g in groups]


def _polynomial_critical_points(coeffs: Sequence) -> tuple:
    dp = poly.trim([k * coeffs[k] for k in range(1, len(coeffs))] or [coeffs[0] * 0])
    if poly.degree(dp) < 0:
        raise PreconditionError("a constant map has no isolated critical points")
    found = []
    for root, mult in _cluster(_real_roots(dp, 0.0, 1.0)):
        if not 0 < root < 1:
            continue
        if all(is_exact(c) for c in coeffs):
            cand = exact(Fraction(root).limit_denominator(10**6))
            if poly.evaluate(dp, cand) == 0:
                order, der = 0, list(dp)
                while poly.degree(der) >= 0 and poly.evaluate(der, cand) == 0:
                    order += 1
                    der = poly.trim([k * der[k] for k in range(1, len(der))] or [der[0] * 0])
                found.append(CriticalPointInfo(cand, order, True))
                continue
        found.append(CriticalPointInfo(root, mult, False))
    return tuple(found)


def polynomial_map(coeffs: Sequence, name: str | None = None, backend: str = EXACT) -> IntervalMap:
    """A polynomial self-map of ``[0, 1]`` (coefficients about 0, lowest first)."""
    if backend == EXACT:
        coeffs = [exact(c) for c in coeffs]
    else:
        coeffs = [float(c) for c in coeffs]
    coeffs = poly.trim(coeffs)
    crit = _polynomial_critical_points(coeffs)
    # the extrema of a polynomial on [0,1] sit at the ends or at critical points
    for x in [coeffs[0] * 0, coeffs[0] * 0 + 1] + [c.point for c in crit]:
        if is_exact(x) and backend == EXACT:
            v = poly.evaluate(coeffs, exact(x))
            ok = 0 <= v <= 1
        else:
            v = poly.evaluate([float(c) for c in coeffs], float(x))
            ok = -1e-12 <= v <= 1 + 1e-12
        if not ok:
            raise PreconditionError(f"polynomial does not map [0,1] into itself: f({x}) = {v}")
    label = name or "poly(" + ", ".join(str(fmt(c)) for c in coeffs) + ")"
    integer = _integerize(coeffs) if backend == EXACT else None
    return IntervalMap(name=label, poly=tuple(coeffs), critical_points=crit, integer_form=integer)


def logistic(a=4) -> IntervalMap:
    """``x -> a x (1 - x)``; exact for rational ``a`` in ``(0, 4]``."""
    a = exact(a) if is_exact(a) or isinstance(a, str) else float(a)
    if not 0 < a <= 4:
        raise PreconditionError("the logistic parameter must lie in (0, 4]")
    return polynomial_map([a * 0, a, -a], name=f"logistic({fmt(a)})",
                          backend=EXACT if is_exact(a) else FLOAT)


def composite_map(phi: Sequence, alpha, a, psi: Sequence, name: str | None = None,
                  grid: int = 2001) -> IntervalMap:
    """``psi o q_{alpha,a} o phi``; invariants checked numerically on a grid."""
    if isinstance(alpha, str):
        alpha = exact(alpha)
    if isinstance(a, str):
        a = exact(a)
    if not alpha > 1:
        raise PreconditionError("alpha must exceed 1")
    if not a >= 0:
        raise PreconditionError("a must be non-negative")
    if _q_is_exact(alpha, a):
        alpha, a = exact(alpha), exact(a)
        phi, psi = [exact(c) for c in phi], [exact(c) for c in psi]
    else:
        alpha, a = float(alpha), float(a)
        phi, psi = [float(c) for c in phi], [float(c) for c in psi]
    xs = np.linspace(0.0, 1.0, grid)
    for label, p in (("phi", phi), ("psi", psi)):
        vals = np.polyval([float(c) for c in reversed(p)], xs)
        if vals.min() < -1e-12 or vals.max() > 1 + 1e-12:
            raise PreconditionError(f"{label} does not map [0,1] into itself")
    crit = _composite_critical_points(phi, alpha, a, psi, xs)
    label = name or f"composite(alpha={fmt(alpha)}, a={fmt(a)})"
    return IntervalMap(name=label, phi=tuple(phi), alpha=alpha, a=a, psi=tuple(psi), critical_points=crit)


def _composite_critical_points(phi, alpha, a, psi, xs) -> tuple:
    al = float(alpha)
    found = []
    dphi = [k * phi[k] for k in range(1, len(phi))] or [0.0]
    for r, mult in _cluster(_real_roots(dphi, 0.0, 1.0)):
        found.append((r, float(mult)))
    shifted = list(phi)
    shifted[0] = shifted[0] + a
    for r, _ in _cluster(_real_roots(shifted, 0.0, 1.0)):
        found.append((r, al - 1))
    dpsi = [k * psi[k] for k in range(1, len(psi))] or [0.0]
    inner = np.array([float(_q_value(alpha, a, float(poly.evaluate([float(c) for c in phi], float(x)))))
                      for x in xs])
    for r, mult in _cluster(_real_roots(dpsi, 0.0, 1.0)):
        diff = inner - r
        for i in range(len(xs) - 1):
            if diff[i] == 0 or diff[i] * diff[i + 1] < 0:
                lo, hi = float(xs[i]), float(xs[i + 1])
                for _ in range(60):
                    mid = (lo + hi) / 2
                    val = float(_q_value(alpha, a, float(poly.evaluate([float(c) for c in phi], mid)))) - r
                    if (val > 0) == (diff[i] > 0):
                        lo = mid
                    else:
                        hi = mid
                found.append(((lo + hi) / 2, float(mult)))
    found.sort()
    return tuple(CriticalPointInfo(p, o, False) for p, o in found if 0 < p < 1)


def q_family(alpha, a) -> IntervalMap:
    """``x -> ((x+a)^alpha - a^alpha) / ((1+a)^alpha - a^alpha)``.

    Exact when ``alpha`` is an integer and ``a`` rational.
    """
    return composite_map([0, 1], alpha, a, [0, 1], name=f"q(alpha={fmt(alpha)}, a={fmt(a)})")


# ----------------------------------------------------------------------
# orbits

def _as_pair(x) -> tuple:
    x = exact(x)
    return mpz(x.numerator), mpz(x.denominator)


def _hom_eval(A: Sequence, L, p, q) -> tuple:
    """``f(p/q)`` as an unreduced pair for ``f = sum A_i z^i / L``."""
    m = len(A) - 1
    acc, qp = mpz(A[m]), mpz(1)
    for i in range(m - 1, -1, -1):
        qp = qp * q
        acc = acc * p
        if A[i]:
            acc += A[i] * qp
    return acc, L * qp


def _trim_pair(nums: list, den, L) -> tuple[list, MPZ]:
    """Remove common powers of two and any common factor with ``L``."""
    nonzero = [v for v in nums if v]
    if not nonzero:
        return [mpz(0)] * len(nums), mpz(1)
    shift = min(min(v.bit_scan1() for v in nonzero), den.bit_scan1())
    if shift:
        nums = [v >> shift for v in nums]
        den = den >> shift
    if L > 1:
        g = L
        for v in nonzero:
            g = gmpy2.gcd(g, v)
            if g == 1:
                break
        if g > 1:
            nums = [gmpy2.divexact(v, g) for v in nums]
            den = gmpy2.divexact(den, g)
    return nums, den


def _pair_orbit(f: IntervalMap, x, n: int):
    """Yield the orbit of rational ``x`` as pairs ``(p, q)`` with ``q > 0``."""
    A, L = f.integer_form
    p, q = _as_pair(x)
    for step in range(n + 1):
        if p < 0 or p > q:
            raise OrbitEscape(f"orbit left [0,1] at step {step}", step=step)
        yield p, q
        if step == n:
            return
        num, den = _hom_eval(A, L, p, q)
        (p,), q = _trim_pair([num], den, L)


def _fast_path(f: IntervalMap, x) -> bool:
    return f.integer_form is not None and is_exact(x)


def iterate(f: IntervalMap, x, n: int) -> tuple:
    """``(x, f(x), ..., f^n(x))``; exact for polynomial maps at rational ``x``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if _fast_path(f, x):
        return tuple(mpq(p, q) for p, q in _pair_orbit(f, x, n))
    x = f._coerce(x)
    out = []
    for step in range(n + 1):
        if not (0 <= x <= 1 if is_exact(x) else -1e-12 <= x <= 1 + 1e-12):
            raise OrbitEscape(f"orbit left [0,1] at step {step}", step=step)
        out.append(x)
        if step < n:
            x = f(x)
    return tuple(out)


class _Window:
    """Open interval membership for floats and unreduced rational pairs."""

    def __init__(self, lo, hi):
        if is_exact(lo) and is_exact(hi):
            self.lo, self.hi = exact(lo), exact(hi)
            self.exact = True
        else:
            self.lo, self.hi = float(lo), float(hi)
            self.exact = False
        if not self.lo < self.hi:
            raise ValueError("empty interval")

    def contains_pair(self, p, q) -> bool:
        if not self.exact:
            return self.contains(float(mpq(p, q)))
        lo, hi = self.lo, self.hi
        return lo.numerator * q < lo.denominator * p and hi.denominator * p < hi.numerator * q

    def contains(self, x) -> bool:
        return self.lo < x < self.hi


def first_entry(f: IntervalMap, x, X: tuple, max_steps: int = 50) -> int | None:
    """Minimal ``s <= max_steps`` with ``f^s(x)`` in the open interval ``X``, else ``None``."""
    lo, hi = X
    if not (0 <= lo and hi <= 1):
        raise PreconditionError("the target interval must lie inside [0, 1]")
    window = _Window(lo, hi)
    if _fast_path(f, x):
        for s, (p, q) in enumerate(_pair_orbit(f, x, max_steps)):
            if window.contains_pair(p, q):
                return s
        return None
    for s, y in enumerate(iterate(f, x, max_steps)):
        if window.contains(y):
            return s
    return None


def stern_brocot(count: int, lo=0, hi=1) -> list:
    """The first ``count`` rationals of the Stern-Brocot tree strictly between ``lo`` and ``hi``.

    Breadth first, left to right within a level; ``lo`` and ``hi`` must be
    adjacent in some Farey sequence (``0`` and ``1`` are).
    """
    lo, hi = exact(lo), exact(hi)
    out: list = []
    level = [(lo, hi)]
    while len(out) < count and level:
        nxt = []
        for a, b in level:
            m = mpq(a.numerator + b.numerator, a.denominator + b.denominator)
            out.append(m)
            nxt += [(a, m), (m, b)]
        level = nxt
    return out[:count]


# ----------------------------------------------------------------------
# jets along orbits

def _series_mul(a: Sequence, b: Sequence, n: int) -> list:
    out = []
    for k in range(n + 1):
        acc = mpz(0)
        for i in range(k + 1):
            if a[i] and b[k - i]:
                acc += a[i] * b[k - i]
        out.append(acc)
    return out


def _series_sqr(a: Sequence, n: int) -> list:
    out = []
    for k in range(n + 1):
        acc = mpz(0)
        for i in range((k + 1) // 2):
            if a[i] and a[k - i]:
                acc += a[i] * a[k - i]
        acc <<= 1
        if k % 2 == 0 and a[k // 2]:
            acc += a[k // 2] ** 2
        out.append(acc)
    return out


def _int_forward(f: IntervalMap, x, steps: int, order: int) -> tuple[list, MPZ]:
    """Jet of ``f^steps`` at rational ``x`` as ``(N, D)`` with ``F_k = N_k / D``."""
    A, L = f.integer_form
    m = len(A) - 1
    p, q = _as_pair(x)
    N = [p, q] + [mpz(0)] * (order - 1)
    N, D = N[: order + 1], q
    for step in range(steps):
        if N[0] < 0 or N[0] > D:
            raise OrbitEscape(f"orbit left [0,1] at step {step}", step=step)
        powers = {1: N}
        for i in range(2, m + 1):
            powers[i] = _series_sqr(powers[i // 2], order) if i % 2 == 0 else _series_mul(powers[i - 1], N, order)
        # sum A_i N^i D^(m-i), over the new denominator L D^m
        acc = [mpz(0)] * (order + 1)
        Dp = mpz(1)
        for i in range(m, -1, -1):
            if i < m:
                Dp = Dp * D
            if not A[i]:
                continue
            if i == 0:
                acc[0] += A[0] * Dp
            else:
                scale_ = A[i] * Dp
                acc = [u + scale_ * v for u, v in zip(acc, powers[i])]
        N, D = _trim_pair(acc, L * Dp, L)
    if N[0] < 0 or N[0] > D:
        raise OrbitEscape(f"orbit left [0,1] at step {steps}", step=steps)
    return N, D


def forward_jet(f: IntervalMap, x, steps: int, order: int) -> Jet:
    """Jet of ``f^steps`` at ``x``, transported along the orbit."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if _fast_path(f, x):
        N, D = _int_forward(f, x, steps, order)
        return Jet(exact(x), tuple(mpq(v, D) for v in N))
    x = float(x) if not f.is_exact else f._coerce(x)
    J = identity(x, order)
    for step in range(steps):
        y = J.value
        if not -1e-12 <= float(y) <= 1 + 1e-12:
            raise OrbitEscape(f"orbit left [0,1] at step {step}", step=step)
        J = jet_compose(f.jet(y, order), J)
    return J


def chain_rule_check(f: IntervalMap, x, steps: int) -> tuple:
    """``(D(f^steps)(x), prod Df(f^j x))`` computed independently."""
    jet = forward_jet(f, x, steps, 1)
    orbit = iterate(f, x, steps)
    prod = orbit[0] * 0 + 1
    for y in orbit[:-1]:
        prod = prod * f.derivative(y)
    return jet.coeffs[1], prod


def _check_orbit_slopes(f: IntervalMap, x, s: int) -> None:
    for j, y in enumerate(iterate(f, x, s)):
        slope = f.derivative(y)
        if (slope == 0) if is_exact(slope) else abs(slope) < 1e-14:
            raise CriticalOrbit(f"Df vanishes at f^{j}(x) = {y}", step=j)


def inverse_branch_schwarzians(f: IntervalMap, x, s: int, d: int) -> SchwarzianSequence:
    """``S_1..S_d`` of the local inverse of ``f^{s+1}`` at ``f^{s+1}(x)``."""
    _check_orbit_slopes(f, x, s)
    F = forward_jet(f, x, s + 1, 2 * d + 1)
    return schwarzian_recursive(jet_reverse(F), d)


def inverse_branch_jet(f: IntervalMap, y, order: int, lap: tuple = (0.0, 1.0)) -> Jet:
    """Jet at ``y`` of the inverse of ``f`` restricted to a monotone ``lap``.

    The preimage is located by bisection in floats, so the jet is a float jet.
    """
    lo, hi = float(lap[0]), float(lap[1])
    flo, fhi = float(f(lo)), float(f(hi))
    y = float(y)
    if not min(flo, fhi) <= y <= max(flo, fhi):
        raise PreconditionError(f"{y} is not in the image of the lap {lap}")
    increasing = fhi > flo
    for _ in range(200):
        mid = (lo + hi) / 2
        if (float(f(mid)) < y) == increasing:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4e-16 * max(1.0, abs(mid)):
            break
    return jet_reverse(f.jet((lo + hi) / 2, order))


# ----------------------------------------------------------------------
# exact inverse-branch Schwarzians in integer form

def _int_reversion(N: Sequence, order: int) -> list:
    """Integer coefficients ``P`` of the inverse of ``sum N_k t^k`` (``k >= 1``).

    The inverse is ``sum P_n u^n / N_1^(2n-1)``; ``P_1 = 1``.
    """
    N1 = N[1]
    W = [mpz(0), mpz(0)]
    scale_ = mpz(1)
    for k in range(2, order + 1):
        W.append(N[k] * scale_)
        scale_ *= N1
    P = [mpz(0), mpz(1)] + [mpz(0)] * (order - 1)
    # T[k][m] = [u^m] P(u)^k
    T = [[mpz(0)] * (order + 1) for _ in range(order + 1)]
    T[1][1] = mpz(1)
    for n in range(2, order + 1):
        for k in range(2, n + 1):
            acc = mpz(0)
            for i in range(1, n - k + 2):
                t = T[k - 1][n - i]
                if t and P[i]:
                    acc += t if i == 1 else P[i] * t
            T[k][n] = acc
        total = mpz(0)
        for k in range(2, n + 1):
            if W[k] and T[k][n]:
                total += W[k] * T[k][n]
        P[n] = -total
        T[1][n] = P[n]
    return P


def _hankel_minors(P: Sequence, size: int) -> list:
    """Leading principal minors of ``[P_{i+j+1}]`` by fraction-free elimination.

    Stops after the first zero pivot.
    """
    M = [[P[i + j + 1] for j in range(size)] for i in range(size)]
    minors, prev = [], mpz(1)
    for k in range(size):
        piv = M[k][k]
        minors.append(piv)
        if piv == 0:
            break
        for i in range(k + 1, size):
            for j in range(i, size):
                M[i][j] = gmpy2.divexact(M[i][j] * piv - M[i][k] * M[k][j], prev)
                M[j][i] = M[i][j]
        prev = piv
    return minors


@dataclass
class ReturnEvent:
    """An orbit entering ``X`` at time ``s``, with the inverse-branch Schwarzians.

    ``values`` holds ``S_1..S_d`` of the local inverse of ``f^{s+1}`` at
    ``f^{s+1}(x)``: :class:`PowerProduct` for exact scans, floats otherwise,
    ``None`` where undefined.  ``kind`` is ``"entry"`` for the first entry
    and ``"return"`` for later visits.
    """

    sample: int
    x: Scalar
    s: int
    X: tuple
    derivative: object
    values: tuple
    flags: tuple
    identity_holds: bool | None
    image: object
    image_bits: int
    max_bits: int
    kind: str = "entry"

    def all_positive(self) -> bool:
        return all(v is not None and v > 0 for v in self.values)

    def schwarzians(self) -> SchwarzianSequence:
        """The values as a :class:`SchwarzianSequence` (expands big factors)."""
        def plain(v):
            return v.to_mpq() if isinstance(v, PowerProduct) else v
        base = plain(self.image)
        one = base * 0 + 1
        return SchwarzianSequence(base, (one,) + tuple(plain(v) for v in self.values),
                                  (DEFINED,) + tuple(self.flags))

    def row(self) -> dict:
        out = {
            "sample": self.sample,
            "x": fmt(self.x),
            "s": self.s,
            "kind": self.kind,
            "Df": _show(self.derivative),
            "all_positive": self.all_positive(),
            "identity": self.identity_holds,
            "image_bits": self.image_bits,
            "max_bits": self.max_bits,
        }
        for k, v in enumerate(self.values, start=1):
            out[f"S{k}"] = _show(v)
        return out


def _shape_key(N: Sequence, D) -> tuple:
    """``F - F(x)`` up to ``t -> -t``, which leaves inverse-branch Schwarzians unchanged."""
    flip = -1 if N[1] < 0 else 1
    return (D,) + tuple(v if k % 2 == 0 else flip * v for k, v in enumerate(N) if k)


def _exact_event(f: IntervalMap, x, s: int, d: int, cache: dict | None = None) -> dict:
    order = 2 * d + 1
    N, D = _int_forward(f, x, s + 1, order)
    N1 = N[1]
    if N1 == 0:
        raise CriticalOrbit("Df^{s+1}(x) vanishes")
    df = PowerProduct(1, [(N1, 1), (D, -1)])
    image = PowerProduct(1, [(N[0], 1), (D, -1)])
    key = _shape_key(N, D) if cache is not None else None
    if key is not None and key in cache:
        values, flags, max_bits = cache[key]
    else:
        P = _int_reversion(N, order)
        H = _hankel_minors(P, d + 1)  # H[k] is the (k+1)-th leading minor
        if len(H) < d + 1 or any(h == 0 for h in H[:d]):
            # a Hankel route breaks down: fall back to the generic pipeline
            F = Jet(exact(x), tuple(mpq(v, D) for v in N))
            seq = schwarzian_recursive(jet_reverse(F), d)
            values = tuple(None if v is None else PowerProduct.of(v) for v in seq.values[1:])
            flags = tuple(seq.flags[1:])
        else:
            values = tuple(
                PowerProduct(math.factorial(2 * k + 1), [(D, 2 * k), (H[k], 1), (H[k - 1], -1), (N1, -4 * k)])
                for k in range(1, d + 1)
            )
            flags = (DEFINED,) * d
        max_bits = max(int(abs(h).bit_length()) for h in H)
        if key is not None:
            cache[key] = (values, flags, max_bits)
    # S_1 of the inverse against -S_1(f^{s+1})(x) / (Df^{s+1})^2 from the forward jet
    forward_s1 = PowerProduct(6, [(N1 * N[3] - N[2] ** 2, 1), (N1, -2)])
    identity_holds = None if values[0] is None else values[0] == -forward_s1 / df**2
    return dict(derivative=df, values=values, flags=flags, identity_holds=identity_holds, image=image,
                image_bits=int(D.bit_length()), max_bits=max_bits)


def _float_event(f: IntervalMap, x, s: int, d: int, cache: dict | None = None) -> dict:
    F = forward_jet(f, x, s + 1, 2 * d + 1)
    if is_exact(F.coeffs[1]) and F.coeffs[1] == 0:
        raise CriticalOrbit("Df^{s+1}(x) vanishes")
    seq = schwarzian_recursive(jet_reverse(F), d)
    forward = schwarzian_recursive(F, 1).values[1]
    rhs = -forward / F.coeffs[1] ** 2
    lhs = seq.values[1]
    if lhs is None:
        holds = None
    elif is_exact(lhs):
        holds = lhs == rhs
    else:
        holds = abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))
    return dict(derivative=F.coeffs[1], values=tuple(seq.values[1:]), flags=tuple(seq.flags[1:]),
                identity_holds=holds, image=F.value, image_bits=64, max_bits=64)


# ----------------------------------------------------------------------
# the scan

@dataclass
class EpsilonSummary:
    eps: Scalar
    X: tuple
    events: list = field(default_factory=list)
    discarded: int = 0
    not_entered: int = 0

    @property
    def n_events(self) -> int:
        return len(self.events)

    @property
    def n_all_positive(self) -> int:
        return sum(e.all_positive() for e in self.events)

    @property
    def fraction_positive(self) -> float | None:
        return self.n_all_positive / self.n_events if self.events else None

    @property
    def identity_failures(self) -> int:
        return sum(e.identity_holds is False for e in self.events)

    def min_values(self, d: int) -> list:
        out = []
        for k in range(d):
            vals = [e.values[k] for e in self.events if e.values[k] is not None]
            out.append(min(vals) if vals else None)
        return out

    def witnesses(self) -> list:
        found = []
        for e in self.events:
            for k, v in enumerate(e.values, start=1):
                if v is None or not v > 0:
                    found.append({"sample": e.sample, "x": fmt(e.x), "s": e.s, "k": k, "S": _show(v)})
        return found

    def to_dict(self, d: int) -> dict:
        return {
            "eps": fmt(self.eps),
            "X": [fmt(v) for v in self.X],
            "events": self.n_events,
            "all_positive": self.n_all_positive,
            "fraction_positive": self.fraction_positive,
            "min_Sk": [_show(v) for v in self.min_values(d)],
            "witnesses": self.witnesses(),
            "discarded": self.discarded,
            "not_entered": self.not_entered,
            "identity_failures": self.identity_failures,
            "max_image_bits": max((e.image_bits for e in self.events), default=0),
            "max_bits": max((e.max_bits for e in self.events), default=0),
        }


@dataclass
class ScanReport:
    map: str
    critical_point: Scalar
    d: int
    max_steps: int
    samples: list
    summaries: list
    elapsed: float = 0.0

    def summary(self, eps) -> EpsilonSummary:
        for s in self.summaries:
            if s.eps == eps:
                return s
        raise KeyError(eps)

    def to_dict(self, events: bool = False) -> dict:
        out = {
            "schema": "v1",
            "map": self.map,
            "critical_point": fmt(self.critical_point),
            "d": self.d,
            "max_steps": self.max_steps,
            "samples": len(self.samples),
            "epsilons": [s.to_dict(self.d) for s in self.summaries],
        }
        if events:
            out["event_rows"] = self.rows()
        return out

    def rows(self) -> list[dict]:
        out = []
        for summ in self.summaries:
            for e in summ.events:
                out.append({"eps": fmt(summ.eps), **e.row()})
        return out

    def to_csv(self) -> str:
        cols = ["eps", "sample", "x", "s", "kind", "Df"] + [f"S{k}" for k in range(1, self.d + 1)] + [
            "all_positive", "identity", "image_bits", "max_bits"]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\r\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: row.get(k) for k in cols})
        return buf.getvalue()


def _is_critical(f: IntervalMap, c) -> bool:
    for info in f.critical_points:
        if info.exact and is_exact(c):
            if exact(c) == info.point:
                return True
        elif abs(float(c) - float(info.point)) <= 1e-9:
            return True
    return False


def _orbit_flags(f: IntervalMap, x, n: int, windows: list, stop_early: bool):
    """Per step: membership in each window and whether the point is critical."""
    exact_crit = [(c.point.numerator, c.point.denominator) for c in f.critical_points if c.exact]
    if _fast_path(f, x):
        orbit = _pair_orbit(f, x, n)
        inside = lambda w, pt: w.contains_pair(*pt)  # noqa: E731
        critical = lambda pt: any(a * pt[1] == b * pt[0] for a, b in exact_crit)  # noqa: E731
    else:
        orbit = iter(iterate(f, x, n))
        inside = lambda w, pt: w.contains(pt)  # noqa: E731
        critical = lambda pt: abs(float(f.derivative(pt))) < 1e-14  # noqa: E731
    seen = [False] * len(windows)
    for pt in orbit:
        member = [inside(w, pt) for w in windows]
        yield member, critical(pt)
        for i, m in enumerate(member):
            seen[i] = seen[i] or m
        if stop_early and all(seen):
            return


def _sample_events(args, shared: dict | None = None) -> list:
    f, index, x, d, windows, max_steps, include_returns = args
    per_window: list = [{"events": [], "discarded": 0, "not_entered": 0} for _ in windows]
    cache: dict = {}
    hit_critical = False
    entered = [False] * len(windows)
    for s, (member, crit) in enumerate(_orbit_flags(f, x, max_steps, windows, not include_returns)):
        hit_critical = hit_critical or crit
        for i, inside in enumerate(member):
            if not inside or (entered[i] and not include_returns):
                continue
            kind = "return" if entered[i] else "entry"
            entered[i] = True
            if hit_critical:
                per_window[i]["discarded"] += 1
                continue
            if s not in cache:
                compute = _exact_event if _fast_path(f, x) else _float_event
                try:
                    cache[s] = compute(f, x, s, d, shared)
                except CriticalOrbit:
                    cache[s] = None
            data = cache[s]
            if data is None:
                per_window[i]["discarded"] += 1
                continue
            per_window[i]["events"].append(ReturnEvent(sample=index, x=x, s=s, X=(windows[i].lo, windows[i].hi),
                                                       kind=kind, **data))
    for i, done in enumerate(entered):
        if not done:
            per_window[i]["not_entered"] += 1
    return per_window


def first_entry_scan(f: IntervalMap, c, d: int, eps_list: Sequence, samples=200, max_steps: int = 50,
                  include_returns: bool = False, workers: int = 1) -> ScanReport:
    """Inverse-branch Schwarzians at first entries into ``(c - eps, c + eps)``.

    ``samples`` is a count (taken from the Stern-Brocot tree on ``(0, 1)``)
    or an explicit sequence of points.  Events whose orbit meets a critical
    point before the entry are discarded and counted.  Results are ordered
    by sample index whatever ``workers`` is.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if not f.critical_points:
        raise PreconditionError(f"{f.name} has no critical point in (0, 1)")
    if not _is_critical(f, c):
        raise PreconditionError(f"{c} is not a critical point of {f.name}")
    c = exact(c) if f.is_exact and is_exact(c) else float(c)
    windows = []
    for eps in eps_list:
        eps = exact(eps) if is_exact(eps) or isinstance(eps, str) else float(eps)
        if not eps > 0:
            raise ValueError("eps must be positive")
        lo, hi = c - eps, c + eps
        if not (0 <= lo and hi <= 1):
            raise PreconditionError(f"(c - {eps}, c + {eps}) is not inside [0, 1]")
        windows.append(_Window(lo, hi))
    if isinstance(samples, int):
        points = stern_brocot(samples)
    else:
        points = [exact(v) if is_exact(v) or isinstance(v, str) else float(v) for v in samples]
    if not f.is_exact:
        points = [float(p) for p in points]
    start = time.perf_counter()
    jobs = [(f, i, x, d, windows, max_steps, include_returns) for i, x in enumerate(points)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sample_events, jobs))
    else:
        shared: dict = {}
        results = [_sample_events(job, shared) for job in jobs]
    summaries = []
    for i, (eps, w) in enumerate(zip(eps_list, windows)):
        summ = EpsilonSummary(eps=exact(eps) if is_exact(eps) or isinstance(eps, str) else float(eps), X=(w.lo, w.hi))
        for res in results:
            summ.events.extend(res[i]["events"])
            summ.discarded += res[i]["discarded"]
            summ.not_entered += res[i]["not_entered"]
        summaries.append(summ)
    return ScanReport(map=f.name, critical_point=c, d=d, max_steps=max_steps, samples=points,
                      summaries=summaries, elapsed=time.perf_counter() - start)


# operation name used by the published interface
theorem1_scan = first_entry_scan
