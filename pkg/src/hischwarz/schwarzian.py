"""Higher-order Schwarzian derivatives.

``S_d(f)(x)`` is computed three independent ways:

* :func:`schwarzian_det` -- the Hankel determinant ratio
  ``(2d+1)! det M_{d+1} / (Df det M_d)``;
* :func:`schwarzian_defect` -- ``D^{2d+1}(f - R)(x) / Df(x)`` with ``R`` the
  ``d``-th Padé approximant;
* :func:`schwarzian_recursive` -- repeated Pick steps, using
  ``S_d(f) = 2d(2d+1) D(Pick f) S_{d-1}(Pick f)``.

The Pick step ``f -> (1 - Df(x)(z-x)/(f(z)-f(x)))/(z-x)`` also yields the
Jacobi-type continued fraction of a jet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import pade as _pade
from .errors import CriticalPoint, HypothesisViolation, NotNormal, OrderTooSmall, PoleError
from .jets import Jet, constant, jet_compose
from .pade import RationalMap, hankel_det, is_normal, pade_approximant
from .scalar import Scalar, fmt, is_exact, is_zero, like, unify

DEFINED = "defined"
DEGENERATE = "degenerate"
NOT_NORMAL = "not-normal"


@dataclass(frozen=True)
class SchwarzianSequence:
    """``S_0 .. S_d`` at ``base``; undefined entries are ``None``.

    ``flags[k]`` is ``"defined"`` for values obtained through a normal
    Hankel system, ``"degenerate"`` when the Padé approximant of order ``k``
    exists only with lower degree (the value then comes from the defect
    definition), and ``"not-normal"`` when no approximant exists.
    """

    base: Scalar
    values: tuple
    flags: tuple

    @property
    def d(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int):
        return self.values[k]

    def defined(self, k: int) -> bool:
        return self.values[k] is not None

    def all_positive(self) -> bool:
        return all(v is not None and v > 0 for v in self.values[1:])

    def to_dict(self) -> dict:
        return {
            "base": fmt(self.base),
            "S": [fmt(v) for v in self.values[1:]],
            "flags": list(self.flags[1:]),
        }


@dataclass(frozen=True)
class ContinuedFractionRep:
    """Coefficients of

        A_0 + mu_0 t / (1 - t A_1 - mu_1 t^2 / (1 - t A_2 - ... / (1 - t A_d)))

    with ``t = z - base``.
    """

    base: Scalar
    A: tuple
    mu: tuple
    terminated: bool = False

    def __post_init__(self):
        if len(self.A) != len(self.mu) + 1:
            raise ValueError("need exactly one more A coefficient than mu coefficients")
        values, _ = unify([self.base, *self.A, *self.mu])
        n = len(self.A)
        object.__setattr__(self, "base", values[0])
        object.__setattr__(self, "A", tuple(values[1 : n + 1]))
        object.__setattr__(self, "mu", tuple(values[n + 1 :]))

    @property
    def depth(self) -> int:
        return len(self.mu)

    def to_rational_map(self) -> RationalMap:
        """Fold the fraction bottom-up with inverse Pick steps."""
        one = self.A[0] * 0 + 1
        zero = one * 0
        p, q = [self.A[-1]], [one]
        for A, mu in zip(reversed(self.A[:-1]), reversed(self.mu)):
            # A + mu t q / (q - t p)
            den = _sub(q, [zero] + p)
            num = _add([A * c for c in den], [zero] + [mu * c for c in q])
            p, q = num, den
        return RationalMap.from_fraction(p, q, self.base)

    def jet(self, order: int) -> Jet:
        return self.to_rational_map().jet(order)

    def to_dict(self) -> dict:
        return {
            "base": fmt(self.base),
            "A": [fmt(a) for a in self.A],
            "mu": [fmt(m) for m in self.mu],
            "terminated": self.terminated,
        }


def _add(a, b):
    n = max(len(a), len(b))
    zero = (a + b)[0] * 0
    return [(a[i] if i < len(a) else zero) + (b[i] if i < len(b) else zero) for i in range(n)]


def _sub(a, b):
    return _add(a, [-c for c in b])


def _close(a: Scalar, b: Scalar, scale: float = 1.0, rtol: float = 1e-9) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= rtol * max(scale, abs(float(a)), abs(float(b)))


def _require(f: Jet, order: int, what: str) -> None:
    if f.order < order:
        raise OrderTooSmall(f"{what} needs a jet of order {order}, got {f.order}")


def _check_slope(f: Jet) -> None:
    if f.slope_vanishes():
        raise CriticalPoint(f"Df vanishes at {f.base}")


# ----------------------------------------------------------------------
# three routes to S_d

def schwarzian_det(f: Jet, d: int) -> Scalar:
    """``(2d+1)! det M_{d+1}(x,f) / (Df(x) det M_d(x,f))``."""
    _require(f, 2 * d + 1, f"S_{d}")
    _check_slope(f)
    if not is_normal(f, d):
        raise NotNormal(f"not normal of order {d} at {f.base}", level=d)
    ratio = hankel_det(f, d + 1) / (f.derivative(1) * hankel_det(f, d))
    return math.factorial(2 * d + 1) * ratio


def schwarzian_defect(f: Jet, d: int) -> Scalar:
    """``D^{2d+1}(f - R)(x) / Df(x)`` with ``R`` the ``d``-th Padé approximant.

    Degenerate approximants (lower degree but still coinciding to order
    ``2d``) are accepted.
    """
    _require(f, 2 * d + 1, f"S_{d}")
    _check_slope(f)
    R = pade_approximant(f, d, allow_degenerate=True)
    r = R.jet(2 * d + 1)
    top = 2 * d + 1
    return math.factorial(top) * (f.coeffs[top] - r.coeffs[top]) / f.derivative(1)


def pick_step(f: Jet) -> Jet:
    """Jet of ``z -> (1 - Df(x)(z-x)/(f(z)-f(x)))/(z-x)``; two orders are lost."""
    _require(f, 2, "the Pick step")
    _check_slope(f)
    c = f.coeffs
    # f(z) - f(x) = (z-x) h(z)
    h = Jet(f.base, c[1:])
    ratio = constant(f.base, c[1], h.order) / h
    tail = tuple(-v for v in ratio.coeffs[1:])
    return Jet(f.base, tail)


def pick_inverse_step(t: Jet, A: Scalar, mu: Scalar) -> Jet:
    """Jet of ``z -> A + mu (z-x) / (1 - (z-x) t(z))``; two orders are gained."""
    values, _ = unify([t.base, A, mu, *t.coeffs])
    base, A, mu = values[:3]
    tc = values[3:]
    if is_zero(mu, max(1.0, abs(float(A)))):
        raise ValueError("mu must be nonzero")
    zero = A * 0
    n = len(tc)  # 1 - (z-x) t has order n
    den = Jet(base, tuple([zero + 1] + [-v for v in tc]))
    frac = constant(base, mu, n) / den
    return Jet(base, (A,) + frac.coeffs)


def _tail_is_constant(f: Jet) -> bool:
    scale = f.scale()
    return all(is_zero(c, scale) for c in f.coeffs[1:])


def schwarzian_recursive(f: Jet, d: int) -> SchwarzianSequence:
    """``S_0 .. S_d`` through repeated Pick steps.

    Unrolling the recursion gives ``S_k = (2k+1)! prod_{j=1..k} D(Pick^j f)(x)``.
    When some ``D(Pick^j f)(x)`` vanishes the Hankel route stops; higher
    orders fall back to the defect definition when the approximant still
    exists (flag ``"degenerate"``) and are left undefined otherwise.
    """
    _require(f, 2 * d + 1, f"S_{d}")
    _check_slope(f)
    one = like(1, f.base)
    values, flags = [one], [DEFINED]
    current, product = f, one
    stopped_at = None
    for k in range(1, d + 1):
        current = pick_step(current)
        slope = current.coeffs[1]
        product = product * slope
        values.append(math.factorial(2 * k + 1) * product)
        flags.append(DEFINED)
        if is_zero(slope, current.scale()):
            stopped_at = k
            break
    if stopped_at is not None:
        for k in range(stopped_at + 1, d + 1):
            try:
                values.append(schwarzian_defect(f, k))
                flags.append(DEGENERATE)
            except NotNormal:
                values.append(None)
                flags.append(NOT_NORMAL)
    return SchwarzianSequence(f.base, tuple(values), tuple(flags))


def schwarzian(f: Jet, d: int) -> Scalar:
    """``S_d(f)`` at the base point, accepting degenerate approximants."""
    seq = schwarzian_recursive(f, d)
    if seq.values[d] is None:
        raise NotNormal(f"S_{d} does not exist at {f.base}", level=d)
    return seq.values[d]


# ----------------------------------------------------------------------
# continued fractions

def continued_fraction(f: Jet, d: int) -> ContinuedFractionRep:
    """Depth-``d`` Jacobi continued fraction of ``f`` at its base point.

    ``A_k`` and ``mu_k`` are the value and slope of ``Pick^k f``.  A fraction
    whose tail becomes constant terminates early (``terminated=True``);
    a vanishing slope with a non-constant tail raises :class:`NotNormal`
    carrying the partial representation.
    """
    _require(f, 2 * d, f"a depth-{d} continued fraction")
    A, mu = [], []
    current = f
    for k in range(d):
        A.append(current.coeffs[0])
        slope = current.coeffs[1]
        if is_zero(slope, current.scale()):
            partial = ContinuedFractionRep(f.base, tuple(A), tuple(mu), terminated=True)
            if _tail_is_constant(current):
                return partial
            raise NotNormal(f"not normal of order {k + 1} at {f.base}", level=k + 1, partial=partial)
        mu.append(slope)
        current = pick_step(current)
    A.append(current.coeffs[0])
    return ContinuedFractionRep(f.base, tuple(A), tuple(mu))


# ----------------------------------------------------------------------
# composition

@dataclass(frozen=True)
class CompositionRecord:
    lhs: Scalar
    rhs_sum: Scalar
    extra_term: Scalar
    holds: bool

    def to_dict(self) -> dict:
        return {
            "lhs": fmt(self.lhs),
            "rhs_sum": fmt(self.rhs_sum),
            "extra_term": fmt(self.extra_term),
            "holds": self.holds,
        }


def _composite(g: Jet, f: Jet, d: int) -> Jet:
    _require(f, 2 * d + 1, f"S_{d}(f)")
    _require(g, 2 * d + 1, f"S_{d}(g)")
    _check_slope(f)
    _check_slope(g)
    return jet_compose(g, f)


def composition_check(f: Jet, g: Jet, d: int) -> CompositionRecord:
    """Evaluate both sides of the composition formula for ``S_d(g o f)``.

    The extra term is ``S_d`` of the composite of the two Padé approximants,
    formed by exact polynomial arithmetic and then expanded at ``x``.
    """
    gf = _composite(g, f, d)
    lhs = schwarzian(gf, d)
    Df = f.coeffs[1]
    rhs_sum = schwarzian(g, d) * Df ** (2 * d) + schwarzian(f, d)
    F = pade_approximant(f, d, allow_degenerate=True)
    G = pade_approximant(g, d, allow_degenerate=True)
    GF = _pade.compose(G, F)
    extra = schwarzian(GF.jet(2 * d + 1), d)
    holds = _close(lhs, rhs_sum + extra, max(1.0, abs(float(lhs))))
    return CompositionRecord(lhs, rhs_sum, extra, holds)


def composition_inequality_check(f: Jet, g: Jet, d: int) -> bool:
    """``S_d(g o f)(x) >= S_d(g)(f(x)) Df(x)^{2d} + S_d(f)(x)``.

    Raises :class:`HypothesisViolation` unless every lower-order Schwarzian
    of ``f`` and ``g`` is defined and non-negative and ``S_d`` of both exists.
    """
    gf = _composite(g, f, d)
    sf, sg = schwarzian_recursive(f, d), schwarzian_recursive(g, d)
    for name, seq in (("f", sf), ("g", sg)):
        for k in range(1, d + 1):
            v = seq.values[k]
            if v is None:
                raise HypothesisViolation(f"S_{k}({name}) does not exist")
            if k < d and v < 0 and not is_zero(v, 1.0, 1e-12):
                raise HypothesisViolation(f"S_{k}({name}) = {v} is negative")
    lhs = schwarzian(gf, d)
    rhs = sg.values[d] * f.coeffs[1] ** (2 * d) + sf.values[d]
    if is_exact(lhs) and is_exact(rhs):
        return lhs >= rhs
    return float(lhs) >= float(rhs) - 1e-9 * max(1.0, abs(float(rhs)))


def _mobius_preimage(M: RationalMap, y: Scalar) -> Scalar:
    p0 = M.p[0]
    p1 = M.p[1] if len(M.p) > 1 else p0 * 0
    q1 = M.q[1] if len(M.q) > 1 else p0 * 0
    values, _ = unify([y, p0, p1, q1, M.base])
    y, p0, p1, q1, b = values
    den = p1 - y * q1
    if den == 0:
        raise PoleError(f"{y} is the image of infinity under M")
    return b + (y - p0) / den


def mobius_precomposition_check(f: Jet, M: RationalMap, d: int) -> bool:
    """Check ``S_d(f o M) = S_d(f) o M (DM)^{2d}`` and ``S_d(M o f) = S_d(f)``.

    ``f`` is based at ``y``; the pre-composition is evaluated at ``M^{-1}(y)``.
    """
    if M.is_exact and M.degree != 1:
        raise ValueError("M must be a Möbius transformation (degree 1)")
    order = f.order
    _require(f, 2 * d + 1, f"S_{d}")
    x0 = _mobius_preimage(M, f.base)
    m_jet = M.jet_at(x0, order)
    pre = schwarzian(jet_compose(f, m_jet), d)
    s_f = schwarzian(f, d)
    ok_pre = _close(pre, s_f * m_jet.coeffs[1] ** (2 * d), max(1.0, abs(float(pre))))
    post_jet = M.jet_at(f.value, order)
    post = schwarzian(jet_compose(post_jet, f), d)
    ok_post = _close(post, s_f, max(1.0, abs(float(post))))
    return ok_pre and ok_post
