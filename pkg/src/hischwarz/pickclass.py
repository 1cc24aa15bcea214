"""Pick-class certification and sampling checks.

A real rational map is Pick (maps the upper half-plane into its closure)
exactly when, at any real point ``x`` where it is finite, ``DR(x) > 0`` and
its Schwarzians of order below the degree are non-negative.  Equivalently,
repeated Pick steps keep a positive slope all the way down to a constant.
Both routes are implemented and can be compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import poly
from .errors import CriticalPoint, PoleError, PreconditionError, SamplingFailure
from .jets import Jet
from .pade import RationalMap, rational_degree
from .scalar import Scalar, exact, fmt, is_exact, is_zero, sign, unify
from .schwarzian import schwarzian_recursive

PICK = "Pick"
NOT_PICK = "NotPick"
INCONCLUSIVE = "Inconclusive"

SCHWARZIAN_SIGNS = "schwarzian-signs"
DEGREE_REDUCTION = "degree-reduction"


@dataclass(frozen=True)
class PickLevel:
    k: int
    derivative: Scalar
    positive: bool
    schwarzian: Scalar | None

    def to_dict(self) -> dict:
        return {"k": self.k, "derivative": fmt(self.derivative), "positive": self.positive,
                "S": fmt(self.schwarzian)}


@dataclass(frozen=True)
class PickCertificate:
    degree: int
    base_point: Scalar
    levels: tuple
    verdict: str
    method: str
    strict: bool
    weak: bool
    cross_checks: tuple = ()

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "base_point": fmt(self.base_point),
            "levels": [lv.to_dict() for lv in self.levels],
            "verdict": self.verdict,
            "method": self.method,
            "strict": self.strict,
            "weak": self.weak,
            "cross_checks": [{"point": fmt(p), "verdict": v} for p, v in self.cross_checks],
        }


def pick_rational(R: RationalMap) -> RationalMap:
    """One Pick step on a rational map, at its own base point.

    With ``R = p/q`` and ``R(z) - R(x) = t u(t) / q(t)``, the result is
    ``(u - DR(x) q) / (t u)``, reduced and normalized.
    """
    p, q = list(R.p), list(R.q)
    zero = q[0] * 0
    u = poly.shift_down(poly.sub(p, poly.scale(q, R.value)) + [zero])
    slope = u[0]
    if is_zero(slope, max(1.0, max(abs(float(c)) for c in u))):
        raise CriticalPoint(f"DR vanishes at {R.base}")
    v = poly.shift_down(poly.sub(u, poly.scale(q, slope)) + [zero])
    return RationalMap.from_fraction(v, u, R.base).reduced()


def _positive(value: Scalar, scale: float) -> int:
    """+1, 0 or -1; 0 only for float values inside the tolerance band."""
    return sign(value, scale)


def _certify_signs(R: RationalMap, degree: int) -> tuple[list[PickLevel], bool, bool, bool]:
    jet = R.jet(2 * degree + 1)
    scale = jet.scale()
    s1 = _positive(jet.coeffs[1], scale)
    levels = [PickLevel(0, jet.coeffs[1], s1 > 0, None)]
    if s1 <= 0:
        return levels, False, False, s1 == 0
    if degree == 1:
        return levels, True, True, False
    seq = schwarzian_recursive(jet, degree - 1)
    strict = weak = True
    unsure = False
    for k in range(1, degree):
        v = seq.values[k]
        if v is None:
            levels.append(PickLevel(k, jet.coeffs[1], True, None))
            return levels, False, False, False
        sk = _positive(v, scale ** (2 * k))
        levels.append(PickLevel(k, jet.coeffs[1], True, v))
        strict &= sk > 0
        weak &= sk >= 0
        unsure |= sk == 0 and not is_exact(v)
    return levels, strict, weak, unsure


def _certify_reduction(R: RationalMap, degree: int) -> tuple[list[PickLevel], bool, bool, bool]:
    levels = []
    current = R
    product = current.value * 0 + 1
    strict = True
    for k in range(degree):
        slope = current.slope
        scale = max(1.0, max(abs(float(c)) for c in current.p + current.q))
        s = _positive(slope, scale)
        if k > 0:
            product = product * slope
        value = None if k == 0 else math.factorial(2 * k + 1) * product
        levels.append(PickLevel(k, slope, s > 0, value))
        if s <= 0:
            return levels, False, False, s == 0
        if k == degree - 1:
            break
        current = pick_rational(current)
    # the last reduction lands on a constant
    return levels, strict, True, False


def _verdict(ok: bool, unsure: bool) -> str:
    if unsure:
        return INCONCLUSIVE
    return PICK if ok else NOT_PICK


def _auto_points(R: RationalMap, x: Scalar, count: int = 2) -> list:
    picks = []
    step = exact(1) if is_exact(x) else 1.0
    for k in range(1, 40):
        for cand in (x + step * k / 3, x - step * k / 5):
            try:
                R.recentre(cand)
            except PoleError:
                continue
            picks.append(cand)
            if len(picks) == count:
                return picks
    return picks


def certify_pick(R: RationalMap, x: Scalar | None = None, method: str = SCHWARZIAN_SIGNS,
                 cross_validate: bool = True) -> PickCertificate:
    """Certify whether ``R`` is in the Pick class by looking at one point.

    ``method`` is ``"schwarzian-signs"`` (slope and ``S_1..S_{deg-1}`` at ``x``)
    or ``"degree-reduction"`` (positive slope through every Pick step).
    With ``cross_validate`` the same check runs at two further points and
    any disagreement downgrades the verdict to ``"Inconclusive"``.
    """
    x = R.base if x is None else x
    R = R.reduced().recentre(x)
    degree = rational_degree(R) if R.is_exact else max(len(R.p), len(R.q)) - 1
    if degree == 0:
        return PickCertificate(0, R.base, (), PICK, method, True, True)
    if method == SCHWARZIAN_SIGNS:
        levels, strict, weak, unsure = _certify_signs(R, degree)
    elif method == DEGREE_REDUCTION:
        levels, strict, weak, unsure = _certify_reduction(R, degree)
    else:
        raise ValueError(f"unknown method {method!r}")
    verdict = _verdict(weak, unsure)
    checks = []
    if cross_validate:
        for pt in _auto_points(R, R.base):
            other = certify_pick(R, pt, method, cross_validate=False)
            checks.append((other.base_point, other.verdict))
            if other.verdict != verdict:
                verdict = INCONCLUSIVE
    return PickCertificate(degree, R.base, tuple(levels), verdict, method, strict, weak, tuple(checks))


# ----------------------------------------------------------------------
# sampling the upper half-plane

@dataclass(frozen=True)
class HalfplaneGrid:
    re: tuple = (-5.0, 5.0)
    im: tuple = (1e-3, 1e3)
    n_re: int = 40
    n_im: int = 40
    log_im: bool = True

    def points(self) -> np.ndarray:
        xs = np.linspace(self.re[0], self.re[1], self.n_re)
        if self.log_im:
            ys = np.geomspace(self.im[0], self.im[1], self.n_im)
        else:
            ys = np.linspace(self.im[0], self.im[1], self.n_im)
        return (xs[None, :] + 1j * ys[:, None]).ravel()


@dataclass
class HalfplaneReport:
    min_im: float
    argmin: complex
    n_points: int
    failures: list = field(default_factory=list)
    passed: bool = True

    def to_dict(self) -> dict:
        return {
            "min_im": self.min_im,
            "argmin": [self.argmin.real, self.argmin.imag],
            "n_points": self.n_points,
            "failures": [[z.real, z.imag] for z in self.failures],
            "verdict": "PASS" if self.passed else "FAIL",
        }


def _im_exact(R: RationalMap, z: complex) -> float | None:
    """``Im R(z)`` through Gaussian-rational arithmetic; ``None`` at a pole."""
    tr, ti = exact(z.real) - R.base, exact(z.imag)

    def horner(c):
        ar, ai = c[-1], c[-1] * 0
        for coef in reversed(c[:-1]):
            ar, ai = ar * tr - ai * ti + coef, ar * ti + ai * tr
        return ar, ai

    pr, pi = horner(list(R.p))
    qr, qi = horner(list(R.q))
    norm = qr * qr + qi * qi
    if norm == 0:
        return None
    return float((pi * qr - pr * qi) / norm)


def halfplane_sample_check(R: RationalMap, grid: HalfplaneGrid | None = None,
                           tol: float = 1e-12) -> HalfplaneReport:
    """Evaluate ``R`` on a grid in the upper half-plane and report ``min Im R``.

    Exact maps are evaluated in exact Gaussian-rational arithmetic (the grid
    points themselves are binary64 values, hence exact dyadic rationals).
    Poles count as failures.
    """
    grid = grid or HalfplaneGrid()
    zs = grid.points()
    if R.is_exact:
        ims = np.array([np.nan if (v := _im_exact(R, complex(z))) is None else v for z in zs])
    else:
        with np.errstate(all="ignore"):
            ims = np.imag(R.evaluate_array(zs))
    bad = ~np.isfinite(ims) | (ims < -tol)
    finite = np.where(np.isfinite(ims), ims, np.inf)
    i = int(np.argmin(finite))
    return HalfplaneReport(
        min_im=float(finite[i]),
        argmin=complex(zs[i]),
        n_points=len(zs),
        failures=[complex(z) for z in zs[bad]],
        passed=not bad.any(),
    )


# ----------------------------------------------------------------------
# cross-ratio matrix

@dataclass(frozen=True)
class CrossRatioMatrix:
    points: tuple
    entries: np.ndarray
    eigenvalues: np.ndarray

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues.min())

    def to_dict(self) -> dict:
        return {
            "points": [fmt(p) for p in self.points],
            "entries": self.entries.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
        }


def crossratio_matrix(points: Sequence[Scalar], values: Sequence[Scalar],
                      derivatives: Sequence[Scalar]) -> CrossRatioMatrix:
    """Matrix of ``sqrt(((f_i - f_j)/(l_i - l_j))^2 / (Df_i Df_j))``, unit diagonal.

    The quantity under the root is formed in the inputs' backend; only the
    square root and the spectrum are taken in floating point.
    """
    n = len(points)
    if not (len(values) == len(derivatives) == n):
        raise ValueError("points, values and derivatives must have equal length")
    if len(set(points)) != n:
        raise PreconditionError("sample points must be distinct")
    allv, _ = unify([*points, *values, *derivatives])
    lam, fv, dv = allv[:n], allv[n : 2 * n], allv[2 * n :]
    for i, dfi in enumerate(dv):
        if is_zero(dfi, 1.0, 0.0):
            raise CriticalPoint(f"derivative vanishes at sample point {lam[i]}")
    m = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            slope = (fv[i] - fv[j]) / (lam[i] - lam[j])
            inner = slope * slope / (dv[i] * dv[j])
            if inner < 0:
                raise PreconditionError(
                    f"negative cross-ratio at ({lam[i]}, {lam[j]}): derivatives of opposite sign"
                )
            m[i, j] = m[j, i] = math.sqrt(float(inner))
    return CrossRatioMatrix(tuple(lam), m, np.linalg.eigvalsh(m))


def crossratio_from_map(R: RationalMap, points: Sequence[Scalar]) -> CrossRatioMatrix:
    """Cross-ratio matrix of a rational map at the given real points."""
    values, derivs = [], []
    for pt in points:
        j = R.jet_at(pt, 1)
        values.append(j.coeffs[0])
        derivs.append(j.coeffs[1])
    return crossratio_matrix(points, values, derivs)


# ----------------------------------------------------------------------
# P_d(U) membership on a grid

JetSource = Callable[[Scalar, int], Jet]


def interior_grid(lo, hi, n: int) -> list:
    """``n`` equally spaced interior points of ``(lo, hi)``; exact when the ends are."""
    vals, _ = unify([lo, hi])
    lo, hi = vals
    return [lo + (hi - lo) * (i + 1) / (n + 1) for i in range(n)]


@dataclass
class MembershipReport:
    d: int
    points: list
    values: list
    passed: bool
    failures: list

    def signs(self) -> list[list[int]]:
        """Per point, the sign of ``S_1..S_d`` (``None`` where undefined)."""
        out = []
        for row in self.values:
            out.append([None if v is None else (0 if v == 0 else (1 if v > 0 else -1)) for v in row])
        return out

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "points": [fmt(p) for p in self.points],
            "S": [[fmt(v) for v in row] for row in self.values],
            "signs": self.signs(),
            "failures": [fmt(p) for p in self.failures],
            "verdict": "PASS" if self.passed else "FAIL",
        }


def pd_membership(source: JetSource, d: int, points: Sequence[Scalar],
                  tol: float = 1e-9) -> MembershipReport:
    """Evaluate ``S_1..S_d`` at each point and test non-negativity.

    ``source(x, order)`` must return the jet of the map at ``x``.  Exact
    values must be ``>= 0``; float values ``>= -tol * scale``.  A Schwarzian
    that does not exist counts as a failure.
    """
    values, failures = [], []
    for x in points:
        jet = source(x, 2 * d + 1)
        if jet.slope_vanishes():
            raise CriticalPoint(f"Df vanishes at {x}")
        seq = schwarzian_recursive(jet, d)
        row = list(seq.values[1:])
        values.append(row)
        scale = jet.scale()
        ok = True
        for k, v in enumerate(row, start=1):
            if v is None:
                ok = False
            elif is_exact(v):
                ok &= v >= 0
            else:
                ok &= v >= -tol * scale ** (2 * k)
        if not ok:
            failures.append(x)
    return MembershipReport(d, list(points), values, not failures, failures)


# ----------------------------------------------------------------------
# matrix monotonicity

@dataclass
class MonotoneReport:
    n: int
    trials: int
    min_eigenvalue: float
    worst_trial: int
    passed: bool
    witness: tuple | None = None
    rejections: int = 0

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "trials": self.trials,
            "min_eigenvalue": self.min_eigenvalue,
            "worst_trial": self.worst_trial,
            "rejections": self.rejections,
            "verdict": "PASS" if self.passed else "FAIL",
        }
        if self.witness is not None:
            out["witness"] = {"A": self.witness[0].tolist(), "B": self.witness[1].tolist()}
        return out


def matrix_function(f: Callable, A: np.ndarray) -> np.ndarray:
    """``f(A)`` for symmetric ``A`` through its eigendecomposition."""
    w, V = np.linalg.eigh(A)
    return (V * np.asarray(f(w), dtype=float)) @ V.T


def _finite_bounds(U: tuple[float, float]) -> tuple[float, float]:
    lo, hi = float(U[0]), float(U[1])
    if math.isinf(lo) and math.isinf(hi):
        return -10.0, 10.0
    if math.isinf(lo):
        return hi - 10.0 - abs(hi), hi
    if math.isinf(hi):
        return lo, lo + 10.0 + abs(lo)
    return lo, hi


def random_ordered_pair(rng: np.random.Generator, U: tuple[float, float], n: int,
                        max_rejections: int = 1000) -> tuple[np.ndarray, np.ndarray, int]:
    """Symmetric ``A <= B`` with both spectra inside the open interval ``U``.

    ``A`` has eigenvalues uniform in the central 96% of ``U``;
    ``B = A + s G G^T`` with ``s`` scaled so that ``B`` stays below the top of ``U``.
    Infinite ends of ``U`` are replaced by a finite window.
    """
    lo, hi = _finite_bounds(U)
    width = hi - lo
    for attempt in range(max_rejections):
        lam = lo + width * rng.uniform(0.02, 0.98, size=n)
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        A = (Q * lam) @ Q.T
        A = (A + A.T) / 2
        G = rng.standard_normal((n, n))
        P = G @ G.T
        room = hi - lam.max()
        s = rng.uniform(0.0, 1.0) * room / np.linalg.norm(P, 2)
        B = A + s * P
        B = (B + B.T) / 2
        wa, wb = np.linalg.eigvalsh(A), np.linalg.eigvalsh(B)
        if wa.min() > lo and wb.max() < hi and wa.max() < hi and wb.min() > lo:
            return A, B, attempt
    raise SamplingFailure(f"no admissible pair after {max_rejections} attempts")


def matrix_monotone_test(f: Callable, U: tuple[float, float], n: int, trials: int = 1000,
                         seed: int = 0, pairs: Sequence[tuple] | None = None,
                         max_rejections: int = 1000) -> MonotoneReport:
    """Randomized test of ``A <= B  =>  f(A) <= f(B)`` on ``n x n`` matrices.

    Trial ``i`` draws from ``numpy.random.default_rng(seed + i)``.  A trial
    fails when ``lambda_min(f(B) - f(A)) < -1e-9 ||B - A||``.  Explicit
    ``pairs`` replace the random draws.
    """
    if n < 1:
        raise ValueError("order must be at least 1")
    worst, worst_i, witness = math.inf, -1, None
    passed = True
    rejections = 0
    draws = pairs if pairs is not None else range(trials)
    for i, item in enumerate(draws):
        if pairs is not None:
            A, B = (np.asarray(m, dtype=float) for m in item)
        else:
            A, B, rej = random_ordered_pair(np.random.default_rng(seed + i), U, n, max_rejections)
            rejections += rej
        diff = matrix_function(f, B) - matrix_function(f, A)
        low = float(np.linalg.eigvalsh((diff + diff.T) / 2).min())
        tau = 1e-9 * float(np.linalg.norm(B - A, 2))
        if low < worst:
            worst, worst_i = low, i
        if low < -tau:
            if passed:
                witness = (A, B)
            passed = False
    return MonotoneReport(n, len(draws), worst, worst_i, passed, witness, rejections)


def pole_free_interval(R: RationalMap, x: Scalar) -> tuple[float, float]:
    """Largest open interval around ``x`` free of real poles of ``R``."""
    R = R.reduced()
    q = [float(c) for c in R.q]
    xf = float(x)
    lo, hi = -math.inf, math.inf
    if len(q) > 1:
        for r in np.roots(list(reversed(q))):
            if abs(r.imag) > 1e-9 * max(1.0, abs(r)):
                continue
            pole = float(r.real) + float(R.base)
            if pole < xf:
                lo = max(lo, pole)
            elif pole > xf:
                hi = min(hi, pole)
    return lo, hi
