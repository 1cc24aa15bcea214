"""Derivative-ratio (Koebe-type) bounds for maps with non-negative Schwarzians.

For ``f`` in ``P_d(U)``, ``n`` odd and ``1 <= n <= m <= 2d``:

    |D^m f(x)| <= (m!/n!) dist(x, dU)^{-(m-n)} |D^n f(x)|

The constant ``m!/n!`` is attained by ``x/(1-x)`` on ``(-1, 1)`` for
``x >= 0``.  Passing ``constant="statement"`` swaps in ``n!/m!``, which that
same example violates; it exists for the regression test only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import MembershipError
from .pickclass import JetSource, pd_membership
from .scalar import Scalar, fmt, is_exact, unify

PROOF = "proof"
STATEMENT = "statement"


@dataclass(frozen=True)
class KoebeQuery:
    d: int
    m: int
    n: int
    U: tuple
    x: Scalar | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if self.n % 2 == 0:
            raise ValueError("n must be odd")
        if not 1 <= self.n <= self.m <= 2 * self.d:
            raise ValueError(f"need 1 <= n <= m <= 2d, got n={self.n}, m={self.m}, d={self.d}")
        lo, hi = self.U
        if not lo < hi:
            raise ValueError("empty interval")
        if self.x is not None and not lo < self.x < hi:
            raise ValueError(f"x = {self.x} is not inside U = {self.U}")


def valid_pairs(d: int) -> list[tuple[int, int]]:
    return [(m, n) for n in range(1, 2 * d + 1, 2) for m in range(n, 2 * d + 1)]


def boundary_distance(x: Scalar, U: tuple) -> Scalar:
    """``min(x - lo, hi - x)``; ``inf`` when both ends are infinite."""
    ends = [e for e in U if not (isinstance(e, float) and math.isinf(e))]
    vals, _ = unify([x, *ends])
    x = vals[0]
    lo, hi = U
    cands = []
    it = iter(vals[1:])
    if not (isinstance(lo, float) and math.isinf(lo)):
        cands.append(x - next(it))
    if not (isinstance(hi, float) and math.isinf(hi)):
        cands.append(next(it) - x)
    return min(cands) if cands else math.inf


def koebe_bound(q: KoebeQuery, DnF: Scalar, constant: str = PROOF) -> Scalar:
    """Upper bound for ``|D^m f(x)|`` given ``D^n f(x)``."""
    if q.x is None:
        raise ValueError("the query needs an evaluation point")
    if constant not in (PROOF, STATEMENT):
        raise ValueError(f"unknown constant {constant!r}")
    num, den = math.factorial(q.m), math.factorial(q.n)
    if constant == STATEMENT:
        num, den = den, num
    if q.m == q.n:
        return abs(DnF)
    dist = boundary_distance(q.x, q.U)
    if dist == math.inf:
        return math.inf
    vals, _ = unify([dist, DnF])
    return num * abs(vals[1]) / (den * vals[0] ** (q.m - q.n))


def chebyshev_grid(U: tuple, count: int = 64, keep: float = 0.98) -> list[float]:
    """Chebyshev points mapped into the central ``keep`` fraction of ``U``."""
    lo, hi = (float(v) for v in U)
    mid, half = (lo + hi) / 2, (hi - lo) / 2 * keep
    k = np.arange(count)
    nodes = np.cos((2 * k + 1) * np.pi / (2 * count))
    return sorted(float(v) for v in mid + half * nodes)


@dataclass
class KoebeReport:
    m: int
    n: int
    rows: list = field(default_factory=list)
    max_ratio: float = 0.0
    argmax: Scalar | None = None
    passed: bool = True
    vacuous: bool = False

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "points": [{k: fmt(v) for k, v in row.items()} for row in self.rows],
            "summary": {
                "max_ratio": fmt(self.max_ratio),
                "argmax": fmt(self.argmax),
                "verdict": "vacuous" if self.vacuous else ("PASS" if self.passed else "FAIL"),
            },
        }


def koebe_check(source: JetSource, q: KoebeQuery, grid: Sequence[Scalar] | None = None,
                rtol: float = 1e-9, constant: str = PROOF,
                require_membership: bool = True) -> KoebeReport:
    """Ratio ``|D^m f| / bound`` over a grid of points in ``U``.

    Membership of ``f`` in ``P_d(U)`` is checked on the same grid first;
    failure raises :class:`MembershipError`.  Exact jets give exact ratios
    and pass only with ratio ``<= 1``.
    """
    grid = list(grid) if grid is not None else chebyshev_grid(q.U)
    if require_membership:
        member = pd_membership(source, q.d, grid)
        if not member.passed:
            raise MembershipError(f"map is not in P_{q.d}(U) at {member.failures[:3]}")
    report = KoebeReport(q.m, q.n)
    if q.m > q.n and boundary_distance(grid[0], q.U) == math.inf:
        report.vacuous = True
    worst = None
    for x in grid:
        jet = source(x, q.m)
        dm, dn = jet.derivative(q.m), jet.derivative(q.n)
        dist = boundary_distance(jet.base, q.U)
        bound = koebe_bound(replace(q, x=jet.base), dn, constant)
        if bound == 0:
            ratio = 0 if dm == 0 else math.inf
        elif bound == math.inf:
            ratio = 0.0
        else:
            ratio = abs(dm) / bound
        report.rows.append({"x": x, "Dm": dm, "Dn": dn, "dist": dist, "bound": bound, "ratio": ratio})
        if worst is None or ratio > worst:
            worst, report.argmax = ratio, x
    report.max_ratio = worst if worst is not None else 0.0
    if is_exact(report.max_ratio):
        report.passed = report.max_ratio <= 1
    else:
        report.passed = float(report.max_ratio) <= 1 + rtol
    return report
