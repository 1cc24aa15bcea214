"""Exception hierarchy.

Everything derives from :class:`PreconditionError` so the CLI can map the
whole family to a single exit code.
"""

from __future__ import annotations


class PreconditionError(ValueError):
    """An operation was called outside its domain."""


class BasePointMismatch(PreconditionError):
    pass


class OrderTooSmall(PreconditionError):
    pass


class CriticalPoint(PreconditionError):
    """The first derivative vanishes where it must not."""


class CriticalOrbit(CriticalPoint):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class NotNormal(PreconditionError):
    """A Hankel system is singular.

    ``subcase`` is ``"degenerate"`` when a lower-degree approximant still
    coincides to the requested order (its value is in ``approximant``),
    ``"nonexistent"`` when no approximant of degree at most ``d`` exists, and
    ``None`` when elimination fails after the normality test passed. ``partial`` carries any
    partially built result (e.g. a truncated continued fraction).
    """

    def __init__(self, message: str, *, level: int | None = None, subcase: str | None = None,
                 approximant=None, partial=None):
        super().__init__(message)
        self.level = level
        self.subcase = subcase
        self.approximant = approximant
        self.partial = partial


class PoleError(PreconditionError):
    pass


class HypothesisViolation(PreconditionError):
    """Inputs do not satisfy the hypotheses of the inequality being checked."""


class MembershipError(PreconditionError):
    """A map is not in the required P_d(U) class on the requested grid."""


class OrbitEscape(PreconditionError):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class SamplingFailure(RuntimeError):
    """Random sampling could not satisfy its constraints."""
