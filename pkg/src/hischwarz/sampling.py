"""Seeded generators of random exact objects for tests and the self-test."""

from __future__ import annotations

import random

from gmpy2 import mpq

from .jets import Jet
from .pade import RationalMap, is_normal
from .schwarzian import ContinuedFractionRep


def random_rational(rng: random.Random, lo: int = -5, hi: int = 5, max_den: int = 6):
    """A rational in ``[lo, hi]`` with denominator at most ``max_den``."""
    den = rng.randint(1, max_den)
    return mpq(rng.randint(lo * den, hi * den), den)


def random_jet(rng: random.Random, order: int, lo: int = -5, hi: int = 5, base=None,
               nonzero_slope: bool = True) -> Jet:
    base = random_rational(rng, -2, 2) if base is None else mpq(base)
    coeffs = [random_rational(rng, lo, hi) for _ in range(order + 1)]
    while nonzero_slope and order >= 1 and coeffs[1] == 0:
        coeffs[1] = random_rational(rng, lo, hi)
    return Jet(base, tuple(coeffs))


def random_normal_jet(rng: random.Random, order: int, d: int, **kwargs) -> Jet:
    """A random jet that is normal of every order ``1..d``."""
    while True:
        f = random_jet(rng, order, **kwargs)
        if all(is_normal(f, k) for k in range(1, d + 1)):
            return f


def random_rational_map(rng: random.Random, degree: int, base=0) -> RationalMap:
    """``p/q`` with ``deg p, deg q <= degree`` and ``q(base) = 1``."""
    p = [random_rational(rng, -3, 3) for _ in range(degree + 1)]
    q = [mpq(1)] + [random_rational(rng, -3, 3) for _ in range(degree)]
    return RationalMap(tuple(p), tuple(q), mpq(base))


def random_cf(rng: random.Random, depth: int, positive: bool = True, base=0) -> ContinuedFractionRep:
    """Continued fraction with ``mu_k > 0`` (``positive``) or at least one ``mu_k < 0``."""
    A = tuple(random_rational(rng, -3, 3) for _ in range(depth + 1))
    mu = [mpq(rng.randint(1, 12), rng.randint(1, 4)) for _ in range(depth)]
    if not positive:
        k = rng.randrange(depth)
        mu[k] = -mu[k]
    return ContinuedFractionRep(mpq(base), A, tuple(mu))
