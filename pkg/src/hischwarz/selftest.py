"""A quick invariant suite, runnable from the command line."""

from __future__ import annotations

import random
import time
from typing import Callable

import numpy as np
from gmpy2 import mpq

from . import dynamics, koebe, pade, pickclass, schwarzian
from .jets import exp_jet, identity, jet_compose, jet_reverse
from .sampling import random_cf, random_jet, random_normal_jet


def _exp_pade() -> bool:
    R = pade.pade_approximant(exp_jet(mpq(0), 4), 2)
    return R.p == (1, mpq(1, 2), mpq(1, 12)) and R.q == (1, mpq(-1, 2), mpq(1, 12))


def _routes(seed: int) -> bool:
    rng = random.Random(seed)
    for _ in range(20):
        f = random_normal_jet(rng, 7, 3)
        for d in range(1, 4):
            a = schwarzian.schwarzian_det(f, d)
            if not (a == schwarzian.schwarzian_defect(f, d) == schwarzian.schwarzian_recursive(f, d)[d]):
                return False
    return True


def _reversion(seed: int) -> bool:
    rng = random.Random(seed)
    for _ in range(20):
        f = random_jet(rng, rng.randint(1, 9))
        g = jet_reverse(f)
        if jet_compose(g, f).coeffs != identity(f.base, f.order).coeffs:
            return False
    return True


def _pick_round_trip(seed: int) -> bool:
    rng = random.Random(seed)
    for _ in range(10):
        f = random_normal_jet(rng, 6, 3)
        cf = schwarzian.continued_fraction(f, 3)
        if cf.jet(6).coeffs != f.coeffs:
            return False
    return True


def _mobius_zero() -> bool:
    M = pade.mobius(2, 1, 1, 3, mpq(1, 2))
    seq = schwarzian.schwarzian_recursive(M.jet(7), 3)
    return all(v == 0 for v in seq.values[1:])


def _composition(seed: int) -> bool:
    rng = random.Random(seed)
    for _ in range(5):
        f = random_normal_jet(rng, 5, 2)
        g = random_normal_jet(rng, 5, 2, base=f.value)
        try:
            rec = schwarzian.composition_check(f, g, 2)
        except Exception:
            continue
        if not rec.holds:
            return False
    return True


def _koebe_witness() -> bool:
    M = pade.mobius(1, 0, -1, 1, mpq(0))
    q = koebe.KoebeQuery(1, 2, 1, (mpq(-1), mpq(1)))
    report = koebe.koebe_check(lambda x, o: M.jet_at(x, o), q, [mpq(0), mpq(1, 4), mpq(1, 2)])
    return all(row["ratio"] == 1 for row in report.rows)


def _cf_pick(seed: int) -> bool:
    rng = random.Random(seed)
    for _ in range(5):
        R = random_cf(rng, 2).to_rational_map()
        if pickclass.certify_pick(R).verdict != pickclass.PICK:
            return False
    return True


def _crossratio_mobius() -> bool:
    M = pade.mobius(3, 1, 1, 2, mpq(0))
    cr = pickclass.crossratio_from_map(M, [mpq(0), mpq(1, 3), mpq(1), mpq(2)])
    return np.allclose(sorted(cr.eigenvalues), [0, 0, 0, 4], atol=1e-10)


def _monotone(seed: int) -> bool:
    ok = pickclass.matrix_monotone_test(np.sqrt, (0.0, 4.0), 3, trials=50, seed=seed).passed
    bad = pickclass.matrix_monotone_test(np.square, (0.0, 4.0), 2,
                                         pairs=[([[1, 1], [1, 1]], [[2, 1], [1, 1]])])
    return ok and not bad.passed


def _logistic_events() -> bool:
    f = dynamics.logistic(4)
    if dynamics.inverse_branch_schwarzians(f, mpq(1, 4), 0, 1)[1] != 6:
        return False
    fast = dynamics._exact_event(f, mpq(1, 3), 3, 3)
    slow = dynamics.inverse_branch_schwarzians(f, mpq(1, 3), 3, 3)
    return [v.to_mpq() for v in fast["values"]] == list(slow.values[1:]) and fast["identity_holds"]


def checks(seed: int = 0) -> list[tuple[str, Callable[[], bool]]]:
    return [
        ("exp Padé approximant", _exp_pade),
        ("Schwarzian routes agree", lambda: _routes(seed)),
        ("series reversion round trip", lambda: _reversion(seed)),
        ("continued fraction round trip", lambda: _pick_round_trip(seed)),
        ("Möbius Schwarzians vanish", _mobius_zero),
        ("composition formula", lambda: _composition(seed)),
        ("Koebe sharpness witness", _koebe_witness),
        ("positive fractions certify Pick", lambda: _cf_pick(seed)),
        ("Möbius cross-ratio spectrum", _crossratio_mobius),
        ("matrix monotonicity fixtures", lambda: _monotone(seed)),
        ("logistic inverse branches", _logistic_events),
    ]


def run(seed: int = 0) -> dict:
    """Run every check; returns ``{"checks": [...], "passed": bool}``."""
    results = []
    for name, fn in checks(seed):
        start = time.perf_counter()
        try:
            ok, error = bool(fn()), None
        except Exception as exc:  # a crash is a failed check, reported as data
            ok, error = False, f"{type(exc).__name__}: {exc}"
        row = {"name": name, "passed": ok, "seconds": round(time.perf_counter() - start, 3)}
        if error:
            row["error"] = error
        results.append(row)
    return {"checks": results, "passed": all(r["passed"] for r in results)}
