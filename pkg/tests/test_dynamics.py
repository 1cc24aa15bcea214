import pytest
import sympy as sp
from gmpy2 import mpq, mpz
from hypothesis import given, strategies as st

from hischwarz import dynamics
from hischwarz.dynamics import (PowerProduct, chain_rule_check, first_entry, forward_jet,
                                inverse_branch_jet, inverse_branch_schwarzians, iterate, logistic,
                                polynomial_map, q_family, stern_brocot, first_entry_scan)
from hischwarz.errors import CriticalOrbit, PreconditionError
from hischwarz.jets import jet_reverse
from hischwarz.pickclass import interior_grid, pd_membership

F = logistic(4)


def test_orbits():
    assert iterate(F, mpq(1, 2), 4) == (mpq(1, 2), 1, 0, 0, 0)
    assert iterate(F, mpq(3, 4), 3) == (mpq(3, 4),) * 4
    assert first_entry(F, mpq(1, 3), (mpq(7, 16), mpq(9, 16))) == 5
    assert first_entry(F, mpq(1, 2), (mpq(7, 16), mpq(9, 16))) == 0
    assert first_entry(F, mpq(0), (mpq(7, 16), mpq(9, 16))) is None


def test_stern_brocot_order():
    assert stern_brocot(7) == [mpq(1, 2), mpq(1, 3), mpq(2, 3), mpq(1, 4), mpq(2, 5), mpq(3, 5), mpq(3, 4)]


def test_forward_jet():
    assert forward_jet(F, mpq(1, 4), 1, 3).coeffs == (mpq(3, 4), 2, -4, 0)
    assert forward_jet(F, mpq(1, 5), 0, 3).coeffs == (mpq(1, 5), 1, 0, 0)


@pytest.mark.parametrize("x,s", [(mpq(2, 7), 6), (mpq(1, 3), 4), (mpq(3, 11), 5)])
def test_chain_rule(x, s):
    a, b = chain_rule_check(F, x, s)
    assert a == b


@pytest.mark.parametrize("steps", range(0, 7))
def test_forward_jet_matches_symbolic_composition(steps):
    z = sp.Symbol("z")
    expr = z
    for _ in range(steps + 1):
        expr = sp.expand(4 * expr * (1 - expr))
    for x in (sp.Rational(1, 3), sp.Rational(2, 9)):
        shifted = sp.Poly(sp.expand(expr.subs(z, z + x)), z)
        want = [shifted.coeff_monomial(z**k) for k in range(10)]
        got = forward_jet(F, mpq(x.p, x.q), steps + 1, 9).coeffs
        assert [mpq(str(w)) for w in want] == list(got)


def test_inverse_branch_example():
    seq = inverse_branch_schwarzians(F, mpq(1, 4), 0, 1)
    assert seq.base == mpq(3, 4) and seq[1] == 6


def test_critical_orbit():
    with pytest.raises(CriticalOrbit) as err:
        inverse_branch_schwarzians(F, mpq(1, 2), 2, 1)
    assert err.value.step == 0


@pytest.mark.parametrize("x,s,d", [(mpq(1, 3), 3, 3), (mpq(2, 7), 2, 2), (mpq(1, 5), 4, 3), (mpq(5, 13), 1, 1)])
def test_integer_path_matches_jet_route(x, s, d):
    fast = dynamics._exact_event(F, x, s, d)
    slow = inverse_branch_schwarzians(F, x, s, d)
    assert [v.to_mpq() for v in fast["values"]] == list(slow.values[1:])
    assert fast["identity_holds"]


def test_reflection_gives_same_values():
    a = dynamics._exact_event(F, mpq(1, 3), 3, 2)
    b = dynamics._exact_event(F, mpq(2, 3), 3, 2)
    assert [v.to_mpq() for v in a["values"]] == [v.to_mpq() for v in b["values"]]


def test_power_product():
    p = PowerProduct(mpq(3, 2), [(mpz(2), 5), (mpz(3), -2)])
    assert p.to_mpq() == mpq(3, 2) * 32 / 9
    assert p > 0 and (p / p).to_mpq() == 1 and (-p).sign() == -1
    assert float(p) == pytest.approx(3 / 2 * 32 / 9)
    assert PowerProduct.of(mpq(5)) == mpq(5)


def test_q_family():
    q = q_family(2, 0)
    assert q(mpq(1, 2)) == mpq(1, 4)
    q1 = q_family(2, 1)
    assert q1(mpq(1, 2)) == mpq(5, 12)
    assert q1.expanded().poly == (0, mpq(2, 3), mpq(1, 3))
    assert q1(mpq(0)) == 0 and q1(mpq(1)) == 1
    assert not q_family(mpq(5, 2), mpq(1, 2)).is_exact


@pytest.mark.parametrize("a", [mpq(0), mpq(1, 2), mpq(1)])
def test_q_inverse_in_pd(a):
    q = q_family(2, a)
    source = lambda y, o: inverse_branch_jet(q, y, o, lap=(0.0, 1.0))  # noqa: E731
    rep = pd_membership(source, 2, [float(v) for v in interior_grid(mpq(1, 20), mpq(19, 20), 12)])
    assert rep.passed


def test_inverse_branch_jet_matches_exact():
    exact_inv = jet_reverse(F.jet(mpq(1, 4), 5))
    approx = inverse_branch_jet(F, 0.75, 5, lap=(0.0, 0.5))
    for a, b in zip(exact_inv.coeffs, approx.coeffs):
        assert float(a) == pytest.approx(b, rel=1e-9, abs=1e-9)


def test_polynomial_map_validation():
    with pytest.raises(PreconditionError):
        polynomial_map([0, 2])  # leaves [0, 1]
    with pytest.raises(PreconditionError):
        logistic(5)
    assert F.critical_points[0].point == mpq(1, 2)


def test_scan_rejects_maps_without_critical_points():
    with pytest.raises(PreconditionError):
        first_entry_scan(polynomial_map([0, 1]), mpq(1, 2), 1, [mpq(1, 8)], 5)
    with pytest.raises(PreconditionError):
        first_entry_scan(F, mpq(1, 3), 1, [mpq(1, 8)], 5)


def test_small_scan():
    rep = first_entry_scan(F, mpq(1, 2), 1, [mpq(1, 8)], 200, max_steps=50)
    s = rep.summary(mpq(1, 8))
    assert (s.n_events, s.n_all_positive, s.discarded, s.not_entered) == (197, 197, 1, 2)
    assert s.identity_failures == 0
    d = rep.to_dict()
    assert d["schema"] == "v1" and d["epsilons"][0]["events"] == 197
    assert rep.to_csv().startswith("eps,sample,x,s,kind,Df,S1,all_positive")


def test_scan_with_returns_and_workers():
    serial = first_entry_scan(F, mpq(1, 2), 2, [mpq(1, 8), mpq(1, 4)], 12, max_steps=12, include_returns=True)
    parallel = first_entry_scan(F, mpq(1, 2), 2, [mpq(1, 8), mpq(1, 4)], 12, max_steps=12,
                             include_returns=True, workers=2)
    assert serial.to_dict(events=True) == parallel.to_dict(events=True)
    kinds = {e.kind for s in serial.summaries for e in s.events}
    assert "return" in kinds
    assert all(e.all_positive() for s in serial.summaries for e in s.events)


def test_float_scan():
    # floats may call a steep Hankel system singular (value None) but never flip a sign
    f = polynomial_map([0.0, 4.0, -4.0], backend="float")
    rep = first_entry_scan(f, 0.5, 2, [0.125], 30, max_steps=20)
    exact_rep = first_entry_scan(F, mpq(1, 2), 2, [mpq(1, 8)], 30, max_steps=20)
    summ = rep.summary(0.125)
    assert summ.n_events == exact_rep.summary(mpq(1, 8)).n_events > 0
    values = [v for e in summ.events for v in e.values]
    assert all(v > 0 for v in values if v is not None)
    assert all(w["S"] is None for w in summ.witnesses())
    assert summ.n_all_positive >= 0.8 * summ.n_events


@given(st.integers(1, 60), st.integers(61, 200))
def test_iterate_is_exact(p, q):
    x = mpq(p, q)
    orbit = iterate(F, x, 5)
    y = x
    for v in orbit[1:]:
        y = 4 * y * (1 - y)
        assert v == y
