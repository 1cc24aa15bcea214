import math

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from hischwarz.errors import BasePointMismatch, OrderTooSmall, PreconditionError
from hischwarz.jets import (Jet, constant, exp_jet, from_derivatives, identity, jet_compose, jet_div,
                            jet_mul, jet_reverse, polynomial)
from hischwarz.scalar import exact, fmt, parse, unify

from strategies import jets, rationals


def test_polynomial_jet_is_taylor_shift():
    # z^3 at 2: 8 + 12 t + 6 t^2 + t^3
    assert polynomial([0, 0, 0, 1], mpq(2), 4).coeffs == (8, 12, 6, 1, 0)


def test_exp_jet_exact_only_at_zero():
    assert exp_jet(mpq(0), 3).coeffs == (1, 1, mpq(1, 2), mpq(1, 6))
    j = exp_jet(mpq(1), 2)
    assert not j.is_exact
    assert j.coeffs[0] == pytest.approx(math.e)


def test_from_derivatives_and_back():
    j = from_derivatives(mpq(0), [1, 2, 6, 24])
    assert j.coeffs == (1, 2, 3, 4)
    assert j.derivatives() == [1, 2, 6, 24]


def test_mixed_backends_demote_to_float():
    vals, backend = unify([mpq(1, 3), 0.5])
    assert backend == "float" and all(isinstance(v, float) for v in vals)
    assert Jet(mpq(0), (mpq(1), 0.5)).is_exact is False


def test_base_point_mismatch():
    with pytest.raises(BasePointMismatch):
        jet_mul(identity(mpq(0), 2), identity(mpq(1), 2))
    # composition needs the inner value to equal the outer base
    with pytest.raises(PreconditionError):
        jet_compose(identity(mpq(1), 2), constant(mpq(0), mpq(2), 2))


def test_truncate_cannot_extend():
    with pytest.raises(OrderTooSmall):
        identity(mpq(0), 2).truncate(3)


def test_reverse_of_critical_jet_fails():
    with pytest.raises(PreconditionError):
        jet_reverse(Jet(mpq(0), (0, 0, 1)))


def test_serialization_round_trip():
    j = Jet(mpq(-1, 3), (mpq(2), mpq(-5, 7), mpq(0)))
    assert Jet.from_json(j.to_json()) == j
    assert fmt(mpq(3)) == "3" and fmt(mpq(-1, 2)) == "-1/2"
    assert parse("-1/2") == mpq(-1, 2) and parse(0.25) == 0.25
    assert exact("0.25") == mpq(1, 4)


@given(jets())
def test_reverse_round_trip(f):
    g = jet_reverse(f)
    assert jet_compose(g, f).coeffs == identity(f.base, f.order).coeffs
    assert jet_compose(f, g).coeffs == identity(g.base, f.order).coeffs


@given(jets(), st.data())
def test_compose_associative(f, data):
    g = data.draw(jets(f.order, f.order, base=f.value))
    h = data.draw(jets(f.order, f.order, base=g.value))
    assert jet_compose(h, jet_compose(g, f)) == jet_compose(jet_compose(h, g), f)


@given(jets(), st.data())
def test_division_inverts_multiplication(f, data):
    g = data.draw(jets(f.order, f.order, base=f.base))
    if g.coeffs[0] == 0:
        g = Jet(g.base, (mpq(1),) + g.coeffs[1:])
    assert jet_div(jet_mul(f, g), g) == f


@given(jets(1, 6), rationals())
def test_float_backend_tracks_exact(f, shift):
    exact_prod = jet_mul(f, f)
    float_prod = jet_mul(f.to_float(), f.to_float())
    for a, b in zip(exact_prod.coeffs, float_prod.coeffs):
        assert float(a) == pytest.approx(b, rel=1e-12, abs=1e-12)
