import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given

from hischwarz.errors import NotNormal, OrderTooSmall
from hischwarz.jets import Jet, exp_jet
from hischwarz.pade import (RationalMap, bareiss_det, compose, hankel_det, is_normal, mobius,
                            pade_approximant, rational_degree)

from strategies import jets


def test_exp_approximants():
    f = exp_jet(mpq(0), 6)
    R = pade_approximant(f, 1)
    assert (R.p, R.q) == ((1, mpq(1, 2)), (1, mpq(-1, 2)))
    R = pade_approximant(f, 2)
    assert (R.p, R.q) == ((1, mpq(1, 2), mpq(1, 12)), (1, mpq(-1, 2), mpq(1, 12)))


def test_float_backend_matches():
    R = pade_approximant(exp_jet(mpq(0), 6).to_float(), 2)
    assert R.p == pytest.approx([1, 0.5, 1 / 12]) and R.q == pytest.approx([1, -0.5, 1 / 12])


def test_mobius_is_its_own_approximant():
    M = mobius(2, 1, 1, 3, mpq(1, 2))
    for d in (1, 2, 3):
        R = pade_approximant(M.jet(2 * d), d, allow_degenerate=True)
        assert rational_degree(R) == 1
        assert R.jet(2 * d + 3) == M.jet(2 * d + 3)


def test_degenerate_subcase():
    geometric = Jet(mpq(0), (1,) * 6)  # 1/(1-z)
    with pytest.raises(NotNormal) as err:
        pade_approximant(geometric, 2)
    assert err.value.subcase == "degenerate"
    assert err.value.approximant.q == (1, -1)
    assert pade_approximant(geometric, 2, allow_degenerate=True).p == (1,)
    assert pade_approximant(geometric.to_float(), 2, allow_degenerate=True).q == pytest.approx([1, -1])


def test_nonexistent_subcase():
    with pytest.raises(NotNormal) as err:
        pade_approximant(Jet(mpq(0), (1, 0, 1, 0)), 1)
    assert err.value.subcase == "nonexistent"
    assert not is_normal(Jet(mpq(0), (1, 0, 1, 0)), 1)


def test_order_check():
    with pytest.raises(OrderTooSmall):
        pade_approximant(exp_jet(mpq(0), 3), 2)


def test_bareiss_matches_sympy():
    rows = [[mpq(1, 2), 3, -1], [2, mpq(-1, 3), 4], [0, 5, mpq(7, 5)]]
    expected = sp.Matrix([[sp.Rational(str(v)) for v in r] for r in rows]).det()
    assert bareiss_det(rows) == mpq(str(expected))


@given(jets(6, 9))
def test_row_order_does_not_matter(f):
    d = 3
    if not is_normal(f, d):
        return
    R = pade_approximant(f, d)
    assert pade_approximant(f, d, row_order=[2, 0, 1]) == R
    assert R.jet(2 * d).coeffs == f.truncate(2 * d).coeffs


@given(jets(4, 6))
def test_hankel_det_zero_iff_not_normal(f):
    assert (hankel_det(f, 2) != 0) == is_normal(f, 2)


def test_compose_and_dict_round_trip():
    A = mobius(1, 0, -1, 1, mpq(0))
    B = mobius(1, 1, 0, 1, mpq(0))  # z + 1 ... based at 0
    C = compose(A, B.recentre(mpq(-2)))
    assert C(mpq(-1, 2)) == A(mpq(1, 2))
    assert RationalMap.from_dict(C.to_dict()) == C
