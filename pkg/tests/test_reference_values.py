"""Worked values, each checked against an independent sympy or arithmetic oracle."""

from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from gmpy2 import mpq

from hischwarz import dynamics, pickclass
from hischwarz.errors import NotNormal
from hischwarz.jets import Jet, exp_jet, jet_add, jet_compose, jet_div, jet_mul, jet_reverse, polynomial
from hischwarz.koebe import KoebeQuery, koebe_bound
from hischwarz.pade import (hankel_det, hankel_matrix, is_normal, mobius, pade_approximant, rational_degree,
                            rational_eval)
from hischwarz.schwarzian import (composition_check, continued_fraction, mobius_precomposition_check,
                                  pick_inverse_step, pick_step, schwarzian, schwarzian_recursive)
from test_acceptance import sympy_defect_schwarzian, sympy_pade

z = sp.Symbol("z")
EXP = exp_jet(mpq(0), 9)
GEOM = mobius(1, 0, -1, 1, mpq(0))  # z/(1-z)


def taylor(expr, order, at=0):
    s = sp.series(expr, z, at, order + 1).removeO()
    return [mpq(str(sp.Rational(s.coeff(z - at if at else z, k)))) for k in range(order + 1)]


def as_mpq(values):
    return [mpq(str(sp.Rational(v))) for v in values]


def classical_schwarzian(expr, at):
    d1, d2, d3 = (sp.diff(expr, z, k) for k in (1, 2, 3))
    return sp.nsimplify(sp.simplify((d3 / d1 - sp.Rational(3, 2) * (d2 / d1) ** 2).subs(z, at)))


# ---------------------------------------------------------------- jets

def test_jet_arithmetic_against_series():
    e = EXP.truncate(3)
    assert list(jet_add(e, e).coeffs) == taylor(2 * sp.exp(z), 3) == [2, 2, 1, mpq(1, 3)]
    assert list(jet_mul(e, e).coeffs) == taylor(sp.exp(2 * z), 3) == [1, 2, 2, mpq(4, 3)]
    two_z = Jet(mpq(0), (0, 2, 0, 0))
    assert list(jet_compose(e, two_z).coeffs) == taylor(sp.exp(2 * z), 3)


def test_bernoulli_quotient():
    q = jet_div(Jet(mpq(0), (1, 0, 0)), Jet(mpq(0), (1, mpq(1, 2), mpq(1, 6))))
    assert list(q.coeffs) == taylor(z / (sp.exp(z) - 1), 2) == [1, mpq(-1, 2), mpq(1, 12)]
    assert jet_mul(q, Jet(mpq(0), (1, mpq(1, 2), mpq(1, 6)))).coeffs == (1, 0, 0)


def test_reversion_examples():
    g = jet_reverse(Jet(mpq(0), (0, 1, 1, 0, 0)))
    oracle = taylor((-1 + sp.sqrt(1 + 4 * z)) / 2, 4)
    assert list(g.coeffs) == oracle == [0, 1, -1, 2, -5]
    inv = jet_reverse(dynamics.logistic(4).jet(mpq(1, 4), 3))
    assert inv.base == mpq(3, 4) and inv.coeffs[1] == mpq(1, 2)


# ---------------------------------------------------------------- Hankel, Padé

def test_hankel_values():
    assert hankel_matrix(EXP, 2).entries == ((1, mpq(1, 2)), (mpq(1, 2), mpq(1, 6)))
    assert hankel_matrix(GEOM.jet(5), 2).entries == ((1, 1), (1, 1))
    assert hankel_det(EXP, 0) == 1
    oracle = [sp.Matrix(d, d, lambda i, j: sp.Rational(1, sp.factorial(i + j + 1))).det() for d in (2, 3)]
    assert [hankel_det(EXP, 2), hankel_det(EXP, 3)] == as_mpq(oracle) == [mpq(-1, 12), mpq(-1, 8640)]
    assert is_normal(EXP, 2) and is_normal(EXP, 3)
    assert not is_normal(GEOM.jet(5), 2)


def test_pade_evaluation_and_degree():
    R1, R2 = pade_approximant(EXP, 1), pade_approximant(EXP, 2)
    assert rational_eval(R1, mpq(1)) == 3
    assert rational_degree(R2) == 2
    # coincidence to order 2d with the exp series
    assert R2.jet(4).coeffs == EXP.truncate(4).coeffs


# ---------------------------------------------------------------- Schwarzians

def test_classical_first_schwarzian():
    assert schwarzian(EXP, 1) == as_mpq([classical_schwarzian(sp.exp(z), 0)])[0] == mpq(-1, 2)
    assert schwarzian(GEOM.jet(5), 1) == 0
    assert schwarzian_recursive(EXP, 2).values[1:] == (mpq(-1, 2), mpq(1, 6))


def test_pick_step_examples():
    assert pick_step(EXP).coeffs[0] == mpq(1, 2)
    assert pick_step(GEOM.jet(6)).coeffs[0] == 1
    t = Jet(mpq(0), (mpq(1, 2), 0, 0, 0))
    expanded = pick_inverse_step(t, mpq(1), mpq(1))
    assert list(expanded.coeffs[:4]) == taylor(1 + z / (1 - z / 2), 3) == [1, 1, mpq(1, 2), mpq(1, 4)]


def test_exp_continued_fraction():
    cf = continued_fraction(EXP, 2)
    assert cf.mu[:2] == (1, mpq(-1, 12))


def test_composition_cubic_is_degenerate():
    # S_1(z + z^2 + z^3) = 6 - (3/2) 2^2 = 0, so the d = 2 Hankel determinant vanishes
    f = Jet(mpq(0), (0, 1, 1, 1, 0, 0))
    assert classical_schwarzian(z + z**2 + z**3, 0) == 0
    assert hankel_det(f, 2) == 0
    with pytest.raises(NotNormal):
        composition_check(f, f, 2)


def test_composition_identity_against_sympy():
    cubic = [sp.Integer(c) for c in (0, 1, 1, 2, 0, 0)]
    f = Jet(mpq(0), tuple(mpq(int(c)) for c in cubic))
    rec = composition_check(f, f, 2)
    t = sp.Symbol("t")
    poly = sum(c * t**k for k, c in enumerate(cubic))
    composite = sp.Poly(sp.expand(poly.subs(t, poly)), t).all_coeffs()[::-1][:6]
    lhs = sympy_defect_schwarzian(composite, 2)
    s2 = sympy_defect_schwarzian(cubic, 2)
    p, q, _ = sympy_pade(cubic, 2)
    R = sum(c * t**k for k, c in enumerate(p)) / sum(c * t**k for k, c in enumerate(q))
    RR = sp.series(R.subs(t, R), t, 0, 6).removeO()
    extra = sympy_defect_schwarzian([RR.coeff(t, k) for k in range(6)], 2)
    assert [rec.lhs, rec.rhs_sum, rec.extra_term] == as_mpq([lhs, s2 * 1 + s2, extra])
    assert rec.holds and lhs == 2 * s2 + extra


def test_affine_precomposition():
    M = mobius(2, 1, 0, 1, mpq(-1, 2))  # z -> 2z + 1, with M(-1/2) = 0
    assert mobius_precomposition_check(EXP, M, 1)
    pulled = jet_compose(EXP, M.jet(9))
    assert schwarzian(pulled, 1) == schwarzian(EXP, 1) * 4
    assert schwarzian(pulled, 1) == as_mpq([classical_schwarzian(sp.exp(2 * z + 1), sp.Rational(-1, 2))])[0]


def test_logistic_inverse_schwarzian():
    # inverse of 4x(1-x) on the left lap is (1 - sqrt(1 - y))/2
    branch = (1 - sp.sqrt(1 - z)) / 2
    for x in (mpq(1, 4), mpq(1, 3), mpq(1, 5)):
        y = sp.Rational(4 * x * (1 - x))
        seq = dynamics.inverse_branch_schwarzians(dynamics.logistic(4), x, 0, 1)
        assert seq[1] == as_mpq([classical_schwarzian(branch, y)])[0]
    assert dynamics.inverse_branch_schwarzians(dynamics.logistic(4), mpq(1, 4), 0, 1)[1] == 6


# ---------------------------------------------------------------- Pick class

def test_pick_examples():
    assert pickclass.certify_pick(GEOM).verdict == pickclass.PICK
    square = pickclass.RationalMap((mpq(1), mpq(2), mpq(1)), (mpq(1),), mpq(1))  # z^2 about 1
    assert pickclass.certify_pick(square).verdict == pickclass.NOT_PICK
    assert schwarzian(square.jet(3), 1) == mpq(-3, 2)


def test_halfplane_examples():
    assert pickclass.halfplane_sample_check(GEOM).passed
    rep = pickclass.halfplane_sample_check(pickclass.RationalMap((0, 0, 1), (1,), mpq(0)))
    assert rep.failures and all(p.real < 0 for p in rep.failures)


def test_crossratio_example():
    cr = pickclass.crossratio_from_map(GEOM, [mpq(0), mpq(1, 4), mpq(1, 2)])
    assert np.allclose(cr.entries, 1.0)
    assert cr.min_eigenvalue >= -1e-12


def test_membership_sign_pattern():
    pts = [mpq(k, 10) for k in range(-9, 10)]
    rep = pickclass.pd_membership(lambda x, o: polynomial([0, 1, 0, 1], x, o), 1, pts)
    oracle = [int(sp.sign(6 - 36 * sp.Rational(p) ** 2)) for p in pts]
    assert [s[0] for s in rep.signs()] == oracle
    assert not rep.passed


def test_logistic_inverse_membership():
    f = dynamics.logistic(4)
    source = lambda y, o: dynamics.inverse_branch_jet(f, y, o, lap=(0.0, 0.5))  # noqa: E731
    rep = pickclass.pd_membership(source, 1, list(np.linspace(0.1, 0.9, 17)))
    assert rep.passed and all(row[0] > 0 for row in rep.values)


# ---------------------------------------------------------------- Koebe, dynamics

def test_koebe_bound_values():
    assert koebe_bound(KoebeQuery(1, 2, 1, (mpq(-1), mpq(1)), x=mpq(1, 2)), mpq(4)) == 16
    assert koebe_bound(KoebeQuery(2, 3, 1, (mpq(0), mpq(1)), x=mpq(1, 2)), mpq(1)) == 24


def test_first_entry_against_fraction_iteration():
    x, s = Fraction(1, 3), 0
    while not Fraction(7, 16) < x < Fraction(9, 16):
        x, s = 4 * x * (1 - x), s + 1
    assert dynamics.first_entry(dynamics.logistic(4), mpq(1, 3), (mpq(7, 16), mpq(9, 16))) == s == 5


def test_q_family_polynomial():
    poly = sp.Poly(sp.expand(((z + 1) ** 2 - 1) / 3), z)
    assert dynamics.q_family(2, 1).expanded().poly == tuple(as_mpq(reversed(poly.all_coeffs())))


def test_inverse_branch_after_three_steps():
    seq = dynamics.inverse_branch_schwarzians(dynamics.logistic(4), mpq(1, 3), 3, 2)
    assert all(v is not None for v in seq.values)


def test_short_scan_is_positive():
    rep = dynamics.first_entry_scan(dynamics.logistic(4), mpq(1, 2), 1, [mpq(1, 8)], 200, max_steps=25)
    s = rep.summary(mpq(1, 8))
    assert s.n_events > 0 and s.n_all_positive == s.n_events


def test_small_epsilon_ladder():
    rep = dynamics.first_entry_scan(dynamics.logistic(4), mpq(1, 2), 3, [mpq(1, 4), mpq(1, 8)], 20,
                                    max_steps=12)
    for s in rep.summaries:
        assert s.n_events > 0 and s.fraction_positive == 1.0
