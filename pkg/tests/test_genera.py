from fractions import Fraction
from itertools import combinations
from math import prod

import pytest
import sympy as sp

from twistcancel.genera import (
    EvenSeries,
    PowerSumBridge,
    a_hat_form,
    a_hat_root_series,
    ch_line_bundle_terms,
    ch_tangent,
    ch_tensor_square,
    l_hat_form,
    l_hat_root_series,
    lambda_ch,
    sym_ch,
    symmetrize_additive,
    symmetrize_multiplicative,
    theta_element_ch,
)
from twistcancel.series import GradedRing, HalfQSeries, SeriesDomainError, extract_degree

x = sp.symbols("x")


def _sympy_even_coeffs(expr, order):
    ser = sp.series(expr, x, 0, 2 * order + 2).removeO()
    return [Fraction(str(ser.coeff(x, 2 * r))) for r in range(order + 1)]


def _evaluate(cls, root_squares):
    """Evaluate a u-free class at p_i = e_i(root_squares)."""
    n = cls.ring.n_pont
    e = [sum(prod(c) for c in combinations(root_squares, i)) for i in range(1, n + 1)]
    total = Fraction(0)
    for exps, c in cls.terms.items():
        total += c * prod(Fraction(v) ** a for v, a in zip(e, exps[:n]))
    return total


def _root_product_oracle(factor, roots, degree):
    """Coefficient of t^degree in prod_j factor(t * root_j); roots have degree 1.

    The single-variable factor is expanded once by sympy, then the product
    over explicit roots is multiplied out directly (no symmetric functions).
    """
    coeffs = _sympy_even_coeffs(factor, degree // 2)
    poly = [Fraction(1)] + [Fraction(0)] * degree
    for r in roots:
        nxt = [Fraction(0)] * (degree + 1)
        for i, a in enumerate(poly):
            if not a:
                continue
            for k, c in enumerate(coeffs):
                if i + 2 * k > degree:
                    break
                nxt[i + 2 * k] += a * c * r ** (2 * k)
        poly = nxt
    return poly[degree]


# -- symmetrisation ---------------------------------------------------------

def test_symmetrize_additive_examples():
    R = GradedRing(4)
    b6 = PowerSumBridge(6, R)
    assert symmetrize_additive(EvenSeries((1,)), b6) == R.const(6)
    assert symmetrize_additive(EvenSeries((0, 1)), b6) == R.p(1)
    assert symmetrize_additive(EvenSeries((0, 0, 1)), b6) == R.p(1) ** 2 - R.p(2).scale(2)


def test_symmetrize_multiplicative_examples():
    R = GradedRing(6)
    b = PowerSumBridge(3, R)
    assert symmetrize_multiplicative(EvenSeries((1,)), b) == R.one()
    assert symmetrize_multiplicative(EvenSeries((1, 1)), b) == R.one() + R.p(1) + R.p(2) + R.p(3)
    coth = EvenSeries(tuple(_sympy_even_coeffs(x / sp.tanh(x), 3)))
    assert extract_degree(symmetrize_multiplicative(coth, b), 2) == R.p(1).scale(Fraction(1, 3))
    with pytest.raises(SeriesDomainError):
        symmetrize_multiplicative(EvenSeries((2, 1)), b)


def test_bridge_newton_identities():
    R = GradedRing(8)
    b = PowerSumBridge(4, R)
    p1, p2, p3, p4 = (R.p(i) for i in range(1, 5))
    assert b.power_sum(3) == p1 ** 3 - (p1 * p2).scale(3) + p3.scale(3)
    assert b.power_sum(4) == p1 ** 4 - (p1 ** 2 * p2).scale(4) + (p2 ** 2).scale(2) + (p1 * p3).scale(4) - p4.scale(4)


@pytest.mark.parametrize("D", [4, 6, 8])
def test_bridge_stability_in_m(D):
    ring = GradedRing(D)
    series = a_hat_root_series(D // 2)
    results = {symmetrize_multiplicative(series, PowerSumBridge(m, ring)) for m in (D, D + 1, D + 3)}
    assert len(results) == 1


# -- root series against sympy ---------------------------------------------

def test_root_series_match_sympy():
    assert list(a_hat_root_series(4).coeffs) == _sympy_even_coeffs((x / 2) / sp.sinh(x / 2), 4)
    L = l_hat_root_series(4)
    assert [c * L.scale for c in L.coeffs] == _sympy_even_coeffs(x / sp.tanh(x / 2), 4)
    assert list(a_hat_root_series(3).coeffs) == [1, Fraction(-1, 24), Fraction(7, 5760), Fraction(-31, 967680)]


# -- genera -----------------------------------------------------------------

def test_a_hat_low_degrees():
    A = a_hat_form(8)
    R = A.ring
    assert A.homogeneous(0) == R.one()
    assert A.homogeneous(2) == R.p(1).scale(Fraction(-1, 24))
    assert A.homogeneous(4) == (R.p(1) ** 2).scale(Fraction(7, 5760)) - R.p(2).scale(Fraction(1, 1440))


def test_l_hat_low_degrees():
    L4 = l_hat_form(4)
    assert L4.homogeneous(2) == L4.ring.p(1).scale(Fraction(1, 3))
    L8 = l_hat_form(8)
    R = L8.ring
    assert L8.homogeneous(4) == (R.p(2).scale(7) - R.p(1) ** 2).scale(Fraction(1, 45))


def test_l_hat_top_equals_classical_l_genus():
    for dim in (4, 8, 12, 16):
        ring = GradedRing.for_dim(dim)
        classical = EvenSeries(tuple(_sympy_even_coeffs(x / sp.tanh(x), dim // 4)))
        Lc = symmetrize_multiplicative(classical, PowerSumBridge(dim // 2, ring))
        assert extract_degree(Lc, dim // 2) == extract_degree(l_hat_form(dim), dim // 2)


ROOTS = [Fraction(1), Fraction(2), Fraction(-3), Fraction(1, 2), Fraction(5, 3), Fraction(7)]


@pytest.mark.parametrize("dim", [8, 12])
def test_forms_against_explicit_rational_roots(dim):
    m = dim // 2
    roots = ROOTS[:m]
    squares = [r * r for r in roots]
    A, L, C = a_hat_form(dim), l_hat_form(dim), ch_tangent(dim)
    for d in range(0, dim // 2 + 1, 2):
        assert _evaluate(A.homogeneous(d), squares) == _root_product_oracle((x / 2) / sp.sinh(x / 2), roots, d)
        assert _evaluate(L.homogeneous(d), squares) == _root_product_oracle(x / sp.tanh(x / 2), roots, d)
        cosh2 = _sympy_even_coeffs(2 * sp.cosh(x), d // 2)[d // 2]
        assert _evaluate(C.homogeneous(d), squares) == sum(cosh2 * r ** d for r in roots)


def test_chern_characters():
    c = ch_tangent(12)
    assert c.constant == 12
    assert c.homogeneous(2) == c.ring.p(1)
    assert ch_tensor_square(8).constant == 64
    assert ch_tensor_square(8) == ch_tangent(8) * ch_tangent(8)


def test_line_bundle_terms():
    R = GradedRing(8, 0, True)
    lb = ch_line_bundle_terms(R)
    assert lb.ch_xi.constant == 2
    assert lb.cosh_sq_half.coeff((2,)) == Fraction(1, 4)
    assert lb.ch_xi - R.const(2) - lb.sinh_sq_half.scale(4) == R.zero()
    assert lb.cosh_half * lb.cosh_half == lb.cosh_sq_half


# -- theta elements ----------------------------------------------------------

def test_theta_element_leading_terms():
    dim = 12
    R = GradedRing.for_dim(dim)
    th1 = theta_element_ch("theta1", False, dim, R, 4)
    th2 = theta_element_ch("theta2", False, dim, R, 4)
    reduced = ch_tangent(dim, R) - R.const(dim)
    assert th1.coeffs[0] == R.one()
    assert not th1.coeffs[1]
    assert th1.coeffs[2] == reduced.scale(2)
    assert th2.coeffs[1] == -reduced


def test_twisted_theta1_q1_matches_bundle_expression():
    dim = 12
    R = GradedRing.for_dim(dim, twisted=True)
    th = theta_element_ch("theta1", True, dim, R, 2)
    chT = ch_tangent(dim, R)
    chxi = ch_line_bundle_terms(R).ch_xi
    # 2(T - 12 - xi + 2) - (xi⊗xi - 2 Λ²xi - C²) with ch Λ²xi = 1
    want = (chT - R.const(dim) - chxi + R.const(2)).scale(2) - (chxi * chxi - R.const(2) - R.const(2))
    assert th.coeffs[0] == R.one()
    assert not th.coeffs[1]
    assert th.coeffs[2] == want


@pytest.mark.parametrize("which", ["theta1", "theta2"])
def test_twisted_specialises_to_untwisted(which):
    dim = 8
    Rt = GradedRing.for_dim(dim, twisted=True)
    R = GradedRing.for_dim(dim)
    tw = theta_element_ch(which, True, dim, Rt, 6)
    un = theta_element_ch(which, False, dim, R, 6)
    assert tw.map(lambda c: c.at_u_zero(R)) == un


def test_lambda_sym_duality():
    dim = 8
    R = GradedRing.for_dim(dim, twisted=True)
    for bundle in ("T", "xi"):
        for first in (1, 2):
            s = sym_ch(bundle, 1, first, dim, R, 6)
            lam = lambda_ch(bundle, -1, first, dim, R, 6)
            assert s * lam == HalfQSeries.one(6, R)


def test_theta_element_is_product_of_its_factors():
    dim = 8
    R = GradedRing.for_dim(dim)
    whole = theta_element_ch("theta2", False, dim, R, 6)
    parts = sym_ch("T", 1, 2, dim, R, 6) * lambda_ch("T", -1, 1, dim, R, 6)
    assert whole == parts
