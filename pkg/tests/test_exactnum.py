from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockscreen.exactnum import (IncompatibleField, PoleAtZero, QuadExt, QuadField, RatFunc,
                                 delta_to_eps, eval_at_zero, integer_value, is_integer_scalar,
                                 parse_scalar, render_scalar, taylor_coeff, valuation)

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
K3 = QuadField(3)


@st.composite
def quads(draw):
    return QuadExt(draw(rationals), draw(rationals), K3)


def test_field_is_interned():
    assert QuadField(3) is QuadField(Fraction(6, 2))


def test_rational_sqrt_rejected():
    with pytest.raises(ValueError):
        QuadField(Fraction(4, 9))


def test_sqrt_squares_to_d():
    r = K3.sqrt
    assert r * r == 3
    assert (1 + r) * (1 - r) == -2


@given(quads(), quads(), quads())
@settings(max_examples=60)
def test_quad_ring_axioms(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x - x == 0


@given(quads())
@settings(max_examples=60)
def test_quad_inverse(x):
    if x == 0:
        return
    assert x * x.inverse() == 1
    assert x.norm() == (x * x.conjugate()).a


def test_incompatible_fields():
    with pytest.raises(IncompatibleField):
        K3.sqrt + QuadField(2).sqrt


@given(quads())
@settings(max_examples=40)
def test_render_parse_roundtrip_quad(x):
    assert parse_scalar(render_scalar(x)) == x


def test_render_examples():
    assert render_scalar(Fraction(-3, 4)) == "-3/4"
    assert render_scalar(QuadExt(0, Fraction(-1, 6), K3)) == "-1/6*sqrt(3)"
    assert render_scalar(QuadExt(1, -1, K3)) == "1 - sqrt(3)"


def test_valuation_and_limit():
    e = RatFunc.gen()
    f = (e * e + 2 * e) / (3 * e)
    assert valuation(f) == 0
    assert eval_at_zero(f) == Fraction(2, 3)
    assert valuation(e ** 3 / (1 + e)) == 3
    assert valuation(RatFunc.const(0)) == float("inf")
    with pytest.raises(PoleAtZero):
        eval_at_zero(1 / e)


def test_valuation_of_scalars():
    assert valuation(Fraction(0)) == float("inf")
    assert valuation(Fraction(5)) == 0


def test_taylor_coefficients_of_geometric_series():
    e = RatFunc.gen()
    f = 1 / (1 - 2 * e)
    assert [taylor_coeff(f, k) for k in range(5)] == [1, 2, 4, 8, 16]


@given(rationals, rationals, st.integers(min_value=0, max_value=3))
@settings(max_examples=40)
def test_valuation_is_additive(a, b, k):
    e = RatFunc.gen()
    f = e ** k * (1 + a * e)
    g = e * (1 + b * e)
    assert valuation(f * g) == valuation(f) + valuation(g)


def test_delta_to_eps_rescales():
    d = RatFunc.gen(var="delta")
    u = K3.sqrt
    f = delta_to_eps(d * d, u)
    # delta = eps / u, so delta^2 = eps^2 / 3
    assert taylor_coeff(f, 2) == Fraction(1, 3)


def test_integrality():
    assert is_integer_scalar(Fraction(4, 2))
    assert not is_integer_scalar(QuadExt(1, 1, K3))
    assert integer_value(Fraction(-6, 3)) == -2
    assert integer_value(Fraction(1, 2)) is None
    assert integer_value(RatFunc.const(3)) == 3
    assert integer_value(RatFunc.gen()) is None
