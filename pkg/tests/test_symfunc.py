import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockscreen.symfunc import (InadmissibleParams, NotSymmetric, SelbergParams, SymLaurent,
                                conjugate, dominates, jack_at_ones, jack_expand,
                                jack_gram_schmidt, jack_in_monomials, monomial_moment,
                                partitions, quadrature_oracle, selberg_closed, selberg_eval,
                                z_lambda)
from fockscreen.walgebra import partition_counts

F = Fraction


def test_partition_counts_match_generating_function():
    assert [len(partitions(n)) for n in range(15)] == partition_counts(14)


def test_partitions_reverse_lex():
    assert partitions(4) == ((4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1))


@given(st.integers(min_value=0, max_value=9).flatmap(lambda n: st.sampled_from(partitions(n))))
def test_conjugate_is_involution(lam):
    assert conjugate(conjugate(lam)) == tuple(lam)
    assert sum(conjugate(lam)) == sum(lam)


def test_z_lambda():
    assert z_lambda((2, 1, 1)) == 2 * 1 * 2
    assert sum(F(math.factorial(5), z_lambda(lam)) for lam in partitions(5)) == math.factorial(5)


def test_dominance():
    assert dominates((3, 1), (2, 2))
    assert not dominates((2, 2), (3, 1))


def test_from_polynomial_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        SymLaurent.from_polynomial(2, {(1, 0): 1, (0, 1): 2})


def test_symlaurent_product():
    p1 = SymLaurent(2, {(1, 0): 1})
    assert p1 * p1 == SymLaurent(2, {(2, 0): 1, (1, 1): 2})


@pytest.mark.parametrize("param", [F(2), F(1, 3), F(5, 2)])
@pytest.mark.parametrize("size", [1, 2, 3, 4])
def test_jack_two_constructions_agree(param, size):
    for lam in partitions(size):
        lb = jack_in_monomials(lam, size, param)
        gs = jack_gram_schmidt(lam, param)
        pad = {tuple(k) + (0,) * (size - len(k)): c for k, c in gs.items()}
        assert lb == SymLaurent(size, pad)


def test_jack_at_one_is_schur():
    # s_(2,1) = m_(2,1) + 2 m_(1,1,1)
    assert jack_in_monomials((2, 1), 3, 1) == SymLaurent(3, {(2, 1, 0): 1, (1, 1, 1): 2})


def _hook_value(lam, n, a):
    out = F(1)
    lc = conjugate(lam)
    for i, row in enumerate(lam):
        for j in range(row):
            arm, leg = row - j - 1, lc[j] - i - 1
            out *= F(n - i + a * j) / (a * arm + leg + 1)
    return out


@pytest.mark.parametrize("lam", [(1,), (2,), (1, 1), (2, 1), (3, 1), (2, 2)])
@pytest.mark.parametrize("a", [F(2), F(3, 4)])
def test_jack_at_ones_hook_formula(lam, a):
    assert jack_at_ones(lam, 3, a) == _hook_value(lam, 3, a)
    assert jack_in_monomials(lam, 3, a).evaluate([1, 1, 1]) == _hook_value(lam, 3, a)


def test_jack_expand_roundtrip():
    f = SymLaurent(3, {(2, 1, 0): 3, (1, 1, 1): -1, (3, 0, 0): F(1, 2)})
    a = F(3, 2)
    coeffs = jack_expand(f, a)
    back = SymLaurent(3, {})
    for lam, c in coeffs.items():
        back = back + jack_in_monomials(lam, 3, a).scale(c)
    assert back == f


def test_closed_form_n1_is_beta_function():
    p = SelbergParams(1, F(1, 3), F(2, 5), F(1, 7))
    factors = dict(selberg_closed(p).factors)
    # Gamma(1+alpha) Gamma(1+beta) / Gamma(2+alpha+beta)
    assert factors == {(1, 1, 0, 0): 1, (1, 0, 1, 0): 1, (2, 1, 1, 0): -1}


def test_n2_alpha_shift_ratio():
    a, b, g = F(1, 3), F(1, 5), F(1, 7)
    p = SelbergParams(2, a, b, g)
    expected = (1 + a) * (1 + a + g) / ((2 + a + b + g) * (2 + a + b + 2 * g))
    assert selberg_eval(SymLaurent(2, {(1, 1): 1}), p) == expected
    assert abs(quadrature_oracle(SymLaurent(2, {(1, 1): 1}), p) - float(expected)) < 1e-9


def test_n1_moments():
    a, b = F(2, 3), F(1, 4)
    p = SelbergParams(1, a, b, 0)
    assert monomial_moment((1,), p) == (a + 1) / (a + b + 2)
    assert monomial_moment((-1,), p) == (a + b + 1) / a


@pytest.mark.parametrize("point", [(F(1, 3), F(1, 5), F(1, 7)), (F(3, 2), F(-1, 3), F(2, 9)),
                                   (F(1, 4), F(2, 3), F(2, 5))])
@pytest.mark.parametrize("f", [{(1, 0): 1}, {(2, 1): 1, (1, 1): -2}, {(3, 0): 1, (0, 0): F(1, 2)},
                               {(1, -1): 1}])
def test_selberg_eval_against_quadrature_n2(point, f):
    p = SelbergParams(2, *point)
    sf = SymLaurent(2, f)
    exact = selberg_eval(sf, p)
    num = quadrature_oracle(sf, p)
    assert abs(num - float(exact)) <= 1e-6 * abs(float(exact))


@given(st.fractions(min_value=F(-8, 9), max_value=4, max_denominator=9),
       st.fractions(min_value=F(-8, 9), max_value=4, max_denominator=9),
       st.fractions(min_value=F(1, 9), max_value=2, max_denominator=9))
@settings(max_examples=25, deadline=None)
def test_shift_consistency(a, b, g):
    p = SelbergParams(2, a, b, g)
    if p.status(True) == "inadmissible":
        return
    f = SymLaurent(2, {(1, 0): 1, (2, 0): F(1, 3)})
    lhs = selberg_eval(f.shift(1), p)
    up = p.with_alpha(a + 1)
    rhs = selberg_eval(f, up) * selberg_closed(up).ratio(selberg_closed(p))
    assert lhs == rhs


def test_inadmissible_raises_with_hyperplane():
    with pytest.raises(InadmissibleParams, match=r"alpha\+\(1-1\)gamma in Z"):
        selberg_eval(SymLaurent.one(1), SelbergParams(1, -1, F(1, 2), 0))


def test_convergent_point_on_hyperplane_is_allowed():
    assert selberg_eval(SymLaurent(1, {(1,): 1}), SelbergParams(1, 0, 0, 0)) == F(1, 2)


def test_params_status():
    eps = SelbergParams(2, F(1, 3), F(1, 5), F(1, 7))
    assert eps.status() == "admissible"
    assert SelbergParams(2, F(1, 3), F(1, 5), F(1, 2)).status() == "inadmissible"
