from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockscreen.fock import FockContext, FockVector, apply_heisenberg, apply_virasoro
from fockscreen.vertex import (NonIntegerResidue, correlation_prefactor, state_field_mode)

F = Fraction
CTX = FockContext(F(1, 3), F(1, 2))


def _skew_rhs(a, b, n, sign, terms=14):
    """sum_j (-1)^{n+j+1} sign L_{-1}^j/j! b_{n+j} a."""
    acc = FockVector(a.weight + b.weight, {}, a.ctx)
    for j in range(terms):
        x = state_field_mode(b, n + j, a)
        for _ in range(j):
            x = apply_virasoro(-1, x)
        s = 1 if (n + j + 1) % 2 == 0 else -1
        acc = acc + x.scale(F(s * sign, factorial(j)))
    return acc


@pytest.mark.parametrize("wa,wb", [(0, 0), (1, 0), (F(1, 2), 1), (1, -1), (1, 1)])
@pytest.mark.parametrize("n", [-3, -1, 0, 2])
def test_skew_symmetry(wa, wb, n):
    a = FockVector(F(wa), {(2,): 1, (1, 1): F(1, 3)}, CTX)
    b = FockVector(F(wb), {(1,): 2, (): 1}, CTX)
    off = F(wa) * F(wb) / CTX.kappa
    sign = 1 if int(off) % 2 == 0 else -1
    assert state_field_mode(a, n, b) == _skew_rhs(a, b, n, sign)


@given(st.integers(min_value=-4, max_value=4))
@settings(max_examples=9, deadline=None)
def test_heisenberg_field_modes(n):
    a1 = FockVector.basis(0, (1,), CTX)
    b = FockVector(F(1, 2), {(2, 1): 1, (1,): -3, (): F(1, 2)}, CTX)
    assert state_field_mode(a1, n, b) == apply_heisenberg(n, b)


@pytest.mark.parametrize("n", [-2, -1, 0, 1, 2])
def test_conformal_vector_modes(n):
    T = apply_virasoro(-2, FockVector.vacuum(0, CTX))
    b = FockVector(F(1, 2), {(2,): 1, (1,): 5, (): 1}, CTX)
    assert state_field_mode(T, n + 1, b) == apply_virasoro(n, b)


def test_vacuum_is_identity():
    vac = FockVector.vacuum(0, CTX)
    b = FockVector(F(1, 2), {(2,): 1, (1, 1): 2}, CTX)
    assert state_field_mode(vac, -1, b) == b
    assert state_field_mode(vac, 0, b).is_zero()


def test_non_integer_residue():
    a = FockVector.vacuum(F(1, 3), CTX)
    with pytest.raises(NonIntegerResidue):
        state_field_mode(a, 0, FockVector.vacuum(F(1, 3), CTX))


def test_correlation_prefactor_selberg_parameters():
    pre = correlation_prefactor([F(-1, 2)] * 3, F(1, 4), kappa=F(1, 2))
    total, params = pre.substituted()
    assert params.n == 2
    assert params.alpha == F(-1, 2) * F(1, 4) / F(1, 2)
    assert params.beta == F(1, 2) and params.gamma == F(1, 4)
