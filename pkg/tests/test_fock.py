from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockscreen import _linalg as L
from fockscreen.exactnum import PoleAtZero, QuadField, RatFunc
from fockscreen.fock import (CutoffTooSmall, FockContext, FockVector, WeightMismatch,
                             apply_heisenberg, apply_virasoro, lim_F, mode_map, pair,
                             to_standard_units)
from fockscreen.symfunc import partitions
from fockscreen.walgebra import verify_relations

F = Fraction
small = st.fractions(min_value=-3, max_value=3, max_denominator=5)


def _vector(weight, ctx, coeffs, top):
    keys = [lam for g in range(top + 1) for lam in partitions(g)]
    return FockVector(weight, dict(zip(keys, coeffs)), ctx)


def test_relation_suite_single_draw():
    report = verify_relations(seed=3, draws=1, max_mode=2, max_grade=3)
    assert report.passed, report.witnesses


def test_vacuum_is_lowest_weight():
    ctx = FockContext(F(1, 2), F(2, 3))
    w = F(3, 4)
    v = FockVector.vacuum(w, ctx)
    assert apply_virasoro(0, v) == v.scale(ctx.lowest_weight(w))
    for n in (1, 2, 3):
        assert apply_virasoro(n, v).is_zero()
        assert apply_heisenberg(n, v).is_zero()


@pytest.mark.parametrize("lam", [(1,), (2, 1), (3, 1, 1)])
def test_l0_grades(lam):
    ctx = FockContext(F(1, 3), F(1, 2))
    w = F(-2, 5)
    v = FockVector.basis(w, lam, ctx)
    assert apply_virasoro(0, v) == v.scale(ctx.lowest_weight(w) + sum(lam))


def test_heisenberg_commutator():
    ctx = FockContext(0, F(3, 2))
    v = FockVector.basis(1, (2, 1), ctx)
    lhs = apply_heisenberg(2, apply_heisenberg(-2, v)) - apply_heisenberg(-2, apply_heisenberg(2, v))
    assert lhs == v.scale(2 * ctx.kappa)


@given(st.lists(small, min_size=7, max_size=7), st.lists(small, min_size=7, max_size=7),
       st.integers(min_value=-3, max_value=3))
@settings(max_examples=40, deadline=None)
def test_pairing_is_contragredient(cv, cd, n):
    ctx = FockContext(F(2, 3), F(1, 2))
    w = F(1, 5)
    v = _vector(w, ctx, cv, 3)
    psi = _vector(ctx.rho - w, ctx, cd, 3)
    lhs = pair(psi, apply_heisenberg(n, v))
    moved = apply_heisenberg(-n, psi).scale(-1)
    if n == 0:
        moved = moved + psi.scale(ctx.rho)
    assert lhs == pair(moved, v)


def test_mode_map_matches_direct_action():
    ctx = FockContext(F(1, 3), F(3, 2))
    M = mode_map(apply_virasoro, -2, F(1, 2), ctx, 4)
    v = FockVector(F(1, 2), {(2, 1): 3, (1, 1, 1): -1, (3,): F(1, 2)}, ctx)
    assert M.apply(v) == apply_virasoro(-2, v)
    assert M.shift == 2


def test_compose_is_sequential_application():
    ctx = FockContext(F(1, 3), F(3, 2))
    A = mode_map(apply_virasoro, 1, 0, ctx, 5)
    B = mode_map(apply_heisenberg, -2, 0, ctx, 3)
    v = FockVector(0, {(1,): 2, (2, 1): 1}, ctx)
    assert A.compose(B).apply(v) == A.apply(B.apply(v))


def test_block_beyond_cutoff():
    ctx = FockContext()
    M = mode_map(apply_virasoro, 1, 0, ctx, 2)
    with pytest.raises(CutoffTooSmall):
        M.block(3)


def test_weight_mismatch():
    ctx = FockContext()
    M = mode_map(apply_virasoro, 1, 0, ctx, 2)
    with pytest.raises(WeightMismatch):
        M.apply(FockVector.vacuum(1, ctx))


def test_lim_F():
    e = RatFunc.gen()
    v = FockVector(1 + e, {(1,): 2 + e, (2,): e}, FockContext())
    out = lim_F(v)
    assert out.weight == 1 and out.terms == {(1,): 2}
    with pytest.raises(PoleAtZero):
        lim_F(FockVector(0, {(1,): 1 / e}))


def test_standard_units_preserve_central_charge():
    u = QuadField(6).sqrt
    ctx = FockContext(F(1, 3), F(1, 6))
    v = FockVector.vacuum(F(1, 2), ctx)
    std = to_standard_units(v, u)
    assert std.ctx.central_charge == ctx.central_charge
    assert std.ctx.lowest_weight(std.weight) == ctx.lowest_weight(v.weight)


def test_nullspace_and_rank():
    M = L.from_rows([[1, 2, 3], [2, 4, 6], [0, 1, 1]], 3, 3)
    assert L.rank(M) == 2
    ker = L.nullspace(M)
    assert len(ker) == 1
    assert all(x == 0 for x in L.mat_vec(M, ker[0]))


def test_nullspace_over_quadratic_field():
    r = QuadField(3).sqrt
    M = L.from_rows([[1, r], [r, 3]], 2, 2)
    ker = L.nullspace(M)
    assert len(ker) == 1
    assert all(x == 0 for x in L.mat_vec(M, ker[0]))


def test_solve_proportional():
    assert L.solve_proportional([2, 4, 0], [1, 2, 0]) == 2
    assert L.solve_proportional([2, 5], [1, 2]) is None
    assert L.solve_proportional([1, 0], [0, 0]) is None
