from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockscreen.superns import (NSParams, NSVector, apply_fermion, apply_ns_mode, fermion_states,
                                is_ns_singular, ladder_vector, ns_basis, ns_central_charge,
                                ns_derivation, ns_l0_weight, ns_single_screen, sw_commute,
                                sw_glimit, sw_nilpotent, sw_relations, sw_sl2, triplet_vectors_ns)
from fockscreen.fock import FockContext

F = Fraction
HALF = F(1, 2)


def _series(top2):
    """Coefficients (in q^{1/2}) of prod (1+q^{r}) over r half-odd, and times prod 1/(1-q^n)."""
    ferm = [0] * (top2 + 1)
    ferm[0] = 1
    for two_r in range(1, top2 + 1, 2):
        for k in range(top2, two_r - 1, -1):
            ferm[k] += ferm[k - two_r]
    full = list(ferm)
    for two_n in range(2, top2 + 1, 2):
        for k in range(two_n, top2 + 1):
            full[k] += full[k - two_n]
    return ferm, full


def test_basis_sizes_match_generating_functions():
    ferm, full = _series(12)
    assert [len(fermion_states(F(k, 2))) for k in range(13)] == ferm
    assert [len(ns_basis(F(k, 2))) for k in range(13)] == full


def test_fermion_anticommutator():
    ctx = FockContext(0, 1)
    v = NSVector.basis(0, (1,), (F(3, 2),), ctx)
    for r in (HALF, F(3, 2)):
        lhs = apply_fermion(r, apply_fermion(-r, v)) + apply_fermion(-r, apply_fermion(r, v))
        assert lhs == v
    assert apply_fermion(-HALF, apply_fermion(-HALF, v)).is_zero()


def test_parity():
    ctx = FockContext(0, 1)
    assert NSVector.basis(0, (), (HALF,), ctx).parity() == 1
    assert NSVector.basis(0, (2,), (F(3, 2), HALF), ctx).parity() == 0


def test_ns_central_charge():
    assert ns_central_charge(FockContext(0, 1)) == F(3, 2)
    assert NSParams(1).central_charge == F(-5, 2)


def test_relations_single_draw():
    report = sw_relations(seed=1, draws=1, max_mode=2, max_grade=2)
    assert report.passed, report.witnesses


@given(st.fractions(min_value=-3, max_value=3, max_denominator=4),
       st.sampled_from([HALF, F(3, 2), F(5, 2)]))
@settings(max_examples=15, deadline=None)
def test_supercurrent_squares_to_virasoro(rho, r):
    ctx = FockContext(rho, 1)
    v = NSVector(F(1, 3), {((1,), ()): 1, ((), (HALF,)): 2}, ctx)
    GG = apply_ns_mode("G", r, apply_ns_mode("G", r, v))
    assert GG == apply_ns_mode("L", int(2 * r), v)


def test_screenings_are_odd():
    P = NSParams(1)
    S = ns_single_screen(P, "-", F(0), 3)
    assert S.shift == -HALF
    assert S.apply(NSVector.vacuum(F(0), P.ctx())).is_zero()
    for lam, ferm in [((2,), ()), ((1,), (HALF,)), ((), (F(3, 2), HALF))]:
        v = NSVector.basis(F(0), lam, ferm, P.ctx())
        img = S.apply(v)
        assert not img.is_zero() and img.parity() == 1 - v.parity()


def test_screenings_commute():
    assert sw_commute(NSParams(1), 3).passed


def test_complex_nilpotent_and_exact():
    report = sw_nilpotent(NSParams(1), 4)
    assert report.passed, report.witnesses


def test_sl2_and_triplet_weights():
    P = NSParams(1)
    report = sw_sl2(P)
    assert report.passed, report.witnesses
    trip = triplet_vectors_ns(P)
    assert {ns_l0_weight(P, v) for v in trip["W"].values()} == {F(5, 2)}
    assert {ns_l0_weight(P, v) for v in trip["What"].values()} == {F(3)}
    assert all(is_ns_singular(v) for v in trip["W"].values())


def test_derivation_kills_bottom_of_ladder():
    P = NSParams(1)
    v = ladder_vector(P, 1, -1)
    assert not v.is_zero()
    G = ns_derivation(P, v.weight, max(v.grades()))
    assert G.apply(v).is_zero()


def test_derivation_lowers_ladder():
    P = NSParams(1)
    top, below = ladder_vector(P, 1, 0), ladder_vector(P, 1, -1)
    img = ns_derivation(P, top.weight, max(top.grades())).apply(top)
    g = below.grades()[0]
    assert img.grades() == [g]
    ratio = [a / b for a, b in zip(img.coords(g), below.coords(g)) if b]
    assert ratio and len(set(ratio)) == 1 and ratio[0] != 0


def test_glimit():
    report = sw_glimit(NSParams(1), 3, k_range=(0,))
    assert report.passed, report.witnesses


def test_params_validation():
    with pytest.raises(ValueError):
        NSParams(0)
