from fractions import Fraction

import pytest

from fockscreen import _linalg as L
from fockscreen.exactnum import RatFunc, eval_at_zero
from fockscreen.fock import FockContext, FockVector
from fockscreen.screening import (Lattice, NonLatticeDomain, ScreeningSpec, G_direct, G_limit,
                                  compose_N, deformed_screen, multi_screen, screening_shift,
                                  single_screen)
from fockscreen.vertex import apply_vertex_coeff
from fockscreen.walgebra import WParams, verify_g_consistency, verify_screening_commutation

F = Fraction


def test_lattice_units():
    lat = Lattice(2, 3)
    assert lat.d == 3 and lat.kappa == F(1, 3)
    assert lat.alpha_pm("+") * lat.alpha_pm("-") == -2 * lat.kappa
    # central charge of the (2,3) model vanishes
    assert lat.central_charge == 0
    assert Lattice(1, 2).central_charge == -2


def test_deformed_charges_keep_product():
    lat = Lattice(1, 3)
    prod = lat.alpha_pm("+", True) * lat.alpha_pm("-", True)
    assert prod == RatFunc.const(-2 * lat.kappa, var="delta")


def test_alpha_labels_shift_by_lattice():
    lat = Lattice(2, 3)
    assert lat.alpha(1, 1, 1) == lat.alpha(1 - lat.p_plus, 1)
    assert lat.alpha(1, 1 + lat.p_minus) == lat.alpha(1 - lat.p_plus, 1)


def test_screening_shift():
    lat = Lattice(2, 3)
    assert screening_shift(lat.alpha_pm("-"), lat.alpha(1, 1), 1, lat.kappa) == -1
    assert screening_shift(lat.alpha_pm("-"), lat.alpha(1, 2), 2, lat.kappa) == -2


def test_single_screen_is_residue_of_vertex_operator():
    lat = Lattice(2, 3)
    Q = single_screen(ScreeningSpec(lat, "+", 1, False, (1, 1, 0), 4))
    v = FockVector(lat.alpha(1, 1), {(2, 1): 1, (1, 1, 1): 3, (3,): -2}, lat.ctx())
    direct = apply_vertex_coeff(lat.alpha_pm("+"), FockVector(v.weight, v.terms, FockContext(0, lat.kappa)), -1)
    assert Q.apply(v).terms == direct.terms


def test_screening_off_lattice_rejected():
    lat = Lattice(1, 3)
    with pytest.raises(NonLatticeDomain):
        single_screen(ScreeningSpec(lat, "-", 1, False, (1, 2, 0), 2))


@pytest.mark.parametrize("pp,cases", [((1, 3), [("-", 2)]), ((2, 3), [("+", 1), ("-", 2)])])
def test_screenings_commute_with_virasoro(pp, cases):
    report = verify_screening_commutation(WParams(*pp), 4, cases)
    assert report.passed, report.witnesses


def test_multi_screen_nilpotent_pair():
    lat = Lattice(1, 3)
    cut = 5
    first = multi_screen(ScreeningSpec(lat, "-", 1, False, (1, 1, 0), cut))
    w = first.dst_weight
    second = multi_screen(ScreeningSpec(lat, "-", 2, False, _label_of(lat, w, 2), cut))
    assert second.src_weight == w
    assert second.compose(first).is_zero()


def _label_of(lat, w, s):
    for r in range(-6, 7):
        if lat.alpha(r, s) == w:
            return (r, s, 0)
    raise AssertionError("weight not on the lattice")


def test_multi_screen_ledger_records_normalization():
    lat = Lattice(1, 3)
    Q = multi_screen(ScreeningSpec(lat, "-", 2, False, (1, 2, 0), 3))
    d = Q.ledger.describe()
    assert d["sigma"] == 0
    assert len(d["fingerprints"]) == 1


def test_deformed_screen_reduces_to_undeformed():
    lat = Lattice(2, 3)
    spec = ScreeningSpec(lat, "-", 1, True, (1, 1, 0), 4)
    Qt = deformed_screen(spec)
    Q = single_screen(spec.with_(deformed=False))
    assert Qt.min_valuation() >= 0
    lim = Qt.map_entries(eval_at_zero)
    for g in range(5):
        A, B = lim.blocks.get(g), Q.blocks.get(g)
        if A is None or B is None:
            assert (A is None or L.is_zero(A)) and (B is None or L.is_zero(B))
        else:
            assert L.to_rows(A) == L.to_rows(B)


def test_composite_N_vanishes_at_eps_zero():
    N = compose_N(Lattice(1, 2), 1, "-", 0, 4)
    assert N.min_valuation() + N.ledger.sigma >= 1


def test_G_limit_equals_direct_for_12():
    report = verify_g_consistency(WParams(1, 2), 4)
    assert report.passed, report.witnesses


def test_G_limit_weights():
    lat = Lattice(1, 2)
    Gl = G_limit(lat, 1, "-", 1, 3)
    Gd = G_direct("-", 3, lat, (1, 1, 0))
    assert (Gl.src_weight, Gl.dst_weight, Gl.shift) == (Gd.src_weight, Gd.dst_weight, Gd.shift)
