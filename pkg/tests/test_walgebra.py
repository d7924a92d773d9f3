import json
from fractions import Fraction

import pytest

from fockscreen.fock import FockVector
from fockscreen.walgebra import (SingularityCheckFailed, VerifyReport, WParams, conformal_vector,
                                 is_singular, kernel_at_weight, kernel_component,
                                 minimal_character, triplet_vectors, verify_felder,
                                 verify_leibniz, verify_sl2, verify_valuations, window_top)

F = Fraction


def test_params_validation():
    with pytest.raises(ValueError):
        WParams(2, 4)
    with pytest.raises(ValueError):
        WParams(3, 2)


def test_kac_weights():
    P = WParams(1, 2)
    assert P.central_charge == -2
    assert P.h(3, 1) == 3
    assert WParams(2, 3).central_charge == 0
    # h_{r,s} is invariant under (r, s) -> (p_+ - r, p_- - s) in the minimal range
    Q = WParams(3, 4)
    assert Q.h(1, 2) == Q.h(2, 2) == F(1, 16)


def test_ising_characters():
    assert minimal_character(3, 4, 1, 1, 6) == [1, 0, 1, 1, 2, 2, 3]
    # L(1/2): q^{1/2}(1 + q + q^2 + q^3 + 2q^4 + 2q^5 + 3q^6)
    assert minimal_character(3, 4, 2, 1, 6) == [1, 1, 1, 1, 2, 2, 3]


def test_minimal_character_rejects_outside_kac_table():
    with pytest.raises(ValueError):
        minimal_character(2, 3, 2, 1, 3)


def test_symplectic_fermion_kernel_character():
    P = WParams(1, 2)
    dims = [sum(b.dim for b in kernel_at_weight(P, w).values()) for w in range(4)]
    assert dims == [1, 0, 1, 4]


def test_kernel_component_vacuum():
    P = WParams(1, 2)
    ker = kernel_component(P, 0, 2)
    assert ker[0].dim == 1 and ker[1].dim == 0
    assert ker[0].vectors[0] == FockVector.vacuum(0, P.lattice.ctx())


@pytest.mark.parametrize("pp", [(1, 2), (1, 3), (2, 3)])
def test_triplet_vectors_are_singular(pp):
    P = WParams(*pp)
    trip = triplet_vectors(P)
    H = P.h(4 * P.p_plus - 1, 1)
    ctx = P.lattice.ctx()
    for v in trip.values():
        assert is_singular(v)
        assert ctx.lowest_weight(v.weight) + v.grades()[0] == H


def test_triplet_cutoff_guard():
    from fockscreen.fock import CutoffTooSmall
    with pytest.raises(CutoffTooSmall):
        triplet_vectors(WParams(1, 3), cutoff=1)


def test_singularity_error_type():
    assert issubclass(SingularityCheckFailed, RuntimeError)


@pytest.mark.parametrize("pp,which,labels", [((1, 2), "-", [1]), ((1, 3), "-", [1, 2]),
                                            ((2, 3), "+", [1]), ((2, 3), "-", [1, 2])])
def test_felder_complexes(pp, which, labels):
    P = WParams(*pp)
    for x in labels:
        report = verify_felder(P, which, x, (-1, 0, 1), 6)
        assert report.passed, report.witnesses


def test_felder_cohomology_is_minimal_module():
    P = WParams(2, 3)
    report = verify_felder(P, "-", 1, (0,), 6)
    dims = [w for w in report.witnesses if w.get("check") == "cohomology dims"]
    assert dims[0]["dims"] == minimal_character(2, 3, 1, 1, 6)


def test_felder_rejects_bad_label():
    with pytest.raises(ValueError):
        verify_felder(WParams(1, 3), "-", 3, (0,), 2)


def test_sl2_symplectic_fermions():
    report = verify_sl2(WParams(1, 2))
    assert report.passed, report.witnesses
    wit = {w["check"]: w for w in report.witnesses if w["check"] in ("kernel dims", "c_EF")}
    assert wit["kernel dims"]["dims"] == {"-2": [1, 1, 2], "0": [1, 0, 1, 2, 3, 4], "2": [0, 0, 1, 1, 2]}
    assert wit["c_EF"]["value"] == "2"


def test_sl2_13():
    assert verify_sl2(WParams(1, 3)).passed


def test_window_top():
    assert window_top(WParams(1, 2)) == 5


@pytest.mark.parametrize("pair", ["vacuum", "T", "W-W-", "W+W-"])
def test_leibniz(pair):
    P = WParams(1, 2)
    trip = triplet_vectors(P)
    vac = FockVector.vacuum(0, P.lattice.ctx())
    a, b = {"vacuum": (vac, trip["-"]), "T": (conformal_vector(P), trip["-"]),
            "W-W-": (trip["-"], trip["-"]), "W+W-": (trip["+"], trip["-"])}[pair]
    report = verify_leibniz(P, a, b, cutoff=6, label=pair)
    assert report.passed, report.witnesses


def test_leibniz_nontrivial_pair_has_nonzero_images():
    P = WParams(1, 2)
    trip = triplet_vectors(P)
    report = verify_leibniz(P, trip["+"], trip["-"], cutoff=6)
    assert report.passed
    assert any(w.get("nonzero") for w in report.witnesses)


def test_leibniz_w_plus_w_zero():
    P = WParams(1, 2)
    trip = triplet_vectors(P)
    report = verify_leibniz(P, trip["+"], trip["0"], cutoff=6)
    assert report.passed


def test_valuations_13():
    report = verify_valuations(WParams(1, 3), 4)
    assert report.passed, report.witnesses


def test_report_serializes():
    r = VerifyReport("x", {"p": 1}, 3)
    r.check(True, check="a")
    r.check(False, check="b", value=F(1, 2))
    d = r.to_dict()
    assert d["status"] == "fail" and not r.passed
    assert [w["ok"] for w in d["witnesses"]] == [True, False]
    json.dumps(d, default=str)
