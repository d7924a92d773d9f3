"""Acceptance criteria 1-10, one test per criterion.

The conftest terminal-summary hook prints one PASS/FAIL line per criterion.
"""

import json
import os
import subprocess
import sys
import time
from fractions import Fraction

from fockscreen.superns import NSParams, sw_commute, sw_nilpotent, sw_relations, sw_sl2
from fockscreen.symfunc import (SelbergParams, SymLaurent, quadrature_oracle, selberg_closed,
                                selberg_eval)
from fockscreen.walgebra import (WParams, conformal_vector, minimal_character, triplet_vectors,
                                 verify_felder, verify_g_consistency, verify_leibniz,
                                 verify_relations, verify_screening_commutation, verify_sl2,
                                 verify_valuations)
from fockscreen.fock import FockVector

F = Fraction


def _assert_passed(report):
    assert report.passed, [w for w in report.witnesses if not w.get("ok", True)][:5]


def test_criterion_01_relations():
    t = time.perf_counter()
    _assert_passed(verify_relations(seed=0, draws=5, max_mode=3, max_grade=6))
    _assert_passed(sw_relations(seed=0, draws=5, max_mode=3, max_grade=6))
    assert time.perf_counter() - t <= 30


INSERTIONS = {
    1: [{(1,): 1}, {(2,): 1, (0,): F(-1, 3)}, {(3,): 2, (1,): -1}],
    2: [{(1, 0): 1}, {(1, 1): 1}, {(2, 0): 1, (1, 0): F(1, 2)}, {(2, 1): 1}, {(3, 0): 1, (1, 1): -2}],
}
POINTS = [(F(1, 3), F(1, 5), F(1, 7)), (F(3, 2), F(-1, 3), F(2, 9)), (F(1, 4), F(2, 3), F(2, 5))]


def test_criterion_02_selberg():
    t = time.perf_counter()
    worst = 0.0
    for n, fs in INSERTIONS.items():
        for point in POINTS:
            p = SelbergParams(n, *point)
            assert p.convergent()
            for f in fs:
                sf = SymLaurent(n, f)
                exact = float(selberg_eval(sf, p))
                worst = max(worst, abs(quadrature_oracle(sf, p) - exact) / abs(exact))
    assert worst <= 1e-6
    # n = 1: Gamma(1+alpha) Gamma(1+beta) / Gamma(2+alpha+beta), factors keyed (c, a, b, g) -> power
    for point in POINTS:
        closed = dict(selberg_closed(SelbergParams(1, *point)).factors)
        assert closed == {(1, 1, 0, 0): 1, (1, 0, 1, 0): 1, (2, 1, 1, 0): -1}
    assert time.perf_counter() - t <= 60


def test_criterion_03_screening_commutation():
    t = time.perf_counter()
    runs = [((1, 2), [("+", 1)], 6), ((1, 3), [("-", 1), ("-", 2)], 6),
            ((2, 3), [("+", 1), ("-", 1), ("-", 2)], 6), ((1, 4), [("-", 1), ("-", 3)], 4)]
    for pp, cases, cutoff in runs:
        _assert_passed(verify_screening_commutation(WParams(*pp), cutoff, cases, modes=range(-2, 3)))
    assert time.perf_counter() - t <= 300


def test_criterion_04_felder():
    t = time.perf_counter()
    for pp in [(1, 2), (1, 3)]:
        P = WParams(*pp)
        for s in range(1, P.p_minus):
            _assert_passed(verify_felder(P, "-", s, (-1, 0, 1), 6))
    report = verify_felder(WParams(2, 3), "-", 1, (0,), 6)
    _assert_passed(report)
    dims = next(w["dims"] for w in report.witnesses if w.get("check") == "cohomology dims")
    assert dims == minimal_character(2, 3, 1, 1, 6)
    assert time.perf_counter() - t <= 600


def test_criterion_05_valuations():
    t = time.perf_counter()
    _assert_passed(verify_valuations(WParams(2, 3), 5))
    assert time.perf_counter() - t <= 600


def test_criterion_06_g_consistency():
    for pp in [(1, 2), (2, 3)]:
        report = verify_g_consistency(WParams(*pp), 5)
        _assert_passed(report)
    am = next(w for w in report.witnesses if w.get("check") == "AM = c G_+")
    assert am["ok"] and len(am["scalars"]) == 1


def test_criterion_07_sl2():
    t = time.perf_counter()
    for pp in [(1, 2), (1, 3), (2, 3)]:
        report = verify_sl2(WParams(*pp))
        _assert_passed(report)
        c = next(w["value"] for w in report.witnesses if w.get("check") == "c_EF")
        assert c != "0"
    assert time.perf_counter() - t <= 1800


def test_criterion_08_leibniz():
    P = WParams(1, 2)
    trip = triplet_vectors(P)
    vac = FockVector.vacuum(0, P.lattice.ctx())
    for a, b in [(vac, trip["-"]), (conformal_vector(P), trip["-"]), (trip["-"], trip["-"])]:
        _assert_passed(verify_leibniz(P, a, b))


def test_criterion_09_super_triplet():
    t = time.perf_counter()
    P = NSParams(1)
    _assert_passed(sw_nilpotent(P, 4))
    _assert_passed(sw_commute(P, 3))
    report = sw_sl2(P)
    _assert_passed(report)
    checks = {w["check"]: w for w in report.witnesses}
    assert checks["c_EF"]["value"] != "0"
    assert checks["G w(1)_-1 = 0"]["ok"]
    assert time.perf_counter() - t <= 900


def _cli_reports(*extra):
    cmd = [sys.executable, "-m", "fockscreen.cli", "verify", "--algebra", "w", "--p-plus", "1",
           "--p-minus", "2", "--cutoff", "6", "--claims", "felder,sl2,leibniz", "--json", *extra]
    env = {k: v for k, v in os.environ.items() if k != "FOCKSCREEN_CACHE"}
    out = subprocess.run(cmd, capture_output=True, text=True, env=env, check=True).stdout
    reports = json.loads(out)
    for r in reports:
        r.pop("duration_ms")
    return json.dumps(reports, sort_keys=True, indent=2)


def test_criterion_10_determinism():
    first = _cli_reports()
    assert _cli_reports() == first
    assert _cli_reports("--jobs", "2") == first
