import json
from fractions import Fraction

import pytest
from click.testing import CliRunner

from fockscreen import cli
from fockscreen.symfunc import SymLaurent
from fockscreen.walgebra import VerifyReport


def run(*args, env=None):
    return CliRunner().invoke(cli.main, list(args), env=env)


def _strip_timing(reports):
    return [{k: v for k, v in r.items() if k not in ("duration_ms", "cache_hits")} for r in reports]


def test_verify_passes_with_exit_zero():
    res = run("verify", "--algebra", "w", "--p-plus", "1", "--p-minus", "2", "--cutoff", "6",
              "--claims", "felder,sl2", "--json")
    assert res.exit_code == 0, res.output
    reports = json.loads(res.output)
    assert {r["claim_id"] for r in reports} >= {"felder-", "sl2"}
    assert all(r["status"] == "pass" for r in reports)


def test_verify_failure_exit_one(monkeypatch):
    def failing(claim, P, cutoff):
        r = VerifyReport(claim, {}, cutoff)
        r.fail(check="forced")
        return [r]
    monkeypatch.setattr(cli, "_w_reports", failing)
    res = run("verify", "--claims", "felder", "--cutoff", "2")
    assert res.exit_code == 1
    assert "FAIL" in res.output


def test_unknown_claim_exit_two():
    res = run("verify", "--claims", "felder,bogus")
    assert res.exit_code == 2
    assert "bogus" in res.output and "registered" in res.output


def test_cutoff_too_small_exit_two():
    res = run("verify", "--claims", "sl2", "--cutoff", "2")
    assert res.exit_code == 2
    assert "CutoffTooSmall" in res.output


def test_bad_params_exit_two():
    res = run("verify", "--p-plus", "2", "--p-minus", "4", "--claims", "felder")
    assert res.exit_code == 2


def test_unknown_algebra_exit_two():
    assert run("verify", "--algebra", "x").exit_code == 2


def test_config_precedence(tmp_path):
    conf = tmp_path / "c.conf"
    conf.write_text("# campaign\np-minus = 3\ncutoff = 4\nclaims = felder\ncache_dir = /from/file\n")
    cfg = cli.build_config({"cutoff": 5}, conf, env={cli.ENV_CACHE: "/from/env"})
    assert (cfg.p_minus, cfg.cutoff, cfg.claims) == (3, 5, ["felder"])
    assert cfg.cache_dir == "/from/file"
    cfg = cli.build_config({}, None, env={cli.ENV_CACHE: "/from/env"})
    assert cfg.cache_dir == "/from/env"
    assert cfg.claims == list(cli.W_CLAIMS)


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("nonsense\n")
    with pytest.raises(cli.ConfigError):
        cli.build_config({}, bad, env={})
    bad.write_text("colour = red\n")
    with pytest.raises(cli.ConfigError):
        cli.build_config({}, bad, env={})
    bad.write_text("cutoff = six\n")
    with pytest.raises(cli.ConfigError):
        cli.build_config({}, bad, env={})


def test_env_cache_dir_is_used(tmp_path):
    res = run("verify", "--claims", "felder", "--cutoff", "3", "--json",
              env={cli.ENV_CACHE: str(tmp_path)})
    assert res.exit_code == 0


def test_out_file(tmp_path):
    out = tmp_path / "r.json"
    res = run("verify", "--claims", "felder", "--cutoff", "3", "--out", str(out))
    assert res.exit_code == 0
    assert json.loads(out.read_text())[0]["claim_id"].startswith("felder")


def test_verify_is_deterministic_across_jobs():
    args = ["verify", "--p-minus", "3", "--cutoff", "5", "--claims", "felder,screening", "--json"]
    a = json.loads(run(*args).output)
    b = json.loads(run(*args).output)
    c = json.loads(run(*args, "--jobs", "2").output)
    assert _strip_timing(a) == _strip_timing(b) == _strip_timing(c)


def test_selberg_value_and_oracle():
    res = run("selberg", "--n", "1", "--f", "y", "--alpha", "0", "--beta", "0", "--oracle", "--json")
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert out["value"] == "1/2"
    assert abs(out["oracle"] - 0.5) < 1e-9


def test_selberg_n2():
    res = run("selberg", "--n", "2", "--f", "y1*y2", "--alpha", "1/3", "--beta", "1/5",
              "--gamma", "1/7", "--json")
    a, b, g = Fraction(1, 3), Fraction(1, 5), Fraction(1, 7)
    expected = (1 + a) * (1 + a + g) / ((2 + a + b + g) * (2 + a + b + 2 * g))
    assert Fraction(json.loads(res.output)["value"]) == expected


def test_selberg_hyperplane_error():
    res = run("selberg", "--n", "1", "--f", "1", "--alpha", "-1", "--beta", "1/2")
    assert res.exit_code == 2
    assert "alpha+(1-1)gamma in Z" in res.output


def test_parse_symmetric():
    assert cli.parse_symmetric("y", 2) == SymLaurent(2, {(1, 0): 1})
    assert cli.parse_symmetric("m(2,1) - 1/2*y1*y2", 2) == SymLaurent(2, {(2, 1): 1, (1, 1): Fraction(-1, 2)})
    assert cli.parse_symmetric("2 + y^2", 1) == SymLaurent(1, {(0,): 2, (2,): 1})
    with pytest.raises(ValueError):
        cli.parse_symmetric("y3", 2)


def test_compute_triplet():
    res = run("compute", "triplet", "--p-plus", "1", "--p-minus", "2", "--json")
    out = json.loads(res.output)
    assert out["h"] == "3" and set(out["vectors"]) == {"W+", "W0", "W-"}


def test_compute_kernel_vacuum():
    out = json.loads(run("compute", "kernel", "--grade", "0", "--json").output)
    assert out["dim"] == 1


def test_compute_screening_block():
    res = run("compute", "screening", "--p-minus", "3", "--sign", "-", "--mult", "1",
              "--grade", "2", "--json")
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert out["operator"].startswith("Q-")
    assert out["columns"] == ["(2,)", "(1, 1)"]


def test_compute_sw_triplet():
    out = json.loads(run("compute", "triplet", "--algebra", "sw", "--m", "1", "--json").output)
    assert out["h(W)"] == "5/2" and out["h(What)"] == "3"


def test_compute_bad_params():
    assert run("compute", "triplet", "--p-plus", "2", "--p-minus", "4").exit_code == 2
