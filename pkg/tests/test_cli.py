import json
import re
import subprocess
import sys

import pytest

from stuffedmaps.cli import ConfigError, RunConfig, main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, [json.loads(l) for l in out.out.splitlines()], out.err


def series_map(records):
    return {(tuple(r["monomial"]["cells"]) if r["monomial"]["cells"] else (), r["monomial"]["upow"]): r["coeff"]
            for r in records}


def write(tmp_path, data):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(data))
    return str(p)


def test_gaussian_toprec(tmp_path, capsys):
    cfg = write(tmp_path, {"schema_version": 1, "weights": [], "chi_max": 1, "lmax": 4})
    code, recs, _ = run(["toprec", "--config", cfg], capsys)
    assert code == 0
    mom = {(r["n"], r["g"], tuple(r["perimeters"])): series_map(r["series"]) for r in recs if r["kind"] == "moment"}
    assert mom[(1, 0, (2,))] == {((), 4): "1/1"}
    assert mom[(1, 0, (4,))] == {((), 6): "2/1"}
    assert mom[(1, 1, (4,))] == {((), 2): "1/1"}
    assert {(r["n"], r["g"]) for r in recs if r["kind"] == "correlator"} == {(1, 1), (3, 0)}


def test_toprec_verify_flag(capsys):
    code, recs, _ = run(["toprec", "--chi-max", "1", "--truncation", "1", "--verify"], capsys)
    res = [r for r in recs if r["kind"] == "residual"]
    assert code == 0 and res and all(r["passed"] for r in res)


def test_verify_standard_suite(capsys):
    code, recs, _ = run(["verify", "--suite", "standard"], capsys)
    assert code == 0
    assert recs and all(r["passed"] for r in recs)
    assert {r["equation"] for r in recs} == {"sde", "linear_loop", "quadratic_loop", "pole_check", "oracle"}


def test_malformed_perimeters(tmp_path, capsys):
    cfg = write(tmp_path, {"schema_version": 1, "weights": [{"h": 0, "perimeters": [0]}]})
    code, recs, err = run(["disk", "--config", cfg], capsys)
    assert code == 2 and not recs and "perimeters" in err


@pytest.mark.parametrize("data", [
    {"schema_version": 2},
    {"schema_version": 1, "truncation": -1},
    {"schema_version": 1, "weights": [{"h": 0, "perimeters": [2], "value": "1.5"}]},
    {"schema_version": 1, "unknown": 1},
    {"schema_version": 1, "weights": [{"h": 0, "perimeters": [2]}, {"h": 0, "perimeters": [2]}]},
])
def test_schema_rejects(data):
    with pytest.raises(ConfigError):
        RunConfig(data)


def test_unreadable_config(tmp_path, capsys):
    code, _, err = run(["disk", "--config", str(tmp_path / "missing.json")], capsys)
    assert code == 2 and "cannot read" in err


def test_oracle_query(capsys):
    code, recs, _ = run(["oracle", "--query", '{"n": 1, "g": 1, "perimeters": [4]}'], capsys)
    assert code == 0 and recs == [{"kind": "oracle", "query": {"n": 1, "g": 1, "perimeters": [4]},
                                   "upow": 2, "coeff": "1/1"}]
    code, recs, _ = run(["oracle", "--query", '{"n": 1, "g": 0, "perimeters": [0]}'], capsys)
    assert recs[0]["upow"] == 2 and recs[0]["coeff"] == "1/1"


def test_oracle_bad_query(capsys):
    assert main(["oracle"]) == 2
    assert main(["oracle", "--query", '{"n": 2, "g": 0, "perimeters": [1]}']) == 2
    assert main(["oracle", "--query", "{not json"]) == 2


def test_oracle_cap_exceeded(capsys):
    code = main(["oracle", "--oracle-cap", "2", "--query", '{"n": 1, "g": 0, "perimeters": [8]}'])
    assert code == 1 and "CapExceeded" in capsys.readouterr().err


def test_induce_round_trip(tmp_path, capsys):
    cfg = write(tmp_path, {"schema_version": 1, "truncation": 1,
                           "induce": {"alpha_order": 2, "alpha": "1/2", "gamma": "3", "run": True}})
    code, recs, _ = run(["induce", "--config", cfg], capsys)
    assert code == 0
    moments = {tuple(r["perimeters"]): r["terms"] for r in recs if r["kind"] == "induced_moment"}
    assert moments == {(2,): [{"npow": 1, "upow": 2, "coeff": "1/1"}],
                       (1, 1): [{"npow": 0, "upow": 2, "coeff": "1/1"}]}
    induced = next(r["config"] for r in recs if r["kind"] == "induced_config")
    RunConfig(induced)
    assert any(r["kind"] == "disk" for r in recs)
    path = write(tmp_path, induced)
    assert main(["disk", "--config", path]) == 0


def test_induce_odd_order_is_empty(tmp_path, capsys):
    cfg = write(tmp_path, {"schema_version": 1, "induce": {"alpha_order": 1}})
    code, recs, _ = run(["induce", "--config", cfg], capsys)
    assert code == 0 and [r["kind"] for r in recs] == ["induced_config"]
    assert recs[0]["config"]["weights"] == []


def test_out_directory(tmp_path, capsys):
    assert main(["cylinder", "--truncation", "1", "--lmax", "3", "--out", str(tmp_path / "o")]) == 0
    text = (tmp_path / "o" / "cylinder.ndjson").read_text()
    assert capsys.readouterr().out == ""
    assert json.loads(text.splitlines()[0])["kind"] == "cylinder"


def test_determinism_and_no_floats(tmp_path):
    cfg = write(tmp_path, {"schema_version": 1, "truncation": 1, "chi_max": 1, "lmax": 3,
                           "weights": [{"h": 0, "perimeters": [3], "value": "1/3"},
                                       {"h": 1, "perimeters": [2]}]})
    cmd = [sys.executable, "-m", "stuffedmaps", "toprec", "--config", cfg]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
    for line in a.decode().splitlines():
        def walk(x):
            assert not isinstance(x, float)
            if isinstance(x, dict):
                for v in x.values():
                    walk(v)
            elif isinstance(x, list):
                for v in x:
                    walk(v)
            elif isinstance(x, str) and re.fullmatch(r"-?\d+\.\d*", x):
                raise AssertionError(x)
        walk(json.loads(line))
