import json

import pytest

from katolab import experiments as E


GOOD_SCALING = """
# comment lines are ignored
kind = scaling
symbol = power:m=2,n=1
alpha = 0.5
q = 2
r = 2
R = 8,16,32
seed = 4
"""


def test_parse_config():
    cfg = E.parse_config(GOOD_SCALING)
    assert cfg.kind == "scaling"
    assert cfg.symbol.m == 2.0
    assert cfg.R_list == (8.0, 16.0, 32.0)
    assert cfg.seed == 4


def test_parse_config_errors_name_fields():
    with pytest.raises(E.ConfigError) as exc:
        E.parse_config("kind = scaling\nsymbol = power:m=2,n=1\nbogus = 1")
    assert exc.value.field_name == "bogus"
    with pytest.raises(E.ConfigError) as exc:
        E.parse_config("symbol = power:m=2,n=1")
    assert exc.value.field_name == "kind"
    with pytest.raises(E.ConfigError) as exc:
        E.parse_config("kind = scaling\nsymbol = power:m=2,n=1\nR = 8,16")
    assert exc.value.field_name == "R"
    with pytest.raises(E.ConfigError) as exc:
        E.parse_config("kind = transfer\nsymbol = power:m=2,n=1\n"
                       "r = 4\nr_tilde = 2\nR = 8,16,32")
    assert exc.value.field_name == "r_tilde"


def test_scaling_run_passes_and_sabotage_fails():
    cfg = E.parse_config(GOOD_SCALING)
    rep = E.run(cfg)
    assert rep.passed
    assert any(c["name"] == "slope-matches-prediction" for c in rep.criteria)

    # injecting a wrong regularity shifts the prediction and must fail
    bad = E.parse_config(GOOD_SCALING.replace("alpha = 0.5", "alpha = 1.0"))
    rep_bad = E.run(bad)
    assert not rep_bad.passed


def test_report_schema_and_reproducibility(tmp_path):
    cfg = E.parse_config(GOOD_SCALING)
    cfg.out_dir = str(tmp_path / "runs")
    rep1 = E.run(cfg)
    problems = E.validate_report(rep1.to_dict())
    assert problems == []

    rep2 = E.run(cfg)
    d1, d2 = rep1.to_dict(), rep2.to_dict()
    d1.pop("environment")
    d2.pop("environment")
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)

    files = {p.name for p in (tmp_path / "runs").iterdir()}
    assert {"report.json", "measurements.csv", "scaling.dat"} <= files
    loaded = json.loads((tmp_path / "runs" / "report.json").read_text())
    assert E.validate_report(loaded) == []


def test_invalid_report_detected():
    assert E.validate_report({}) != []
    assert E.validate_report({"schema": "wrong", "config": {}, "measurements": [],
                              "fits": [], "criteria": [], "environment": {}}) != []


def test_propagator_audit_quick():
    cfg = E.parse_config("kind = propagator-audit\nsymbol = power:m=2,n=1\n"
                         "N = 512\nL = 64\nfields = 5\nseed = 1")
    rep = E.run(cfg)
    assert rep.passed
    names = {c["name"] for c in rep.criteria}
    assert {"energy-identity", "gaussian-oracle"} <= names


def test_wavepacket_audit_quick():
    cfg = E.parse_config("kind = wavepacket-audit\nsymbol = power:m=2,n=1\n"
                         "N = 512\nL = 64\nR = 4\nfields = 2\n"
                         "subcollections = 10\nseed = 2")
    rep = E.run(cfg)
    assert rep.passed


def test_sparse_audit_quick():
    cfg = E.parse_config("kind = sparse-audit\nsymbol = power:m=2,n=1\n"
                         "trials = 5\nK = 3\nseed = 3")
    rep = E.run(cfg)
    assert rep.passed
