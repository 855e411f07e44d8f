import csv
import hashlib
import json
import math

import pytest

from obslearn import __version__
from obslearn.cli import main
from obslearn.config import ExperimentConfig, config_from_dict, load_config
from obslearn.errors import ConfigError
from obslearn.serialize import csv_text, dumps_json, format_float, parse_float

FAST_CHECK = {"horizon": 15, "type_grid": {"points": 5}, "context_depth": 3}


def _write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def _run(tmp_path, command, data, out="out", *extra):
    cfg = _write(tmp_path, data, f"{out}.json")
    code = main([command, "--config", str(cfg), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


def _manifest(out, command):
    return json.loads((out / f"manifest_{command}.json").read_text())


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- serialisation


def test_float_format_round_trips():
    for x in (0.1, -1.4224739587854105, 1e-300, 2.0 / 3.0):
        assert float(format_float(x)) == x
    assert format_float(math.inf) == "inf"
    assert parse_float("-inf") == -math.inf


def test_csv_and_json_layout():
    text = csv_text(("a", "b"), [(1, 0.5), (True, math.nan)])
    assert text == "a,b\n1,0.5\n1,nan\n"
    doc = dumps_json({"z": 1, "a": [math.inf, None, False]})
    assert doc.index('"z"') < doc.index('"a"')
    assert json.loads(doc) == {"z": 1, "a": ["inf", None, False]}


# ---------------------------------------------------------------- configuration


def test_defaults_validate():
    cfg, digest = load_config(None)
    assert cfg == ExperimentConfig()
    assert digest == hashlib.sha256(b"{}").hexdigest()


@pytest.mark.parametrize("data", [
    {"discount": {"delta_a": 1.0}},
    {"discount": {"delta_b": 0.0}},
    {"model": {"sigma_a": -1.0}},
    {"root_tol": 0},
    {"horizon": 0},
    {"policies": ["forgetful"]},
    {"quadrature": {"tail_mass_cutoff": 1e-6}},
    {"epsilon": {"low": 1.0, "high": 0.1}},
    {"aggregation": {"history": [[1, 0]]}},
    {"seed": -1},
    {"unknown": 1},
    {"model": {"sigma": 1.0}},
])
def test_invalid_configs_rejected(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_unreadable_and_malformed_configs(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_invalid_discount_fails_before_any_output(tmp_path):
    code, out = _run(tmp_path, "simulate", {"discount": {"delta_a": 1.0}})
    assert code == 3
    assert not out.exists()


def test_bad_worker_env(tmp_path, monkeypatch):
    monkeypatch.setenv("OBSLEARN_WORKERS", "many")
    code, _ = _run(tmp_path, "construct", {"model": {"sigma_b": 2.0}})
    assert code == 3


# ---------------------------------------------------------------- simulate


def test_simulate_immediate_agreement(tmp_path):
    code, out = _run(tmp_path, "simulate", {"horizon": 10}, "out", "--s-a", "2", "--s-b", "3")
    assert code == 0
    rows = _rows(out / "myopic_trace.csv")
    assert rows[0]["agreed"] == "1"
    assert json.loads((out / "myopic_trace.json").read_text())["agreement_date"] == 0


def test_simulate_disagreement_symmetry(tmp_path):
    code, out = _run(tmp_path, "simulate", {"horizon": 30, "simulate": {"s_a": -0.1, "s_b": 2.0}})
    assert code == 0
    rows = _rows(out / "myopic_trace.csv")
    disagree = [r for r in rows if r["agreed"] == "0"]
    assert disagree
    for r in disagree:
        assert float(r["m_a"]) == pytest.approx(-float(r["m_b"]), abs=1e-6)
    for name in ("play_trace_inertia.csv", "play_trace_reset.csv"):
        header = (out / name).read_text().splitlines()[0].split(",")
        assert header[-3:] == ["stage_payoff_a", "stage_payoff_b", "off_path_flag"]


def test_manifest_lists_every_output(tmp_path):
    code, out = _run(tmp_path, "simulate", {"horizon": 5})
    manifest = _manifest(out, "simulate")
    assert manifest["exit_code"] == code
    assert manifest["version"] == __version__
    listed = {f["path"] for f in manifest["files"]}
    written = {p.name for p in out.iterdir()} - {"manifest_simulate.json"}
    assert listed == written
    for entry in manifest["files"]:
        data = (out / entry["path"]).read_bytes()
        assert data and hashlib.sha256(data).hexdigest() == entry["sha256"]
    config_bytes = (tmp_path / "out.json").read_bytes()
    assert manifest["config_sha256"] == hashlib.sha256(config_bytes).hexdigest()


# ---------------------------------------------------------------- check / construct


def test_check_symmetric_and_reproducible(tmp_path):
    code1, out1 = _run(tmp_path, "check", FAST_CHECK, "one")
    code2, out2 = _run(tmp_path, "check", FAST_CHECK, "two")
    assert code1 == code2 == 0
    report = json.loads((out1 / "check_report.json").read_text())
    assert report["outcome"] == "no profitable deviation"
    for name in ("check_report.json", "deviations.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_check_with_workers_matches_serial(tmp_path):
    _, serial = _run(tmp_path, "check", FAST_CHECK, "serial")
    code, pooled = _run(tmp_path, "check", FAST_CHECK, "pooled", "--workers", "2")
    assert code == 0
    assert (serial / "check_report.json").read_bytes() == (pooled / "check_report.json").read_bytes()


def test_check_asymmetric_finds_deviation(tmp_path):
    code, out = _run(tmp_path, "check", {"model": {"sigma_b": 2.0}, "discount": {"delta_a": 0.95}})
    assert code == 0
    report = json.loads((out / "check_report.json").read_text())
    assert report["report"]["gap"] > 0.0 and report["report"]["lower_bound"] > 0.0
    assert report["epsilon"] > 0.0


def test_check_asymmetric_impatient_is_inconclusive(tmp_path):
    code, out = _run(tmp_path, "check", {"model": {"sigma_b": 2.0}, "discount": {"delta_a": 1e-6}})
    assert code == 2
    assert "no profitable epsilon" in json.loads((out / "check_report.json").read_text())["outcome"]


def test_construct(tmp_path):
    code, out = _run(tmp_path, "construct", {"model": {"sigma_b": 2.0}})
    assert code == 0
    data = json.loads((out / "construction.json").read_text())
    assert data["K"] >= 2 and data["sequence"][0] == [0.0, 0.0]
    code, _ = _run(tmp_path, "construct", {}, "sym")
    assert code == 2


# ---------------------------------------------------------------- aggregate / oracle


def test_aggregate_two_by_two_grid_drops_antidiagonal(tmp_path):
    code, out = _run(tmp_path, "aggregate", {"aggregation": {"points": 2, "horizon": 50}})
    assert code in (0, 1)
    myopic = json.loads((out / "aggregation_report.json").read_text())["profiles"]["myopic"]
    assert myopic["n_sampled"] + myopic["n_excluded"] == 4
    assert myopic["n_excluded"] == 2
    assert len(_rows(out / "aggregation_points_myopic.csv")) == myopic["n_sampled"]


def test_aggregate_dichotomy_and_seed_independence(tmp_path):
    data = {"aggregation": {"points": 40, "horizon": 100}}
    code, out1 = _run(tmp_path, "aggregate", data, "s1", "--seed", "1")
    _, out2 = _run(tmp_path, "aggregate", data, "s2", "--seed", "99")
    assert code == 0
    report = json.loads((out1 / "aggregation_report.json").read_text())
    assert report["profiles"]["myopic"]["mismatch_fraction"] == 0.0
    assert report["profiles"]["scaled_2"]["mismatch_fraction"] > 0.0
    for path in out1.iterdir():
        if not path.name.startswith("manifest"):
            assert path.read_bytes() == (out2 / path.name).read_bytes()
    region = _rows(out1 / "mismatch_region_scaled_2.csv")
    assert region and set(region[0]) == {"s_a", "s_b", "wrong_action"}


def test_oracle_subcommand(tmp_path):
    data = {"oracle": {"draws": 20000, "quadrature_pairs": 20, "horizon": 10}}
    code, out = _run(tmp_path, "oracle", data, "o", "--seed", "3")
    assert code == 0
    checks = json.loads((out / "oracle_report.json").read_text())["checks"]
    assert all(c["pass"] for c in checks.values())
