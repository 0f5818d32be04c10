import json
import os

import numpy as np
import pytest

from latspec.cli import main as cli_main
from latspec.errors import ConfigError
from latspec.experiments import resolve_config, run_experiment
from latspec.experiments.artifacts import format_value


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown keys"):
        resolve_config({"experiment": "stark-envelope", "bogus": 1})


def test_missing_required_field():
    with pytest.raises(ConfigError, match="missing required"):
        resolve_config({"experiment": "green-check"})


def test_wrong_type_rejected():
    with pytest.raises(ConfigError, match="must be a"):
        resolve_config({"experiment": "stark-envelope", "x_max": "big"})


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError, match="unknown experiment"):
        resolve_config({"experiment": "frobnicate"})


def test_subcommand_config_mismatch():
    with pytest.raises(ConfigError, match="was requested"):
        resolve_config({"experiment": "growth", "energies": [0.0]},
                       experiment="borel")


def test_nested_domain_validation():
    cfg = {"experiment": "green-check", "domain": {"kind": "box", "d": 5, "half_width": 2}}
    with pytest.raises(ConfigError, match="must be 1, 2 or 3"):
        run_experiment(cfg, out_root="/tmp/never")


def test_energy_outside_band_rejected():
    cfg = {
        "experiment": "kls-exponent",
        "energies": [0.0, 2.5],
        "n_max": 100,
        "realizations": 1,
    }
    with pytest.raises(ConfigError, match="essential spectrum"):
        run_experiment(cfg, out_root="/tmp/never")


def _small_green(tmp_path, out):
    return {
        "experiment": "green-check",
        "domain": {"kind": "spiral", "turns": 2},
        "n_triples": 20,
        "n_cumulative_pairs": 5,
        "seed": 3,
        "output_dir": str(out),
    }


def test_artifact_layout_and_summary(tmp_path):
    out = tmp_path / "out"
    res = run_experiment(_small_green(tmp_path, out))
    assert res.exit_code == 0
    assert os.path.isfile(os.path.join(res.run_dir, "data.csv"))
    assert os.path.isfile(os.path.join(res.run_dir, "summary.json"))
    assert res.run_dir.startswith(str(out / "green-check"))
    summary = json.load(open(os.path.join(res.run_dir, "summary.json")))
    assert summary["all_gates_passed"] is True
    assert summary["config"]["n_triples"] == 20  # resolved config embedded
    assert summary["config"]["tolerance_factor"] == 1e-12  # default resolved
    assert "wall_clock_seconds" in summary


def test_rerun_reproduces_csv_bytes(tmp_path):
    cfg = _small_green(tmp_path, tmp_path / "out")
    res1 = run_experiment(cfg)
    payload1 = open(os.path.join(res1.run_dir, "data.csv"), "rb").read()
    res2 = run_experiment(cfg)
    payload2 = open(os.path.join(res2.run_dir, "data.csv"), "rb").read()
    assert res1.run_dir == res2.run_dir  # same config -> same run id
    assert payload1 == payload2


def test_jobs_do_not_change_payload(tmp_path):
    cfg = {
        "experiment": "kls-exponent",
        "coupling": 1.0,
        "energies": [0.0, 0.5],
        "n_max": 3000,
        "realizations": 4,
        "seed": 5,
        "gate_tolerance": 0.0,
        "dimension_tolerance": 0.0,
    }
    r1 = run_experiment(cfg, out_root=str(tmp_path / "a"), jobs=1)
    r2 = run_experiment(cfg, out_root=str(tmp_path / "b"), jobs=3)
    b1 = open(os.path.join(r1.run_dir, "data.csv"), "rb").read()
    b2 = open(os.path.join(r2.run_dir, "data.csv"), "rb").read()
    assert b1 == b2


def test_seed_override_changes_run(tmp_path):
    cfg = _small_green(tmp_path, tmp_path / "out")
    base = run_experiment(cfg)
    over = run_experiment(cfg, seed_override=99)
    assert over.summary["config"]["seed"] == 99
    assert over.run_dir != base.run_dir


def test_gate_failure_exit_code(tmp_path):
    cfg = {
        "experiment": "transport",
        "domain": {"kind": "box", "d": 1, "half_width": 150},
        "initial_site": [0],
        "t_min": 1.0,
        "t_max": 50.0,
        "points_per_decade": 6,
        "moments": [2],
        "beta2_range": [5.0, 6.0],  # unsatisfiable
    }
    res = run_experiment(cfg, out_root=str(tmp_path))
    assert res.exit_code == 1
    assert not res.summary["all_gates_passed"]


def test_numerical_error_exit_code(tmp_path):
    cfg = {
        "experiment": "transport",
        "domain": {"kind": "box", "d": 1, "half_width": 40},
        "initial_site": [0],
        "t_min": 10.0,
        "t_max": 500.0,  # cone guard must refuse this box
        "points_per_decade": 6,
        "moments": [2],
    }
    res = run_experiment(cfg, out_root=str(tmp_path))
    assert res.exit_code == 3
    assert res.summary["error"]["op"] == "evolve"
    assert os.path.isfile(os.path.join(res.run_dir, "summary.json"))


def test_cli_roundtrip(tmp_path, capsys):
    cfg_path = _write(tmp_path, {
        "experiment": "stark-envelope",
        "energies": [0.0],
        "x_max": 2000.0,
        "step": 1e-3,
        "halving_check": False,
        "slope_tolerance": 0.03,
    })
    code = cli_main(["stark-envelope", "--config", cfg_path,
                     "--out", str(tmp_path / "out")])
    assert code == 0
    out = capsys.readouterr().out
    assert "stark-envelope" in out and "ok" in out


def test_cli_config_error_exit_2(tmp_path):
    cfg_path = _write(tmp_path, {"experiment": "growth"})  # missing energies
    assert cli_main(["growth", "--config", cfg_path, "--out", str(tmp_path)]) == 2


def test_csv_floats_roundtrip_exactly():
    rng = np.random.default_rng(0)
    for x in rng.standard_normal(100) * 10.0 ** rng.integers(-300, 300, 100):
        assert float(format_value(float(x))) == float(x)
    assert format_value(True) == "1"
    assert format_value(float("nan")) == "nan"


def test_growth_experiment_runs(tmp_path):
    cfg = {
        "experiment": "growth",
        "mode": "free-halfline",
        "energies": [0.0, 1.0],
        "n_max": 2000,
        "n_radii": 8,
        "exponent_range": [0.95, 1.05],
    }
    res = run_experiment(cfg, out_root=str(tmp_path))
    assert res.exit_code == 0
    header = open(os.path.join(res.run_dir, "data.csv")).readline().strip()
    assert header == "E,R,norm_sq,window_slope"


def test_spiral_compare_experiment(tmp_path):
    cfg = {"experiment": "spiral-compare", "turns": 30, "n_radii": 6,
           "structural_turns": 3}
    res = run_experiment(cfg, out_root=str(tmp_path))
    assert res.exit_code == 0
    names = {g["name"] for g in res.summary["gates"]}
    assert names == {"spiral_structural_identity", "halfline_exponent",
                     "embedded_exponent"}


def test_borel_experiment_free(tmp_path):
    cfg = {
        "experiment": "borel",
        "potential": {"kind": "free"},
        "sizes": [500],
        "energy": 0.0,
        "sigma_range": [-0.15, 0.15],
    }
    res = run_experiment(cfg, out_root=str(tmp_path))
    assert res.exit_code == 0
    assert res.summary["sum_rule_max_err"] < 1e-8


def test_dalpha_experiment_atomic(tmp_path):
    cfg = {
        "experiment": "dalpha",
        "potential": {"kind": "table", "entries": [[[1], 0.25]]},
        "n_sites": 1,
        "energy": 0.25,
        "alpha": 0.0,
        "expected_range": [0.999999, 1.000001],
    }
    res = run_experiment(cfg, out_root=str(tmp_path))
    assert res.exit_code == 0
    assert abs(res.summary["value"] - 1.0) < 1e-9
