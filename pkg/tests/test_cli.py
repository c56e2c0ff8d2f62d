import json

import pytest

from impurity_decay.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main


def test_generate_csv(tmp_path):
    assert main(["generate", "--kind", "honeycomb", "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "lattice_honeycomb_interstitial.csv").read_text().splitlines()
    assert len(lines) == 102


def test_generate_json(tmp_path):
    assert main(["generate", "--placement", "substitutional", "--format", "json", "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "lattice_square_substitutional.json").read_text())
    assert len(data["positions"]) == 99


def test_sweep(tmp_path, capsys):
    assert main(["sweep", "--out", str(tmp_path)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["gamma_min"] == pytest.approx(5.94e-5, rel=0.05)
    assert (tmp_path / "sweep_square_interstitial.csv").exists()


def test_plaquette_couplings(tmp_path):
    assert main(["plaquette-couplings", "--n", "5", "--format", "json", "--out", str(tmp_path)]) == EXIT_OK
    assert len(json.loads((tmp_path / "plaquette_couplings.json").read_text())) == 5


def test_posmap(tmp_path):
    assert main(["posmap", "--kind", "rectangular", "--grid-n", "7", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "posmap_rectangular_cut.csv").exists()


def test_dynamics(tmp_path):
    assert main(["dynamics", "--gamma-I", "1e-3", "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "dynamics_square_interstitial.json").read_text())
    assert data["rel_difference"] < 0.01


def test_dynamics_non_markovian_is_numeric_failure(tmp_path):
    code = main(["dynamics", "--gamma-I", "1", "--t-max", "2000", "--out", str(tmp_path)])
    assert code == EXIT_NUMERIC


def test_invalid_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"a_sq": -1}))
    assert main(["sweep", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    bad.write_text(json.dumps({"unknown": 1}))
    assert main(["sweep", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_infeasible_atom_count_is_config_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_atoms": 97}))
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_table1_failure_is_reported(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_atoms": 97, "substitution": "rescaled", "triangular": "equal_distance"}))
    assert main(["table1", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_NUMERIC
    report = json.loads((tmp_path / "table1.json").read_text())
    assert all(r["error"] for r in report["records"])
