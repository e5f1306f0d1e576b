"""Harness and CLI tests: configuration handling, report structure and
serialization, registry dispatch, and output files."""

import json

import numpy as np
import pytest

from vekua_lab import cli
from vekua_lab import harness as H


def test_config_validation():
    with pytest.raises(ValueError):
        H.SuiteConfig(identity="borel_pompeiu", resolutions=(32, 16))
    with pytest.raises(ValueError):
        H.SuiteConfig(identity="borel_pompeiu", interior_rel_tol=-1.0)


def test_config_defaults_and_hash():
    cfg = H.SuiteConfig.defaults("cauchy_constant")
    assert cfg.interior_rel_tol == 1e-3
    assert len(cfg.config_hash()) == 16
    cfg2 = H.SuiteConfig.defaults("cauchy_constant")
    assert cfg.config_hash() == cfg2.config_hash()
    cfg3 = H.SuiteConfig.defaults("cauchy_constant", seed=999)
    assert cfg.config_hash() != cfg3.config_hash()


def test_config_seed_from_environment(monkeypatch):
    monkeypatch.setenv("VEKUA_LAB_SEED", "777")
    cfg = H.SuiteConfig.defaults("borel_pompeiu")
    assert cfg.seed == 777


def test_config_from_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(
        json.dumps(
            {
                "identity": "operator_consistency",
                "resolutions": [16, 32],
                "interior_rel_tol": 0.04,
                "profile": {"kind": "exponential", "lam": [0, 0, 1.0]},
            }
        )
    )
    cfg = H.SuiteConfig.from_json(path)
    assert cfg.identity == "operator_consistency"
    assert cfg.interior_rel_tol == 0.04


def test_unknown_identity_rejected():
    with pytest.raises(ValueError):
        H.run_identity("fourier_inversion")
    with pytest.raises(ValueError):
        H.check_reconstruction("borel_pompeiu")


def test_unsupported_profile_rejected():
    cfg = H.SuiteConfig.defaults(
        "cauchy_vekua", profile={"kind": "quadratic_z", "a": 1.0, "c": 0.5}
    )
    with pytest.raises(ValueError):
        H.run_identity("cauchy_vekua", cfg)


def test_report_files_written(tmp_path):
    report = H.run_identity("operator_consistency", output_dir=str(tmp_path))
    out = tmp_path / "operator_consistency"
    assert (out / "report.json").exists()
    assert (out / "errors.csv").exists()
    assert (out / "convergence.csv").exists()
    data = json.loads((out / "report.json").read_text())
    assert data["identity"] == "operator_consistency"
    assert data["provenance"]["config_hash"]
    assert data["passed"] is True
    assert report.runtime_seconds > 0.0


def test_reports_are_reproducible():
    r1 = H.run_identity("cauchy_constant")
    r2 = H.run_identity("cauchy_constant")
    for a, b in zip(r1.rows, r2.rows):
        assert a["interior_error"] == b["interior_error"]
        assert a["exterior_error"] == b["exterior_error"]


def test_convergence_study_table():
    report, table = H.convergence_study("operator_consistency")
    assert report.passed
    hs = [row["h"] for row in table if row["case"] == "smooth"]
    assert hs == sorted(hs, reverse=True)
    orders = [row["order"] for row in table if row["order"] is not None]
    assert any(o > 1.8 for o in orders)


def test_reconstruction_dispatch():
    report = H.check_reconstruction("schrodinger_reconstruction")
    assert report.passed


def test_run_suite_subset(tmp_path):
    reports = H.run_suite(
        ["cauchy_constant", "operator_consistency"], output_dir=str(tmp_path)
    )
    assert set(reports) == {"cauchy_constant", "operator_consistency"}
    assert all(r.passed for r in reports.values())
    with pytest.raises(ValueError):
        H.run_suite(["nonsense"])


# -- CLI -----------------------------------------------------------------------


def test_cli_verify_exit_code(capsys):
    code = cli.main(["verify", "operator_consistency"])
    out = capsys.readouterr().out
    assert code == 0
    assert "[PASS] operator_consistency" in out
    assert "measured order" in out


def test_cli_convergence(capsys):
    code = cli.main(["convergence", "cauchy_constant"])
    out = capsys.readouterr().out
    assert code == 0
    assert "order=" in out


def test_cli_suite_list(tmp_path, capsys):
    code = cli.main(
        ["suite", "cauchy_constant,operator_consistency", "--out", str(tmp_path)]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "2/2 identity checks passed" in out
    assert (tmp_path / "cauchy_constant" / "report.json").exists()


def test_cli_dtn_export(tmp_path, capsys):
    code = cli.main(
        [
            "dtn",
            "--profile",
            "exponential",
            "--resolution",
            "9",
            "--basis-size",
            "4",
            "--out",
            str(tmp_path),
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    matrix = np.loadtxt(tmp_path / "dtn_matrix.csv", delimiter=",", skiprows=1)
    assert matrix.shape == (16, 3)
    dense = matrix[:, 2].reshape(4, 4)
    assert np.max(np.abs(dense - dense.T)) <= 1e-8 * np.max(np.abs(dense))
    traces = (tmp_path / "traces.csv").read_text().splitlines()
    assert traces[0].startswith("node_index,face,x1,x2,x3")
    assert len(traces) == 1 + 6 * 81


def test_cli_config_override(tmp_path, capsys):
    cfg = {
        "identity": "cauchy_constant",
        "resolutions": [16],
        "boundary_cells": 32,
        "interior_rel_tol": 0.01,
        "exterior_abs_tol": 0.01,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code = cli.main(["verify", "cauchy_constant", "--config", str(path)])
    assert code == 0
