"""Command-line behavior: exit codes, output formats, determinism, and the
golden report fixture (generated once with seed 7 and frozen)."""

import json
import struct
from pathlib import Path

import numpy as np
import pytest

from fbsheet.cli import main
from fbsheet.simulator import load_field
from fbsheet.variations import normalized_variation

GOLDEN = Path(__file__).parent / "data" / "golden_clt.csv"


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        code, _, err = run_cli(["frobnicate"], capsys)
        assert code == 2
        assert "invalid choice" in err

    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, err = run_cli(["constants", "--gamma", "0.5", "--wat", "1"], capsys)
        assert code == 2
        assert "usage" in err

    def test_precondition_violation_is_exit_one(self, capsys):
        code, _, err = run_cli(
            ["verify-clt", "--alpha", "0.9", "--beta", "0.9", "--q", "2",
             "--grids", "8", "--reps", "5", "--seed", "1"],
            capsys,
        )
        assert code == 1
        assert "non-central" in err

    def test_invalid_hurst_is_exit_one(self, capsys):
        code, _, err = run_cli(
            ["simulate", "--alpha", "1.5", "--beta", "0.5", "--n", "4", "--m", "4",
             "--seed", "1", "--out", "x.bin"],
            capsys,
        )
        assert code == 1
        assert "(0, 1)" in err

    def test_version_flag(self, capsys):
        code, out, err = run_cli(["--version"], capsys)
        assert code == 0
        assert "fbsheet 0.1.0" in out + err


class TestConstantsCommand:
    def test_brownian_series_line(self, capsys):
        code, out, _ = run_cli(
            ["constants", "--gamma", "0.5", "--q", "2", "--tol", "1e-12"], capsys
        )
        assert code == 0
        assert out.strip() == "s_gamma,1.0,0.0"

    def test_threshold_prints_iota(self, capsys):
        code, out, _ = run_cli(["constants", "--gamma", "0.75", "--q", "2"], capsys)
        assert code == 0
        assert out.startswith("iota,0.28125,")

    def test_supercritical_prints_kappa(self, capsys):
        code, out, _ = run_cli(["constants", "--gamma", "0.9", "--q", "2"], capsys)
        assert code == 0
        kind, value, _ = out.strip().split(",")
        assert kind == "kappa"
        assert float(value) == pytest.approx(1.08, rel=1e-12)


class TestSimulateAndVariations:
    def test_simulate_is_deterministic(self, tmp_path, capsys):
        a = tmp_path / "a.bin"
        b = tmp_path / "b.bin"
        for out in (a, b):
            code, _, _ = run_cli(
                ["simulate", "--alpha", "0.9", "--beta", "0.9", "--n", "16",
                 "--m", "16", "--seed", "1", "--out", str(out)],
                capsys,
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()
        assert struct.unpack("<8s", a.read_bytes()[:8])[0] == b"FBSFLD01"

    def test_variations_report_matches_library(self, tmp_path, capsys):
        path = tmp_path / "f.bin"
        run_cli(
            ["simulate", "--alpha", "0.3", "--beta", "0.9", "--n", "8", "--m", "8",
             "--seed", "5", "--stream", "2", "--out", str(path)],
            capsys,
        )
        code, out, _ = run_cli(["variations", "--in", str(path), "--q", "2"], capsys)
        assert code == 0
        header, row = out.strip().split("\n")
        assert header.startswith("V,tildeV,phi")
        fields = row.split(",")
        rep = normalized_variation(load_field(path), 2)
        assert float(fields[0]) == rep.V
        assert float(fields[1]) == rep.tildeV
        assert fields[3] == "4"


class TestVerifyClt:
    def test_golden_report_byte_identical(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code, _, _ = run_cli(
            ["verify-clt", "--alpha", "0.3", "--beta", "0.3", "--q", "2",
             "--grids", "8,16,32", "--reps", "50", "--seed", "7",
             "--threads", "1", "--no-timing", "--out", str(out)],
            capsys,
        )
        assert code == 0
        assert out.read_bytes() == GOLDEN.read_bytes()
        sidecar = json.loads(out.with_suffix(".json").read_text())
        assert sidecar["config"]["master_seed"] == 7

    def test_thread_count_does_not_change_bytes(self, tmp_path, capsys):
        outs = []
        for threads in ("1", "4"):
            out = tmp_path / f"r{threads}.csv"
            run_cli(
                ["verify-clt", "--alpha", "0.3", "--beta", "0.3", "--q", "2",
                 "--grids", "8,16", "--reps", "40", "--seed", "11",
                 "--threads", threads, "--no-timing", "--out", str(out)],
                capsys,
            )
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_samples_csv_emitted(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        samples = tmp_path / "s.csv"
        run_cli(
            ["verify-clt", "--alpha", "0.3", "--beta", "0.3", "--q", "2",
             "--grids", "8", "--reps", "10", "--seed", "11", "--threads", "1",
             "--no-timing", "--out", str(out), "--samples-out", str(samples)],
            capsys,
        )
        lines = samples.read_text().strip().split("\n")
        assert len(lines) == 11
        assert lines[0].startswith("kind,alpha")


class TestVerifyNoncentral:
    def test_small_study(self, tmp_path, capsys):
        out = tmp_path / "nc.csv"
        code, stdout, _ = run_cli(
            ["verify-noncentral", "--alpha", "0.9", "--beta", "0.9", "--q", "2",
             "--grids", "16,32", "--reps", "60", "--seed", "2", "--threads", "1",
             "--no-timing", "--out", str(out)],
            capsys,
        )
        assert code == 0
        assert "q!*||h||^2" in stdout
        sidecar = json.loads(out.with_suffix(".json").read_text())
        assert len(sidecar["noncentral_exact"]) == 2
        assert len(sidecar["noncentral_cross"]) == 1

    def test_non_nested_grids_rejected(self, capsys):
        code, _, err = run_cli(
            ["verify-noncentral", "--alpha", "0.9", "--beta", "0.9", "--q", "2",
             "--grids", "16,24", "--reps", "10", "--seed", "2"],
            capsys,
        )
        assert code == 1
        assert "nested" in err


class TestOtherCommands:
    def test_covariance_smoke(self, tmp_path, capsys):
        out = tmp_path / "cov.csv"
        code, stdout, _ = run_cli(
            ["covariance", "--alpha", "0.9", "--beta", "0.9", "--q", "2",
             "--n", "16", "--m", "16", "--reps", "50", "--seed", "1",
             "--threads", "1", "--no-timing", "--points", "1,1;0.5,0.5",
             "--out", str(out)],
            capsys,
        )
        assert code == 0
        assert "max_abs_dev=" in stdout
        assert len(out.read_text().strip().split("\n")) == 4

    def test_estimate_hurst_output(self, capsys):
        code, out, _ = run_cli(
            ["estimate-hurst", "--alpha", "0.5", "--beta", "0.5", "--n", "128",
             "--m", "128", "--seed", "11"],
            capsys,
        )
        assert code == 0
        lines = out.strip().split("\n")
        a_hat = float(lines[0].split(",")[1])
        b_hat = float(lines[1].split(",")[1])
        assert abs(a_hat - 0.5) < 0.15 and abs(b_hat - 0.5) < 0.15


class TestConfigFileAndEnv:
    def test_config_file_supplies_flags(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"gamma": 0.5, "q": 2, "tol": 1e-12}))
        code, out, _ = run_cli(["--config", str(cfg), "constants"], capsys)
        assert code == 0
        assert out.startswith("s_gamma,1.0,")

    def test_explicit_flag_overrides_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"gamma": 0.5, "q": 2}))
        code, out, _ = run_cli(
            ["--config", str(cfg), "constants", "--gamma", "0.9"], capsys
        )
        assert code == 0
        assert out.startswith("kappa,")

    def test_output_dir_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("FBSHEET_OUTPUT_DIR", str(tmp_path))
        code, _, _ = run_cli(
            ["simulate", "--alpha", "0.5", "--beta", "0.5", "--n", "4", "--m", "4",
             "--seed", "1", "--out", "env_field.bin"],
            capsys,
        )
        assert code == 0
        assert (tmp_path / "env_field.bin").exists()
