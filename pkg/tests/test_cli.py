"""Config validation, artifact pipeline, and exit-code checks for the CLI."""

import copy
import hashlib
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from jdexec.cli import ConfigError, load_config, main

REPO = Path(__file__).resolve().parents[1]
SHIPPED_ACQ = REPO / "configs" / "acquisition_full.json"
SHIPPED_LIQ = REPO / "configs" / "liquidation_full.json"

SIM_FILES = (
    "paths.csv",
    "histogram.csv",
    "inventory_heatmap.csv",
    "speed_heatmap.csv",
    "mean_curves.csv",
    "stop_reasons.csv",
    "path_stats.csv",
)


def small_config_dict() -> dict:
    data = json.loads(SHIPPED_ACQ.read_text(encoding="utf-8"))
    data = copy.deepcopy(data)
    data["grid"]["M"] = 200
    data["sim"]["n_paths"] = 64
    data["sim"]["base_seed"] = 7
    return data


def write_config(tmp_path: Path, data: dict, name: str = "run.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    """One solved-and-simulated artifact directory shared by read-only tests."""
    base = tmp_path_factory.mktemp("cli_small")
    cfg_path = write_config(base, small_config_dict())
    out = base / "art"
    assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    return cfg_path, out


class TestLoadConfig:
    def test_shipped_configs_load(self):
        for path, kind in ((SHIPPED_ACQ, "acquisition"), (SHIPPED_LIQ, "liquidation")):
            cfg = load_config(path)
            assert cfg.problem.kind.value == kind
            assert cfg.n_steps == 390
            assert cfg.m_steps == 1000
            assert cfg.n_paths == 10_000
            assert cfg.dynamics_mode == "direct"
            assert math.isclose(
                cfg.problem.dynamics.sigma_total, 0.16910192311147737, rel_tol=1e-12
            )

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.json")

    def test_parse_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="parse error"):
            load_config(path)

    @pytest.mark.parametrize(
        ("mutate", "message"),
        [
            (lambda d: d.update(extra=1), r"top level: unknown keys \['extra'\]"),
            (lambda d: d.pop("grid"), r"top level: missing keys \['grid'\]"),
            (
                lambda d: d["dynamics"].update(sm={"delta": 0.01}),
                r"dynamics: conflicting modes \['sm', 'direct'\]",
            ),
            (lambda d: d["dynamics"].pop("direct"), "dynamics: one of"),
            (
                lambda d: d["dynamics"]["direct"].pop("varsigma"),
                r"dynamics.direct: missing keys \['varsigma'\]",
            ),
            (
                lambda d: d["dynamics"]["direct"].update(sigma="0.1"),
                "dynamics.direct.sigma: expected a number",
            ),
            (
                lambda d: d["dynamics"]["direct"].update(sigma=True),
                "dynamics.direct.sigma: expected a number",
            ),
            (
                lambda d: d["dynamics"]["direct"].update(sigma=-0.1),
                "dynamics.direct",
            ),
            (lambda d: d["problem"].update(s_ref=30.0), r"problem: unknown keys \['s_ref'\]"),
            (lambda d: d["problem"].update(kind="hold"), "problem.kind"),
            (lambda d: d["problem"].update(S0=31.1), "problem"),
            (lambda d: d["problem"].update(T="1.0"), "problem.T: expected a number"),
            (lambda d: d["grid"].update(N=390.0), "grid.N: expected an integer"),
            (lambda d: d["sim"].update(n_paths=0), "sim.n_paths"),
            (lambda d: d["sim"].update(base_seed=-1), "sim.base_seed"),
        ],
    )
    def test_rejections(self, tmp_path, mutate, message):
        data = small_config_dict()
        mutate(data)
        path = write_config(tmp_path, data)
        with pytest.raises(ConfigError, match=message):
            load_config(path)

    def test_sm_mode_builds_chain_dynamics(self, tmp_path):
        data = small_config_dict()
        data["dynamics"] = {
            "sm": {
                "delta": 0.01,
                "p_cont": 0.45,
                "p_cont_prime": 0.45,
                "family": "exponential",
                "family_params": [0.5],
                "sigma": 0.1,
                "pi_weight": 0.5,
            }
        }
        cfg = load_config(write_config(tmp_path, data))
        assert cfg.dynamics_mode == "sm"
        assert cfg.problem.dynamics.eta == 0.0
        assert cfg.problem.dynamics.report.source == "SM"

    def test_sm_bad_family(self, tmp_path):
        data = small_config_dict()
        data["dynamics"] = {
            "sm": {
                "delta": 0.01,
                "p_cont": 0.45,
                "p_cont_prime": 0.45,
                "family": "weibull",
                "family_params": [0.5],
                "sigma": 0.1,
            }
        }
        with pytest.raises(ConfigError, match="dynamics.sm.family"):
            load_config(write_config(tmp_path, data))

    def test_hp_unstable_kernel(self, tmp_path):
        data = small_config_dict()
        data["dynamics"] = {
            "hp": {
                "delta": 0.01,
                "p_cont": 0.5,
                "p_cont_prime": 0.5,
                "lambda_base": 1.0,
                "kernel_scale": 1.2,
                "kernel_decay": 1.0,
                "sigma": 0.1,
            }
        }
        with pytest.raises(ConfigError, match="dynamics.hp"):
            load_config(write_config(tmp_path, data))


class TestCoeffs:
    def test_direct_report(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        assert main(["coeffs", "--config", str(cfg_path)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert list(payload) == [
            "pi_star",
            "s_star",
            "a_star",
            "sigma_star",
            "sigma_bar",
            "varsigma",
            "eta",
            "sigma_total",
            "source",
        ]
        assert payload["source"] == "direct"
        assert payload["pi_star"] is None
        assert payload["sigma_bar"] == 0.01598
        assert payload["varsigma"] == 0.1323
        assert math.isclose(payload["sigma_total"], 0.16910192311147737, rel_tol=1e-12)

    def test_out_file_matches_stdout(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        out = tmp_path / "art"
        assert main(["coeffs", "--config", str(cfg_path), "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert (out / "coefficients.json").read_text(encoding="utf-8") == stdout

    def test_bad_config_exit_code(self, tmp_path, capsys):
        data = small_config_dict()
        data["problem"].pop("alpha")
        cfg_path = write_config(tmp_path, data)
        assert main(["coeffs", "--config", str(cfg_path)]) == 2
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "alpha" in err


class TestSolve:
    def test_writes_surface_and_meta(self, small_run, capsys):
        cfg_path, out = small_run
        assert (out / "surface.csv").exists()
        meta = json.loads((out / "surface_meta.json").read_text(encoding="utf-8"))
        assert meta["config"] == json.loads(cfg_path.read_text(encoding="utf-8"))
        digest = hashlib.sha256((out / "surface.csv").read_bytes()).hexdigest()
        assert meta["surface_checksum_sha256"] == digest
        assert meta["wall_time_s"] > 0.0

    def test_rerun_is_byte_identical(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out_a)]) == 0
        assert main(["solve", "--config", str(cfg_path), "--out", str(out_b)]) == 0
        assert (out_a / "surface.csv").read_bytes() == (out_b / "surface.csv").read_bytes()
        meta_a = json.loads((out_a / "surface_meta.json").read_text(encoding="utf-8"))
        meta_b = json.loads((out_b / "surface_meta.json").read_text(encoding="utf-8"))
        meta_a.pop("wall_time_s")
        meta_b.pop("wall_time_s")
        assert meta_a == meta_b
        assert "surface written to" in capsys.readouterr().out

    def test_unstable_grid_exit_code(self, tmp_path, capsys):
        data = small_config_dict()
        data["grid"]["N"] = 50
        cfg_path = write_config(tmp_path, data)
        assert main(["solve", "--config", str(cfg_path), "--out", str(tmp_path / "x")]) == 3
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "101" in err


class TestSimulate:
    def test_artifacts_complete(self, small_run):
        _, out = small_run
        for name in SIM_FILES:
            assert (out / name).exists(), name

    def test_path_stats_rows_and_reason_totals(self, small_run):
        _, out = small_run
        stats_lines = (out / "path_stats.csv").read_text(encoding="ascii").splitlines()
        assert stats_lines[0] == (
            "path_id,stop_time,stop_reason,avg_exec_price,terminal_units,final_price"
        )
        assert len(stats_lines) == 1 + 64
        reason_rows = (out / "stop_reasons.csv").read_text(encoding="ascii").splitlines()[1:]
        assert [row.split(",")[0] for row in reason_rows] == [
            "Maturity",
            "PriceBarrier",
            "InventoryComplete",
        ]
        assert sum(int(row.split(",")[1]) for row in reason_rows) == 64
        hist_rows = (out / "histogram.csv").read_text(encoding="ascii").splitlines()[1:]
        assert sum(int(row.split(",")[2]) for row in hist_rows) == 64

    def test_paths_file_holds_sample_paths(self, small_run):
        _, out = small_run
        lines = (out / "paths.csv").read_text(encoding="ascii").splitlines()
        assert lines[0] == "path_id,step,t,S,Q,nu,cash,exec_price,stopped"
        ids = {row.split(",")[0] for row in lines[1:]}
        assert ids == {"0", "1", "2", "3", "4"}
        stopped = [row for row in lines[1:] if row.endswith(",1")]
        assert len(stopped) == 5

    def test_rerun_byte_identical_everywhere(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        dirs = (tmp_path / "a", tmp_path / "b")
        for out in dirs:
            assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
            assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
        for name in SIM_FILES + ("surface.csv",):
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), name

    def test_overrides(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        out = tmp_path / "art"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
        args = ["simulate", "--config", str(cfg_path), "--out", str(out)]
        assert main(args + ["--paths", "16", "--seed", "3"]) == 0
        assert "simulated 16 paths (seed 3)" in capsys.readouterr().out
        lines = (out / "path_stats.csv").read_text(encoding="ascii").splitlines()
        assert len(lines) == 1 + 16
        assert main(args + ["--paths", "0"]) == 2
        assert "--paths" in capsys.readouterr().err

    def test_interp_mode_runs(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        out = tmp_path / "art"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (
            main(["simulate", "--config", str(cfg_path), "--out", str(out), "--interp"]) == 0
        )

    def test_missing_surface_exit_code(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        out = tmp_path / "empty"
        out.mkdir()
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 4
        assert "artifacts not found" in capsys.readouterr().err

    def test_config_mismatch_exit_code(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        out = tmp_path / "art"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
        other = small_config_dict()
        other["problem"]["alpha"] = 0.02
        other_path = write_config(tmp_path, other, name="other.json")
        assert main(["simulate", "--config", str(other_path), "--out", str(out)]) == 4
        assert "does not match" in capsys.readouterr().err

    def test_corrupted_surface_exit_code(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        out = tmp_path / "art"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
        with open(out / "surface.csv", "a", encoding="ascii") as f:
            f.write("tampered\n")
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 4
        assert "checksum" in capsys.readouterr().err


class TestReport:
    def test_summary_lines(self, small_run, capsys):
        _, out = small_run
        assert main(["report", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "total paths: 64" in text
        assert "stop reasons: Maturity=" in text
        assert "completion time quantiles: p25=" in text and "p90=" in text
        mean_printed = float(text.split("mean=")[1].split(" ")[0])
        prices = [
            float(line.split(",")[3])
            for line in (out / "path_stats.csv")
            .read_text(encoding="ascii")
            .splitlines()[1:]
        ]
        assert abs(mean_printed - float(np.mean(prices))) <= 1e-6

    def test_single_path_has_zero_std(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, small_config_dict())
        out = tmp_path / "art"
        assert main(["solve", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (
            main(["simulate", "--config", str(cfg_path), "--out", str(out), "--paths", "1"])
            == 0
        )
        assert main(["report", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "total paths: 1" in text
        assert "std=0.000000" in text

    def test_missing_inputs_exit_code(self, tmp_path, capsys):
        out = tmp_path / "empty"
        out.mkdir()
        assert main(["report", "--out", str(out)]) == 5
        assert "missing report inputs" in capsys.readouterr().err


def test_console_script_help():
    proc = subprocess.run(
        [sys.executable, "-m", "jdexec", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    for name in ("coeffs", "solve", "simulate", "report"):
        assert name in proc.stdout
