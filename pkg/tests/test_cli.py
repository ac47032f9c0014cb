import csv
import json
from pathlib import Path
from typing import Any, Callable

import pytest

from nematic_mf.cli.config import parse_coeffs
from nematic_mf.exceptions import ConfigError

RunCli = Callable[..., tuple[int, str]]
RunJson = Callable[..., Any]


@pytest.mark.parametrize(("w", "beta_star"), [("1", 5.0), ("2", 2.5)])
def test_spectrum(run_cli_json: RunJson, w: str, beta_star: float) -> None:
    report = run_cli_json("spectrum", "--w", w, "--jobs", "1")
    assert report["bifurcation_betas"] == {"2": pytest.approx(beta_star)}
    assert report["critical_degree"] == 2
    assert report["transcriticality_B"] < 0.0
    assert report["potential"].startswith("maier-saupe")


def test_spectrum_of_constant_potential(run_cli_json: RunJson) -> None:
    report = run_cli_json("spectrum", "--coeffs", "0:1", "--jobs", "1")
    assert report["bifurcation_betas"] == {}
    assert report["beta_star"] is None
    assert report["no_bifurcation_beta"] is None


def test_emit_config_round_trip(run_cli: RunCli, tmp_path: Path) -> None:
    """
    A run resolved from an emitted config reproduces the original output.

    :param run_cli: command line runner.
    :param tmp_path: scratch directory.
    """
    code, emitted = run_cli("spectrum", "--w", "2", "--jobs", "1", "--emit-config")
    assert code == 0
    config = json.loads(emitted)
    assert config["potential"] == {"type": "maier-saupe", "w": 2.0}
    path = tmp_path / "run.json"
    path.write_text(emitted, encoding="utf-8")
    _, direct = run_cli("spectrum", "--w", "2", "--jobs", "1")
    _, replayed = run_cli("spectrum", "--config", str(path))
    assert direct == replayed


def test_flags_override_config_file(run_cli: RunCli, tmp_path: Path) -> None:
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"beta": 3.0, "seed": 4}), encoding="utf-8")
    code, emitted = run_cli("solve", "--config", str(path), "--seed", "9", "--emit-config")
    assert code == 0
    config = json.loads(emitted)
    assert config["beta"] == 3.0
    assert config["seed"] == 9


def test_solve(run_cli_json: RunJson) -> None:
    nematic = run_cli_json("solve", "--beta", "10", "--jobs", "1")
    assert nematic["converged"]
    assert nematic["order_parameter"] < 2.0 / 3.0
    assert nematic["residual"] <= 1e-10
    assert len(nematic["nodes"]) == len(nematic["density"]) == 64
    assert nematic["legendre_moments"]["0"] == 1.0

    isotropic = run_cli_json("solve", "--beta", "1", "--jobs", "1")
    assert isotropic["order_parameter"] == pytest.approx(2.0 / 3.0, abs=1e-9)

    uniform = run_cli_json("solve", "--beta", "10", "--seed-density", "uniform", "--jobs", "1")
    assert uniform["order_parameter"] == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_phase_diagram_to_stdout(run_cli_json: RunJson) -> None:
    report = run_cli_json(
        "phase-diagram",
        "--beta-min", "0.1",
        "--beta-max", "0.3",
        "--beta-steps", "5",
        "--jobs", "1",
    )
    assert report["events"] == []
    assert len(report["branches"]) == 5
    assert {row["branch_kind"] for row in report["branches"]} == {"isotropic"}


def test_phase_diagram_files(run_cli: RunCli, tmp_path: Path) -> None:
    code, out = run_cli(
        "phase-diagram",
        "--beta-min", "1",
        "--beta-max", "20",
        "--beta-steps", "40",
        "--jobs", "1",
        "--out", str(tmp_path / "diagram"),
    )
    assert code == 0
    summary = json.loads(out)
    with Path(summary["branches_csv"]).open(encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["beta", "xi", "dF_dxi", "stable", "residual", "branch_kind"]
    assert len(rows) - 1 == summary["rows"]
    assert {row[3] for row in rows[1:]} == {"true", "false"}
    events = json.loads(Path(summary["events_json"]).read_text(encoding="utf-8"))
    assert [event["kind"] for event in events] == ["saddle-node", "transcritical"]
    assert events[1]["beta"] == pytest.approx(5.0, abs=1e-3)


def test_free_energy(run_cli_json: RunJson) -> None:
    report = run_cli_json("free-energy", "--beta", "10", "--jobs", "1")
    assert report["states"][0]["label"] == "nematic-lower"
    assert report["transition_beta"] == pytest.approx(4.5415, abs=1e-3)


def test_mc(run_cli_json: RunJson) -> None:
    report = run_cli_json(
        "mc",
        "--beta", "0.01",
        "--n-particles", "8",
        "--sweeps", "300",
        "--burnin", "50",
        "--chains", "2",
        "--jobs", "1",
    )
    assert report["N"] == 8
    assert set(report) >= {"beta", "xi_mean", "xi_stderr", "tau_int", "acceptance"}
    assert len(report["chains"]) == 2
    assert 0.0 < report["xi_mean"] < 1.0


def test_laplace_check(run_cli_json: RunJson) -> None:
    report = run_cli_json("laplace-check", "--jobs", "1")
    assert all(check["relative_error"] <= 0.02 for check in report["partition_checks"])
    assert all(check["passed"] for check in report["cumulant_checks"])
    assert len(report["rate_checks"]) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ("phase-diagram", "--beta-min", "5", "--beta-max", "1"),
        ("solve", "--jobs", "1"),
        ("spectrum", "--coeffs", "1:1", "--jobs", "1"),
        ("spectrum", "--coeffs", "abc"),
        ("spectrum", "--w", "2", "--potential", "legendre"),
        ("free-energy", "--beta", "10", "--coeffs", "0:1,2:-1", "--jobs", "1"),
        ("mc", "--beta", "1", "--sweeps", "10", "--burnin", "20"),
        ("spectrum", "--config", "/nonexistent/run.json"),
    ],
)
def test_configuration_errors_exit_with_two(run_cli: RunCli, argv: tuple[str, ...]) -> None:
    code, out = run_cli(*argv)
    assert code == 2
    assert out == ""


def test_unknown_flag_is_rejected(run_cli: RunCli) -> None:
    with pytest.raises(SystemExit) as excinfo:
        run_cli("spectrum", "--bogus")
    assert excinfo.value.code == 2


def test_parse_coeffs() -> None:
    assert parse_coeffs("0:1, 2:-1.5") == {0: 1.0, 2: -1.5}
    with pytest.raises(ConfigError):
        parse_coeffs("")
    with pytest.raises(ConfigError):
        parse_coeffs("2=1")


@pytest.mark.parametrize("level", ["TRACE", "CRITICAL"])
def test_every_log_level_runs(run_cli_json: RunJson, level: str) -> None:
    report = run_cli_json("spectrum", "--w", "1", "--jobs", "1", "--log-level", level)
    assert report["bifurcation_betas"] == {"2": pytest.approx(5.0)}
