import json

import pytest

from fracblowup.main import cli


def test_info_prints_constants(runner):
    result = runner.invoke(cli, ["info", "--s", "0.5"])
    assert result.exit_code == 0
    assert "torsion_constant = " in result.output
    assert "fraclap_constant = 0.318309886" in result.output
    assert "L1 threshold 1+2s = 2" in result.output
    assert "E threshold (1+s)/(1-s) = 3" in result.output


def test_info_rejects_bad_order(runner):
    result = runner.invoke(cli, ["info", "--s", "1.5"])
    assert result.exit_code == 2


def test_check_large_solution_case(runner, tmp_path):
    result = runner.invoke(cli, ["check", "--s", "0.5", "--p", "2.5", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "check.json").read_text())
    assert payload["regime_predicted"] == "LargeSolution"
    assert {entry["condition"] for entry in payload["conditions"]} == {"L1", "L1bis", "E", "UL1"}
    assert all(entry["verdict"] == "Converges" for entry in payload["conditions"])


def test_check_critical_power_is_borderline(runner, tmp_path):
    result = runner.invoke(cli, ["check", "--s", "0.5", "--p", "2", "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert "L1bis: Borderline" in result.output


def test_check_reports_hypothesis_failure(runner, tmp_path):
    result = runner.invoke(cli, ["check", "--s", "0.5", "--p", "0.7", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "check.json").read_text())
    assert payload["hypothesis_error"] is not None
    assert payload["linear_bound"] is not None


def test_check_power_log_with_negative_log_exponent(runner, tmp_path):
    result = runner.invoke(
        cli, ["check", "--s", "0.5", "--family", "powerlog", "--p", "3", "--alpha", "-2", "--out", str(tmp_path)]
    )
    assert result.exit_code in (0, 2), result.output
    payload = json.loads((tmp_path / "check.json").read_text())
    assert payload["hypothesis_error"] is None


def test_check_needs_order(runner, tmp_path):
    result = runner.invoke(cli, ["check", "--p", "2.5", "--out", str(tmp_path)])
    assert result.exit_code == 1
    assert "s must lie in (0, 1)" in result.output


def test_check_reads_run_file(runner, tmp_path):
    run_file = tmp_path / "run.toml"
    run_file.write_text('s = 0.5\n[model]\nfamily = "powerlog"\np = 2.5\nalpha = 1.0\n')
    result = runner.invoke(cli, ["check", "--config", str(run_file), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "check.json").read_text())
    assert payload["model"] == "powerlog:p=2.5:alpha=1.0"


def test_unknown_scenario_is_a_usage_error(runner, tmp_path):
    result = runner.invoke(cli, ["replicate", "--scenario", "bogus", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_solve_then_analyze_and_residual(runner, tmp_path):
    out = tmp_path / "k2"
    result = runner.invoke(cli, ["solve", "--s", "0.5", "--p", "2.5", "--k", "2", "--mesh-n", "32", "--out", str(out)])
    assert result.exit_code == 0, result.output
    diagnostics = json.loads((out / "diagnostics.json").read_text())
    assert diagnostics["summary"]["converged"] is True
    assert diagnostics["summary"]["k"] == 2.0

    solution = str(out / "solution.csv")
    result = runner.invoke(cli, ["analyze", solution, "--out", str(out)])
    assert result.exit_code == 0, result.output
    analysis = json.loads((out / "analysis.json").read_text())
    assert analysis["exponent"] < 0.0
    assert analysis["bbehav_min_ratio"] >= 0.05
    assert (out / "boundary_profile.csv").is_file()

    result = runner.invoke(cli, ["residual", solution, "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert json.loads((out / "residual.json").read_text())["summary"]["n_nodes"] == 29


def test_solve_reports_invalid_parameters(runner, tmp_path):
    result = runner.invoke(cli, ["solve", "--s", "1.5", "--p", "2.5", "--k", "2", "--out", str(tmp_path)])
    assert result.exit_code == 1
    assert "Failed to solve" in result.output


def test_solve_with_exterior_data(runner, tmp_path):
    result = runner.invoke(
        cli, ["solve", "--s", "0.5", "--p", "2.5", "--g-spec", "shell:1.2:2", "--mesh-n", "32", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    diagnostics = json.loads((tmp_path / "diagnostics.json").read_text())
    assert diagnostics["summary"]["g2_ok"] is True


def test_sweep_refusal(runner, tmp_path):
    result = runner.invoke(
        cli, ["sweep", "--s", "0.5", "--p", "3.5", "--k-list", "1,2", "--mesh-n", "32", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    assert "observed Refusal" in result.output


def test_power_thresholds_are_deterministic(runner, tmp_path):
    verdicts = []
    for name in ("first", "second"):
        out = tmp_path / name
        result = runner.invoke(cli, ["replicate", "--scenario", "power-thresholds", "--out", str(out)])
        assert result.exit_code == 0, result.output
        verdicts.append((out / "power-thresholds" / "verdict.json").read_bytes())
    assert verdicts[0] == verdicts[1]
    assert json.loads(verdicts[0])["passed"] is True
    assert json.loads(verdicts[0])["anchor"] == r"that holds if and only if $p>1+2s$"


def test_log_critical_lower_scenario(runner, tmp_path):
    result = runner.invoke(cli, ["replicate", "--scenario", "log-critical-lower", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output


@pytest.mark.slow
def test_regime_sweep_is_deterministic(runner, tmp_path):
    codes, verdicts = [], []
    for name in ("first", "second"):
        out = tmp_path / name
        result = runner.invoke(cli, ["replicate", "--scenario", "regime-sweep", "--mesh-n", "64", "--out", str(out)])
        codes.append(result.exit_code)
        verdict = out / "regime-sweep" / "verdict.json"
        assert verdict.exists(), result.output
        verdicts.append(verdict.read_bytes())
    assert codes[0] == codes[1]
    assert verdicts[0] == verdicts[1]
