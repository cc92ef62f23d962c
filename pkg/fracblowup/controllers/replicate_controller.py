"""
End-to-end replication pipelines.

Each scenario fans independent sub-runs out over a thread pool; a sub-run
writes only below its own subdirectory. The scenario verdict records the
config hash and the claim it checks.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple

import click
import numpy as np

from fracblowup.config import settings
from fracblowup.db.result_store import config_hash, result_store
from fracblowup.errors import ConfigError, FracBlowupError
from fracblowup.models.asymptotics import boundary_exponent, bbehav_check
from fracblowup.models.ball_kernels import KernelSet, green
from fracblowup.models.ko_conditions import KOProfile, check_condition, classify_power_regime
from fracblowup.models.nonlinearity import NonlinearityModel
from fracblowup.models.solver import build_supersolution, sweep_k
from fracblowup.schemas.conditions import Condition, Verdict
from fracblowup.schemas.nonlinearity import Family, NonlinearitySpec
from fracblowup.schemas.run import RunConfig, Scenario
from fracblowup.schemas.solve import MeshSpec, SolveConfig, SweepObservation

logger = logging.getLogger(__name__)

BORDERLINE_BAND = 0.02
THRESHOLD_S = (0.25, 0.5, 0.75)
THRESHOLD_P = tuple(0.5 + 0.25 * j for j in range(23))
LOG_S = 0.5
LOWER_ALPHAS = (0.2, 0.5, 0.8, 1.2, 1.5, 2.0)
UPPER_BETAS = (0.3, 0.7, 1.5, 2.0)
SWEEP_S = 0.5
SWEEP_P = (0.7, 1.2, 2.5, 3.5)
SWEEP_K = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0)
LARGE_EXPONENT_RANGE = (-0.78, -0.55)
BBEHAV_MIN = 0.2
AUDIT_CASES = ((0.5, 2.5), (0.75, 4.0))
AUDIT_TOLERANCE = 1e-3
SYMMETRY_PAIRS = 64
SYMMETRY_TOL = 1e-12

CLAIMS = {
    Scenario.POWER_THRESHOLDS: "for f(t) = t^p, (L1) holds if and only if p > 1+2s, and (E) holds if and only if p < 1+2s/(1-s)",
    Scenario.LOG_CRITICAL_LOWER: "for f(t) = t^(1+2s) ln^alpha(1+t), (L1) is fulfilled only for alpha > 2s",
    Scenario.LOG_CRITICAL_UPPER: "for f(t) = t^((1+s)/(1-s)) ln^(-beta)(1+t), (E) is satisfied by any beta > 1",
    Scenario.REGIME_SWEEP: (
        "for f(t) = t^p: no solution with infinite trace when p >= (1+s)/(1-s); u_k converges to a large "
        "solution when 1+2s < p < (1+s)/(1-s); the L1 norm escapes when 1 < p < 1+s; u_k blows up "
        "everywhere when p <= 1"
    ),
    Scenario.SUPERSOLUTION_AUDIT: "mu psi(delta^s) + lambda xi is a supersolution dominating every u_k",
}

# verbatim source statements each scenario checks
ANCHORS = {
    Scenario.POWER_THRESHOLDS: r"that holds if and only if $p>1+2s$",
    Scenario.LOG_CRITICAL_LOWER: r"which is fulfilled only for $\alpha>2s$",
    Scenario.LOG_CRITICAL_UPPER: r"which is satisfied by any $\beta>1$",
    Scenario.REGIME_SWEEP: r"if $p\in(1,1+s)$ then the approximating sequence exits $L^1(\Omega)$",
    Scenario.SUPERSOLUTION_AUDIT: r"\overline{u}\ =\ \mu \psi(\delta^s)+\lambda\xi",
}


@dataclass
class ScenarioOutcome:
    """Verdict of one scenario: passed, or failed with named criteria, or inconclusive."""

    passed: bool
    inconclusive: bool = False
    failing: List[str] = field(default_factory=list)
    results: Dict[str, Any] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if not self.passed:
            return 1
        return 2 if self.inconclusive else 0


def fan_out(func: Callable[[Any], Any], items: Sequence[Any]) -> List[Any]:
    """Run func over items on the configured thread pool, keeping the input order."""
    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        return list(pool.map(func, items))


def _verdict_matches(verdict: Verdict, expected: bool, margin: float) -> Tuple[bool, bool]:
    """(agrees, borderline); a borderline verdict agrees only inside the band."""
    if verdict == Verdict.BORDERLINE:
        return margin <= BORDERLINE_BAND, True
    return (verdict == Verdict.CONVERGES) == expected, False


def _power_thresholds(out: Path) -> ScenarioOutcome:
    def run(s: float) -> Dict[str, Any]:
        rows, mismatches, borderline = [], [], 0
        for p in THRESHOLD_P:
            model = NonlinearityModel.power(p)
            l1 = check_condition(model, s, Condition.L1BIS)
            e = check_condition(model, s, Condition.E)
            l1_ok, l1_border = _verdict_matches(l1.verdict, p > 1.0 + 2.0 * s, l1.margin)
            e_ok, e_border = _verdict_matches(e.verdict, p < 1.0 + 2.0 * s / (1.0 - s), e.margin)
            borderline += int(l1_border) + int(e_border)
            if not l1_ok:
                mismatches.append(f"L1 at p={p:g}")
            if not e_ok:
                mismatches.append(f"E at p={p:g}")
            rows.append((p, l1.tail_exponent_of_integrand + 1.0, e.tail_exponent_of_integrand + 1.0))
        sub = result_store.run_dir(str(out), f"s={s:g}")
        result_store.write_columns(sub / "exponent_gaps.csv", ["p", "L1_gap", "E_gap"], list(zip(*rows)))
        return {"s": s, "points": len(rows), "borderline": borderline, "mismatches": mismatches}

    results = fan_out(run, THRESHOLD_S)
    failing = [f"s={r['s']:g}: {m}" for r in results for m in r["mismatches"]]
    return ScenarioOutcome(passed=not failing, failing=failing, results={"per_s": results})


def _log_scan(out: Path, condition: Condition, p: float, exponents: Sequence[float], sign: float,
              expected: Callable[[float], bool], name: str) -> ScenarioOutcome:
    def run(value: float) -> Dict[str, Any]:
        model = NonlinearityModel.power_log(p, sign * value)
        report = check_condition(model, LOG_S, condition)
        return {
            name: value,
            "verdict": report.verdict,
            "expected": Verdict.CONVERGES if expected(value) else Verdict.DIVERGES,
            "tail_exponent": report.tail_exponent_of_integrand,
            "log_exponent": report.log_exponent,
            "decided_by": report.decided_by,
        }

    results = fan_out(run, exponents)
    result_store.write_columns(
        out / "log_exponents.csv",
        [name, "log_exponent"],
        [[r[name] for r in results], [r["log_exponent"] for r in results]],
    )
    borderline = [r for r in results if r["verdict"] == Verdict.BORDERLINE]
    failing = [
        f"{name}={r[name]:g}: {r['verdict'].value}"
        for r in results
        if r["verdict"] != r["expected"] and r["verdict"] != Verdict.BORDERLINE
    ]
    return ScenarioOutcome(passed=not failing, inconclusive=bool(borderline), failing=failing, results={"scan": results})


def _sweep_config(p: float, mesh_n: int) -> SolveConfig:
    return SolveConfig(
        s=SWEEP_S,
        model=NonlinearitySpec(family=Family.POWER, p=p),
        mesh=MeshSpec(n=mesh_n),
        k=SWEEP_K[0],
    )


def _regime_sweep(out: Path, mesh_n: int) -> ScenarioOutcome:
    def run(p: float) -> Dict[str, Any]:
        config = _sweep_config(p, mesh_n)
        result = sweep_k(config, SWEEP_K)
        sub = result_store.run_dir(str(out), f"p={p:g}")
        summary = result.summary
        record: Dict[str, Any] = {"p": p, "summary": summary, "criteria": []}
        if summary.interior_means:
            result_store.write_columns(
                sub / "sweep_interior.csv",
                ["k", "interior_mean", "strip_min", "L1_norm"],
                [summary.k_list, summary.interior_means, summary.strip_mins, summary.l1_norms],
            )
        record["inconclusive"] = summary.regime_observed == SweepObservation.UNCLASSIFIED.value
        if not summary.agree and not record["inconclusive"]:
            record["criteria"].append(f"observed {summary.regime_observed}, predicted {summary.regime_predicted}")
        for name in ("k_monotone", "sandwich_ok", "scaling_ok", "below_supersolution"):
            if getattr(summary, name) is False:
                record["criteria"].append(f"{name} failed")

        if summary.regime_observed == SweepObservation.STABILIZING.value:
            largest = result.results[SWEEP_K[-1]].solution
            result_store.write_solution_csv(sub / f"u_k={SWEEP_K[-1]:g}.csv", largest, config.model)
            fit = boundary_exponent(largest)
            profile = KOProfile.build(NonlinearityModel.power(p), SWEEP_S)
            bbehav = bbehav_check(largest, profile)
            record["boundary_fit"] = fit
            record["bbehav"] = bbehav
            lo, hi = LARGE_EXPONENT_RANGE
            if not lo <= fit.exponent <= hi:
                record["criteria"].append(f"boundary exponent {fit.exponent:.4f} outside [{lo}, {hi}]")
            if min(bbehav.min_ratio, bbehav.half_window_min) < BBEHAV_MIN:
                record["criteria"].append(f"phi(u)/delta^s minimum {bbehav.min_ratio:.4f} below {BBEHAV_MIN}")
        if summary.regime_observed == SweepObservation.L1_ESCAPE.value:
            if any(r < 1.5 for r in summary.l1_ratios):
                record["criteria"].append("L1 ratio below 1.5")
        if summary.regime_observed == SweepObservation.UNIFORM_BLOWUP.value:
            if summary.strip_mins[-1] < 4.0 * summary.strip_mins[0]:
                record["criteria"].append("strip minimum grew less than 4x")
        record["predicted_by_thresholds"] = classify_power_regime(p, SWEEP_S)
        result_store.write_json(sub / "sweep.json", record)
        return record

    results = fan_out(run, SWEEP_P)
    failing = [f"p={r['p']:g}: {c}" for r in results for c in r["criteria"]]
    inconclusive = any(r["inconclusive"] for r in results)
    return ScenarioOutcome(passed=not failing, inconclusive=inconclusive, failing=failing, results={"per_p": results})


def green_symmetry_audit(seed: int, pairs: int = SYMMETRY_PAIRS) -> Dict[str, Any]:
    """Largest relative |G(x,y) - G(y,x)| over random pairs in the unit balls of dimension 1 and 3."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for N, s in ((1, 0.5), (3, 0.5), (3, 0.75)):
        kernels = KernelSet(N, s)
        directions = rng.normal(size=(2, pairs, N))
        directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
        radii = rng.uniform(0.0, 0.95, size=(2, pairs, 1))
        x, y = directions[0] * radii[0], directions[1] * radii[1]
        forward, backward = green(kernels, x, y), green(kernels, y, x)
        worst = max(worst, float(np.max(np.abs(forward - backward) / forward)))
    return {"seed": seed, "pairs": pairs, "max_relative_asymmetry": worst, "passed": worst <= SYMMETRY_TOL}


def _supersolution_audit(out: Path, mesh_n: int, seed: int) -> ScenarioOutcome:
    def run(case: Tuple[float, float]) -> Dict[str, Any]:
        s, p = case
        config = SolveConfig(
            s=s,
            model=NonlinearitySpec(family=Family.POWER, p=p),
            mesh=MeshSpec(n=mesh_n),
            k=1.0,
        )
        record: Dict[str, Any] = {"s": s, "p": p, "criteria": []}
        try:
            spec = build_supersolution(config)
        except FracBlowupError as e:
            record["criteria"].append(f"build failed: {str(e)}")
            return record
        sub = result_store.run_dir(str(out), f"s={s:g}_p={p:g}")
        result_store.write_solution_csv(sub / "supersolution.csv", spec.ubar, config.model)
        record["summary"] = spec.summary
        if spec.summary.min_scaled_residual < -AUDIT_TOLERANCE:
            record["criteria"].append(f"scaled residual {spec.summary.min_scaled_residual:.3e} below -{AUDIT_TOLERANCE}")
        return record

    results = fan_out(run, AUDIT_CASES)
    symmetry = green_symmetry_audit(seed)
    failing = [f"s={r['s']:g}, p={r['p']:g}: {c}" for r in results for c in r["criteria"]]
    if not symmetry["passed"]:
        failing.append(f"Green symmetry {symmetry['max_relative_asymmetry']:.3e} above {SYMMETRY_TOL}")
    return ScenarioOutcome(passed=not failing, failing=failing, results={"cases": results, "green_symmetry": symmetry})


class ReplicateController:
    """
    Controller for the replication scenarios
    """

    def replicate(self, run: RunConfig) -> Tuple[Dict[str, Any], int]:
        """
        Run one replication scenario and write its verdict bundle

        Args:
            run: Run configuration with params['scenario']

        Returns:
            The verdict payload and the exit code (0 pass, 2 inconclusive)

        Raises:
            click.ClickException: If the pipeline errors or a criterion fails
        """
        try:
            try:
                scenario = Scenario(run.params.get("scenario"))
            except ValueError:
                raise ConfigError(f"Unknown scenario: {run.params.get('scenario')}")
            mesh_n = run.params.get("mesh_n")
            out = result_store.run_dir(run.output_dir, scenario.value)
            logger.info(f"Running scenario {scenario.value} into {out}")

            if scenario == Scenario.POWER_THRESHOLDS:
                outcome = _power_thresholds(out)
            elif scenario == Scenario.LOG_CRITICAL_LOWER:
                outcome = _log_scan(
                    out, Condition.L1BIS, 1.0 + 2.0 * LOG_S, LOWER_ALPHAS, 1.0, lambda a: a > 2.0 * LOG_S, "alpha"
                )
            elif scenario == Scenario.LOG_CRITICAL_UPPER:
                outcome = _log_scan(
                    out, Condition.E, (1.0 + LOG_S) / (1.0 - LOG_S), UPPER_BETAS, -1.0, lambda b: b > 1.0, "beta"
                )
            elif scenario == Scenario.REGIME_SWEEP:
                outcome = _regime_sweep(out, int(mesh_n or 256))
            else:
                outcome = _supersolution_audit(out, int(mesh_n or 128), run.seed)

            payload = {
                "scenario": scenario.value,
                "claim": CLAIMS[scenario],
                "anchor": ANCHORS[scenario],
                "config_hash": config_hash(run.hashed_view()),
                "passed": outcome.passed,
                "inconclusive": outcome.inconclusive,
                "failing_criteria": outcome.failing,
                "results": outcome.results,
            }
            result_store.write_json(out / "verdict.json", payload)
        except FracBlowupError as e:
            logger.error(f"Scenario failed: {str(e)}")
            raise click.ClickException(f"Failed to replicate: {str(e)}")
        except Exception as e:
            logger.error(f"Unexpected replication failure: {str(e)}")
            raise click.ClickException(f"Failed to replicate: {str(e)}")

        if not outcome.passed:
            raise click.ClickException(f"Scenario {scenario.value} failed: {'; '.join(outcome.failing)}")
        return payload, outcome.exit_code
