import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
import numpy as np
from pydantic import ValidationError

from fracblowup.db.result_store import config_hash, result_store
from fracblowup.errors import ConfigError, FracBlowupError
from fracblowup.models.asymptotics import analyze
from fracblowup.models.fraclap_op import residual
from fracblowup.models.ko_conditions import KOProfile
from fracblowup.models.mesh_domain import GridFunction
from fracblowup.models.nonlinearity import NonlinearityModel
from fracblowup.models.solver import (
    build_model,
    get_fraclap_operator,
    residual_summary,
    solve_g_problem,
    solve_k_problem,
    sweep_k,
)
from fracblowup.schemas.nonlinearity import NonlinearitySpec
from fracblowup.schemas.run import RunConfig
from fracblowup.schemas.solve import DomainKind, MeshSpec, SolveConfig

logger = logging.getLogger(__name__)

DEFAULT_K_LIST = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
MODEL_KEYS = ("family", "p", "alpha", "scale", "table_path")
SOLVE_KEYS = ("s", "k", "g_spec", "g_ladder", "ladder_tol", "tol", "max_iters", "damping", "delta0")


def model_spec_from_params(params: Dict[str, Any]) -> NonlinearitySpec:
    """
    Validate the nonlinearity part of a parameter dict.

    Raises:
        ConfigError: If the parameters do not describe a valid nonlinearity
    """
    try:
        return NonlinearitySpec(**{key: params[key] for key in MODEL_KEYS if params.get(key) is not None})
    except ValidationError as e:
        raise ConfigError(f"Invalid nonlinearity: {str(e)}")


def solve_config_from_params(params: Dict[str, Any], k_default: Optional[float] = None) -> SolveConfig:
    """
    Validate a flat parameter dict into a SolveConfig.

    Args:
        params: Merged file and flag parameters
        k_default: k used when neither k nor g_spec is given (sweeps)

    Raises:
        ConfigError: If any physical parameter is invalid
    """
    mesh = {
        "domain": params.get("domain"),
        "N": params.get("N"),
        "n": params.get("mesh_n"),
        "q": params.get("mesh_q"),
    }
    fields = {key: params[key] for key in SOLVE_KEYS if params.get(key) is not None}
    if k_default is not None and "k" not in fields and "g_spec" not in fields:
        fields["k"] = k_default
    try:
        return SolveConfig(
            model=model_spec_from_params(params),
            mesh=MeshSpec(**{key: value for key, value in mesh.items() if value is not None}),
            **fields,
        )
    except ValidationError as e:
        raise ConfigError(f"Invalid solve parameters: {str(e)}")


def profile_psi_factory(metadata: Dict[str, Any]) -> Callable:
    """psi of the nonlinearity recorded in a solution file."""
    spec = metadata.get("model")
    if spec is None:
        raise ConfigError("Solution file records no nonlinearity; psi-based exterior data cannot be rebuilt")
    return KOProfile.build(NonlinearityModel.from_spec(spec), metadata["s"]).psi


def _optional_profile(spec: Optional[NonlinearitySpec], s: float) -> Optional[KOProfile]:
    if spec is None:
        return None
    try:
        return KOProfile.build(NonlinearityModel.from_spec(spec), s)
    except FracBlowupError as e:
        logger.info(f"No phi comparison for this solution: {str(e)}")
        return None


def _k_name(k: float) -> str:
    return f"u_k={k:g}.csv"


class SolveController:
    """
    Controller for solve, sweep, residual and analyze runs
    """

    def solve(self, run: RunConfig) -> Tuple[Dict[str, Any], int]:
        """
        Solve the k-problem or the g-problem and write the solution and diagnostics

        Args:
            run: Validated run configuration

        Returns:
            The diagnostics payload and the exit code

        Raises:
            click.ClickException: If the solve fails
        """
        try:
            config = solve_config_from_params(run.params)
            model = build_model(config)
            if config.k is not None:
                result = solve_k_problem(config, model)
            else:
                result = solve_g_problem(config, model)

            out = result_store.run_dir(run.output_dir)
            result_store.write_solution_csv(out / "solution.csv", result.solution, config.model)
            payload = {
                "command": run.command.value,
                "config_hash": config_hash(run.hashed_view()),
                "config": config,
                "model": model.label,
                "summary": result.summary,
            }
            result_store.write_json(out / "diagnostics.json", payload)
            return payload, 0
        except FracBlowupError as e:
            logger.error(f"Solve failed: {str(e)}")
            raise click.ClickException(f"Failed to solve: {str(e)}")
        except Exception as e:
            logger.error(f"Unexpected solve failure: {str(e)}")
            raise click.ClickException(f"Failed to solve: {str(e)}")

    def sweep(self, run: RunConfig) -> Tuple[Dict[str, Any], int]:
        """
        Sweep the trace value k and compare the observed regime with the prediction

        Returns:
            The verdict payload and the exit code (2 when observation and prediction disagree)

        Raises:
            click.ClickException: If a solve fails or the comparison principle breaks
        """
        try:
            k_list: List[float] = [float(k) for k in (run.params.get("k_list") or DEFAULT_K_LIST)]
            config = solve_config_from_params(run.params, k_default=k_list[0])
            if config.g_spec is not None:
                raise ConfigError("sweep runs the k-problem; drop g_spec")
            result = sweep_k(config, k_list)

            out = result_store.run_dir(run.output_dir)
            for k, solved in sorted(result.results.items()):
                result_store.write_solution_csv(out / _k_name(k), solved.solution, config.model)
            summary = result.summary
            if summary.interior_means:
                result_store.write_columns(
                    out / "sweep_interior.csv",
                    ["k", "interior_mean", "strip_min", "L1_norm"],
                    [summary.k_list, summary.interior_means, summary.strip_mins, summary.l1_norms],
                )
            if result.supersolution is not None:
                result_store.write_solution_csv(out / "supersolution.csv", result.supersolution.ubar, config.model)
            payload = {
                "command": run.command.value,
                "config_hash": config_hash(run.hashed_view()),
                "regime_observed": summary.regime_observed,
                "regime_predicted": summary.regime_predicted,
                "agree": summary.agree,
                "summary": summary,
                "supersolution": result.supersolution.summary if result.supersolution is not None else None,
                "solves": {f"{k:g}": solved.summary for k, solved in sorted(result.results.items())},
            }
            result_store.write_json(out / "sweep.json", payload)
            return payload, 0 if summary.agree else 2
        except FracBlowupError as e:
            logger.error(f"Sweep failed: {str(e)}")
            raise click.ClickException(f"Failed to sweep: {str(e)}")
        except Exception as e:
            logger.error(f"Unexpected sweep failure: {str(e)}")
            raise click.ClickException(f"Failed to sweep: {str(e)}")

    def _read(self, run: RunConfig) -> Tuple[GridFunction, Dict[str, Any]]:
        path = run.params.get("solution")
        if not path:
            raise ConfigError("A solution CSV is required")
        return result_store.read_solution_csv(Path(path), profile_psi_factory)

    def residual(self, run: RunConfig) -> Tuple[Dict[str, Any], int]:
        """
        Evaluate (-Delta)^s u + f(u) at the admissible nodes of a stored solution

        Raises:
            click.ClickException: If the file is unusable or the domain has no pointwise operator
        """
        try:
            solution, metadata = self._read(run)
            spec = metadata["model"]
            if spec is None:
                raise ConfigError("The solution file records no nonlinearity")
            model = NonlinearityModel.from_spec(spec)
            mesh, s = solution.mesh, solution.s
            if mesh.domain.kind != DomainKind.INTERVAL:
                raise ConfigError("Residuals need the interval operator")
            op = get_fraclap_operator(mesh, s)
            nodes = op.admissible
            values = residual(op, solution, model, nodes)

            out = result_store.run_dir(run.output_dir)
            result_store.write_columns(
                out / "residual.csv",
                ["x", "delta", "residual"],
                [mesh.x[nodes], mesh.delta[nodes], values],
            )
            summary = residual_summary(mesh, s, solution, model)
            payload = {
                "command": run.command.value,
                "config_hash": config_hash(run.hashed_view()),
                "max_residual": float(np.max(np.abs(values))),
                "region": "admissible",
                "mesh": {"domain": mesh.domain.kind.value, "N": mesh.domain.N, "n": mesh.n, "q": mesh.q},
                "summary": summary,
            }
            result_store.write_json(out / "residual.json", payload)
            return payload, 0
        except FracBlowupError as e:
            logger.error(f"Residual evaluation failed: {str(e)}")
            raise click.ClickException(f"Failed to evaluate the residual: {str(e)}")
        except Exception as e:
            logger.error(f"Unexpected residual failure: {str(e)}")
            raise click.ClickException(f"Failed to evaluate the residual: {str(e)}")

    def analyze(self, run: RunConfig) -> Tuple[Dict[str, Any], int]:
        """
        Boundary exponent, singular trace and phi(u)/delta^s of a stored solution

        Returns:
            The analysis payload and the exit code (2 when the phi comparison fails)

        Raises:
            click.ClickException: If the boundary window is unusable
        """
        try:
            solution, metadata = self._read(run)
            profile = _optional_profile(metadata["model"], solution.s)
            report = analyze(solution, profile)

            out = result_store.run_dir(run.output_dir)
            mesh = solution.mesh
            order = np.argsort(mesh.delta)
            result_store.write_columns(
                out / "boundary_profile.csv",
                ["delta", "u"],
                [mesh.delta[order], solution.total()[order]],
            )
            payload = {
                "command": run.command.value,
                "config_hash": config_hash(run.hashed_view()),
                "trace": report.trace.value,
                "trace_diverging": report.trace.diverging,
                "exponent": report.fit.exponent,
                "coefficient": report.fit.coefficient,
                "bbehav_min_ratio": report.bbehav.min_ratio if report.bbehav else None,
                "windows": {
                    "fit": report.fit.window,
                    "bbehav": report.bbehav.window if report.bbehav else None,
                },
                "report": report,
            }
            result_store.write_json(out / "analysis.json", payload)
            code = 2 if report.bbehav is not None and not report.bbehav.passed else 0
            return payload, code
        except FracBlowupError as e:
            logger.error(f"Analysis failed: {str(e)}")
            raise click.ClickException(f"Failed to analyze: {str(e)}")
        except Exception as e:
            logger.error(f"Unexpected analysis failure: {str(e)}")
            raise click.ClickException(f"Failed to analyze: {str(e)}")
