import logging
from typing import Any, Dict, List, Tuple

import click

from fracblowup.controllers.solve_controller import model_spec_from_params
from fracblowup.db.result_store import config_hash, result_store, sanitize
from fracblowup.errors import ConfigError, FracBlowupError
from fracblowup.models.ko_conditions import (
    KOProfile,
    check_condition,
    check_L1,
    predict_regime,
    verify_ratio_bounds,
)
from fracblowup.models.nonlinearity import (
    NonlinearityModel,
    check_linear_bound,
    check_monotone_scaling,
    check_power_lower_bounds,
    estimate_growth_envelope,
)
from fracblowup.schemas.conditions import Condition, ConditionReport, Verdict
from fracblowup.schemas.run import RunConfig

logger = logging.getLogger(__name__)

SCALING_FACTORS = (2.0, 10.0)


def condition_entry(report: ConditionReport) -> Dict[str, Any]:
    """The per-condition record of the check report."""
    entry = sanitize(report)
    entry["tail_exponent"] = report.tail_exponent_of_integrand
    return entry


class CheckController:
    """
    Controller for the integral conditions and growth-hypothesis audits of a nonlinearity
    """

    def check(self, run: RunConfig) -> Tuple[Dict[str, Any], int]:
        """
        Classify (L1), (L1-bis), (E) and the integrability of psi(delta^s), and audit
        the growth hypothesis when it holds

        Args:
            run: Validated run configuration

        Returns:
            The report payload and the exit code (2 if any condition is Borderline)

        Raises:
            click.ClickException: If the model cannot be built or evaluated
        """
        try:
            s = run.params.get("s")
            if s is None or not 0.0 < float(s) < 1.0:
                raise ConfigError(f"s must lie in (0, 1), got {s}")
            s = float(s)
            spec = model_spec_from_params(run.params)
            model = NonlinearityModel.from_spec(spec)

            conditions: List[ConditionReport] = [
                check_condition(model, s, condition) for condition in (Condition.L1BIS, Condition.E, Condition.UL1)
            ]
            payload: Dict[str, Any] = {
                "command": run.command.value,
                "config_hash": config_hash(run.hashed_view()),
                "model": model.label,
                "s": s,
                "regime_predicted": predict_regime(model, s),
                "linear_bound": check_linear_bound(model),
                "envelope": None,
                "hypothesis_error": None,
            }
            try:
                envelope = estimate_growth_envelope(model)
                profile = KOProfile.build(model, s, envelope)
                conditions.insert(0, check_L1(profile, form="phi"))
                payload["envelope"] = envelope
                payload["power_bounds"] = check_power_lower_bounds(model, envelope)
                payload["scaling"] = [check_monotone_scaling(model, envelope, c) for c in SCALING_FACTORS]
                payload["ratio_bounds"] = verify_ratio_bounds(profile)
            except FracBlowupError as e:
                logger.info(f"Growth hypothesis audit skipped for {model.label}: {str(e)}")
                payload["hypothesis_error"] = str(e)

            payload["conditions"] = [condition_entry(report) for report in conditions]
            out = result_store.run_dir(run.output_dir)
            result_store.write_json(out / "check.json", payload)
            borderline = any(report.verdict == Verdict.BORDERLINE for report in conditions)
            for report in conditions:
                logger.info(f"{report.condition.value}: {report.verdict.value} ({report.details})")
            return payload, 2 if borderline else 0
        except FracBlowupError as e:
            logger.error(f"Check failed: {str(e)}")
            raise click.ClickException(f"Failed to check conditions: {str(e)}")
        except Exception as e:
            logger.error(f"Unexpected check failure: {str(e)}")
            raise click.ClickException(f"Failed to check conditions: {str(e)}")
