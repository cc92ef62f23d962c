"""Shared click options and run-config assembly for the subcommands."""
import logging
from typing import Any, Callable, Dict, Optional

import click
from pydantic import ValidationError

from fracblowup.config import load_run_file, merge_params, settings
from fracblowup.errors import ConfigError
from fracblowup.schemas.run import Command, RunConfig

logger = logging.getLogger(__name__)


def _stack(*decorators: Callable) -> Callable:
    def apply(func: Callable) -> Callable:
        for decorator in reversed(decorators):
            func = decorator(func)
        return func

    return apply


model_options = _stack(
    click.option("--s", "s", type=float, help="Fractional order s in (0, 1)"),
    click.option("--family", type=click.Choice(["power", "powerlog", "tabulated"]), help="Nonlinearity family"),
    click.option("--p", "p", type=float, help="Power exponent"),
    click.option("--alpha", type=float, help="Log exponent of t^p ln^alpha(1+t)"),
    click.option("--scale", type=float, help="Amplitude multiplying f"),
    click.option("--table-path", type=click.Path(dir_okay=False), help="Two-column (t, f) CSV"),
)

mesh_options = _stack(
    click.option("--domain", type=click.Choice(["interval", "ball"]), help="Interval (-1,1) or radial unit ball"),
    click.option("--N", "N", type=int, help="Space dimension"),
    click.option("--mesh-n", type=int, help="Cells (interval) or radial nodes (ball)"),
    click.option("--mesh-q", type=float, help="Grading exponent (default 2/s)"),
)

iteration_options = _stack(
    click.option("--tol", type=float, help="Relative sup-norm tolerance"),
    click.option("--max-iters", type=int, help="Iteration cap"),
    click.option("--damping", type=float, help="Damping factor in (0, 1]"),
    click.option("--delta0", type=float, help="Strip width for the supersolution"),
)

run_options = _stack(
    click.option("--config", "config_path", type=click.Path(dir_okay=False), help="TOML run file (flags win)"),
    click.option("--out", "output_dir", type=click.Path(file_okay=False), help="Output directory"),
    click.option("--seed", type=int, help="Seed for sampling-based checks"),
)


def parse_float_list(text: Optional[str]) -> Optional[list]:
    """Parse '1,2,4' into [1.0, 2.0, 4.0]."""
    if text is None:
        return None
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}")


def build_run(command: Command, config_path: Optional[str], output_dir: Optional[str],
              seed: Optional[int], flags: Dict[str, Any]) -> RunConfig:
    """
    Merge the run file with the flags into a validated RunConfig.

    Raises:
        click.ClickException: If the run file or the merged config is invalid
    """
    try:
        params = merge_params(load_run_file(config_path), flags)
    except ConfigError as e:
        raise click.ClickException(str(e))
    output_dir = output_dir or params.pop("output_dir", None) or settings.output_dir
    seed = seed if seed is not None else params.pop("seed", 0)
    params.pop("output_dir", None)
    params.pop("seed", None)
    try:
        return RunConfig(
            command=command,
            params=params,
            output_dir=output_dir,
            seed=seed,
            log_level=logging.getLevelName(logging.getLogger().getEffectiveLevel()),
        )
    except ValidationError as e:
        raise click.ClickException(f"Invalid run configuration: {str(e)}")
