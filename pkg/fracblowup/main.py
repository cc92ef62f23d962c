import logging

import click

from fracblowup import __version__
from fracblowup.cli import (
    analyze_command,
    check_command,
    info_command,
    replicate_command,
    residual_command,
    solve_command,
    sweep_command,
)
from fracblowup.config import settings

logger = logging.getLogger(__name__)


@click.group()
@click.version_option(__version__, prog_name="fracblowup")
@click.option("--verbose", is_flag=True, help="Log at DEBUG level")
@click.option("--quiet", is_flag=True, help="Log warnings and errors only")
def cli(verbose: bool, quiet: bool) -> None:
    """
    Boundary blow-up solutions of (-Delta)^s u = -f(u) on the interval and the unit ball
    """
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, settings.log_level, logging.INFO)
    # Configure logging
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    logging.getLogger().setLevel(level)
    logger.debug(f"fracblowup {__version__} with {settings.threads} worker thread(s)")


cli.add_command(check_command)
cli.add_command(solve_command)
cli.add_command(sweep_command)
cli.add_command(residual_command)
cli.add_command(analyze_command)
cli.add_command(replicate_command)
cli.add_command(info_command)


if __name__ == "__main__":
    cli()
