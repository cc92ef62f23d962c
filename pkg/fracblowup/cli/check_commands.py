import click

from fracblowup.cli.options import build_run, model_options, run_options
from fracblowup.controllers.check_controller import CheckController
from fracblowup.schemas.run import Command


@click.command("check")
@model_options
@run_options
@click.pass_context
def check(ctx: click.Context, config_path, output_dir, seed, **flags) -> None:
    """
    Classify the integral conditions of a nonlinearity (exit 2 if any is Borderline)
    """
    run = build_run(Command.CHECK, config_path, output_dir, seed, flags)
    payload, code = CheckController().check(run)
    for entry in payload["conditions"]:
        click.echo(f"{entry['condition']}: {entry['verdict']} (tail exponent {entry['tail_exponent']:.4f})")
    click.echo(f"predicted regime: {payload['regime_predicted'].value}")
    ctx.exit(code)
