import click

from fracblowup.cli.options import build_run
from fracblowup.controllers.replicate_controller import ReplicateController
from fracblowup.schemas.run import Command, Scenario


@click.command("replicate")
@click.option("--scenario", required=True, type=click.Choice([s.value for s in Scenario]), help="Pipeline to run")
@click.option("--mesh-n", type=int, help="Mesh size for the solver scenarios")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="TOML run file (flags win)")
@click.option("--out", "output_dir", type=click.Path(file_okay=False), help="Output directory")
@click.option("--seed", type=int, help="Seed for the Green symmetry audit")
@click.pass_context
def replicate(ctx: click.Context, scenario, mesh_n, config_path, output_dir, seed) -> None:
    """
    Run a replication scenario and write its verdict bundle
    """
    run = build_run(Command.REPLICATE, config_path, output_dir, seed, {"scenario": scenario, "mesh_n": mesh_n})
    payload, code = ReplicateController().replicate(run)
    click.echo(f"{payload['scenario']}: {'inconclusive' if payload['inconclusive'] else 'passed'}")
    ctx.exit(code)
