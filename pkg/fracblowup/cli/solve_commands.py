import click

from fracblowup.cli.options import (
    build_run,
    iteration_options,
    mesh_options,
    model_options,
    parse_float_list,
    run_options,
)
from fracblowup.controllers.solve_controller import SolveController
from fracblowup.schemas.run import Command


@click.command("solve")
@model_options
@mesh_options
@iteration_options
@click.option("--k", "k", type=float, help="Singular trace value")
@click.option("--g-spec", help="Exterior data spec (zero, shell:R1:R2[:amp], power:a[:R2], ko-shell[:R2], ko[:scale])")
@click.option("--g-ladder", help="Comma-separated truncation levels of g")
@run_options
@click.pass_context
def solve(ctx: click.Context, config_path, output_dir, seed, g_ladder, **flags) -> None:
    """
    Solve the k-problem (--k) or the g-problem (--g-spec)
    """
    flags["g_ladder"] = parse_float_list(g_ladder)
    run = build_run(Command.SOLVE, config_path, output_dir, seed, flags)
    payload, code = SolveController().solve(run)
    summary = payload["summary"]
    click.echo(f"converged in {summary.iterations} iterations, L1 norm {summary.L1_norm:.10g}")
    ctx.exit(code)


@click.command("sweep")
@model_options
@mesh_options
@iteration_options
@click.option("--k-list", help="Comma-separated ascending trace values (default 1,2,4,8,16,32)")
@run_options
@click.pass_context
def sweep(ctx: click.Context, config_path, output_dir, seed, k_list, **flags) -> None:
    """
    Solve for each k and compare the observed regime with the prediction
    """
    flags["k_list"] = parse_float_list(k_list)
    run = build_run(Command.SWEEP, config_path, output_dir, seed, flags)
    payload, code = SolveController().sweep(run)
    click.echo(
        f"observed {payload['regime_observed']}, predicted {payload['regime_predicted']}, "
        f"agree={payload['agree']}"
    )
    ctx.exit(code)


@click.command("residual")
@click.argument("solution", type=click.Path(exists=True, dir_okay=False))
@run_options
@click.pass_context
def residual(ctx: click.Context, solution, config_path, output_dir, seed) -> None:
    """
    Evaluate (-Delta)^s u + f(u) for a solution CSV (interval only)
    """
    run = build_run(Command.RESIDUAL, config_path, output_dir, seed, {"solution": solution})
    payload, code = SolveController().residual(run)
    click.echo(f"max residual {payload['max_residual']:.6e} on {payload['summary'].n_nodes} nodes")
    ctx.exit(code)


@click.command("analyze")
@click.argument("solution", type=click.Path(exists=True, dir_okay=False))
@run_options
@click.pass_context
def analyze(ctx: click.Context, solution, config_path, output_dir, seed) -> None:
    """
    Fit the boundary behaviour of a solution CSV
    """
    run = build_run(Command.ANALYZE, config_path, output_dir, seed, {"solution": solution})
    payload, code = SolveController().analyze(run)
    trace = "diverging" if payload["trace_diverging"] else f"{payload['trace']:.6g}"
    click.echo(f"boundary exponent {payload['exponent']:.4f}, trace {trace}")
    ctx.exit(code)
