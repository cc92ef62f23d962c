import click

from fracblowup.models.ball_kernels import KernelSet


@click.command("info")
@click.option("--s", "s", type=float, required=True, help="Fractional order s in (0, 1)")
@click.option("--N", "N", type=int, default=1, show_default=True, help="Space dimension")
def info(s: float, N: int) -> None:
    """
    Print the kernel constants and the power thresholds for (N, s)
    """
    if not 0.0 < s < 1.0 or N < 1:
        raise click.BadParameter("need 0 < s < 1 and N >= 1")
    for name, value in KernelSet(N, s).constants().items():
        click.echo(f"{name} = {value:.17g}")
    click.echo(f"L1 threshold 1+2s = {1.0 + 2.0 * s:.17g}")
    click.echo(f"E threshold (1+s)/(1-s) = {(1.0 + s) / (1.0 - s):.17g}")
