import click

from tensorsmooth import __version__
from tensorsmooth.api import compare, fit, predict, simulate, trace_check
from tensorsmooth.api.deps import configure_logging


@click.group(help="Matrix-free penalized tensor-product spline smoothing.")
@click.version_option(__version__, prog_name="tensorsmooth")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for per-iteration detail.")
def cli(verbose: int):
    configure_logging(verbose)


# Register commands
cli.add_command(fit.command)
cli.add_command(predict.command)
cli.add_command(simulate.command)
cli.add_command(trace_check.command)
cli.add_command(compare.command)


def main():
    cli()


if __name__ == "__main__":
    main()
