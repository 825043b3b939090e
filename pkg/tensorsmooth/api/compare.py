import sys
from pathlib import Path
from typing import Optional, Tuple

import click

from tensorsmooth.api.deps import apply_threads, handle_errors
from tensorsmooth.core.errors import ConfigError
from tensorsmooth.models.spec import PenaltyKind, SolverConfig, TraceEstimatorConfig
from tensorsmooth.services.compare import SmoothSettings, compare_models
from tensorsmooth.storage.tables import read_table, write_table


def parse_groups(groups: Tuple[str, ...]):
    parsed = [[name.strip() for name in group.split(",") if name.strip()] for group in groups]
    if not parsed or any(not group for group in parsed):
        raise ConfigError("give each covariate group as --group a,b (repeat per group)")
    return parsed


@click.command("compare")
@click.option("--data", "data_path", type=click.Path(path_type=Path), required=True, help="Training CSV.")
@click.option("--group", "groups", multiple=True, required=True,
              help="Comma-separated covariates of one smooth term; repeat for an additive model.")
@click.option("--response", default="y", show_default=True)
@click.option("--knots", type=click.IntRange(min=0), default=8, show_default=True)
@click.option("--degree", type=click.IntRange(min=0), default=3, show_default=True)
@click.option("--penalty", type=click.Choice([k.value for k in PenaltyKind]), default=PenaltyKind.DIFFERENCE.value,
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Trace-estimator seed.")
@click.option("--probes", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), help="Comparison CSV (stdout when omitted).")
@click.option("--residuals", "residuals_path", type=click.Path(path_type=Path),
              help="Write model,fitted,residual rows of every model.")
@click.option("--threads", type=int)
@handle_errors
def command(
    data_path: Path,
    groups: Tuple[str, ...],
    response: str,
    knots: int,
    degree: int,
    penalty: str,
    seed: int,
    probes: int,
    out_path: Optional[Path],
    residuals_path: Optional[Path],
    threads: Optional[int],
):
    """Compare linear baselines with smooth, exp-link and additive models."""
    apply_threads(threads)
    data = read_table(data_path)
    smooth = SmoothSettings(
        knots=knots,
        degree=degree,
        penalty=PenaltyKind(penalty),
        trace=TraceEstimatorConfig(n_probes=probes, seed=seed),
        solver=SolverConfig(threads=threads),
    )
    table, residuals = compare_models(data, parse_groups(groups), response, smooth)
    write_table(table, out_path if out_path is not None else sys.stdout)
    if residuals_path is not None:
        write_table(residuals, residuals_path)
