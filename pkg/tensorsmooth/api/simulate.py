import sys
from pathlib import Path
from typing import Optional

import click

from tensorsmooth.api.deps import handle_errors
from tensorsmooth.services.simulate import Scenario, simulate
from tensorsmooth.storage.tables import write_table


@click.command("simulate")
@click.option("--scenario", type=click.Choice([s.value for s in Scenario]), required=True)
@click.option("--n", "n_rows", type=click.IntRange(min=0), default=1000, show_default=True)
@click.option("--noise", type=click.FloatRange(min=0.0), default=0.1, show_default=True, help="Noise standard deviation.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), help="Output CSV (stdout when omitted).")
@handle_errors
def command(scenario: str, n_rows: int, noise: float, seed: int, out_path: Optional[Path]):
    """Write a synthetic data set with a known truth."""
    table, _ = simulate(scenario, n_rows, noise_sd=noise, seed=seed)
    write_table(table, out_path if out_path is not None else sys.stdout)
