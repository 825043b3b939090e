import sys
from pathlib import Path
from typing import Optional

import click

from tensorsmooth.api.deps import apply_threads, handle_errors
from tensorsmooth.services.model import predict
from tensorsmooth.storage.modelfile import load
from tensorsmooth.storage.tables import read_table, write_table


@click.command("predict")
@click.option("--model", "model_path", type=click.Path(path_type=Path), required=True)
@click.option("--data", "data_path", type=click.Path(path_type=Path), required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), help="Output CSV (stdout when omitted).")
@click.option("--threads", type=int)
@handle_errors
def command(model_path: Path, data_path: Path, out_path: Optional[Path], threads: Optional[int]):
    """Predict means for new covariate rows; input columns are echoed next to ``prediction``."""
    apply_threads(threads)
    model = load(model_path)
    data = read_table(data_path)
    table = data.copy()
    table["prediction"] = predict(model, data)
    write_table(table, out_path if out_path is not None else sys.stdout)
