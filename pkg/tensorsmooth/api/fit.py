import logging
from pathlib import Path
from typing import Optional, Tuple

import click

from tensorsmooth.api.deps import apply_threads, effective_spec, handle_errors
from tensorsmooth.core.errors import ConvergenceError, DataError
from tensorsmooth.models.spec import FamilyName, PenaltyKind
from tensorsmooth.services.model import fit_with_report, residual_table
from tensorsmooth.storage.modelfile import save
from tensorsmooth.storage.tables import read_table, write_table

logger = logging.getLogger(__name__)


@click.command("fit")
@click.option("--data", "data_path", type=click.Path(path_type=Path), required=True, help="Training CSV.")
@click.option("--config", "config_path", type=click.Path(path_type=Path), help="Model configuration JSON.")
@click.option("--model", "model_path", type=click.Path(path_type=Path), default=Path("model.json"), show_default=True,
              help="Where to write the fitted model.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), help="Fit report JSON (stdout when omitted).")
@click.option("--residuals", "residuals_path", type=click.Path(path_type=Path),
              help="Write a fitted,residual CSV of the training rows.")
@click.option("--response", help="Response column (default y).")
@click.option("--covariates", help="Comma-separated covariate columns of a single tensor term.")
@click.option("--family", type=click.Choice([f.value for f in FamilyName]))
@click.option("--penalty", type=click.Choice([k.value for k in PenaltyKind]))
@click.option("--knots", type=int, help="Interior knots per covariate.")
@click.option("--degree", type=int, help="Spline degree.")
@click.option("--lambda", "lambdas", type=float, multiple=True,
              help="Fix the smoothing parameter; repeat once per term.")
@click.option("--seed", type=int, help="Trace-estimator seed.")
@click.option("--probes", type=int, help="Number of trace probes.")
@click.option("--tol-lambda", type=float)
@click.option("--tol-cg", type=float)
@click.option("--threads", type=int, help="Worker threads (env TENSORSMOOTH_THREADS).")
@handle_errors
def command(
    data_path: Path,
    config_path: Optional[Path],
    model_path: Path,
    out_path: Optional[Path],
    residuals_path: Optional[Path],
    response: Optional[str],
    covariates: Optional[str],
    family: Optional[str],
    penalty: Optional[str],
    knots: Optional[int],
    degree: Optional[int],
    lambdas: Tuple[float, ...],
    seed: Optional[int],
    probes: Optional[int],
    tol_lambda: Optional[float],
    tol_cg: Optional[float],
    threads: Optional[int],
):
    """Fit a tensor-product smoother and write the model file."""
    apply_threads(threads)
    data = read_table(data_path)
    spec = effective_spec(
        config_path, data, response=response, covariates=covariates, family=family, penalty=penalty,
        knots=knots, degree=degree, seed=seed, probes=probes, lambdas=lambdas,
        tol_lambda=tol_lambda, tol_cg=tol_cg, threads=threads,
    )
    model, report = fit_with_report(spec, data)
    save(model, model_path)
    logger.info("model written to %s", model_path)

    text = report.model_dump_json(indent=2)
    if out_path is None:
        click.echo(text)
    else:
        try:
            Path(out_path).write_text(text + "\n", encoding="utf-8")
        except OSError as err:
            raise DataError(f"cannot write report to {out_path}: {err}") from err

    if residuals_path is not None:
        write_table(residual_table(model, data), residuals_path)
    if not report.converged:
        raise ConvergenceError(f"fit did not converge; model and report were written to {model_path}")
