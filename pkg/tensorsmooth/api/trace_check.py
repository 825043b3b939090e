"""Convergence of the stochastic trace estimate against the dense exact trace."""

import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np
import pandas as pd

from tensorsmooth.api.deps import apply_threads, handle_errors
from tensorsmooth.core.config import settings
from tensorsmooth.core.errors import ConfigError
from tensorsmooth.engine.basis import build_basis
from tensorsmooth.engine.dense import exact_trace_correction
from tensorsmooth.engine.penalty import build_curvature_penalty, build_difference_penalty
from tensorsmooth.engine.reml import trace_correction
from tensorsmooth.engine.tensor_ops import TensorDesign
from tensorsmooth.models.spec import PenaltyKind, SolverConfig, TraceEstimatorConfig
from tensorsmooth.services.simulate import Scenario, simulate
from tensorsmooth.storage.tables import write_table


def convergence_table(
    n: int = 1000,
    knots: int = 8,
    degree: int = 3,
    penalty: str = PenaltyKind.DIFFERENCE.value,
    lam: float = 0.01,
    max_probes: int = 30,
    seed: int = 0,
    solver: Optional[SolverConfig] = None,
) -> pd.DataFrame:
    """Cumulative-mean trace estimates for ``M = 1..max_probes`` on the two-covariate fixture."""
    if max_probes < 1:
        raise ConfigError(f"--max-probes must be >= 1, got {max_probes}")
    if n < 1:
        raise ConfigError(f"--n must be >= 1, got {n}")
    if lam <= 0:
        raise ConfigError(f"--lambda must be > 0, got {lam}")
    dimension = (knots + degree + 1) ** 2
    if dimension > settings.DENSE_CHECK_LIMIT:
        raise ConfigError(
            f"tensor dimension {dimension} exceeds the dense-check limit of {settings.DENSE_CHECK_LIMIT}"
        )
    solver = solver or SolverConfig(rtol=1e-10)

    table, _ = simulate(Scenario.SMOOTH_2D, n, seed=seed)
    columns = [table["x1"].to_numpy(), table["x2"].to_numpy()]
    bases = [build_basis((0.0, 1.0), knots, degree) for _ in columns]
    design = TensorDesign.from_bases(bases, columns)
    if PenaltyKind(penalty) is PenaltyKind.CURVATURE:
        pen = build_curvature_penalty(bases)
    else:
        pen = build_difference_penalty(bases)

    exact = exact_trace_correction(design, pen, lam)
    probes = TraceEstimatorConfig(n_probes=max_probes, seed=seed).probes(design.K)
    per_probe = np.array([trace_correction(design, pen, lam, probes[m : m + 1], solver)[0] for m in range(max_probes)])
    counts = np.arange(1, max_probes + 1)
    estimate = np.cumsum(per_probe) / counts
    return pd.DataFrame(
        {
            "M": counts,
            "estimate": estimate,
            "exact": np.full(max_probes, exact),
            "relative_error": np.abs(estimate - exact) / abs(exact),
        }
    )


@click.command("trace-check")
@click.option("--n", "n_rows", type=int, default=1000, show_default=True, help="Fixture rows.")
@click.option("--knots", type=int, default=8, show_default=True, help="Interior knots per covariate.")
@click.option("--degree", type=int, default=3, show_default=True)
@click.option("--penalty", type=click.Choice([k.value for k in PenaltyKind]), default=PenaltyKind.DIFFERENCE.value,
              show_default=True)
@click.option("--lambda", "lam", type=float, default=0.01, show_default=True)
@click.option("--max-probes", type=int, default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol-cg", type=float, default=1e-10, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), help="Output CSV (stdout when omitted).")
@click.option("--threads", type=int)
@handle_errors
def command(
    n_rows: int,
    knots: int,
    degree: int,
    penalty: str,
    lam: float,
    max_probes: int,
    seed: int,
    tol_cg: float,
    out_path: Optional[Path],
    threads: Optional[int],
):
    """Hutchinson estimate versus the number of probe vectors."""
    apply_threads(threads)
    table = convergence_table(n_rows, knots, degree, penalty, lam, max_probes, seed, SolverConfig(rtol=tol_cg))
    write_table(table, out_path if out_path is not None else sys.stdout)
