"""Linear baselines against smooth, exp-link and additive models on one table."""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg

from tensorsmooth.core.errors import ConfigError, FisherScoringError
from tensorsmooth.engine.glm import fisher_scoring_fit, get_family
from tensorsmooth.engine.penalty import zero_penalty
from tensorsmooth.engine.tensor_ops import TensorDesign
from tensorsmooth.models.spec import (
    BasisConfig,
    FamilyName,
    ModelSpec,
    PenaltyKind,
    PenaltySpec,
    SolverConfig,
    TermSpec,
    TraceEstimatorConfig,
)
from tensorsmooth.services.model import (
    column,
    fit_with_report,
    gaussian_aic,
    phase,
    require_columns,
    residual_table,
)

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = ["model", "family", "rss", "aic", "run_single", "run_total", "neg", "converged"]


@dataclass
class Candidate:
    name: str
    family: FamilyName
    groups: List[List[str]]
    linear: bool = False


@dataclass
class SmoothSettings:
    """Shared basis, penalty and estimation settings of the smooth candidates."""

    knots: int = 8
    degree: int = 3
    penalty: PenaltyKind = PenaltyKind.DIFFERENCE
    trace: TraceEstimatorConfig = field(default_factory=TraceEstimatorConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    tol_lambda: float = 1e-4
    max_outer: int = 100


def _smooth_name(groups: Sequence[Sequence[str]]) -> str:
    return " + ".join(f"s({','.join(group)})" for group in groups)


def candidate_models(groups: Sequence[Sequence[str]]) -> List[Candidate]:
    """Linear, exp-linear, one smooth per group, and the additive model, each with both links."""
    groups = [list(group) for group in groups]
    if not groups or any(not group for group in groups):
        raise ConfigError("comparison needs at least one non-empty covariate group")
    covariates = [name for group in groups for name in group]
    if len(set(covariates)) != len(covariates):
        raise ConfigError(f"covariate groups overlap: {covariates}")

    linear = " + ".join(covariates)
    models = [
        Candidate(linear, FamilyName.GAUSSIAN_IDENTITY, [covariates], linear=True),
        Candidate(f"exp({linear})", FamilyName.GAUSSIAN_LOG, [covariates], linear=True),
    ]
    smooth = [[group] for group in groups] + ([groups] if len(groups) > 1 else [])
    for family in (FamilyName.GAUSSIAN_IDENTITY, FamilyName.GAUSSIAN_LOG):
        for terms in smooth:
            name = _smooth_name(terms)
            if family is FamilyName.GAUSSIAN_LOG:
                name = f"exp({name})"
            models.append(Candidate(name, family, terms))
    return models


def fit_linear(
    data: pd.DataFrame,
    response: str,
    covariates: Sequence[str],
    family: FamilyName,
    solver: Optional[SolverConfig] = None,
) -> Tuple[np.ndarray, int]:
    """Unpenalized ``μ = g⁻¹(β_0 + Σ β_p x_p)``; returns fitted means and the parameter count."""
    y = column(data, response)
    X = np.column_stack([np.ones(len(data))] + [column(data, name) for name in covariates])
    if family is FamilyName.GAUSSIAN_IDENTITY:
        beta = scipy.linalg.lstsq(X, y)[0]
        return X @ beta, X.shape[1]

    fam = get_family(family)
    alpha0 = np.zeros(X.shape[1])
    alpha0[0] = fam.initial_eta(y)
    result = fisher_scoring_fit(
        TensorDesign.from_factors([X]), fam, y, 1.0, penalty=zero_penalty(X.shape[1]),
        solver=solver, alpha0=alpha0,
    )
    if not result.converged:
        raise FisherScoringError(f"linear {family.value} fit did not converge (score norm {result.score_norm:.3e})")
    return result.mu, X.shape[1]


def _smooth_spec(candidate: Candidate, response: str, settings: SmoothSettings) -> ModelSpec:
    basis = BasisConfig(n_interior_knots=settings.knots, degree=settings.degree)
    penalty = PenaltySpec(kind=settings.penalty)
    terms = [TermSpec(covariates=group, basis=basis, penalty=penalty) for group in candidate.groups]
    return ModelSpec(
        response=response,
        terms=terms,
        family=candidate.family,
        trace=settings.trace,
        solver=settings.solver,
        tol_lambda=settings.tol_lambda,
        max_outer=settings.max_outer,
    )


def compare_models(
    data: pd.DataFrame,
    groups: Sequence[Sequence[str]],
    response: str = "y",
    settings: Optional[SmoothSettings] = None,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Fit every candidate and tabulate rss, aic, runtimes and negative predictions.

    Returns the comparison table (one row per model, ``run_single`` empty for
    the baselines) and a long ``model,fitted,residual`` table.
    """
    settings = settings or SmoothSettings()
    candidates = candidate_models(groups)
    require_columns(data, [response] + candidates[0].groups[0])
    y = column(data, response)

    rows, residuals = [], []
    for candidate in candidates:
        with phase(f"model {candidate.name}"):
            if candidate.linear:
                started = time.perf_counter()
                fitted, params = fit_linear(data, response, candidate.groups[0], candidate.family, settings.solver)
                run_total = time.perf_counter() - started
                rss = float(np.dot(y - fitted, y - fitted))
                row = dict(
                    rss=rss, aic=gaussian_aic(rss, len(y), params), run_single=None,
                    run_total=run_total, neg=bool(np.any(fitted < 0)), converged=True,
                )
                table = pd.DataFrame({"fitted": fitted, "residual": y - fitted})
            else:
                model, report = fit_with_report(_smooth_spec(candidate, response, settings), data)
                row = dict(
                    rss=report.rss, aic=report.aic, run_single=report.run_single, run_total=report.run_total,
                    neg=report.negative_predictions > 0, converged=report.converged,
                )
                table = residual_table(model, data)
        logger.info("%s: rss %.6g", candidate.name, row["rss"])
        rows.append(dict(model=candidate.name, family=candidate.family.value, **row))
        residuals.append(table.assign(model=candidate.name)[["model", "fitted", "residual"]])

    return pd.DataFrame(rows, columns=COMPARISON_COLUMNS), pd.concat(residuals, ignore_index=True)
