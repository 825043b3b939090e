import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from tensorsmooth.core.accounting import accounting
from tensorsmooth.core.errors import DataError, DomainError, TensorSmoothError
from tensorsmooth.engine.basis import UnivariateBasis, build_basis
from tensorsmooth.engine.glm import (
    AdditiveDesign,
    AdditiveTerm,
    additive_outer_fit,
    fisher_scoring_fit,
    get_family,
    glm_outer_fit,
)
from tensorsmooth.engine.penalty import PenaltyOperator, build_curvature_penalty, build_difference_penalty
from tensorsmooth.engine.reml import fixed_point_fit, penalized_solve
from tensorsmooth.engine.tensor_ops import TensorDesign
from tensorsmooth.models.fitted import (
    BasisRecord,
    FitDiagnostics,
    FitReport,
    FittedModel,
    FittedTerm,
    IterationSummary,
)
from tensorsmooth.models.spec import BasisConfig, FamilyName, ModelSpec, PenaltyKind, Placement, TermSpec

logger = logging.getLogger(__name__)

# relative widening of the training covariate range
DOMAIN_MARGIN = 1e-6


@dataclass
class BuiltTerm:
    spec: TermSpec
    bases: List[UnivariateBasis]
    design: TensorDesign
    penalty: PenaltyOperator


@contextmanager
def phase(name: str) -> Iterator[None]:
    """Prefix component errors with the term/phase they came from."""
    try:
        yield
    except TensorSmoothError as err:
        err.detail = f"{name}: {err.detail}"
        err.args = (err.detail,)
        raise


def require_columns(data: pd.DataFrame, columns: Sequence[str]) -> None:
    missing = [name for name in columns if name not in data.columns]
    if missing:
        raise DataError(f"missing column(s) in data: {', '.join(missing)}")


def column(data: pd.DataFrame, name: str) -> np.ndarray:
    try:
        return data[name].to_numpy(dtype=float)
    except (TypeError, ValueError):
        raise DataError(f"column {name!r} is not numeric") from None


def basis_domain(config: BasisConfig, values: np.ndarray) -> Tuple[float, float]:
    if config.domain is not None:
        return config.domain
    lo, hi = float(values.min()), float(values.max())
    width = hi - lo
    margin = DOMAIN_MARGIN * (width if width > 0 else max(abs(hi), 1.0))
    return lo - margin, hi + margin


def build_term(term: TermSpec, data: pd.DataFrame) -> BuiltTerm:
    columns = [column(data, name) for name in term.covariates]
    bases = []
    for name, config, values in zip(term.covariates, term.basis_configs(), columns):
        with phase(f"basis for {name!r}"):
            data_arg = values if config.placement is Placement.QUANTILE else None
            bases.append(
                build_basis(basis_domain(config, values), config.n_interior_knots, config.degree, config.placement, data_arg)
            )
    design = TensorDesign.from_bases(bases, columns)
    if term.penalty.kind is PenaltyKind.CURVATURE:
        penalty = build_curvature_penalty(bases)
    else:
        penalty = build_difference_penalty(bases, term.difference_orders())
    return BuiltTerm(term, bases, design, penalty)


def fit(spec: ModelSpec, data: pd.DataFrame) -> FittedModel:
    """Fit ``spec`` to ``data``.

    Single-term identity-link models go through the variance fixed-point
    iteration, other single-term models through the generalized outer loop,
    multi-term models through the additive loop. Fixed smoothing parameters
    skip estimation: one coefficient fit, no trace probes.
    """
    require_columns(data, [spec.response] + spec.covariates)
    if len(data) < 1:
        raise DataError("cannot fit a model to an empty table")
    y = column(data, spec.response)
    family = get_family(spec.family)
    with phase("response"):
        family.validate(y)

    built = []
    for j, term in enumerate(spec.terms):
        with phase(f"term {j}"):
            built.append(build_term(term, data))
    single = len(built) == 1
    identity = family.name is FamilyName.GAUSSIAN_IDENTITY
    additive = AdditiveDesign([AdditiveTerm(b.design, b.penalty) for b in built])

    sigma2_terms: List[Optional[float]] = [None] * len(built)
    edf: List[Optional[float]] = [None] * len(built)
    diagnostics = FitDiagnostics(n_observations=len(y))

    if spec.fixed_lambda is not None:
        lams = np.array(spec.fixed_lambda, dtype=float)
        started = time.perf_counter()
        with phase("fixed-lambda fit"):
            if single and identity:
                alpha, cg_its = penalized_solve(built[0].design, built[0].penalty, y, lams[0], spec.solver)
                eta = built[0].design.phi(alpha, spec.solver.threads)
                diagnostics.cg_iterations = cg_its
            else:
                result = fisher_scoring_fit(
                    additive, family, y, lams, solver=spec.solver,
                    tol_inner=spec.tol_inner, max_inner=spec.max_inner,
                )
                alpha, eta = result.alpha, result.eta
                diagnostics.fisher_iterations = result.iterations
                diagnostics.cg_iterations = result.cg_iterations
                diagnostics.converged = result.converged
        run_single = time.perf_counter() - started
        resid = family.mean(eta) - y
        sigma2_eps = float(np.dot(resid, resid)) / len(y)
    elif single and identity:
        with phase("smoothing-parameter estimation"):
            state = fixed_point_fit(
                built[0].design, built[0].penalty, y, spec.lambda0, spec.trace, spec.solver,
                spec.tol_lambda, spec.max_outer, spec.absolute_lambda_test,
            )
        alpha, lams, sigma2_eps, run_single = state.alpha, np.array([state.lam]), state.sigma2_eps, state.run_single
        sigma2_terms, edf = [state.sigma2_alpha], [state.edf]
        diagnostics.history = [
            IterationSummary(
                lams=[rec.lam], sigma2_eps=rec.sigma2_eps, sigma2_terms=[rec.sigma2_alpha],
                edf=[rec.edf], cg_iterations=rec.cg_iterations,
            )
            for rec in state.history
        ]
        diagnostics.outer_iterations = state.iteration
        diagnostics.cg_iterations = state.cg_iterations
        diagnostics.converged = state.converged
    else:
        with phase("smoothing-parameter estimation"):
            if single:
                state = glm_outer_fit(
                    built[0].design, built[0].penalty, family, y, spec.lambda0, spec.trace, spec.solver,
                    spec.tol_lambda, spec.max_outer, spec.tol_inner, spec.max_inner, spec.absolute_lambda_test,
                )
            else:
                state = additive_outer_fit(
                    additive, family, y, spec.lambda0, spec.trace, spec.solver, spec.tol_lambda,
                    spec.max_outer, spec.tol_inner, spec.max_inner, spec.absolute_lambda_test,
                )
        alpha, lams, sigma2_eps, run_single = state.alpha, state.lams, state.sigma2_eps, state.run_single
        sigma2_terms, edf = state.sigma2_terms.tolist(), state.edf.tolist()
        diagnostics.history = [
            IterationSummary(
                lams=rec.lams, sigma2_eps=rec.sigma2_eps, sigma2_terms=rec.sigma2_terms,
                edf=rec.edf, cg_iterations=rec.cg_iterations,
            )
            for rec in state.history
        ]
        diagnostics.outer_iterations = state.iteration
        diagnostics.fisher_iterations = state.fisher_iterations
        diagnostics.cg_iterations = state.cg_iterations
        diagnostics.converged = state.converged

    if spec.fixed_lambda is None:
        diagnostics.trace_seed = spec.trace.seed
        diagnostics.n_probes = spec.trace.n_probes

    terms = [
        FittedTerm(
            covariates=b.spec.covariates,
            bases=[BasisRecord.from_basis(basis) for basis in b.bases],
            penalty=b.spec.penalty,
            alpha=block.tolist(),
            lam=float(lam),
            lambda_fixed=spec.fixed_lambda is not None,
            sigma2_alpha=s2,
            edf=e,
        )
        for b, block, lam, s2, e in zip(built, additive.split(alpha), lams, sigma2_terms, edf)
    ]
    model = FittedModel(spec=spec, terms=terms, sigma2_eps=sigma2_eps, diagnostics=diagnostics)
    model._fitted_values = predict(model, data)
    model._run_single = run_single
    if not diagnostics.converged:
        logger.warning("fit finished without convergence")
    return model


def linear_predictor(model: FittedModel, data: pd.DataFrame) -> np.ndarray:
    """``η = Σ_j s_j(x)`` evaluated row-wise; raises ``DomainError`` listing every offending row."""
    require_columns(data, model.spec.covariates)
    bad: set = set()
    terms = []
    for term in model.terms:
        bases = [record.to_basis() for record in term.bases]
        columns = [column(data, name) for name in term.covariates]
        for basis, values in zip(bases, columns):
            try:
                basis.check_domain(values)
            except DomainError as err:
                bad.update(err.rows)
        terms.append((bases, columns, np.array(term.alpha, dtype=float)))
    if bad:
        rows = sorted(bad)
        shown = ", ".join(str(i) for i in rows[:20])
        more = "" if len(rows) <= 20 else f" (+{len(rows) - 20} more)"
        raise DomainError(f"covariates outside the training domain at rows {shown}{more}", rows=rows)

    eta = np.zeros(len(data))
    for bases, columns, alpha in terms:
        eta += TensorDesign.from_bases(bases, columns).phi(alpha)
    return eta


def predict(model: FittedModel, data: pd.DataFrame) -> np.ndarray:
    """Mean predictions on new data."""
    return get_family(model.spec.family).mean(linear_predictor(model, data))


def residual_table(model: FittedModel, data: pd.DataFrame) -> pd.DataFrame:
    """``fitted,residual`` per row, ready for a fitted-versus-residual plot."""
    require_columns(data, [model.spec.response])
    fitted = predict(model, data)
    return pd.DataFrame({"fitted": fitted, "residual": column(data, model.spec.response) - fitted})


def gaussian_aic(rss: float, n: int, edf: float) -> Optional[float]:
    """``n log(2π σ²) + n + 2 (edf + 1)`` with ``σ² = rss / n``."""
    if n < 1 or not rss > 0:
        return None
    return float(n * np.log(2 * np.pi * rss / n) + n + 2 * (edf + 1))


def fit_with_report(spec: ModelSpec, data: pd.DataFrame) -> Tuple[FittedModel, FitReport]:
    """``fit`` under allocation accounting, plus the fit report."""
    started = time.perf_counter()
    with accounting() as accountant:
        model = fit(spec, data)
    run_total = time.perf_counter() - started

    y = column(data, spec.response)
    resid = model.fitted_values - y
    rss = float(np.dot(resid, resid))
    edf = [term.edf for term in model.terms]
    aic = None
    gaussian = spec.family in (FamilyName.GAUSSIAN_IDENTITY, FamilyName.GAUSSIAN_LOG)
    if gaussian and all(e is not None for e in edf):
        aic = gaussian_aic(rss, len(y), sum(edf))

    report = FitReport(
        lambdas=model.lambdas,
        lambda_mode="fixed" if spec.fixed_lambda is not None else "estimated",
        sigma2_eps=model.sigma2_eps,
        sigma2_alpha=[term.sigma2_alpha for term in model.terms],
        edf=edf,
        outer_iterations=model.diagnostics.outer_iterations,
        fisher_iterations=model.diagnostics.fisher_iterations,
        cg_iterations=model.diagnostics.cg_iterations,
        converged=model.diagnostics.converged,
        rss=rss,
        aic=aic,
        negative_predictions=int(np.sum(model.fitted_values < 0)),
        run_single=model.run_single,
        run_total=run_total,
        peak_memory_bytes=accountant.peak_bytes,
        largest_allocation_elements=accountant.largest_elements,
        config=spec,
    )
    return model, report
