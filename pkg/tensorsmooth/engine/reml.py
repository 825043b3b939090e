"""Smoothing-parameter estimation in the mixed-model view.

With ``α ~ N(0, σ²_α Λ⁻)`` and ``y | α ~ N(Φα, σ²_ε I)`` the regularization
parameter is ``λ = σ²_ε / σ²_α``. Starting from ``λ_0`` the fixed-point
iteration alternates

    α̂   = (ΦᵀΦ + λΛ)⁻¹ Φᵀy
    σ̂²_ε = ||Φα̂ - y||² / n
    σ̂²_α = α̂ᵀΛα̂ / trace((ΦᵀΦ + λΛ)⁻¹ ΦᵀΦ)
    λ    = σ̂²_ε / σ̂²_α

until λ settles. The trace (the effective degrees of freedom) is estimated as
``K - trace((ΦᵀΦ + λΛ)⁻¹ λΛ)`` with Hutchinson's estimator over Rademacher
probes that stay fixed for the whole fit, so every quantity is computed with
operator products and CG solves only.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from tensorsmooth.core.accounting import record
from tensorsmooth.core.errors import ConfigError, ConvergenceError, DegenerateFitError, DimensionError, TraceEstimationError
from tensorsmooth.core.parallel import ordered_map
from tensorsmooth.engine.solver import make_fit_operator, solve
from tensorsmooth.models.spec import SolverConfig, TraceEstimatorConfig

logger = logging.getLogger(__name__)

# (design, penalty, lam, weights) -> (edf estimate, cg iterations)
TraceFn = Callable[..., Tuple[float, int]]


@dataclass
class IterationRecord:
    lam: float
    sigma2_eps: float
    sigma2_alpha: float
    edf: float
    cg_iterations: int


@dataclass
class FitState:
    alpha: np.ndarray
    lam: float
    sigma2_eps: float
    sigma2_alpha: float
    edf: float = float("nan")
    iteration: int = 0
    history: List[IterationRecord] = field(default_factory=list)
    converged: bool = False
    cg_iterations: int = 0
    run_single: float = 0.0


def trace_correction(
    design,
    penalty,
    lam: float,
    probes: np.ndarray,
    solver: Optional[SolverConfig] = None,
    weights: Optional[np.ndarray] = None,
) -> Tuple[float, int]:
    """Hutchinson estimate of ``K - trace((ΦᵀW₂Φ + λΛ)⁻¹ λΛ)`` and the CG iterations spent."""
    solver = solver or SolverConfig()
    if lam < 0:
        raise ConfigError(f"regularization parameter must be >= 0, got {lam}")
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    if probes.shape[0] == 0:
        raise ConfigError("trace estimation needs at least one probe vector")
    if probes.shape[1] != design.K:
        raise DimensionError(f"probe vectors have length {probes.shape[1]}, expected {design.K}")

    op = make_fit_operator(design, penalty, lam, weights, solver.threads)

    def probe(m: int) -> Tuple[float, int]:
        z = probes[m]
        z_tilde = lam * penalty.apply(z)
        if not np.any(z_tilde):
            return 0.0, 0
        z_bar, report = solve(op, z_tilde, solver)
        if not report.converged:
            raise TraceEstimationError(
                f"CG did not converge for trace probe {m} "
                f"(residual {report.final_residual_norm:.3e} after {report.iterations} iterations)",
                probe_index=m,
            )
        return float(np.dot(z, z_bar)), report.iterations

    results = ordered_map(probe, range(probes.shape[0]), solver.threads)
    quad = sum(value for value, _ in results)
    iterations = sum(its for _, its in results)
    return design.K - quad / probes.shape[0], iterations


def estimate_trace_correction(
    design,
    penalty,
    lam: float,
    probes: np.ndarray,
    solver: Optional[SolverConfig] = None,
    weights: Optional[np.ndarray] = None,
) -> float:
    return trace_correction(design, penalty, lam, probes, solver, weights)[0]


class HutchinsonTrace:
    """Stochastic effective degrees of freedom with probes drawn once.

    ``offset`` shifts the seed, so additive term ``j`` uses ``seed + j``.
    """

    def __init__(
        self,
        config: TraceEstimatorConfig,
        dimension: int,
        solver: Optional[SolverConfig] = None,
        offset: int = 0,
    ):
        self.config = config
        self.solver = solver or SolverConfig()
        self.probes = config.probes(dimension, offset)
        record("trace probes", self.probes.shape)

    def __call__(self, design, penalty, lam: float, weights: Optional[np.ndarray] = None) -> Tuple[float, int]:
        return trace_correction(design, penalty, lam, self.probes, self.solver, weights)


def as_trace_estimator(
    trace: Union[None, TraceEstimatorConfig, TraceFn],
    dimension: int,
    solver: Optional[SolverConfig] = None,
    offset: int = 0,
) -> TraceFn:
    if trace is None:
        trace = TraceEstimatorConfig()
    if isinstance(trace, TraceEstimatorConfig):
        return HutchinsonTrace(trace, dimension, solver, offset)
    return trace


def lambda_settled(lam: float, lam_next: float, tol: float, absolute: bool = False) -> bool:
    scale = 1.0 if absolute else max(1.0, abs(lam))
    return abs(lam_next - lam) <= tol * scale


def penalized_solve(
    design,
    penalty,
    y: np.ndarray,
    lam: float,
    solver: Optional[SolverConfig] = None,
    x0: Optional[np.ndarray] = None,
    rhs: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, int]:
    """``(ΦᵀΦ + λΛ)⁻¹ Φᵀy`` by CG; raises when CG does not converge."""
    solver = solver or SolverConfig()
    if rhs is None:
        rhs = design.phi_t(y, solver.threads)
    op = make_fit_operator(design, penalty, lam, threads=solver.threads)
    alpha, report = solve(op, rhs, solver, x0=x0)
    if not report.converged:
        raise ConvergenceError(
            f"coefficient solve at lambda={lam:.6g} did not converge "
            f"(residual {report.final_residual_norm:.3e} after {report.iterations} iterations)"
        )
    return alpha, report.iterations


def fixed_point_fit(
    design,
    penalty,
    y: np.ndarray,
    lam0: float = 1.0,
    trace: Union[None, TraceEstimatorConfig, TraceFn] = None,
    solver: Optional[SolverConfig] = None,
    tol_lambda: float = 1e-4,
    max_outer: int = 100,
    absolute: bool = False,
) -> FitState:
    """Estimate ``α`` and ``λ`` jointly by the variance fixed-point iteration.

    Stops when ``|λ_{t+1} - λ_t| <= tol_lambda * max(1, λ_t)`` (or
    ``<= tol_lambda`` with ``absolute``) and returns the coefficients solved
    at the accepted ``λ_{t+1}``. Reaching ``max_outer`` returns the state with
    ``converged=False``.
    """
    solver = solver or SolverConfig()
    y = np.asarray(y, dtype=float)
    if y.shape != (design.n,):
        raise DimensionError(f"response has length {y.size}, expected {design.n}")
    if lam0 <= 0:
        raise ConfigError(f"initial regularization parameter must be > 0, got {lam0}")
    trace_fn = as_trace_estimator(trace, design.K, solver)

    rhs = design.phi_t(y, solver.threads)
    lam = float(lam0)
    alpha = None
    state = FitState(alpha=np.zeros(design.K), lam=lam, sigma2_eps=float("nan"), sigma2_alpha=float("nan"))

    for t in range(1, max_outer + 1):
        alpha, cg_its = penalized_solve(design, penalty, y, lam, solver, x0=alpha, rhs=rhs)
        resid = design.phi(alpha, solver.threads) - y
        sigma2_eps = float(np.dot(resid, resid)) / design.n
        edf, trace_its = trace_fn(design, penalty, lam)
        quad = penalty.quadratic_form(alpha)
        state.iteration = t
        state.cg_iterations += cg_its + trace_its
        state.alpha = alpha

        if not (quad > 0 and edf > 0):
            state.lam, state.sigma2_eps, state.sigma2_alpha, state.edf = lam, sigma2_eps, 0.0, edf
            raise DegenerateFitError(
                f"prior variance estimate vanished at iteration {t} (alpha'Lambda alpha = {quad:.3e}); "
                "the fit lies in the penalty null space and lambda has no interior optimum",
                state=state,
            )

        sigma2_alpha = quad / edf
        lam_next = sigma2_eps / sigma2_alpha
        state.history.append(IterationRecord(lam, sigma2_eps, sigma2_alpha, edf, cg_its + trace_its))
        state.sigma2_eps, state.sigma2_alpha, state.edf = sigma2_eps, sigma2_alpha, edf
        logger.info("iteration %d: lambda %.6g -> %.6g (edf %.3f)", t, lam, lam_next, edf)

        settled = lambda_settled(lam, lam_next, tol_lambda, absolute)
        lam = lam_next
        if settled:
            state.converged = True
            break
    else:
        logger.warning("lambda did not settle within %d outer iterations", max_outer)

    started = time.perf_counter()
    state.alpha, cg_its = penalized_solve(design, penalty, y, lam, solver, x0=alpha, rhs=rhs)
    state.run_single = time.perf_counter() - started
    state.cg_iterations += cg_its
    state.lam = lam
    return state
