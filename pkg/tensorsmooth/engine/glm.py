"""Generalized and additive tensor-product spline models."""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, logit, xlogy

from tensorsmooth.core.errors import (
    ConfigError,
    DegenerateFitError,
    DimensionError,
    FisherScoringError,
    InvalidResponseError,
)
from tensorsmooth.engine.penalty import PenaltyOperator
from tensorsmooth.engine.reml import as_trace_estimator, lambda_settled, penalized_solve
from tensorsmooth.engine.solver import make_fit_operator, solve
from tensorsmooth.engine.tensor_ops import TensorDesign
from tensorsmooth.models.spec import FamilyName, SolverConfig, TraceEstimatorConfig

logger = logging.getLogger(__name__)

# floor for log-link starting means
Y_FLOOR = 1e-8
MAX_HALVINGS = 20
# slack on the penalized-deviance comparison, relative
DEVIANCE_SLACK = 1e-12


# ------------------------------------------------------------------ #
# Families
# ------------------------------------------------------------------ #


class Family:
    """Response distribution and link: mean, Fisher weights, deviance."""

    name: FamilyName

    def mean(self, eta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def w1(self, eta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def w2(self, eta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def deviance(self, y: np.ndarray, mu: np.ndarray) -> float:
        raise NotImplementedError

    def validate(self, y: np.ndarray) -> None:
        if not np.all(np.isfinite(y)):
            raise InvalidResponseError(f"{self.name.value}: response contains non-finite values")

    def initial_eta(self, y: np.ndarray) -> float:
        return 0.0

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class GaussianIdentity(Family):
    name = FamilyName.GAUSSIAN_IDENTITY

    def mean(self, eta):
        return np.asarray(eta, dtype=float)

    def w1(self, eta):
        return np.ones_like(eta, dtype=float)

    def w2(self, eta):
        return np.ones_like(eta, dtype=float)

    def deviance(self, y, mu):
        resid = y - mu
        return float(np.dot(resid, resid))


class GaussianLog(Family):
    """Normal response with ``E(Y|x) = exp(s(x))``; ``W₂ = 2 exp(η)``."""

    name = FamilyName.GAUSSIAN_LOG

    def mean(self, eta):
        return np.exp(eta)

    def w1(self, eta):
        return np.exp(eta)

    def w2(self, eta):
        return 2.0 * np.exp(eta)

    def deviance(self, y, mu):
        resid = y - mu
        return float(np.dot(resid, resid))

    def initial_eta(self, y):
        return float(np.log(np.mean(np.maximum(y, Y_FLOOR)))) if y.size else 0.0


class PoissonLog(Family):
    name = FamilyName.POISSON_LOG

    def mean(self, eta):
        return np.exp(eta)

    def w1(self, eta):
        return np.ones_like(eta, dtype=float)

    def w2(self, eta):
        return np.exp(eta)

    def deviance(self, y, mu):
        return float(2.0 * np.sum(xlogy(y, y) - xlogy(y, mu) - (y - mu)))

    def validate(self, y):
        super().validate(y)
        if np.any(y < 0):
            raise InvalidResponseError("poisson_log: response must be non-negative")

    def initial_eta(self, y):
        return float(np.log(np.mean(np.maximum(y, Y_FLOOR)))) if y.size else 0.0


class BinomialLogit(Family):
    name = FamilyName.BINOMIAL_LOGIT

    def mean(self, eta):
        return expit(eta)

    def w1(self, eta):
        return np.ones_like(eta, dtype=float)

    def w2(self, eta):
        mu = expit(eta)
        return mu * (1.0 - mu)

    def deviance(self, y, mu):
        return float(2.0 * np.sum(xlogy(y, y) - xlogy(y, mu) + xlogy(1 - y, 1 - y) - xlogy(1 - y, 1 - mu)))

    def validate(self, y):
        super().validate(y)
        if np.any((y < 0) | (y > 1)):
            raise InvalidResponseError("binomial_logit: response must lie in [0, 1]")

    def initial_eta(self, y):
        if not y.size:
            return 0.0
        return float(logit(np.clip(np.mean(y), Y_FLOOR, 1 - Y_FLOOR)))


_FAMILIES: Dict[FamilyName, Family] = {
    family.name: family for family in (GaussianIdentity(), GaussianLog(), PoissonLog(), BinomialLogit())
}


def get_family(name: Union[str, FamilyName, Family]) -> Family:
    if isinstance(name, Family):
        return name
    try:
        return _FAMILIES[FamilyName(name)]
    except ValueError:
        raise ConfigError(f"unknown family {name!r}; choose from {[f.value for f in FamilyName]}") from None


# ------------------------------------------------------------------ #
# Additive designs
# ------------------------------------------------------------------ #


@dataclass(frozen=True)
class AdditiveTerm:
    design: TensorDesign
    penalty: PenaltyOperator
    lam: float = 1.0


class BlockPenalty:
    """``block diag(λ_(j) Λ_(j))``; ``apply`` already includes the ``λ_(j)``."""

    def __init__(self, penalties: Sequence[PenaltyOperator], lams: Sequence[float], offsets: Sequence[int]):
        self.penalties = list(penalties)
        self.lams = [float(lam) for lam in lams]
        self.offsets = list(offsets)
        self.dimension = self.offsets[-1]

    def _blocks(self, alpha: np.ndarray):
        for j, (penalty, lam) in enumerate(zip(self.penalties, self.lams)):
            yield penalty, lam, alpha[self.offsets[j]:self.offsets[j + 1]]

    def apply(self, alpha: np.ndarray) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (self.dimension,):
            raise DimensionError(f"coefficient vector has length {alpha.size}, expected {self.dimension}")
        return np.concatenate([lam * penalty.apply(block) for penalty, lam, block in self._blocks(alpha)])

    def quadratic_form(self, alpha: np.ndarray) -> float:
        return float(np.dot(alpha, self.apply(alpha)))

    def diagonal(self) -> np.ndarray:
        return np.concatenate([lam * penalty.diagonal() for penalty, lam in zip(self.penalties, self.lams)])


class AdditiveDesign:
    """Concatenation of tensor-product terms sharing the observations."""

    def __init__(self, terms: Sequence[AdditiveTerm]):
        if not terms:
            raise ConfigError("an additive design needs at least one term")
        n = terms[0].design.n
        for j, term in enumerate(terms):
            if term.design.n != n:
                raise DimensionError(f"term {j} has {term.design.n} observations, expected {n}")
            if term.penalty.dimension != term.design.K:
                raise DimensionError(f"term {j}: penalty dimension does not match its design")
        self.terms = list(terms)
        self.n = n
        self.offsets = np.concatenate([[0], np.cumsum([term.design.K for term in terms])]).tolist()
        self.K = self.offsets[-1]

    @classmethod
    def single(cls, design: TensorDesign, penalty: PenaltyOperator, lam: float = 1.0) -> "AdditiveDesign":
        return cls([AdditiveTerm(design, penalty, lam)])

    @property
    def lams(self) -> np.ndarray:
        return np.array([term.lam for term in self.terms])

    def slices(self) -> List[slice]:
        return [slice(lo, hi) for lo, hi in zip(self.offsets[:-1], self.offsets[1:])]

    def split(self, alpha: np.ndarray) -> List[np.ndarray]:
        return [alpha[s] for s in self.slices()]

    def with_lambdas(self, lams: Sequence[float]) -> "AdditiveDesign":
        lams = _broadcast_lams(lams, len(self.terms))
        return AdditiveDesign([AdditiveTerm(t.design, t.penalty, lam) for t, lam in zip(self.terms, lams)])

    def block_penalty(self) -> BlockPenalty:
        return BlockPenalty([t.penalty for t in self.terms], self.lams, self.offsets)

    def phi(self, alpha: np.ndarray, threads: Optional[int] = None) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (self.K,):
            raise DimensionError(f"coefficient vector has length {alpha.size}, expected {self.K}")
        out = np.zeros(self.n)
        for term, block in zip(self.terms, self.split(alpha)):
            out += term.design.phi(block, threads)
        return out

    def phi_t(self, y: np.ndarray, threads: Optional[int] = None) -> np.ndarray:
        return np.concatenate([term.design.phi_t(y, threads) for term in self.terms])

    def gram_diagonal(self, weights: Optional[np.ndarray] = None, threads: Optional[int] = None) -> np.ndarray:
        return np.concatenate([term.design.gram_diagonal(weights, threads) for term in self.terms])


def _broadcast_lams(lams, count: int) -> np.ndarray:
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    if lams.size == 1:
        lams = np.full(count, lams[0])
    if lams.size != count:
        raise ConfigError(f"{lams.size} smoothing parameters given for {count} terms")
    if np.any(~(lams > 0)):
        raise ConfigError("smoothing parameters must be > 0")
    return lams


def _penalty_operator(design, penalty: Optional[PenaltyOperator], lam) -> Tuple[object, float]:
    """Penalty and scalar with ``λΛα = scale * pen.apply(α)``."""
    if isinstance(design, AdditiveDesign):
        return design.with_lambdas(lam).block_penalty(), 1.0
    if penalty is None:
        raise ConfigError("a single-term fit needs a penalty operator")
    return penalty, float(_broadcast_lams(lam, 1)[0])


def initial_coefficients(design, family: Family, y: np.ndarray) -> np.ndarray:
    """Zero, or the constant ``η_0`` carried by the first term.

    B-spline tensor designs form a partition of unity, so ``α = c·1`` gives
    ``Φα ≡ c`` and lies in the penalty null space.
    """
    alpha = np.zeros(design.K)
    eta0 = family.initial_eta(y)
    if eta0:
        first = design.slices()[0] if isinstance(design, AdditiveDesign) else slice(0, design.K)
        alpha[first] = eta0
    return alpha


# ------------------------------------------------------------------ #
# Penalized Fisher scoring
# ------------------------------------------------------------------ #


@dataclass
class FisherResult:
    alpha: np.ndarray
    eta: np.ndarray
    mu: np.ndarray
    iterations: int
    converged: bool
    score_norm: float
    penalized_deviance: List[float] = field(default_factory=list)
    cg_iterations: int = 0
    halvings: int = 0


def fisher_scoring_fit(
    design: Union[TensorDesign, AdditiveDesign],
    family: Union[str, FamilyName, Family],
    y: np.ndarray,
    lam: Union[float, Sequence[float]],
    penalty: Optional[PenaltyOperator] = None,
    solver: Optional[SolverConfig] = None,
    tol_inner: float = 1e-6,
    max_inner: int = 50,
    alpha0: Optional[np.ndarray] = None,
) -> FisherResult:
    """Penalized Fisher scoring at fixed smoothing parameter(s).

    Converged when ``||s|| <= tol_inner * max(1, ||Φᵀy||)``. A step that raises
    the penalized deviance is halved, at most 20 times.
    """
    family = get_family(family)
    solver = solver or SolverConfig()
    y = np.asarray(y, dtype=float)
    if y.shape != (design.n,):
        raise DimensionError(f"response has length {y.size}, expected {design.n}")
    family.validate(y)
    pen, scale = _penalty_operator(design, penalty, lam)
    threads = solver.threads

    alpha = initial_coefficients(design, family, y) if alpha0 is None else np.array(alpha0, dtype=float)
    threshold = tol_inner * max(1.0, float(np.linalg.norm(design.phi_t(y, threads))))

    def penalized_deviance(alpha: np.ndarray, eta: np.ndarray) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            value = family.deviance(y, family.mean(eta)) + scale * pen.quadratic_form(alpha)
        return value if np.isfinite(value) else np.inf

    eta = design.phi(alpha, threads)
    result = FisherResult(alpha=alpha, eta=eta, mu=family.mean(eta), iterations=0, converged=False, score_norm=np.inf)
    result.penalized_deviance.append(penalized_deviance(alpha, eta))

    while True:
        mu = family.mean(eta)
        score = design.phi_t(family.w1(eta) * (y - mu), threads) - scale * pen.apply(alpha)
        result.score_norm = float(np.linalg.norm(score))
        if result.score_norm <= threshold:
            result.converged = True
            break
        if result.iterations >= max_inner:
            logger.warning("Fisher scoring stopped after %d iterations, score norm %.3e", max_inner, result.score_norm)
            break

        op = make_fit_operator(design, pen, scale, family.w2(eta), threads)
        step, report = solve(op, score, solver)
        result.cg_iterations += report.iterations
        if not report.converged:
            raise FisherScoringError(
                f"step solve at Fisher iteration {result.iterations + 1} did not converge "
                f"(residual {report.final_residual_norm:.3e} after {report.iterations} iterations)"
            )

        current = result.penalized_deviance[-1]
        factor = 1.0
        for halving in range(MAX_HALVINGS + 1):
            candidate = alpha + factor * step
            candidate_eta = design.phi(candidate, threads)
            value = penalized_deviance(candidate, candidate_eta)
            if value <= current + DEVIANCE_SLACK * abs(current):
                break
            factor *= 0.5
        else:
            raise FisherScoringError(
                f"step halving exhausted after {MAX_HALVINGS} halvings at Fisher iteration {result.iterations + 1}"
            )

        result.halvings += halving
        alpha, eta = candidate, candidate_eta
        result.iterations += 1
        result.penalized_deviance.append(value)
        logger.debug("Fisher iteration %d: penalized deviance %.8g", result.iterations, value)

    result.alpha, result.eta, result.mu = alpha, eta, family.mean(eta)
    return result


# ------------------------------------------------------------------ #
# Variance updates
# ------------------------------------------------------------------ #


@dataclass
class VarianceUpdate:
    sigma2_eps: float
    sigma2_alpha: float
    edf: float
    quadratic_form: float
    cg_iterations: int = 0

    @property
    def degenerate(self) -> bool:
        return not (self.quadratic_form > 0 and self.edf > 0)


def glm_variance_update(
    alpha: np.ndarray,
    design: TensorDesign,
    family: Union[str, FamilyName, Family],
    penalty: PenaltyOperator,
    y: np.ndarray,
    lam: float,
    trace=None,
    solver: Optional[SolverConfig] = None,
) -> VarianceUpdate:
    """``σ²_ε`` from mean residuals; ``σ²_α = α'Λα / (K - trace((ΦᵀW₂Φ + λΛ)⁻¹λΛ))``."""
    family = get_family(family)
    solver = solver or SolverConfig()
    trace_fn = as_trace_estimator(trace, design.K, solver)
    eta = design.phi(alpha, solver.threads)
    resid = family.mean(eta) - y
    sigma2_eps = float(np.dot(resid, resid)) / design.n
    edf, its = trace_fn(design, penalty, lam, family.w2(eta))
    quad = penalty.quadratic_form(alpha)
    sigma2_alpha = quad / edf if edf > 0 else 0.0
    return VarianceUpdate(sigma2_eps, sigma2_alpha, edf, quad, its)


def additive_variance_update(
    alpha: np.ndarray,
    design: AdditiveDesign,
    traces: Sequence,
    weights: Optional[np.ndarray] = None,
) -> List[VarianceUpdate]:
    """Per-term prior variances from each term's own operator.

    ``σ²_(j) ≈ α_(j)ᵀΛ_(j)α_(j) / trace((Φ_(j)ᵀW₂Φ_(j) + λ_(j)Λ_(j))⁻¹Φ_(j)ᵀW₂Φ_(j))``;
    the returned ``sigma2_eps`` fields are left at ``nan`` for the caller.
    """
    updates = []
    for term, block, trace_fn in zip(design.terms, design.split(alpha), traces):
        edf, its = trace_fn(term.design, term.penalty, term.lam, weights)
        quad = term.penalty.quadratic_form(block)
        sigma2 = quad / edf if edf > 0 else 0.0
        updates.append(VarianceUpdate(float("nan"), sigma2, edf, quad, its))
    return updates


# ------------------------------------------------------------------ #
# Outer smoothing-parameter loops
# ------------------------------------------------------------------ #


@dataclass
class AdditiveIterationRecord:
    lams: List[float]
    sigma2_eps: float
    sigma2_terms: List[float]
    edf: List[float]
    fisher_iterations: int
    cg_iterations: int


@dataclass
class AdditiveFitState:
    alpha: np.ndarray
    lams: np.ndarray
    sigma2_eps: float
    sigma2_terms: np.ndarray
    edf: np.ndarray
    eta: Optional[np.ndarray] = None
    iteration: int = 0
    history: List[AdditiveIterationRecord] = field(default_factory=list)
    converged: bool = False
    fisher_iterations: int = 0
    cg_iterations: int = 0
    run_single: float = 0.0


def _require_converged(result: FisherResult, lams, max_inner: int) -> FisherResult:
    if not result.converged:
        shown = ", ".join(f"{lam:.6g}" for lam in np.atleast_1d(lams))
        raise FisherScoringError(
            f"Fisher scoring did not converge within {max_inner} iterations at lambda [{shown}] "
            f"(score norm {result.score_norm:.3e})"
        )
    return result


def _inner_fit(design: AdditiveDesign, family: Family, y, lams, solver, tol_inner, max_inner, alpha0):
    """Coefficients at fixed ``λ``: a direct solve for the identity link, Fisher scoring otherwise."""
    if family.name is FamilyName.GAUSSIAN_IDENTITY:
        pen = design.with_lambdas(lams).block_penalty()
        alpha, its = penalized_solve(design, pen, y, 1.0, solver, x0=alpha0)
        eta = design.phi(alpha, solver.threads)
        return alpha, eta, 0, its
    result = fisher_scoring_fit(
        design, family, y, lams, solver=solver, tol_inner=tol_inner, max_inner=max_inner, alpha0=alpha0
    )
    _require_converged(result, lams, max_inner)
    return result.alpha, result.eta, result.iterations, result.cg_iterations


def additive_outer_fit(
    design: AdditiveDesign,
    family: Union[str, FamilyName, Family],
    y: np.ndarray,
    lam0: Union[float, Sequence[float]] = 1.0,
    trace: Optional[TraceEstimatorConfig] = None,
    solver: Optional[SolverConfig] = None,
    tol_lambda: float = 1e-4,
    max_outer: int = 100,
    tol_inner: float = 1e-6,
    max_inner: int = 50,
    absolute: bool = False,
    traces: Optional[Sequence] = None,
) -> AdditiveFitState:
    """Fixed-point estimation of one ``λ_(j)`` per additive term.

    Each outer step fits the coefficients at the current ``λ``-vector, then
    sets ``λ_(j) = σ²_ε / σ²_(j)``; converged when every ``λ_(j)`` passes the
    relative test. Term ``j`` draws its probes with seed ``seed + j``.
    """
    family = get_family(family)
    solver = solver or SolverConfig()
    y = np.asarray(y, dtype=float)
    if y.shape != (design.n,):
        raise DimensionError(f"response has length {y.size}, expected {design.n}")
    family.validate(y)
    lams = _broadcast_lams(lam0, len(design.terms))
    if traces is None:
        config = trace or TraceEstimatorConfig()
        traces = [as_trace_estimator(config, term.design.K, solver, offset=j) for j, term in enumerate(design.terms)]

    alpha = None
    state = AdditiveFitState(
        alpha=np.zeros(design.K),
        lams=lams,
        sigma2_eps=float("nan"),
        sigma2_terms=np.full(len(lams), np.nan),
        edf=np.full(len(lams), np.nan),
    )

    for t in range(1, max_outer + 1):
        current = design.with_lambdas(lams)
        alpha, eta, fisher_its, cg_its = _inner_fit(current, family, y, lams, solver, tol_inner, max_inner, alpha)
        resid = family.mean(eta) - y
        sigma2_eps = float(np.dot(resid, resid)) / design.n
        weights = None if family.name is FamilyName.GAUSSIAN_IDENTITY else family.w2(eta)
        updates = additive_variance_update(alpha, current, traces, weights)

        state.iteration = t
        state.alpha, state.eta = alpha, eta
        state.fisher_iterations += fisher_its
        state.cg_iterations += cg_its + sum(u.cg_iterations for u in updates)
        state.sigma2_eps = sigma2_eps
        state.sigma2_terms = np.array([u.sigma2_alpha for u in updates])
        state.edf = np.array([u.edf for u in updates])

        degenerate = [j for j, u in enumerate(updates) if u.degenerate]
        if degenerate:
            raise DegenerateFitError(
                f"prior variance estimate vanished for term(s) {degenerate} at iteration {t}; "
                "those smooths lie in their penalty null space",
                state=state,
                terms=degenerate,
            )

        lams_next = sigma2_eps / state.sigma2_terms
        state.history.append(
            AdditiveIterationRecord(
                lams.tolist(), sigma2_eps, state.sigma2_terms.tolist(), state.edf.tolist(),
                fisher_its, cg_its + sum(u.cg_iterations for u in updates),
            )
        )
        logger.info("outer iteration %d: lambda %s -> %s", t, lams.tolist(), lams_next.tolist())
        settled = all(lambda_settled(a, b, tol_lambda, absolute) for a, b in zip(lams, lams_next))
        lams = lams_next
        if settled:
            state.converged = True
            break
    else:
        logger.warning("smoothing parameters did not settle within %d outer iterations", max_outer)

    started = time.perf_counter()
    state.alpha, state.eta, fisher_its, cg_its = _inner_fit(
        design.with_lambdas(lams), family, y, lams, solver, tol_inner, max_inner, alpha
    )
    state.run_single = time.perf_counter() - started
    state.fisher_iterations += fisher_its
    state.cg_iterations += cg_its
    state.lams = lams
    return state


def glm_outer_fit(
    design: TensorDesign,
    penalty: PenaltyOperator,
    family: Union[str, FamilyName, Family],
    y: np.ndarray,
    lam0: float = 1.0,
    trace: Optional[TraceEstimatorConfig] = None,
    solver: Optional[SolverConfig] = None,
    tol_lambda: float = 1e-4,
    max_outer: int = 100,
    tol_inner: float = 1e-6,
    max_inner: int = 50,
    absolute: bool = False,
) -> AdditiveFitState:
    """Single-term generalized fit with ``λ`` estimation."""
    family = get_family(family)
    solver = solver or SolverConfig()
    y = np.asarray(y, dtype=float)
    trace_fn = as_trace_estimator(trace, design.K, solver)
    lam = float(lam0)
    alpha = None
    state = AdditiveFitState(
        alpha=np.zeros(design.K), lams=np.array([lam]), sigma2_eps=float("nan"),
        sigma2_terms=np.array([np.nan]), edf=np.array([np.nan]),
    )

    for t in range(1, max_outer + 1):
        result = fisher_scoring_fit(
            design, family, y, lam, penalty, solver, tol_inner=tol_inner, max_inner=max_inner, alpha0=alpha
        )
        _require_converged(result, lam, max_inner)
        alpha = result.alpha
        update = glm_variance_update(alpha, design, family, penalty, y, lam, trace_fn, solver)

        state.iteration = t
        state.alpha, state.eta = alpha, result.eta
        state.fisher_iterations += result.iterations
        state.cg_iterations += result.cg_iterations + update.cg_iterations
        state.sigma2_eps = update.sigma2_eps
        state.sigma2_terms = np.array([update.sigma2_alpha])
        state.edf = np.array([update.edf])
        if update.degenerate:
            raise DegenerateFitError(
                f"prior variance estimate vanished at iteration {t}; the fit lies in the penalty null space",
                state=state,
                terms=[0],
            )

        lam_next = update.sigma2_eps / update.sigma2_alpha
        state.history.append(
            AdditiveIterationRecord(
                [lam], update.sigma2_eps, [update.sigma2_alpha], [update.edf],
                result.iterations, result.cg_iterations + update.cg_iterations,
            )
        )
        logger.info("outer iteration %d: lambda %.6g -> %.6g", t, lam, lam_next)
        settled = lambda_settled(lam, lam_next, tol_lambda, absolute)
        lam = lam_next
        if settled:
            state.converged = True
            break
    else:
        logger.warning("lambda did not settle within %d outer iterations", max_outer)

    started = time.perf_counter()
    result = fisher_scoring_fit(
        design, family, y, lam, penalty, solver, tol_inner=tol_inner, max_inner=max_inner, alpha0=alpha
    )
    _require_converged(result, lam, max_inner)
    state.run_single = time.perf_counter() - started
    state.alpha, state.eta = result.alpha, result.eta
    state.fisher_iterations += result.iterations
    state.cg_iterations += result.cg_iterations
    state.lams = np.array([lam])
    return state
