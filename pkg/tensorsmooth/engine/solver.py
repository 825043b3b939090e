"""Matrix-free preconditioned conjugate gradients.

Operators are ``scipy.sparse.linalg.LinearOperator`` instances that may also
expose ``diagonal()``; the Jacobi preconditioner uses that implicit diagonal.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator

from tensorsmooth.core.accounting import record
from tensorsmooth.core.errors import ConfigError, DataError, DimensionError, PreconditionerError
from tensorsmooth.models.spec import Preconditioner, SolverConfig

logger = logging.getLogger(__name__)


class MatrixFreeOperator(LinearOperator):
    """Symmetric operator given by its product (and optionally its diagonal)."""

    def __init__(
        self,
        dimension: int,
        matvec: Callable[[np.ndarray], np.ndarray],
        diagonal: Optional[Callable[[], np.ndarray]] = None,
    ):
        super().__init__(dtype=np.dtype(float), shape=(dimension, dimension))
        self._apply = matvec
        self._diagonal = diagonal

    def _matvec(self, x):
        return self._apply(np.ravel(x))

    def _rmatvec(self, x):
        return self._apply(np.ravel(x))

    def diagonal(self) -> np.ndarray:
        if self._diagonal is None:
            raise PreconditionerError("operator has no diagonal; use preconditioner 'none'")
        return self._diagonal()


@dataclass
class CgReport:
    iterations: int = 0
    final_residual_norm: float = 0.0
    converged: bool = False
    residual_history: List[float] = field(default_factory=list)


def cg_solve(
    op: LinearOperator,
    b: np.ndarray,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    precond: Preconditioner = Preconditioner.JACOBI,
    *,
    rtol: float = 1e-8,
    x0: Optional[np.ndarray] = None,
    callback: Optional[Callable[[np.ndarray], None]] = None,
) -> Tuple[np.ndarray, CgReport]:
    """Solve ``op x = b`` for symmetric positive definite ``op``.

    With ``tol`` the loop runs while ``||r||^2 > tol``; otherwise it stops once
    ``||r|| <= rtol * ||b||``. Reaching ``max_iter`` (default ``min(10 K, 50000)``)
    returns an unconverged report. ``callback`` receives the iterate after
    every update.
    """
    K = op.shape[0]
    b = np.asarray(b, dtype=float)
    if b.shape != (K,):
        raise DimensionError(f"right-hand side has length {b.size}, expected {K}")
    if tol is not None and tol <= 0:
        raise ConfigError(f"tolerance must be > 0, got {tol}")
    if max_iter is None:
        max_iter = min(10 * K, 50_000)

    inv_diag = None
    if Preconditioner(precond) is Preconditioner.JACOBI:
        diag = np.asarray(op.diagonal(), dtype=float)
        if np.any(~(diag > 0)):
            raise PreconditionerError("Jacobi preconditioner needs a strictly positive diagonal")
        inv_diag = 1.0 / diag

    if tol is not None:
        threshold = tol
    else:
        threshold = (rtol * np.linalg.norm(b)) ** 2

    # workspace: x, r, z, p, v
    if x0 is None:
        x = np.zeros(K)
        r = b.copy()
    else:
        x = np.array(x0, dtype=float)
        r = b - op.matvec(x)
    record("cg workspace", (5, K))

    res2 = float(np.dot(r, r))
    report = CgReport(residual_history=[np.sqrt(res2)])
    z = r * inv_diag if inv_diag is not None else r
    p = z.copy()
    rz = float(np.dot(r, z))

    while res2 > threshold and report.iterations < max_iter:
        v = op.matvec(p)
        pv = float(np.dot(p, v))
        if not pv > 0:
            logger.warning("cg breakdown after %d iterations: p'Ap = %g", report.iterations, pv)
            break
        step = rz / pv
        x += step * p
        r -= step * v
        report.iterations += 1
        res2 = float(np.dot(r, r))
        report.residual_history.append(np.sqrt(res2))
        if callback is not None:
            callback(x)
        if res2 <= threshold:
            break
        z = r * inv_diag if inv_diag is not None else r
        rz_next = float(np.dot(r, z))
        p *= rz_next / rz
        p += z
        rz = rz_next

    report.final_residual_norm = float(np.sqrt(res2))
    report.converged = res2 <= threshold
    if report.converged:
        logger.debug("cg converged in %d iterations, residual %.3e", report.iterations, report.final_residual_norm)
    else:
        logger.warning(
            "cg stopped after %d iterations with residual %.3e", report.iterations, report.final_residual_norm
        )
    return x, report


def solve(
    op: LinearOperator, b: np.ndarray, config: Optional[SolverConfig] = None, x0: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, CgReport]:
    """``cg_solve`` driven by a :class:`SolverConfig`."""
    config = config or SolverConfig()
    return cg_solve(
        op,
        b,
        tol=config.tol,
        max_iter=config.max_iterations(op.shape[0]),
        precond=config.preconditioner,
        rtol=config.rtol,
        x0=x0,
    )


def make_fit_operator(design, penalty, lam: float, weights: Optional[np.ndarray] = None, threads: Optional[int] = None):
    """``ΦᵀW₂Φ + λΛ`` as a matrix-free operator.

    ``design`` is a :class:`~tensorsmooth.engine.tensor_ops.TensorDesign` or an
    additive design; ``penalty`` anything with ``apply``/``diagonal``/``dimension``.
    """
    if lam < 0:
        raise ConfigError(f"regularization parameter must be >= 0, got {lam}")
    if penalty.dimension != design.K:
        raise DimensionError(f"penalty dimension {penalty.dimension} does not match design dimension {design.K}")
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (design.n,):
            raise DimensionError(f"weight vector has length {weights.size}, expected {design.n}")
        if np.any(~(weights > 0)):
            raise DataError("Fisher weights must be strictly positive")

    def matvec(alpha: np.ndarray) -> np.ndarray:
        fitted = design.phi(alpha, threads)
        if weights is not None:
            fitted *= weights
        out = design.phi_t(fitted, threads)
        if lam:
            out += lam * penalty.apply(alpha)
        return out

    def diagonal() -> np.ndarray:
        diag = design.gram_diagonal(weights, threads)
        if lam:
            diag += lam * penalty.diagonal()
        return diag

    return MatrixFreeOperator(design.K, matvec, diagonal)
