"""Dense reference assembly for small problems.

Everything here materializes ``Φ`` or ``Λ`` and is meant for verification
(tests and the ``trace-check`` command) at small ``K`` only.
"""

from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from tensorsmooth.engine.penalty import PenaltyOperator
from tensorsmooth.engine.solver import MatrixFreeOperator
from tensorsmooth.engine.tensor_ops import NormalFactor, TensorDesign


def khatri_rao_rows(factors) -> np.ndarray:
    """Row-wise Kronecker product: row ``i`` is ``F_1[i] ⊗ ... ⊗ F_P[i]``."""
    rows = np.asarray(factors[0], dtype=float)
    for factor in factors[1:]:
        factor = np.asarray(factor, dtype=float)
        rows = (rows[:, :, None] * factor[:, None, :]).reshape(rows.shape[0], -1)
    return rows


def design_matrix(design) -> np.ndarray:
    if isinstance(design, TensorDesign):
        return khatri_rao_rows(design.factors)
    return np.hstack([design_matrix(term.design) for term in design.terms])


def normal_factor_matrix(factor: NormalFactor) -> np.ndarray:
    return np.kron(np.eye(factor.L), np.kron(factor.A, np.eye(factor.R)))


def penalty_matrix(penalty: PenaltyOperator) -> np.ndarray:
    out = np.zeros((penalty.dimension, penalty.dimension))
    for term in penalty.terms:
        block = np.eye(penalty.dimension)
        for factor in term.factors:
            block = block @ normal_factor_matrix(factor)
        out += term.weight * block
    return out


def dense_operator(matrix: np.ndarray) -> MatrixFreeOperator:
    matrix = np.asarray(matrix, dtype=float)
    return MatrixFreeOperator(matrix.shape[0], lambda x: matrix @ x, lambda: np.diag(matrix).copy())


def fit_matrices(
    design, penalty: PenaltyOperator, lam: float, weights: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(Φ, ΦᵀWΦ, ΦᵀWΦ + λΛ)``."""
    phi = design_matrix(design)
    w = np.ones(phi.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    gram = phi.T @ (w[:, None] * phi)
    return phi, gram, gram + lam * penalty_matrix(penalty)


def exact_trace_correction(design, penalty: PenaltyOperator, lam: float, weights: Optional[np.ndarray] = None) -> float:
    """``trace((ΦᵀWΦ + λΛ)⁻¹ ΦᵀWΦ)`` by a dense symmetric solve."""
    _, gram, system = fit_matrices(design, penalty, lam, weights)
    return float(np.trace(scipy.linalg.solve(system, gram, assume_a="sym")))


class ExactTrace:
    """Dense drop-in for :class:`~tensorsmooth.engine.reml.HutchinsonTrace`."""

    def __call__(self, design, penalty, lam: float, weights: Optional[np.ndarray] = None) -> Tuple[float, int]:
        return exact_trace_correction(design, penalty, lam, weights), 0


def penalized_solution(design, penalty: PenaltyOperator, y: np.ndarray, lam: float) -> np.ndarray:
    phi, _, system = fit_matrices(design, penalty, lam)
    return scipy.linalg.solve(system, phi.T @ y, assume_a="sym")


def _dense_edf(system: np.ndarray, gram: np.ndarray, lam_matrix: np.ndarray, lam: float, probes) -> float:
    if probes is None:
        return float(np.trace(scipy.linalg.solve(system, gram, assume_a="sym")))
    probes = np.atleast_2d(probes)
    solved = scipy.linalg.solve(system, lam * lam_matrix @ probes.T, assume_a="sym")
    return system.shape[0] - float(np.einsum("mk,km->", probes, solved)) / probes.shape[0]


def reference_fixed_point(
    design,
    penalty: PenaltyOperator,
    y: np.ndarray,
    lam0: float = 1.0,
    tol: float = 1e-4,
    max_outer: int = 100,
    probes: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray, List[float]]:
    """Fixed-point λ iteration with direct solves.

    Traces are exact unless ``probes`` is given, in which case the Hutchinson
    estimate over those probes is formed densely. Returns the accepted λ, the
    coefficients at it and the λ path (one entry per iteration, then the
    accepted value).
    """
    phi, gram, _ = fit_matrices(design, penalty, 0.0)
    lam_matrix = penalty_matrix(penalty)
    rhs = phi.T @ y
    lam = lam0
    path = [lam]
    for _ in range(max_outer):
        system = gram + lam * lam_matrix
        alpha = scipy.linalg.solve(system, rhs, assume_a="sym")
        resid = phi @ alpha - y
        sigma2_eps = resid @ resid / len(y)
        edf = _dense_edf(system, gram, lam_matrix, lam, probes)
        sigma2_alpha = alpha @ lam_matrix @ alpha / edf
        lam_next = sigma2_eps / sigma2_alpha
        settled = abs(lam_next - lam) <= tol * max(1.0, lam)
        lam = lam_next
        path.append(lam)
        if settled:
            break
    alpha = scipy.linalg.solve(gram + lam * lam_matrix, rhs, assume_a="sym")
    return lam, alpha, path


def reference_additive_fixed_point(
    designs, penalties, y: np.ndarray, lam0: float = 1.0, tol: float = 1e-4, max_outer: int = 100
) -> Tuple[np.ndarray, np.ndarray]:
    """Additive counterpart: one λ per term, per-term exact traces.

    Terms that each carry a constant make the joint system singular; the
    coefficients are then the minimum-norm least-squares solution, which leaves
    the fitted values and every penalty quadratic form unchanged.
    """
    phis = [design_matrix(design) for design in designs]
    lam_matrices = [penalty_matrix(penalty) for penalty in penalties]
    phi = np.hstack(phis)
    gram = phi.T @ phi
    rhs = phi.T @ y
    sizes = [m.shape[0] for m in lam_matrices]
    lams = np.full(len(designs), float(lam0))
    for _ in range(max_outer):
        system = gram + scipy.linalg.block_diag(*[lam * m for lam, m in zip(lams, lam_matrices)])
        alpha = scipy.linalg.lstsq(system, rhs, cond=1e-10)[0]
        resid = phi @ alpha - y
        sigma2_eps = resid @ resid / len(y)
        blocks = np.split(alpha, np.cumsum(sizes)[:-1])
        sigma2 = []
        for part, block, lam_matrix, lam in zip(phis, blocks, lam_matrices, lams):
            term_gram = part.T @ part
            edf = np.trace(scipy.linalg.solve(term_gram + lam * lam_matrix, term_gram, assume_a="sym"))
            sigma2.append(block @ lam_matrix @ block / edf)
        lams_next = sigma2_eps / np.array(sigma2)
        settled = np.all(np.abs(lams_next - lams) <= tol * np.maximum(1.0, lams))
        lams = lams_next
        if settled:
            break
    system = gram + scipy.linalg.block_diag(*[lam * m for lam, m in zip(lams, lam_matrices)])
    return lams, scipy.linalg.lstsq(system, rhs, cond=1e-10)[0]
