"""Implicit penalty operators for tensor-product splines.

Both penalties are sums of Kronecker-structured terms and are applied through
normal factors only:

* difference penalty: ``Σ_p I_{L_p} ⊗ Δ_{r_p}ᵀ Δ_{r_p} ⊗ I_{R_p}`` (one factor per
  term);
* curvature penalty: ``Σ_{|r|=2} (2 / r!) ⊗_p Ψ^p_{r_p}`` where ``Ψ^p_{r_p}`` is the
  Gram matrix of the ``r_p``-th derivatives of basis ``p`` (a chain of ``P``
  factors per term).

The cores are dense ``J_p x J_p`` matrices computed once at construction.
"""

from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import factorial, prod
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from tensorsmooth.core.errors import ConfigError, DegreeTooLowError, DimensionError
from tensorsmooth.engine.basis import UnivariateBasis, derivative_gram, difference_matrix
from tensorsmooth.engine.tensor_ops import (
    NormalFactor,
    apply_normal_factor_chain,
    kronecker_factors,
)
from tensorsmooth.models.spec import PenaltyKind


@dataclass(frozen=True)
class PenaltyTerm:
    weight: float
    factors: Tuple[NormalFactor, ...]
    # difference: per-dimension orders with only the active one nonzero;
    # curvature: derivative multiindex r
    multiindex: Tuple[int, ...]

    def apply(self, alpha: np.ndarray) -> np.ndarray:
        return self.weight * apply_normal_factor_chain(self.factors, alpha)

    def diagonal(self) -> np.ndarray:
        diag = self.weight * np.ones(self.factors[0].dimension)
        for factor in self.factors:
            diag *= factor.diagonal()
        return diag


@dataclass(frozen=True)
class PenaltyOperator:
    kind: Optional[PenaltyKind]
    terms: Tuple[PenaltyTerm, ...]
    dimension: int
    orders: Optional[Tuple[int, ...]] = None

    def apply(self, alpha: np.ndarray) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float)
        if alpha.ndim != 1 or alpha.size != self.dimension:
            raise DimensionError(f"coefficient vector has length {alpha.size}, expected {self.dimension}")
        out = np.zeros(self.dimension)
        for term in self.terms:
            out += term.apply(alpha)
        return out

    def quadratic_form(self, alpha: np.ndarray) -> float:
        return float(np.dot(alpha, self.apply(alpha)))

    def diagonal(self) -> np.ndarray:
        diag = np.zeros(self.dimension)
        for term in self.terms:
            diag += term.diagonal()
        return diag


def zero_penalty(dimension: int) -> PenaltyOperator:
    return PenaltyOperator(kind=None, terms=(), dimension=dimension)


def build_difference_penalty(
    bases: Sequence[UnivariateBasis], orders: Union[int, Sequence[int]] = 2
) -> PenaltyOperator:
    """One normal factor ``I ⊗ Δᵀ_{r_p} Δ_{r_p} ⊗ I`` per dimension.

    Intended for equidistant knots; any knot layout is accepted.
    """
    dims = [basis.dimension for basis in bases]
    if isinstance(orders, int):
        orders = [orders] * len(dims)
    orders = tuple(int(r) for r in orders)
    if len(orders) != len(dims):
        raise ConfigError(f"{len(orders)} difference orders given for {len(dims)} dimensions")

    terms = []
    for p, (J, r) in enumerate(zip(dims, orders)):
        delta = difference_matrix(J, r).matrix
        factor = NormalFactor(L=prod(dims[:p]), A=delta.T @ delta, R=prod(dims[p + 1:]))
        multiindex = tuple(r if t == p else 0 for t in range(len(dims)))
        terms.append(PenaltyTerm(weight=1.0, factors=(factor,), multiindex=multiindex))
    return PenaltyOperator(PenaltyKind.DIFFERENCE, tuple(terms), prod(dims), orders)


def build_curvature_penalty(bases: Sequence[UnivariateBasis]) -> PenaltyOperator:
    """Integrated squared second-order partial derivatives, weighted ``2 / r!``."""
    for p, basis in enumerate(bases):
        if basis.degree < 2:
            raise DegreeTooLowError(
                f"curvature penalty needs degree >= 2 in every dimension; dimension {p} has degree {basis.degree}"
            )
    P = len(bases)
    grams = [[derivative_gram(basis, order).matrix for order in range(3)] for basis in bases]

    terms = []
    for pair in combinations_with_replacement(range(P), 2):
        r = tuple(pair.count(t) for t in range(P))
        weight = 2.0 / prod(factorial(rt) for rt in r)
        factors = kronecker_factors([grams[t][r[t]] for t in range(P)])
        terms.append(PenaltyTerm(weight=weight, factors=tuple(factors), multiindex=r))
    return PenaltyOperator(PenaltyKind.CURVATURE, tuple(terms), prod(b.dimension for b in bases))


def apply_penalty(penalty: PenaltyOperator, alpha: np.ndarray) -> np.ndarray:
    return penalty.apply(alpha)


def penalty_quadratic_form(penalty: PenaltyOperator, alpha: np.ndarray) -> float:
    return penalty.quadratic_form(alpha)
