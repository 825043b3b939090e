from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class Placement(str, Enum):
    EQUIDISTANT = "equidistant"
    QUANTILE = "quantile"


class PenaltyKind(str, Enum):
    DIFFERENCE = "diff"
    CURVATURE = "curv"


class FamilyName(str, Enum):
    GAUSSIAN_IDENTITY = "gaussian_identity"
    GAUSSIAN_LOG = "gaussian_log"
    POISSON_LOG = "poisson_log"
    BINOMIAL_LOGIT = "binomial_logit"


class Preconditioner(str, Enum):
    NONE = "none"
    JACOBI = "jacobi"


class BasisConfig(BaseModel):
    n_interior_knots: int = Field(16, ge=0)
    degree: int = Field(3, ge=0)
    placement: Placement = Placement.EQUIDISTANT
    domain: Optional[Tuple[float, float]] = None

    @field_validator("domain")
    @classmethod
    def check_domain(cls, value):
        if value is not None and not value[0] < value[1]:
            raise ValueError("domain must satisfy a < b")
        return value


class PenaltySpec(BaseModel):
    kind: PenaltyKind = PenaltyKind.DIFFERENCE
    orders: Optional[List[int]] = None

    @field_validator("orders")
    @classmethod
    def check_orders(cls, value):
        if value is not None and any(order < 1 for order in value):
            raise ValueError("difference orders must be >= 1")
        return value


class TermSpec(BaseModel):
    covariates: List[str] = Field(..., min_length=1)
    basis: BasisConfig = Field(default_factory=BasisConfig)
    bases: Optional[List[BasisConfig]] = None
    penalty: PenaltySpec = Field(default_factory=PenaltySpec)

    @model_validator(mode="after")
    def check_term(self):
        if len(set(self.covariates)) != len(self.covariates):
            raise ValueError(f"covariates must be distinct within a term: {self.covariates}")
        if self.bases is not None and len(self.bases) != len(self.covariates):
            raise ValueError("bases must list one config per covariate")
        if self.penalty.orders is not None and len(self.penalty.orders) != len(self.covariates):
            raise ValueError("penalty orders must list one order per covariate")
        return self

    def basis_configs(self) -> List[BasisConfig]:
        """Per-dimension basis configs; ``basis`` fills in when ``bases`` is absent."""
        if self.bases is not None:
            return list(self.bases)
        return [self.basis] * len(self.covariates)

    def difference_orders(self) -> List[int]:
        return list(self.penalty.orders) if self.penalty.orders else [2] * len(self.covariates)


class SolverConfig(BaseModel):
    # relative guard ||r|| <= rtol * ||b||; ``tol`` switches to ||r||^2 <= tol
    rtol: float = Field(1e-8, gt=0)
    tol: Optional[float] = Field(None, gt=0)
    max_iter: Optional[int] = Field(None, ge=1)
    preconditioner: Preconditioner = Preconditioner.JACOBI
    threads: Optional[int] = Field(None, ge=1)

    def max_iterations(self, dimension: int) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return min(10 * dimension, 50_000)


class TraceEstimatorConfig(BaseModel):
    n_probes: int = Field(5, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)

    def probes(self, dimension: int, offset: int = 0) -> np.ndarray:
        """Rademacher probe vectors, one per row, from PCG64 seeded with ``seed + offset``."""
        rng = np.random.Generator(np.random.PCG64(self.seed + offset))
        bits = rng.integers(0, 2, size=(self.n_probes, dimension), dtype=np.int8)
        return 2.0 * bits - 1.0


class ModelSpec(BaseModel):
    response: str = "y"
    terms: List[TermSpec] = Field(..., min_length=1)
    family: FamilyName = FamilyName.GAUSSIAN_IDENTITY
    trace: TraceEstimatorConfig = Field(default_factory=TraceEstimatorConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    fixed_lambda: Optional[List[float]] = None
    lambda0: float = Field(1.0, gt=0)
    tol_lambda: float = Field(1e-4, gt=0)
    absolute_lambda_test: bool = False
    max_outer: int = Field(100, ge=1)
    tol_inner: float = Field(1e-6, gt=0)
    max_inner: int = Field(50, ge=1)

    @model_validator(mode="after")
    def check_spec(self):
        if self.fixed_lambda is not None:
            if len(self.fixed_lambda) != len(self.terms):
                raise ValueError("fixed_lambda must list one value per term")
            if any(lam <= 0 for lam in self.fixed_lambda):
                raise ValueError("fixed_lambda values must be > 0")
        return self

    @property
    def covariates(self) -> List[str]:
        seen: List[str] = []
        for term in self.terms:
            seen.extend(name for name in term.covariates if name not in seen)
        return seen
