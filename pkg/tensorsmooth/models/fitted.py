from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, PrivateAttr

from tensorsmooth.engine.basis import UnivariateBasis
from tensorsmooth.models.spec import ModelSpec, PenaltySpec

# bump on any incompatible schema change
FORMAT_VERSION = 1


class BasisRecord(BaseModel):
    degree: int = Field(..., ge=0)
    knots: List[float] = Field(..., min_length=2)

    @classmethod
    def from_basis(cls, basis: UnivariateBasis) -> "BasisRecord":
        return cls(degree=basis.degree, knots=basis.knots.tolist())

    def to_basis(self) -> UnivariateBasis:
        return UnivariateBasis(degree=self.degree, knots=np.array(self.knots, dtype=float))


class FittedTerm(BaseModel):
    covariates: List[str]
    bases: List[BasisRecord]
    penalty: PenaltySpec
    alpha: List[float]
    lam: float = Field(..., gt=0)
    lambda_fixed: bool = False
    sigma2_alpha: Optional[float] = None
    edf: Optional[float] = None


class IterationSummary(BaseModel):
    lams: List[float]
    sigma2_eps: float
    sigma2_terms: List[float]
    edf: List[float]
    cg_iterations: int


class FitDiagnostics(BaseModel):
    outer_iterations: int = 0
    fisher_iterations: int = 0
    cg_iterations: int = 0
    converged: bool = True
    trace_seed: Optional[int] = None
    n_probes: Optional[int] = None
    n_observations: int = 0
    history: List[IterationSummary] = Field(default_factory=list)


class FittedModel(BaseModel):
    format_version: int = FORMAT_VERSION
    spec: ModelSpec
    terms: List[FittedTerm]
    sigma2_eps: float
    diagnostics: FitDiagnostics

    # training-run artefacts, not persisted
    _fitted_values: Optional[np.ndarray] = PrivateAttr(default=None)
    _run_single: float = PrivateAttr(default=0.0)

    @property
    def fitted_values(self) -> Optional[np.ndarray]:
        """Fitted means on the training data."""
        return self._fitted_values

    @property
    def run_single(self) -> float:
        """Seconds spent on the final coefficient fit at the accepted smoothing parameters."""
        return self._run_single

    @property
    def lambdas(self) -> List[float]:
        return [term.lam for term in self.terms]


class FitReport(BaseModel):
    lambdas: List[float]
    lambda_mode: str
    sigma2_eps: float
    sigma2_alpha: List[Optional[float]]
    edf: List[Optional[float]]
    outer_iterations: int
    fisher_iterations: int
    cg_iterations: int
    converged: bool
    rss: float
    aic: Optional[float]
    negative_predictions: int
    run_single: float
    run_total: float
    peak_memory_bytes: int
    largest_allocation_elements: int
    config: ModelSpec
