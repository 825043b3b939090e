"""Matrix-free products with tensor-product spline designs.

Coefficient indices run with the last dimension fastest.
"""

import logging
from dataclasses import dataclass
from math import prod
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from tensorsmooth.core.accounting import record
from tensorsmooth.core.config import settings
from tensorsmooth.core.errors import DimensionError
from tensorsmooth.core.parallel import ordered_map, resolve_threads
from tensorsmooth.engine.basis import UnivariateBasis

logger = logging.getLogger(__name__)


class TensorDesign:
    """Implicit tensor-product design from ``P`` banded univariate factors."""

    def __init__(self, starts: Sequence[np.ndarray], values: Sequence[np.ndarray], dims: Sequence[int]):
        if not (len(starts) == len(values) == len(dims)) or not dims:
            raise DimensionError("a tensor design needs one (starts, values, dimension) triple per factor")
        n = len(starts[0])
        for p, (s, v) in enumerate(zip(starts, values)):
            if len(s) != n or v.shape[0] != n:
                raise DimensionError(f"factor {p} has {v.shape[0]} rows, expected {n}")
            if v.shape[1] > dims[p]:
                raise DimensionError(f"factor {p} band width {v.shape[1]} exceeds its dimension {dims[p]}")
        self.starts = [np.asarray(s, dtype=np.int64) for s in starts]
        self.values = [np.asarray(v, dtype=float) for v in values]
        self.dims = tuple(int(d) for d in dims)
        self.n = n

    @classmethod
    def from_factors(cls, factors: Sequence[np.ndarray]) -> "TensorDesign":
        """Band arbitrary dense ``n x J_p`` factors."""
        starts, values, dims = [], [], []
        for factor in factors:
            factor = np.atleast_2d(np.asarray(factor, dtype=float))
            n, J = factor.shape
            nonzero = factor != 0
            has_any = nonzero.any(axis=1)
            first = np.where(has_any, nonzero.argmax(axis=1), 0)
            last = np.where(has_any, J - 1 - nonzero[:, ::-1].argmax(axis=1), 0)
            width = int(max((last - first).max(initial=0) + 1, 1))
            start = np.minimum(first, J - width)
            cols = start[:, None] + np.arange(width)
            starts.append(start)
            values.append(np.take_along_axis(factor, cols, axis=1))
            dims.append(J)
        return cls(starts, values, dims)

    @classmethod
    def from_bases(cls, bases: Sequence[UnivariateBasis], columns: Sequence[np.ndarray]) -> "TensorDesign":
        """Evaluate each basis on its covariate column."""
        if len(bases) != len(columns):
            raise DimensionError(f"{len(bases)} bases but {len(columns)} covariate columns")
        local = [basis.local(np.asarray(col, dtype=float)) for basis, col in zip(bases, columns)]
        return cls([s for s, _ in local], [v for _, v in local], [b.dimension for b in bases])

    @property
    def P(self) -> int:
        return len(self.dims)

    @property
    def K(self) -> int:
        return prod(self.dims)

    @property
    def widths(self) -> Tuple[int, ...]:
        return tuple(v.shape[1] for v in self.values)

    @property
    def factors(self) -> List[np.ndarray]:
        """Dense ``n x J_p`` univariate factors (small; for inspection and oracles)."""
        dense = []
        for s, v, J in zip(self.starts, self.values, self.dims):
            out = np.zeros((self.n, J))
            np.put_along_axis(out, s[:, None] + np.arange(v.shape[1]), v, axis=1)
            dense.append(out)
        return dense

    def chunks(self) -> List[slice]:
        rows = max(settings.CHUNK_ELEMENTS // prod(self.widths), 1)
        return [slice(lo, min(lo + rows, self.n)) for lo in range(0, self.n, rows)]

    def local_rows(self, rows: slice) -> Tuple[np.ndarray, np.ndarray]:
        """Flat column indices and values of the nonzero entries of ``Φ[rows]``."""
        idx = vals = None
        for s, v, J in zip(self.starts, self.values, self.dims):
            cols = s[rows, None] + np.arange(v.shape[1])
            if idx is None:
                idx, vals = cols, v[rows].copy()
                continue
            c = cols.shape[0]
            idx = (idx[:, :, None] * J + cols[:, None, :]).reshape(c, -1)
            vals = (vals[:, :, None] * v[rows, None, :]).reshape(c, -1)
        record("khatri-rao chunk", vals.shape)
        return idx, vals

    # convenience wrappers shared with AdditiveDesign

    def phi(self, alpha: np.ndarray, threads: Optional[int] = None) -> np.ndarray:
        return apply_phi(self, alpha, threads)

    def phi_t(self, y: np.ndarray, threads: Optional[int] = None) -> np.ndarray:
        return apply_phi_t(self, y, threads)

    def gram_diagonal(self, weights: Optional[np.ndarray] = None, threads: Optional[int] = None) -> np.ndarray:
        return phi_t_phi_diagonal(self, weights, threads)


@dataclass(frozen=True)
class NormalFactor:
    """``I_L ⊗ A ⊗ I_R``; only the core ``A`` is stored."""

    L: int
    A: np.ndarray
    R: int

    @property
    def J(self) -> int:
        return self.A.shape[0]

    @property
    def dimension(self) -> int:
        return self.L * self.J * self.R

    def diagonal(self) -> np.ndarray:
        return np.tile(np.repeat(np.diag(self.A), self.R), self.L)


def kronecker_factors(cores: Sequence[np.ndarray]) -> List[NormalFactor]:
    """Normal factors whose product is ``cores[0] ⊗ ... ⊗ cores[-1]``."""
    dims = [c.shape[0] for c in cores]
    return [
        NormalFactor(L=prod(dims[:p]), A=np.asarray(core, dtype=float), R=prod(dims[p + 1:]))
        for p, core in enumerate(cores)
    ]


def _check_length(vector: np.ndarray, expected: int, what: str) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if vector.ndim != 1 or vector.size != expected:
        raise DimensionError(f"{what} has length {vector.size}, expected {expected}")
    return vector


def _reduce_chunks(design: TensorDesign, partial: Callable[[slice], np.ndarray], threads: Optional[int]) -> np.ndarray:
    """Sum per-chunk length-K partials in chunk order (independent of thread count)."""
    threads = resolve_threads(threads)
    out = np.zeros(design.K)
    record("coefficient vector", out.shape)
    chunks = design.chunks()
    for lo in range(0, len(chunks), threads):
        for part in ordered_map(partial, chunks[lo:lo + threads], threads):
            out += part
    return out


def apply_phi_t(design: TensorDesign, y: np.ndarray, threads: Optional[int] = None) -> np.ndarray:
    """``Φᵀ y`` as the sum of ``y_i v_i`` over the Kronecker rows ``v_i``."""
    y = _check_length(y, design.n, "response vector")

    def partial(rows: slice) -> np.ndarray:
        idx, vals = design.local_rows(rows)
        vals *= y[rows, None]
        return np.bincount(idx.ravel(), weights=vals.ravel(), minlength=design.K)

    return _reduce_chunks(design, partial, threads)


def apply_phi(design: TensorDesign, alpha: np.ndarray, threads: Optional[int] = None) -> np.ndarray:
    """``Φ α``: entry ``i`` is ``v_iᵀ α``."""
    alpha = _check_length(alpha, design.K, "coefficient vector")
    out = np.empty(design.n)

    def fill(rows: slice) -> None:
        idx, vals = design.local_rows(rows)
        out[rows] = np.einsum("cw,cw->c", vals, alpha[idx])

    ordered_map(fill, design.chunks(), threads)
    return out


def phi_t_phi_diagonal(
    design: TensorDesign, weights: Optional[np.ndarray] = None, threads: Optional[int] = None
) -> np.ndarray:
    """``diag(Φᵀ W Φ)``: entry ``k`` is ``Σ_i w_i v_i[k]^2`` (``W = I`` without weights)."""
    if weights is not None:
        weights = _check_length(weights, design.n, "weight vector")

    def partial(rows: slice) -> np.ndarray:
        idx, vals = design.local_rows(rows)
        vals *= vals
        if weights is not None:
            vals *= weights[rows, None]
        return np.bincount(idx.ravel(), weights=vals.ravel(), minlength=design.K)

    return _reduce_chunks(design, partial, threads)


def apply_normal_factor(factor: NormalFactor, alpha: np.ndarray, out: Optional[np.ndarray] = None) -> np.ndarray:
    """``(I_L ⊗ A ⊗ I_R) α``.

    Viewing ``α`` as an ``L x J x R`` array, every length-``J`` stride vector
    ``α[l, :, r]`` is multiplied by ``A``. ``out`` may be a caller-provided
    buffer of the same length.
    """
    alpha = _check_length(alpha, factor.dimension, "coefficient vector")
    blocks = alpha.reshape(factor.L, factor.J, factor.R)
    if out is None:
        out = np.empty(factor.dimension)
    np.matmul(factor.A, blocks, out=out.reshape(factor.L, factor.J, factor.R))
    return out


def apply_normal_factor_chain(factors: Sequence[NormalFactor], alpha: np.ndarray) -> np.ndarray:
    """Apply ``factor_1 ... factor_P`` to ``α``, last factor first."""
    alpha = np.asarray(alpha, dtype=float)
    for p, factor in enumerate(factors):
        if factor.dimension != alpha.size:
            raise DimensionError(f"normal factor {p} has dimension {factor.dimension}, expected {alpha.size}")
    w = alpha
    for factor in reversed(factors):
        w = apply_normal_factor(factor, w)
    return w

