"""Univariate B-spline bases on clamped knot vectors."""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from tensorsmooth.core.errors import (
    ConfigError,
    DomainError,
    DuplicateKnotError,
    OrderTooHighError,
)
from tensorsmooth.models.spec import Placement

logger = logging.getLogger(__name__)

# relative step used to separate tied quantile knots
KNOT_NUDGE = 1e-9


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """``num / den`` with 0 wherever the knot difference vanishes."""
    num, den = np.broadcast_arrays(num, den)
    return np.divide(num, den, out=np.zeros(num.shape), where=den > 0)


@dataclass(frozen=True)
class UnivariateBasis:
    degree: int
    knots: np.ndarray

    def __post_init__(self):
        knots = np.array(self.knots, dtype=float)
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)

    @property
    def domain(self) -> Tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    @property
    def n_interior_knots(self) -> int:
        return len(self.knots) - 2

    @property
    def dimension(self) -> int:
        return self.n_interior_knots + self.degree + 1

    @cached_property
    def extended_knots(self) -> np.ndarray:
        a, b = self.domain
        q = self.degree
        ext = np.concatenate([np.full(q, a), self.knots, np.full(q, b)])
        ext.setflags(write=False)
        return ext

    def check_domain(self, x: np.ndarray) -> None:
        a, b = self.domain
        bad = np.flatnonzero(~((x >= a) & (x <= b)))
        if bad.size:
            shown = ", ".join(str(i) for i in bad[:10])
            more = "" if bad.size <= 10 else f" (+{bad.size - 10} more)"
            raise DomainError(
                f"{bad.size} value(s) outside the basis domain [{a!r}, {b!r}] at rows {shown}{more}",
                rows=bad.tolist(),
            )

    def intervals(self, x: np.ndarray) -> np.ndarray:
        """Knot interval index of each ``x``; the right boundary belongs to the last interval."""
        idx = np.searchsorted(self.knots, x, side="right") - 1
        return np.clip(idx, 0, self.n_interior_knots)

    def local(self, x, deriv: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        """Nonzero window of the basis at each point.

        Returns ``(starts, values)`` where ``values[i, s]`` is the ``deriv``-th
        derivative of basis function ``starts[i] + s`` at ``x[i]``; the window
        width is ``degree + 1``.
        """
        q = self.degree
        if deriv < 0:
            raise ConfigError(f"derivative order must be >= 0, got {deriv}")
        if deriv > q:
            raise OrderTooHighError(f"derivative order {deriv} exceeds the degree {q}")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self.check_domain(x)

        t = self.extended_knots
        starts = self.intervals(x)
        span = starts + q

        # Cox-de Boor triangle up to degree q - deriv
        values = np.ones((x.size, 1))
        for k in range(1, q - deriv + 1):
            values = self._raise_degree(values, x, span, k)

        # each derivative raises the degree by one
        for k in range(q - deriv + 1, q + 1):
            new = np.zeros((x.size, k + 1))
            for i in range(k + 1):
                j = span - k + i
                if i >= 1:
                    new[:, i] += k * _ratio(values[:, i - 1], t[j + k] - t[j])
                if i <= k - 1:
                    new[:, i] -= k * _ratio(values[:, i], t[j + k + 1] - t[j + 1])
            values = new
        return starts, values

    def _raise_degree(self, values: np.ndarray, x: np.ndarray, span: np.ndarray, k: int) -> np.ndarray:
        t = self.extended_knots
        new = np.zeros((x.size, k + 1))
        for i in range(k + 1):
            j = span - k + i
            if i >= 1:
                new[:, i] += _ratio(x - t[j], t[j + k] - t[j]) * values[:, i - 1]
            if i <= k - 1:
                new[:, i] += _ratio(t[j + k + 1] - x, t[j + k + 1] - t[j + 1]) * values[:, i]
        return new


@dataclass(frozen=True)
class DifferenceMatrix:
    order: int
    matrix: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape


@dataclass(frozen=True)
class DerivativeGram:
    order: int
    matrix: np.ndarray


def build_basis(
    domain: Sequence[float],
    n_interior_knots: int,
    degree: int,
    placement: Placement = Placement.EQUIDISTANT,
    data: Optional[np.ndarray] = None,
) -> UnivariateBasis:
    """Build a clamped B-spline basis with ``n_interior_knots + degree + 1`` functions."""
    a, b = float(domain[0]), float(domain[1])
    if not a < b:
        raise ConfigError(f"basis domain must satisfy a < b, got [{a!r}, {b!r}]")
    if n_interior_knots < 0:
        raise ConfigError(f"number of interior knots must be >= 0, got {n_interior_knots}")
    if degree < 0:
        raise ConfigError(f"spline degree must be >= 0, got {degree}")

    placement = Placement(placement)
    if placement is Placement.EQUIDISTANT:
        knots = np.linspace(a, b, n_interior_knots + 2)
    else:
        if data is None or np.size(data) == 0:
            raise ConfigError("quantile knot placement needs data")
        data = np.asarray(data, dtype=float).ravel()
        bad = np.flatnonzero((data < a) | (data > b))
        if bad.size:
            raise DomainError(f"{bad.size} data value(s) outside [{a!r}, {b!r}]", rows=bad.tolist())
        probs = np.arange(1, n_interior_knots + 1) / (n_interior_knots + 1)
        interior = np.quantile(data, probs)
        knots = _nudge_ties(np.concatenate([[a], interior, [b]]), a, b)

    return UnivariateBasis(degree=degree, knots=knots)


def _nudge_ties(knots: np.ndarray, a: float, b: float) -> np.ndarray:
    step = KNOT_NUDGE * (b - a)
    knots = knots.copy()
    nudged = 0
    for i in range(1, len(knots) - 1):
        if knots[i] <= knots[i - 1]:
            knots[i] = knots[i - 1] + step
            nudged += 1
    if nudged:
        logger.info("nudged %d tied quantile knot(s)", nudged)
    if np.any(np.diff(knots) <= 0):
        raise DuplicateKnotError(
            "quantile knots are not strictly increasing after nudging ties; "
            "reduce the number of knots or use equidistant placement"
        )
    return knots


def eval_row(basis: UnivariateBasis, x: float, deriv: int = 0) -> np.ndarray:
    """All ``J`` basis derivatives of order ``deriv`` at one point."""
    return eval_matrix(basis, np.array([x], dtype=float), deriv)[0]


def eval_matrix(basis: UnivariateBasis, x: np.ndarray, deriv: int = 0) -> np.ndarray:
    """Dense ``len(x) x J`` evaluation matrix (one ``eval_row`` per point)."""
    starts, values = basis.local(x, deriv)
    out = np.zeros((starts.size, basis.dimension))
    cols = starts[:, None] + np.arange(values.shape[1])
    np.put_along_axis(out, cols, values, axis=1)
    return out


def difference_matrix(J: int, r: int) -> DifferenceMatrix:
    if r < 1:
        raise ConfigError(f"difference order must be >= 1, got {r}")
    if r >= J:
        raise OrderTooHighError(f"difference order {r} must be smaller than the basis dimension {J}")
    return DifferenceMatrix(order=r, matrix=np.diff(np.eye(J), n=r, axis=0))


def derivative_gram(basis: UnivariateBasis, order: int) -> DerivativeGram:
    """Gram matrix of the ``order``-th derivatives in L2 of the basis domain.

    Integrates interval by interval with ``degree + 1`` Gauss-Legendre nodes,
    which is exact for the piecewise polynomial integrand.
    """
    q = basis.degree
    if order > q:
        raise OrderTooHighError(f"derivative order {order} exceeds the degree {q}")

    nodes, weights = leggauss(q + 1)
    left, right = basis.knots[:-1], basis.knots[1:]
    half = 0.5 * (right - left)
    x = ((left + right)[:, None] * 0.5 + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()

    starts, values = basis.local(x, order)
    J = basis.dimension
    gram = np.zeros((J, J))
    window = np.arange(q + 1)
    for start in np.unique(starts):
        rows = starts == start
        block = values[rows]
        idx = start + window
        gram[np.ix_(idx, idx)] += block.T @ (w[rows, None] * block)

    gram = 0.5 * (gram + gram.T)
    return DerivativeGram(order=order, matrix=gram)
