"""Synthetic data with closed-form truths.

=================  =========================================================
scenario           truth (covariates uniform on [0, 1])
=================  =========================================================
smooth_2d          s = sin(2π x1) cos(2π x2)
smooth_3d          s = sin(2π x1) cos(2π x2) + 2 (x3 - 0.5)^2
additive_2plus2    s = sin(2π x1) cos(2π x2) + exp(-8 ((x3 - .5)^2 + (x4 - .5)^2))
loglink_2d         E(Y|x) = exp(0.5 sin(2π x1) cos(2π x2) + 0.5 x2)
loglink_2plus2     E(Y|x) = exp(0.4 sin(2π x1) cos(2π x2) + 0.6 exp(-8 ((x3 - .5)^2 + (x4 - .5)^2)))
=================  =========================================================

The ``truth`` column holds the mean; ``y`` adds Gaussian noise with standard
deviation ``noise_sd``.
"""

from enum import Enum
from typing import Callable, Tuple

import numpy as np
import pandas as pd

from tensorsmooth.core.errors import ConfigError

TWO_PI = 2.0 * np.pi


class Scenario(str, Enum):
    SMOOTH_2D = "smooth_2d"
    SMOOTH_3D = "smooth_3d"
    ADDITIVE_2PLUS2 = "additive_2plus2"
    LOGLINK_2D = "loglink_2d"
    LOGLINK_2PLUS2 = "loglink_2plus2"


def _wave(x: np.ndarray) -> np.ndarray:
    return np.sin(TWO_PI * x[:, 0]) * np.cos(TWO_PI * x[:, 1])


def _bump(x: np.ndarray) -> np.ndarray:
    return np.exp(-8.0 * ((x[:, 2] - 0.5) ** 2 + (x[:, 3] - 0.5) ** 2))


_TRUTHS = {
    Scenario.SMOOTH_2D: (2, _wave),
    Scenario.SMOOTH_3D: (3, lambda x: _wave(x) + 2.0 * (x[:, 2] - 0.5) ** 2),
    Scenario.ADDITIVE_2PLUS2: (4, lambda x: _wave(x) + _bump(x)),
    Scenario.LOGLINK_2D: (2, lambda x: np.exp(0.5 * _wave(x) + 0.5 * x[:, 1])),
    Scenario.LOGLINK_2PLUS2: (4, lambda x: np.exp(0.4 * _wave(x) + 0.6 * _bump(x))),
}


def truth_function(scenario) -> Tuple[int, Callable[[np.ndarray], np.ndarray]]:
    """``(number of covariates, truth)``; ``truth`` maps an ``n x d`` array to means."""
    try:
        return _TRUTHS[Scenario(scenario)]
    except ValueError:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {[s.value for s in Scenario]}") from None


def simulate(scenario, n: int, noise_sd: float = 0.1, seed: int = 0) -> Tuple[pd.DataFrame, Callable]:
    """Draw ``n`` rows of ``scenario`` deterministically from ``seed``."""
    if n < 0:
        raise ConfigError(f"number of rows must be >= 0, got {n}")
    if noise_sd < 0:
        raise ConfigError(f"noise standard deviation must be >= 0, got {noise_sd}")
    dim, truth = truth_function(scenario)
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.uniform(0.0, 1.0, size=(n, dim))
    mean = truth(x)
    y = mean + noise_sd * rng.standard_normal(n) if noise_sd > 0 else mean.copy()

    table = pd.DataFrame({f"x{p + 1}": x[:, p] for p in range(dim)})
    table["truth"] = mean
    table["y"] = y
    return table, truth
