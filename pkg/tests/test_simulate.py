import numpy as np
import numpy.testing as npt
import pandas as pd
import pytest

from tensorsmooth.core.errors import ConfigError
from tensorsmooth.services.simulate import Scenario, simulate, truth_function


@pytest.mark.parametrize(
    "scenario, dim",
    [("smooth_2d", 2), ("smooth_3d", 3), ("additive_2plus2", 4), ("loglink_2d", 2), ("loglink_2plus2", 4)],
)
def test_columns(scenario, dim):
    table, _ = simulate(scenario, 25, seed=1)
    assert list(table.columns) == [f"x{p + 1}" for p in range(dim)] + ["truth", "y"]
    assert len(table) == 25
    covariates = table[[f"x{p + 1}" for p in range(dim)]].to_numpy()
    assert np.all((covariates >= 0.0) & (covariates < 1.0))


def test_noise_free_response_equals_truth():
    table, truth = simulate("smooth_3d", 200, noise_sd=0.0, seed=4)
    npt.assert_array_equal(table["y"], table["truth"])
    npt.assert_array_equal(truth(table[["x1", "x2", "x3"]].to_numpy()), table["truth"])


def test_same_seed_same_table():
    first, _ = simulate("additive_2plus2", 300, noise_sd=0.2, seed=17)
    second, _ = simulate("additive_2plus2", 300, noise_sd=0.2, seed=17)
    pd.testing.assert_frame_equal(first, second)
    other, _ = simulate("additive_2plus2", 300, noise_sd=0.2, seed=18)
    assert not first.equals(other)


def test_noise_variance():
    table, _ = simulate("smooth_2d", 100_000, noise_sd=0.3, seed=2)
    assert np.var(table["y"] - table["truth"]) == pytest.approx(0.09, rel=0.05)


@pytest.mark.parametrize("scenario", ["loglink_2d", "loglink_2plus2"])
def test_loglink_means_are_positive(scenario):
    table, _ = simulate(scenario, 1000, noise_sd=0.1, seed=3)
    assert np.all(table["truth"] > 0)


def test_empty_table():
    table, _ = simulate("smooth_2d", 0)
    assert list(table.columns) == ["x1", "x2", "truth", "y"]
    assert table.empty


def test_invalid_arguments():
    with pytest.raises(ConfigError):
        simulate("smooth_5d", 10)
    with pytest.raises(ConfigError):
        simulate("smooth_2d", -1)
    with pytest.raises(ConfigError):
        simulate("smooth_2d", 10, noise_sd=-0.1)


def test_truth_function_lookup():
    dim, truth = truth_function(Scenario.SMOOTH_2D)
    assert dim == 2
    assert truth(np.array([[0.25, 0.0]]))[0] == pytest.approx(1.0)
