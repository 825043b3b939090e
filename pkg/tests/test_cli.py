import io
import json

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from tensorsmooth import __version__
from tensorsmooth.api.trace_check import convergence_table
from tensorsmooth.main import cli
from tensorsmooth.services.model import predict
from tensorsmooth.storage.modelfile import load


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def training_csv(runner, tmp_path):
    path = tmp_path / "train.csv"
    result = runner.invoke(cli, ["simulate", "--scenario", "smooth_2d", "--n", "2000", "--seed", "7", "--out", str(path)])
    assert result.exit_code == 0
    return path


def _fit(runner, tmp_path, data, *extra, name="model.json"):
    model = tmp_path / name
    result = runner.invoke(cli, ["fit", "--data", str(data), "--model", str(model), "--knots", "8", *extra])
    return result, model


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_simulate_is_reproducible(runner):
    args = ["simulate", "--scenario", "additive_2plus2", "--n", "50", "--seed", "3"]
    first, second = runner.invoke(cli, args), runner.invoke(cli, args)
    assert first.exit_code == second.exit_code == 0
    assert first.stdout == second.stdout
    table = pd.read_csv(io.StringIO(first.stdout))
    assert list(table.columns) == ["x1", "x2", "x3", "x4", "truth", "y"]
    assert len(table) == 50


def test_simulate_without_noise(runner):
    result = runner.invoke(cli, ["simulate", "--scenario", "smooth_3d", "--n", "20", "--noise", "0"])
    table = pd.read_csv(io.StringIO(result.stdout), float_precision="round_trip")
    np.testing.assert_array_equal(table["y"], table["truth"])


def test_simulate_zero_rows(runner):
    result = runner.invoke(cli, ["simulate", "--scenario", "smooth_2d", "--n", "0"])
    assert result.exit_code == 0
    assert result.stdout == "x1,x2,truth,y\n"


def test_simulate_unknown_scenario(runner):
    result = runner.invoke(cli, ["simulate", "--scenario", "smooth_9d"])
    assert result.exit_code == 2


def test_fit_writes_model_and_report(runner, tmp_path, training_csv):
    result, model = _fit(runner, tmp_path, training_csv)
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["lambda_mode"] == "estimated"
    assert len(report["lambdas"]) == 1
    assert np.isfinite(report["lambdas"][0]) and report["lambdas"][0] > 0
    assert report["config"]["terms"][0]["covariates"] == ["x1", "x2"]
    assert model.exists()


def test_fit_report_to_file(runner, tmp_path, training_csv):
    out = tmp_path / "report.json"
    result, _ = _fit(runner, tmp_path, training_csv, "--out", str(out))
    assert result.exit_code == 0
    assert result.stdout == ""
    assert json.loads(out.read_text())["converged"] in (True, False)


def test_fixed_lambda(runner, tmp_path, training_csv):
    result, _ = _fit(runner, tmp_path, training_csv, "--lambda", "0.5")
    report = json.loads(result.stdout)
    assert report["lambda_mode"] == "fixed"
    assert report["lambdas"] == [0.5]


def test_missing_response_column(runner, tmp_path, training_csv):
    result, _ = _fit(runner, tmp_path, training_csv, "--response", "yield")
    assert result.exit_code == 3
    assert "yield" in result.stderr


def test_missing_data_file(runner, tmp_path):
    result, _ = _fit(runner, tmp_path, tmp_path / "absent.csv")
    assert result.exit_code == 3


def test_invalid_config(runner, tmp_path, training_csv):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"terms": [{"covariates": ["x1", "x1"]}]}))
    result, _ = _fit(runner, tmp_path, training_csv, "--config", str(config))
    assert result.exit_code == 2


def test_fit_is_deterministic(runner, tmp_path, training_csv):
    _fit(runner, tmp_path, training_csv, "--threads", "1", name="a.json")
    _fit(runner, tmp_path, training_csv, "--threads", "1", name="b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_predict_reproduces_fitted_values(runner, tmp_path, training_csv):
    _, model = _fit(runner, tmp_path, training_csv)
    out = tmp_path / "pred.csv"
    result = runner.invoke(cli, ["predict", "--model", str(model), "--data", str(training_csv), "--out", str(out)])
    assert result.exit_code == 0, result.output

    table = pd.read_csv(out, float_precision="round_trip")
    data = pd.read_csv(training_csv, float_precision="round_trip")
    assert list(table.columns) == list(data.columns) + ["prediction"]
    np.testing.assert_array_equal(table["prediction"], predict(load(model), data))


def test_predict_outside_domain(runner, tmp_path, training_csv):
    _, model = _fit(runner, tmp_path, training_csv)
    data = pd.read_csv(training_csv).head(5)
    data.loc[2, "x1"] = 1.5
    path = tmp_path / "new.csv"
    data.to_csv(path, index=False)
    result = runner.invoke(cli, ["predict", "--model", str(model), "--data", str(path)])
    assert result.exit_code == 3
    assert "rows 2" in result.stderr


def test_log_link_predictions_positive(runner, tmp_path):
    data = tmp_path / "log.csv"
    runner.invoke(cli, ["simulate", "--scenario", "loglink_2d", "--n", "600", "--seed", "2", "--out", str(data)])
    result, model = _fit(runner, tmp_path, data, "--family", "gaussian_log", "--knots", "4")
    assert result.exit_code == 0, result.output
    predicted = runner.invoke(cli, ["predict", "--model", str(model), "--data", str(data)])
    table = pd.read_csv(io.StringIO(predicted.stdout))
    assert (table["prediction"] > 0).all()


def test_trace_check_converges(runner):
    result = runner.invoke(cli, ["trace-check", "--max-probes", "20"])
    assert result.exit_code == 0, result.output
    table = pd.read_csv(io.StringIO(result.stdout))
    assert list(table.columns) == ["M", "estimate", "exact", "relative_error"]
    assert table["M"].tolist() == list(range(1, 21))
    assert table["exact"].nunique() == 1
    assert (table.loc[table["M"] >= 10, "relative_error"] <= 0.05).all()


def test_trace_check_single_probe():
    table = convergence_table(n=300, knots=4, max_probes=1)
    assert len(table) == 1
    assert table["relative_error"].iloc[0] == pytest.approx(
        abs(table["estimate"].iloc[0] - table["exact"].iloc[0]) / table["exact"].iloc[0]
    )


def test_trace_check_refuses_large_dimension(runner):
    result = runner.invoke(cli, ["trace-check", "--knots", "100"])
    assert result.exit_code == 2
    assert "5000" in result.stderr


def test_unsettled_lambda_exits_4(runner, tmp_path, training_csv):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"terms": [{"covariates": ["x1", "x2"]}], "max_outer": 1, "lambda0": 1000.0}))
    result, model = _fit(runner, tmp_path, training_csv, "--config", str(config))
    assert result.exit_code == 4
    assert "did not converge" in result.stderr
    assert model.exists()
    assert json.loads(result.stdout)["converged"] is False


def test_fit_writes_residual_table(runner, tmp_path, training_csv):
    residuals = tmp_path / "resid.csv"
    result, model = _fit(runner, tmp_path, training_csv, "--residuals", str(residuals))
    assert result.exit_code == 0, result.output

    table = pd.read_csv(residuals, float_precision="round_trip")
    data = pd.read_csv(training_csv, float_precision="round_trip")
    assert list(table.columns) == ["fitted", "residual"]
    np.testing.assert_array_equal(table["fitted"], predict(load(model), data))
    np.testing.assert_allclose(table["fitted"] + table["residual"], data["y"], rtol=0, atol=1e-12)


def test_compare_grid(runner, tmp_path):
    data = tmp_path / "pos.csv"
    runner.invoke(cli, ["simulate", "--scenario", "loglink_2plus2", "--n", "500", "--seed", "4", "--out", str(data)])
    residuals = tmp_path / "resid.csv"
    result = runner.invoke(
        cli,
        ["compare", "--data", str(data), "--group", "x1,x2", "--group", "x3,x4", "--knots", "3",
         "--residuals", str(residuals)],
    )
    assert result.exit_code == 0, result.output

    table = pd.read_csv(io.StringIO(result.stdout))
    assert list(table.columns) == ["model", "family", "rss", "aic", "run_single", "run_total", "neg", "converged"]
    assert len(table) == 8
    assert table["run_single"].isna().tolist() == [True, True] + [False] * 6
    assert not table.loc[table["family"] == "gaussian_log", "neg"].any()
    assert pd.read_csv(residuals)["model"].nunique() == 8


def test_compare_needs_groups(runner, tmp_path, training_csv):
    result = runner.invoke(cli, ["compare", "--data", str(training_csv), "--group", " , "])
    assert result.exit_code == 2
