import pandas as pd
import pytest
from pydantic import ValidationError

from tensorsmooth.api.deps import apply_threads, effective_spec
from tensorsmooth.core.config import Settings, settings
from tensorsmooth.core.errors import ConfigError
from tensorsmooth.models.spec import FamilyName, ModelSpec, PenaltyKind, TermSpec


@pytest.fixture
def data():
    return pd.DataFrame({"x1": [0.1, 0.5], "x2": [0.2, 0.9], "truth": [0.0, 0.0], "y": [1.0, 2.0]})


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("TENSORSMOOTH_THREADS", "4")
    monkeypatch.setenv("TENSORSMOOTH_CHUNK_ELEMENTS", "4096")
    fresh = Settings()
    assert fresh.THREADS == 4
    assert fresh.CHUNK_ELEMENTS == 4096
    assert fresh.DENSE_CHECK_LIMIT == 5000


def test_threads_flag_overrides_settings():
    assert apply_threads(3) == 3
    assert settings.THREADS == 3
    with pytest.raises(ConfigError):
        apply_threads(0)


def test_default_covariates_skip_response_and_truth(data):
    spec = effective_spec(None, data)
    assert spec.response == "y"
    assert spec.terms[0].covariates == ["x1", "x2"]
    assert spec.family is FamilyName.GAUSSIAN_IDENTITY


def test_flags_override_config(data, tmp_path):
    config = tmp_path / "config.json"
    spec = ModelSpec(terms=[TermSpec(covariates=["x1"]), TermSpec(covariates=["x2"])], lambda0=2.0)
    config.write_text(spec.model_dump_json())
    merged = effective_spec(
        config, data, family="gaussian_log", penalty="curv", knots=5, seed=9, probes=12, lambdas=(0.3,), tol_cg=1e-9,
    )
    assert merged.family is FamilyName.GAUSSIAN_LOG
    assert all(term.penalty.kind is PenaltyKind.CURVATURE for term in merged.terms)
    assert all(term.basis.n_interior_knots == 5 for term in merged.terms)
    assert merged.trace.seed == 9 and merged.trace.n_probes == 12
    assert merged.fixed_lambda == [0.3, 0.3]
    assert merged.solver.rtol == 1e-9
    assert merged.lambda0 == 2.0


def test_explicit_covariates(data):
    spec = effective_spec(None, data, covariates="x2, x1")
    assert spec.terms[0].covariates == ["x2", "x1"]


def test_config_validation():
    with pytest.raises(ValidationError):
        ModelSpec(terms=[TermSpec(covariates=["x1"])], fixed_lambda=[1.0, 2.0])
    with pytest.raises(ValidationError):
        TermSpec(covariates=["x1", "x2"], penalty={"orders": [2]})
    with pytest.raises(ValidationError):
        ModelSpec(terms=[])


def test_unreadable_config(data, tmp_path):
    with pytest.raises(ConfigError):
        effective_spec(tmp_path / "absent.json", data)
