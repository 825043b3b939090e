import json

import numpy as np
import pandas as pd
import pytest

from tensorsmooth.core.errors import DataError, ModelIOError, ModelSchemaError, ModelVersionError
from tensorsmooth.models.spec import BasisConfig, ModelSpec, TermSpec
from tensorsmooth.services.model import fit, predict
from tensorsmooth.storage.modelfile import load, save
from tensorsmooth.storage.tables import read_table, write_table


@pytest.fixture
def fitted(smooth_2d):
    table, _ = smooth_2d
    spec = ModelSpec(terms=[TermSpec(covariates=["x1", "x2"], basis=BasisConfig(n_interior_knots=4))])
    return fit(spec, table), table


def test_model_file_is_exact(fitted, tmp_path):
    model, table = fitted
    path = tmp_path / "model.json"
    save(model, path)
    loaded = load(path)
    assert loaded.terms[0].alpha == model.terms[0].alpha
    assert loaded.terms[0].bases == model.terms[0].bases
    assert loaded.lambdas == model.lambdas
    assert loaded.spec == model.spec
    np.testing.assert_array_equal(predict(loaded, table), model.fitted_values)


def test_saving_twice_gives_identical_bytes(fitted, tmp_path):
    model, _ = fitted
    save(model, tmp_path / "a.json")
    save(load(tmp_path / "a.json"), tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_newer_format_version_is_rejected(fitted, tmp_path):
    model, _ = fitted
    path = tmp_path / "model.json"
    save(model, path)
    document = json.loads(path.read_text())
    document["format_version"] += 1
    path.write_text(json.dumps(document))
    with pytest.raises(ModelVersionError):
        load(path)


def test_truncated_file(fitted, tmp_path):
    model, _ = fitted
    path = tmp_path / "model.json"
    save(model, path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ModelSchemaError):
        load(path)


def test_schema_mismatch(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"format_version": 1, "terms": []}))
    with pytest.raises(ModelSchemaError):
        load(path)


def test_missing_model_file(tmp_path):
    with pytest.raises(ModelIOError):
        load(tmp_path / "absent.json")


def test_csv_round_trip(smooth_2d, tmp_path):
    table, _ = smooth_2d
    path = tmp_path / "data.csv"
    write_table(table, path)
    pd.testing.assert_frame_equal(read_table(path), table, check_exact=True)
    assert "\r" not in path.read_text()


def test_unreadable_tables(tmp_path):
    with pytest.raises(DataError):
        read_table(tmp_path / "absent.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DataError):
        read_table(empty)
