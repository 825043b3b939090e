"""Versioned JSON model files.

Floats are written in their shortest round-trip form, so coefficients, knots
and smoothing parameters load back bit-exactly.
"""

from pathlib import Path
from typing import Union

from pydantic import ValidationError
from pydantic_core import from_json

from tensorsmooth.core.errors import ModelIOError, ModelSchemaError, ModelVersionError
from tensorsmooth.models.fitted import FORMAT_VERSION, FittedModel


def save(model: FittedModel, path: Union[str, Path]) -> None:
    """Write ``model`` to ``path``."""
    try:
        Path(path).write_text(model.model_dump_json(indent=1) + "\n", encoding="utf-8")
    except OSError as err:
        raise ModelIOError(f"cannot write model file {path}: {err}") from err


def load(path: Union[str, Path]) -> FittedModel:
    """Read a model file, checking the format version before the schema."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ModelIOError(f"cannot read model file {path}: {err}") from err

    try:
        document = from_json(text)
    except ValueError as err:
        raise ModelSchemaError(f"model file {path} is not valid JSON: {err}") from err
    if not isinstance(document, dict) or "format_version" not in document:
        raise ModelSchemaError(f"model file {path} has no format_version")
    if document["format_version"] != FORMAT_VERSION:
        raise ModelVersionError(
            f"model file {path} has format version {document['format_version']!r}, "
            f"this build reads version {FORMAT_VERSION}"
        )

    try:
        return FittedModel.model_validate(document)
    except ValidationError as err:
        raise ModelSchemaError(f"model file {path} does not match the schema: {err}") from err
