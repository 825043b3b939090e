"""Shared plumbing for the CLI commands."""

import functools
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import click
import pandas as pd
from pydantic import ValidationError

from tensorsmooth.core.config import settings
from tensorsmooth.core.errors import ConfigError, TensorSmoothError
from tensorsmooth.models.spec import ModelSpec, TermSpec

logger = logging.getLogger(__name__)

# data columns never used as default covariates
RESERVED_COLUMNS = ("truth",)


def configure_logging(verbose: int = 0) -> None:
    level = settings.LOG_LEVEL.upper()
    if verbose == 1:
        level = "INFO"
    elif verbose > 1:
        level = "DEBUG"
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def apply_threads(threads: Optional[int]) -> int:
    """``--threads`` wins over ``TENSORSMOOTH_THREADS``."""
    if threads is not None:
        if threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {threads}")
        settings.THREADS = threads
    return settings.THREADS


def handle_errors(command):
    """Map errors to the documented exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except TensorSmoothError as err:
            click.echo(f"error: {err.detail}", err=True)
            sys.exit(err.exit_code)
        except ValidationError as err:
            click.echo(f"error: invalid configuration: {err}", err=True)
            sys.exit(ConfigError.exit_code)
        except Exception:
            logger.exception("internal error")
            sys.exit(TensorSmoothError.exit_code)

    return wrapper


def read_spec(config: Optional[Path]) -> Optional[ModelSpec]:
    if config is None:
        return None
    try:
        text = Path(config).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file {config}: {err}") from err
    return ModelSpec.model_validate_json(text)


def effective_spec(
    config: Optional[Path],
    data: pd.DataFrame,
    *,
    response: Optional[str] = None,
    covariates: Optional[str] = None,
    family: Optional[str] = None,
    penalty: Optional[str] = None,
    knots: Optional[int] = None,
    degree: Optional[int] = None,
    seed: Optional[int] = None,
    probes: Optional[int] = None,
    lambdas: Sequence[float] = (),
    tol_lambda: Optional[float] = None,
    tol_cg: Optional[float] = None,
    threads: Optional[int] = None,
) -> ModelSpec:
    """Config file (or defaults) with command-line flags applied on top."""
    spec = read_spec(config)
    if spec is None:
        response = response or "y"
        if covariates:
            names = [name.strip() for name in covariates.split(",") if name.strip()]
        else:
            names = [name for name in data.columns if name != response and name not in RESERVED_COLUMNS]
        if not names:
            raise ConfigError("no covariate columns; pass --covariates or a config file")
        spec = ModelSpec(response=response, terms=[TermSpec(covariates=names)])

    doc = spec.model_dump(mode="json")
    if response is not None:
        doc["response"] = response
    if family is not None:
        doc["family"] = family
    for term in doc["terms"]:
        if penalty is not None:
            term["penalty"]["kind"] = penalty
        for basis in [term["basis"]] + (term["bases"] or []):
            if knots is not None:
                basis["n_interior_knots"] = knots
            if degree is not None:
                basis["degree"] = degree
    if seed is not None:
        doc["trace"]["seed"] = seed
    if probes is not None:
        doc["trace"]["n_probes"] = probes
    if lambdas:
        values = list(lambdas)
        doc["fixed_lambda"] = values * len(doc["terms"]) if len(values) == 1 else values
    if tol_lambda is not None:
        doc["tol_lambda"] = tol_lambda
    if tol_cg is not None:
        doc["solver"]["rtol"] = tol_cg
    if threads is not None:
        doc["solver"]["threads"] = threads
    return ModelSpec.model_validate(doc)
