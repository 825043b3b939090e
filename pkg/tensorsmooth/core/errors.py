from typing import Any, Optional, Sequence


class TensorSmoothError(Exception):
    """Base error; ``exit_code`` is what the CLI exits with."""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# Configuration (exit 2)

class ConfigError(TensorSmoothError):
    exit_code = 2


class DuplicateKnotError(ConfigError):
    pass


class OrderTooHighError(ConfigError):
    pass


class DegreeTooLowError(ConfigError):
    pass


# Data (exit 3)

class DataError(TensorSmoothError):
    exit_code = 3


class DimensionError(DataError):
    pass


class DomainError(DataError):
    def __init__(self, detail: str, rows: Optional[Sequence[int]] = None):
        super().__init__(detail)
        self.rows = list(rows) if rows is not None else []


class InvalidResponseError(DataError):
    pass


class ModelFileError(DataError):
    pass


class ModelVersionError(ModelFileError):
    pass


class ModelSchemaError(ModelFileError):
    pass


class ModelIOError(ModelFileError):
    pass


# Convergence (exit 4)

class ConvergenceError(TensorSmoothError):
    exit_code = 4


class PreconditionerError(ConvergenceError):
    pass


class TraceEstimationError(ConvergenceError):
    def __init__(self, detail: str, probe_index: int):
        super().__init__(detail)
        self.probe_index = probe_index


class FisherScoringError(ConvergenceError):
    pass


class DegenerateFitError(ConvergenceError):
    """The prior variance estimate vanished; ``state`` is the last iterate."""

    def __init__(self, detail: str, state: Any = None, terms: Optional[Sequence[int]] = None):
        super().__init__(detail)
        self.state = state
        self.terms = list(terms) if terms is not None else []
