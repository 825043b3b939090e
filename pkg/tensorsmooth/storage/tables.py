"""CSV tables: comma separated, ``.`` decimal, header row, UTF-8."""

from pathlib import Path
from typing import Union

import pandas as pd

from tensorsmooth.core.errors import DataError


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    try:
        return pd.read_csv(path, sep=",", decimal=".", encoding="utf-8", float_precision="round_trip")
    except FileNotFoundError:
        raise DataError(f"data file not found: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as err:
        raise DataError(f"cannot parse {path} as CSV: {err}") from err


def write_table(table: pd.DataFrame, path: Union[str, Path]) -> None:
    # default float formatting is repr, which round-trips
    try:
        table.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    except OSError as err:
        raise DataError(f"cannot write table to {path}: {err}") from err
