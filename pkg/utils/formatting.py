"""Conversion of domain values to JSON-ready data and terminal text."""
import dataclasses
import math
from fractions import Fraction
from typing import Any

import numpy as np
import pandas as pd

from core.group_core import BackendSpec, GroupElement
from core.mixed_words import MixedWord, format_mixed
from core.random_walk import Measure, format_measure


def to_jsonable(value: Any) -> Any:
    """
    Recursively convert results into plain JSON types.

    Group elements and mixed words become their text form, frames become
    lists of row dicts, and non-finite floats become strings so the output
    stays strict JSON.
    """
    if isinstance(value, GroupElement):
        return str(value)
    if isinstance(value, MixedWord):
        return format_mixed(value)
    if isinstance(value, Measure):
        return format_measure(value)
    if isinstance(value, BackendSpec):
        return value.describe()
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, pd.DataFrame):
        return [to_jsonable(row) for row in value.to_dict(orient="records")]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        number = float(value)
        return number if math.isfinite(number) else str(number)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value, key=str) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    return value


def format_table(df: pd.DataFrame, float_digits: int = 4) -> str:
    """Plain-text table for terminal output."""
    if df.empty:
        return "(no rows)"
    return df.to_string(index=False, float_format=lambda v: f"{v:.{float_digits}f}")


def format_mapping(values: dict) -> str:
    width = max((len(str(k)) for k in values), default=0)
    return "\n".join(f"{str(k).ljust(width)}  {v}" for k, v in values.items())
