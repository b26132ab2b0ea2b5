"""Shared exception types and input-validation helpers.

Error taxonomy maps onto CLI exit codes: ValidationError (and subclasses)
exit 1, NumericError exit 2.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "SchemaLearnError",
    "ValidationError",
    "SchemaError",
    "ShapeError",
    "ConfigError",
    "DataError",
    "NumericError",
    "as_f64",
    "check_positive_int",
    "check_batch_matrix",
]


class SchemaLearnError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SchemaLearnError):
    """Bad user input: malformed files, shape mismatches, unknown names."""


class SchemaError(ValidationError):
    """Schema text or schema structure is invalid."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ShapeError(ValidationError):
    """Tensor shapes are inconsistent with an operation's contract."""


class ConfigError(ValidationError):
    """Training/architecture configuration is invalid."""


class DataError(ValidationError):
    """Dataset contents or layout are invalid."""


class NumericError(SchemaLearnError):
    """Runtime numeric failure, e.g. a non-finite loss during training."""


def as_f64(x, name: str = "array") -> np.ndarray:
    """Coerce to a float64 ndarray, rejecting non-numeric input."""
    try:
        arr = np.asarray(x, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name}: not convertible to float64: {exc}") from exc
    return arr


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_batch_matrix(x, dim: int, name: str = "X") -> np.ndarray:
    """Validate a sample batch: rank-2 float64 [n, dim]. Rank-1 vectors of
    length dim are promoted to a single-row batch."""
    arr = as_f64(x, name)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ShapeError(f"{name}: expected shape [n, {dim}], got {tuple(arr.shape)}")
    return arr
