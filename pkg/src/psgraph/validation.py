"""Input validation helpers and the package's error types.

``ValidationError`` marks inputs that violate a documented precondition
(bad shapes, non-finite values, out-of-range parameters). ``ComputationError``
marks failures on otherwise valid input, e.g. a covariance that turns out
not to be positive semi-definite. The CLI maps them to exit codes 1 and 2.
"""

from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """An input failed a contract precondition."""


class ComputationError(RuntimeError):
    """A computation cannot proceed on otherwise valid input."""


def as_finite_array(x, name="array"):
    """Coerce to a float ndarray and reject non-finite entries."""
    arr = np.asarray(x, dtype=float)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def check_vector(x, n=None, name="vector"):
    """Validate a 1-D float vector, optionally of fixed length."""
    arr = as_finite_array(x, name=name)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValidationError(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr


def check_time_series(x, n_vertices=None, name="series", allow_nan=False):
    """Validate an (n_vertices, n_steps) time-series matrix.

    Rows are vertices, columns are time steps. NaN entries are rejected
    unless ``allow_nan`` is set (imputation inputs).
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if allow_nan:
        if arr.size and np.any(np.isinf(arr)):
            raise ValidationError(f"{name} contains infinite entries")
    elif arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    if n_vertices is not None and arr.shape[0] != n_vertices:
        raise ValidationError(f"{name} has {arr.shape[0]} rows, expected {n_vertices}")
    return arr


def check_square(m, n=None, name="matrix"):
    """Validate a square float matrix with finite entries."""
    arr = as_finite_array(m, name=name)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValidationError(f"{name} has order {arr.shape[0]}, expected {n}")
    return arr


def check_symmetric(m, tol=1e-10, n=None, name="matrix"):
    """Validate a symmetric square matrix within an absolute tolerance."""
    arr = check_square(m, n=n, name=name)
    if arr.size and np.max(np.abs(arr - arr.T)) > tol:
        raise ValidationError(f"{name} is not symmetric within {tol}")
    return arr
