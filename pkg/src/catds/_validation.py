"""Small input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def check_matrix(x, name: str = "x", dtype=np.float64) -> np.ndarray:
    """Coerce to a 2-D array of the given dtype and require finite values."""
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_vector(x, name: str = "x", dtype=np.float64) -> np.ndarray:
    """Coerce to a 1-D array of the given dtype and require finite values."""
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D array, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_int_sequence(x, name: str = "x") -> np.ndarray:
    """Coerce to a 1-D int64 array; rejects floats that are not whole numbers."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D sequence, got shape {arr.shape}")
    if arr.size == 0:
        return arr.astype(np.int64)
    if not np.issubdtype(arr.dtype, np.integer):
        as_int = arr.astype(np.int64)
        if not np.array_equal(as_int, arr):
            raise ValueError(f"{name} must contain integers")
        arr = as_int
    return arr.astype(np.int64)
