"""Dense and bit-packed representations of ±1 vectors.

Dense collections are ``int8`` arrays of shape ``(n, d)`` holding -1/+1.
Packed collections are ``uint64`` arrays of shape ``(n, ceil(d/64))`` where
bit ``j`` (LSB first) is 1 exactly when coordinate ``j`` is +1; pad bits are 0.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def as_signs(rows, d: int | None = None) -> np.ndarray:
    """Validate and coerce to an int8 ±1 matrix (a single vector becomes one row)."""
    arr = np.asarray(rows)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ParameterError("sign vectors must be 1-D or 2-D")
    if arr.size and not np.all((arr == 1) | (arr == -1)):
        raise ParameterError("entries must be +1 or -1")
    if d is not None and arr.shape[1] != d:
        raise ParameterError(f"expected dimension {d}, got {arr.shape[1]}")
    return np.ascontiguousarray(arr, dtype=np.int8)


def pack(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows)
    n, d = rows.shape
    words = max(1, (d + 63) // 64)
    bytes_ = np.packbits(rows > 0, axis=1, bitorder="little")
    padded = np.zeros((n, words * 8), dtype=np.uint8)
    padded[:, : bytes_.shape[1]] = bytes_
    return padded.view("<u8").astype(np.uint64, copy=False).reshape(n, words)


def unpack(packed: np.ndarray, d: int) -> np.ndarray:
    packed = np.ascontiguousarray(packed, dtype="<u8")
    bits = np.unpackbits(packed.view(np.uint8), axis=1, bitorder="little")[:, :d]
    return (bits.astype(np.int8) * 2 - 1).astype(np.int8)


def inner(x: np.ndarray, y: np.ndarray) -> int:
    """Exact inner product of two ±1 vectors by direct summation."""
    return int(np.dot(np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)))
