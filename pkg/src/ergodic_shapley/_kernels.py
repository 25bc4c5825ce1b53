"""Compiled inner loops. Randomness is always drawn by the caller's Generator."""

import numba
import numpy as np


@numba.njit(cache=True)
def _fisher_yates(u, out):
    size, n = out.shape
    for b in range(size):
        for j in range(n):
            out[b, j] = j
        for j in range(n - 1, 0, -1):
            k = int(u[b, j - 1] * (j + 1))
            if k > j:
                k = j
            tmp = out[b, j]
            out[b, j] = out[b, k]
            out[b, k] = tmp


def position_dtype(n: int) -> np.dtype:
    return np.dtype(np.int8) if n <= 127 else np.dtype(np.int32)


def shuffled_rows(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    """`size` independent uniform permutations of 0..n-1, one per row."""
    out = np.empty((size, n), dtype=position_dtype(n))
    if size == 0:
        return out
    u = rng.random((size, max(n - 1, 1)))
    _fisher_yates(u, out)
    return out
