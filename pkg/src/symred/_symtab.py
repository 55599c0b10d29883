"""Vectorized whole-group tables for small symmetric groups.

Rows of the arrays are permutations in image notation, in lexicographic order,
so a row's index equals its lexicographic rank.
"""
from __future__ import annotations

import functools
import itertools
import math

import numpy as np

from .perm import Permutation

TABLE_CAP = 8


@functools.lru_cache(maxsize=None)
def sym_array(n: int) -> np.ndarray:
    if n > TABLE_CAP:
        raise ValueError(f"group table for Sym({n}) exceeds cap {TABLE_CAP}")
    arr = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    arr.setflags(write=False)
    return arr


@functools.lru_cache(maxsize=None)
def _rank_weights(n: int) -> np.ndarray:
    return np.array([math.factorial(n - 1 - i) for i in range(n)], dtype=np.int64)


def rank(arr: np.ndarray) -> np.ndarray:
    """Lexicographic ranks of the permutations along the last axis."""
    arr = np.asarray(arr)
    n = arr.shape[-1]
    lehmer = np.zeros(arr.shape, dtype=np.int64)
    for i in range(n - 1):
        lehmer[..., i] = (arr[..., i + 1:] < arr[..., i:i + 1]).sum(axis=-1)
    return lehmer @ _rank_weights(n)


def tabulate(fn, n: int) -> np.ndarray:
    """Evaluate ``fn`` on every element of Sym(n); returns an image array."""
    rows = [fn(Permutation(row.tolist(), check=False)).image for row in sym_array(n)]
    return np.array(rows, dtype=np.int64)


@functools.lru_cache(maxsize=None)
def _code_lookup(n: int) -> np.ndarray:
    weights = n ** np.arange(n, dtype=np.int64)
    lookup = np.full(n**n, -1, dtype=np.int32)
    lookup[sym_array(n).astype(np.int64) @ weights] = np.arange(math.factorial(n))
    lookup.setflags(write=False)
    return lookup


def fast_rank(arr: np.ndarray) -> np.ndarray:
    """Same as ``rank`` via a base-n code lookup; intended for n <= 7."""
    arr = np.asarray(arr, dtype=np.int64)
    n = arr.shape[-1]
    if n > 7:
        return rank(arr)
    return _code_lookup(n)[arr @ (n ** np.arange(n, dtype=np.int64))]


def compose_rows(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pairwise products: out[b, j] = x[b] * y[j] (``y[j]`` acts first)."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    B, n = x.shape
    flat = x.ravel()
    return flat[np.arange(B, dtype=np.int64)[:, None, None] * n + y[None, :, :]]


def chunks(total: int, size: int):
    for start in range(0, total, size):
        yield start, min(start + size, total)
