"""Cutting (first-return), lifting and the degree-dispatching ``updown``."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .perm import Permutation

__all__ = ["lift", "cut", "cut_rows", "updown", "cut_hom_bound", "roundtrip_bound"]


def lift(sigma: Permutation, n: int) -> Permutation:
    """Extend ``sigma`` to degree ``n`` by fixing the new points."""
    m = len(sigma)
    if n < m:
        raise ValueError(f"cannot lift degree {m} to smaller degree {n}")
    if n == m:
        return sigma
    return Permutation(sigma.image + tuple(range(m, n)), check=False)


def cut(sigma: Permutation, l: int) -> Permutation:
    """First-return permutation of ``sigma`` on ``{0, ..., l-1}``.

    Each cycle is walked once; consecutive small points (``< l``) along the
    cycle map to each other, so the total work is O(degree).
    """
    m = len(sigma)
    if l < 1:
        raise ValueError("cut needs l >= 1")
    if l > m:
        raise ValueError(f"cannot cut degree {m} to larger degree {l}")
    if l == m:
        return sigma
    img = sigma.image
    out = list(range(l))
    seen = bytearray(m)
    for start in range(l):
        if seen[start]:
            continue
        first = prev = start
        seen[start] = 1
        x = img[start]
        while x != start:
            seen[x] = 1
            if x < l:
                out[prev] = x
                prev = x
            x = img[x]
        out[prev] = first
    return Permutation(out, check=False)


def cut_rows(rows: np.ndarray, l: int) -> np.ndarray:
    """``cut`` applied to every row of a (batch, degree) image array.

    Follows the orbit of each point until it lands below ``l``; at most
    ``degree - l`` extra steps are needed.
    """
    rows = np.asarray(rows)
    if rows.ndim != 2:
        raise ValueError("cut_rows expects a 2-d array")
    m = rows.shape[1]
    if not 1 <= l <= m:
        raise ValueError(f"need 1 <= l <= {m}")
    out = rows[:, :l].copy()
    batch = np.arange(rows.shape[0])[:, None]
    for _ in range(m - l):
        high = out >= l
        if not high.any():
            break
        out = np.where(high, rows[batch, np.where(high, out, 0)], out)
    return out


def updown(sigma: Permutation, n: int) -> Permutation:
    if n < 1:
        raise ValueError("updown needs n >= 1")
    if len(sigma) <= n:
        return lift(sigma, n)
    return cut(sigma, n)


def cut_hom_bound(n: int, m: int) -> Fraction:
    """Homomorphism defect bound ``2(n-m)/m`` for cutting Sym(n) to Sym(m)."""
    return Fraction(2 * (n - m), m)


def roundtrip_bound(n: int, m: int) -> Fraction:
    """Bound ``2(n-m)/n`` on the distance from ``lift(cut(s, m), n)`` to ``s``."""
    return Fraction(2 * (n - m), n)
