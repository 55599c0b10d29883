"""Almost rearrangements of degree sequences.

All tolerance tests are exact: two degrees a, b are compatible at tolerance
epsilon when max(a, b) <= (1 + epsilon) * min(a, b), which is the same as
|log a - log b| <= log(1 + epsilon).
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .reduced_product import AlmostPermutation, ShapeSequence, tail_windows

__all__ = [
    "compatible",
    "find_rearrangement",
    "Rearrangement",
    "log_gap",
    "LogGap",
    "out_shadow",
    "OutShadow",
    "read_sequence",
]


def _values(k) -> tuple[int, ...]:
    if isinstance(k, ShapeSequence):
        return k.prefix
    return tuple(int(v) for v in k)


def compatible(a: int, b: int, epsilon: Fraction) -> bool:
    return max(a, b) <= (1 + epsilon) * min(a, b)


def _greedy(k: Sequence[int], l: Sequence[int], epsilon: Fraction) -> list[tuple[int, int]]:
    """Maximum matching of l-indices to k-indices under the ratio tolerance.

    Both sides are swept in increasing order; on a line with a symmetric
    window the earliest compatible partner is always safe, so the sweep is
    optimal. Ties keep index order, so equal sequences match the identity.
    """
    ks = sorted(range(len(k)), key=lambda i: (k[i], i))
    ls = sorted(range(len(l)), key=lambda j: (l[j], j))
    one = 1 + epsilon
    pairs = []
    i = j = 0
    while i < len(ks) and j < len(ls):
        a, b = k[ks[i]], l[ls[j]]
        if a * one < b:
            i += 1
        elif a > one * b:
            j += 1
        else:
            pairs.append((ls[j], ks[i]))
            i += 1
            j += 1
    return pairs


@dataclass
class Rearrangement:
    feasible: bool
    epsilon: Fraction
    budget: int
    f: AlmostPermutation | None
    matched: int
    exceptional: list[int] = field(default_factory=list)
    min_epsilon: Fraction | None = None
    equivalent: bool | None = None

    def to_json(self) -> str:
        out = {
            "feasible": self.feasible,
            "epsilon": str(self.epsilon),
            "budget": self.budget,
            "matched": self.matched,
            "exceptional": self.exceptional,
            "f": list(self.f.images) if self.f is not None else None,
            "min_epsilon": None if self.min_epsilon is None else str(self.min_epsilon),
            "min_epsilon_float": None if self.min_epsilon is None else float(self.min_epsilon),
        }
        if self.equivalent is not None:
            out["asymptotically_equivalent"] = self.equivalent
        return json.dumps(out, indent=2) + "\n"


def _assemble(k, l, pairs) -> tuple[AlmostPermutation, list[int]]:
    N = len(l)
    f = [-1] * N
    for ln, kn in pairs:
        f[ln] = kn
    spare = iter(sorted(set(range(len(k))) - set(f)))
    exceptional = []
    for n in range(N):
        if f[n] < 0:
            f[n] = next(spare)
            exceptional.append(n)
    return AlmostPermutation(tuple(f), frozenset(exceptional)), exceptional


def _min_epsilon(k, l, budget: int) -> Fraction:
    """Smallest epsilon at which the sweep leaves at most ``budget`` indices unmatched.

    The optimum is one of the pairwise ratios, and matching size is monotone
    in epsilon, so bisect over the sorted candidates.
    """
    need = len(l) - budget
    if need <= 0:
        return Fraction(0)
    cands = sorted({Fraction(max(a, b), min(a, b)) - 1 for a in set(k) for b in set(l)})
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if len(_greedy(k, l, cands[mid])) >= need:
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]


def find_rearrangement(
    k, l, epsilon: Fraction, exception_budget: int, equivalent: bool = False
) -> Rearrangement:
    """An f with |log k_f(n) - log l_n| <= log(1 + epsilon) off at most
    ``exception_budget`` indices, injective everywhere on the horizon.

    With ``equivalent=True`` the stricter notion is checked: f must match
    values exactly (tolerance 0) and l_n / k_n must be within 1 + epsilon on
    the diagonal, both off the same budget of indices.
    """
    k, l = _values(k), _values(l)
    if len(k) != len(l):
        raise ValueError(f"horizon mismatch: {len(k)} vs {len(l)}")
    epsilon = Fraction(epsilon)
    match_eps = Fraction(0) if equivalent else epsilon
    pairs = _greedy(k, l, match_eps)
    f, exceptional = _assemble(k, l, pairs)
    feasible = len(exceptional) <= exception_budget
    result = Rearrangement(feasible, epsilon, exception_budget, f, len(pairs), exceptional)
    if equivalent:
        diag_bad = [n for n in range(len(l)) if not compatible(k[n], l[n], epsilon)]
        result.equivalent = feasible and len(diag_bad) <= exception_budget
    elif not feasible:
        result.min_epsilon = _min_epsilon(k, l, exception_budget)
    assert not check_rearrangement(k, l, result)
    return result


def check_rearrangement(k, l, r: Rearrangement) -> list[str]:
    """Recheck every certificate inequality of ``r``; returns the failures."""
    k, l = _values(k), _values(l)
    bad = []
    if r.f is None:
        return bad
    imgs = r.f.images
    if len(set(imgs)) != len(imgs):
        bad.append("f not injective on the horizon")
    eps = Fraction(0) if r.equivalent is not None else r.epsilon
    for n in range(len(l)):
        if n in r.f.exceptional:
            continue
        if not compatible(k[imgs[n]], l[n], eps):
            bad.append(f"index {n}: k[{imgs[n]}]={k[imgs[n]]} vs l[{n}]={l[n]}")
    if r.feasible and len(r.f.exceptional) > r.budget:
        bad.append("exceptional set exceeds budget")
    return bad


@dataclass(frozen=True)
class LogGap:
    """Smallest |log k_n - log k_m| over n != m in each tail window [start, N)."""

    windows: tuple[int, ...]
    min_ratios: tuple[Fraction | None, ...]
    values: tuple[float | None, ...]

    @property
    def value(self) -> float:
        return self.values[0]

    @property
    def tail_value(self) -> float | None:
        return self.values[-1]


def _min_ratio(vals: Sequence[int]) -> Fraction | None:
    s = sorted(vals)
    if len(s) < 2:
        return None
    return min(Fraction(b, a) for a, b in zip(s, s[1:]))


def log_gap(k) -> LogGap:
    k = _values(k)
    if len(k) < 2:
        raise ValueError("log_gap needs horizon >= 2")
    windows = tail_windows(len(k))
    ratios = tuple(_min_ratio(k[w:]) for w in windows)
    values = tuple(None if r is None else math.log(r) for r in ratios)
    return LogGap(windows, ratios, values)


@dataclass
class OutShadow:
    """Compatibility graph on stage indices at tolerance epsilon."""

    horizon: int
    epsilon: Fraction
    edges: list[tuple[int, int]]
    components: list[list[int]]

    def is_discrete(self) -> bool:
        return not self.edges

    def histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(len(c) for c in self.components).items()))

    def neighbors(self, n: int) -> list[int]:
        out = [b for a, b in self.edges if a == n] + [a for a, b in self.edges if b == n]
        return sorted(out)

    def to_dot(self) -> str:
        lines = ["graph out_shadow {"]
        lines += [f"  {n};" for n in range(self.horizon)]
        lines += [f"  {a} -- {b};" for a, b in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_edge_list(self) -> str:
        return "".join(f"{a} {b}\n" for a, b in self.edges)


def out_shadow(k, epsilon: Fraction) -> OutShadow:
    """Edges {n, m}, n != m, whenever k_n and k_m are compatible at epsilon.

    Components are maximal runs of the sorted values whose consecutive ratios
    stay within 1 + epsilon.
    """
    k = _values(k)
    if not k:
        raise ValueError("out_shadow needs horizon >= 1")
    epsilon = Fraction(epsilon)
    order = sorted(range(len(k)), key=lambda i: (k[i], i))
    edges = []
    for p, i in enumerate(order):
        for j in order[p + 1:]:
            if not compatible(k[i], k[j], epsilon):
                break
            edges.append((min(i, j), max(i, j)))
    edges.sort()
    components, cur = [], [order[0]]
    for prev, nxt in zip(order, order[1:]):
        if compatible(k[prev], k[nxt], epsilon):
            cur.append(nxt)
        else:
            components.append(sorted(cur))
            cur = [nxt]
    components.append(sorted(cur))
    components.sort()
    return OutShadow(len(k), epsilon, edges, components)


def read_sequence(text: str, horizon: int | None = None) -> tuple[int, ...]:
    """One integer per line, or a generator spec such as ``geometric 1 2``."""
    stripped = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if stripped and stripped[0].split()[0] in ("affine", "geometric"):
        return ShapeSequence.parse(stripped[0], horizon).prefix
    return tuple(int(v) for v in stripped)
