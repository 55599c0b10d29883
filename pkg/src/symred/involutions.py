"""Conjugacy classes of involutions and their finite lattice operations.

An involution class of Sym(n) is determined by its number ``t`` of
transpositions; its distance to the identity is ``2t/n``. This module measures
at fixed n the operations that the reduced product sees in the limit: the
order through squared classes, truncated addition, complement, and writing an
arbitrary permutation as a product of two conjugates of an involution.
"""
from __future__ import annotations

import csv
import functools
import io
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import _symtab
from .perm import (
    Permutation,
    compose,
    conjugate,
    cycle_decomposition,
    cycle_type,
    hamming,
    identity,
    random_involution,
)

EXHAUSTIVE_CAP = 7


@dataclass(frozen=True, order=True)
class InvolutionClass:
    n: int
    t: int

    def __post_init__(self):
        if self.n < 1 or self.t < 0 or 2 * self.t > self.n:
            raise ValueError(f"no involution class with n={self.n}, t={self.t}")

    @property
    def d1(self) -> Fraction:
        return Fraction(2 * self.t, self.n)

    def representative(self) -> Permutation:
        """(0 1)(2 3)... packed at the front."""
        img = list(range(self.n))
        for i in range(self.t):
            img[2 * i], img[2 * i + 1] = 2 * i + 1, 2 * i
        return Permutation(img, check=False)

    def sample(self, seed=None) -> Permutation:
        return random_involution(self.n, self.t, seed)

    def members(self) -> Iterator[Permutation]:
        """Every involution of the class, each once."""
        n, t = self.n, self.t

        def rec(free: list[int], left: int, img: list[int]):
            if left == 0:
                yield Permutation(img, check=False)
                return
            if len(free) < 2 * left:
                return
            first, rest = free[0], free[1:]
            # first is fixed
            yield from rec(rest, left, img)
            for j, partner in enumerate(rest):
                img[first], img[partner] = partner, first
                yield from rec(rest[:j] + rest[j + 1:], left - 1, img)
                img[first], img[partner] = first, partner

        yield from rec(list(range(n)), t, list(range(n)))


def d1(C: InvolutionClass) -> Fraction:
    return C.d1


def class_of(a: Permutation) -> InvolutionClass:
    if not a.is_involution():
        raise ValueError("not an involution")
    return InvolutionClass(len(a), len(a.support()) // 2)


def _check_cap(n: int) -> None:
    if n > EXHAUSTIVE_CAP:
        raise ValueError(f"exhaustive class computations are capped at n <= {EXHAUSTIVE_CAP}")


@functools.lru_cache(maxsize=None)
def squared_class(C: InvolutionClass) -> frozenset[tuple[int, ...]]:
    """Cycle types occurring in C^2 = {ab : a, b in C}.

    C^2 is closed under conjugation, so fixing a at the canonical
    representative and running b over C gives every type.
    """
    _check_cap(C.n)
    a = C.representative()
    return frozenset(cycle_type(compose(a, b)) for b in C.members())


def max_support(C: InvolutionClass) -> Fraction:
    """max over x in C^2 of d(1, x)."""
    return Fraction(max(sum(ct) for ct in squared_class(C)), C.n)


def oplus_empirical(C1: InvolutionClass, C2: InvolutionClass, samples: int = 0, seed: int = 0) -> Fraction:
    """max over a in C1, b in C2 of d(1, ab); compare with min(1, d1(C1) + d1(C2)).

    Exhaustive (with a fixed to the canonical representative) for n <= 7;
    otherwise pass ``samples`` and the result is a lower bound.
    """
    if C1.n != C2.n:
        raise ValueError("classes of different degrees")
    a = C1.representative()
    if C1.n <= EXHAUSTIVE_CAP and samples == 0:
        return max(hamming(identity(C1.n), compose(a, b)).value for b in C2.members())
    if samples <= 0:
        raise ValueError(f"n = {C1.n} is above the exhaustive cap; pass samples > 0")
    rng = np.random.default_rng(seed)
    return max(hamming(identity(C1.n), compose(a, C2.sample(rng))).value for _ in range(samples))


def oplus_predicted(C1: InvolutionClass, C2: InvolutionClass) -> Fraction:
    return min(Fraction(1), C1.d1 + C2.d1)


@functools.lru_cache(maxsize=None)
def _types_of_sym(n: int) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    G = _symtab.sym_array(n)
    return G, [cycle_type(Permutation(row.tolist(), check=False)) for row in G]


def _representative_of_type(n: int, ct: tuple[int, ...]) -> Permutation:
    cycles, pos = [], 0
    for L in ct:
        cycles.append(list(range(pos, pos + L)))
        pos += L
    img = list(range(n))
    for cyc in cycles:
        for i, x in enumerate(cyc):
            img[x] = cyc[(i + 1) % len(cyc)]
    return Permutation(img, check=False)


@dataclass(frozen=True)
class InclusionDefect:
    value: Fraction
    witness: Permutation | None  # element of C1^2 realizing the max


def inclusion_defect(C1: InvolutionClass, C2: InvolutionClass) -> InclusionDefect:
    """max over x in C1^2 of min over y in C2^2 of d(x, y).

    Zero exactly when C1^2 is contained in C2^2. Both sets are unions of
    conjugacy classes and the metric is bi-invariant, so one x per cycle type
    suffices.
    """
    if C1.n != C2.n:
        raise ValueError("classes of different degrees")
    n = C1.n
    _check_cap(n)
    G, types = _types_of_sym(n)
    allowed = squared_class(C2)
    mask = np.array([ct in allowed for ct in types])
    S2 = G[mask].astype(np.int64)
    best_val, best_x = Fraction(0), None
    for ct in sorted(squared_class(C1)):
        x = _representative_of_type(n, ct)
        d = int((S2 != x.array()[None, :]).sum(axis=1).min())
        if best_x is None or Fraction(d, n) > best_val:
            best_val, best_x = Fraction(d, n), x
    return InclusionDefect(best_val, best_x)


# ---------------------------------------------------------------------------
# complement witnesses


@dataclass(frozen=True)
class NegWitness:
    """Certificate for b as a complement of the involution a.

    ``slack`` is the exact worst of |d(1,b) - (1 - d(1,a))| and 1 - d(1,ab).
    """

    a: Permutation
    b: Permutation | None
    feasible: bool
    d1_a: Fraction
    d1_b: Fraction | None
    d1_ab: Fraction | None
    slack: Fraction | None
    reason: str = ""


def neg_witness(a: Permutation, epsilon: Fraction) -> NegWitness:
    """An involution b commuting with a with d(1,b) ~ 1 - d(1,a) and d(1,ab) ~ 1.

    b pairs up the fixed points of a. Any involution commuting with a
    permutes the fixed points of a, so with an odd number of them one point
    stays fixed by ab; the resulting slack of 1/n is then optimal.
    """
    n = len(a)
    if not a.is_involution():
        raise ValueError("a must be an involution")
    ident = identity(n)
    da = hamming(ident, a).value
    fixed = a.fixed_points()
    img = list(range(n))
    for i in range(0, len(fixed) - 1, 2):
        p, q = fixed[i], fixed[i + 1]
        img[p], img[q] = q, p
    b = Permutation(img, check=False)
    db = hamming(ident, b).value
    dab = hamming(ident, compose(a, b)).value
    slack = max(abs(db - (1 - da)), 1 - dab)
    ok = slack <= Fraction(epsilon)
    reason = "" if ok else f"parity obstruction: slack {slack} exceeds epsilon"
    return NegWitness(a, b, ok, da, db, dab, slack, reason)


# ---------------------------------------------------------------------------
# products of two conjugates


def _type_counts(lengths: list[int]) -> tuple[bool, int, int]:
    """(is_even, minimum t, maximum t) for exact factorization, from all cycle lengths."""
    n = sum(lengths)
    c = len(lengths)
    if (n - c) % 2:
        return False, 0, -1
    base = (n - c) // 2
    pairs = sum(m // 2 for m in Counter(lengths).values())
    return True, base, base + pairs


def _all_cycles(p: Permutation) -> list[list[int]]:
    """All cycles including fixed points, each starting at its minimum."""
    cycles = cycle_decomposition(p)
    fixed = [[i] for i in p.fixed_points()]
    return sorted(cycles + fixed, key=lambda c: c[0])


def factor_range(b: Permutation) -> tuple[bool, int, int]:
    """Whether b is even, and the range of t with b in C_t^2 (empty if odd)."""
    return _type_counts([len(c) for c in _all_cycles(b)])


def _factor_exact(b: Permutation, t: int) -> tuple[Permutation, Permutation]:
    """Involutions x, y with t transpositions each and x * y = b.

    Unpaired cycles factor as two reflections of their dihedral group; pairs
    of equal-length cycles factor as two fixed-point-free involutions on
    their union, which raises both counts by one per pair.
    """
    n = len(b)
    _, base, _ = factor_range(b)
    need = t - base
    by_len: dict[int, list[list[int]]] = {}
    for cyc in _all_cycles(b):
        by_len.setdefault(len(cyc), []).append(cyc)
    pairs, singles = [], []
    for L in sorted(by_len):
        cycs = by_len[L]
        while need > 0 and len(cycs) >= 2:
            pairs.append((cycs[0], cycs[1]))
            cycs = cycs[2:]
            need -= 1
        singles.extend(cycs)
    if need:
        raise ValueError("t outside the exact factorization range")
    x = list(range(n))
    y = list(range(n))
    flip = 0
    for cyc in sorted(singles, key=lambda c: c[0]):
        k = len(cyc)
        if k == 1:
            continue
        o = 0
        if k % 2 == 0:
            o, flip = flip, 1 - flip
        for i in range(k):
            x[cyc[i]] = cyc[(1 + o - i) % k]
            y[cyc[i]] = cyc[(o - i) % k]
    for A, B in pairs:
        k = len(A)
        for i in range(k):
            y[A[i]] = B[(-i) % k]
            y[B[(-i) % k]] = A[i]
            x[A[i]] = B[(1 - i) % k]
            x[B[(1 - i) % k]] = A[i]
    return Permutation(x), Permutation(y)


def _conjugator_to(x: Permutation, t: int) -> Permutation:
    """g with conjugate(g, canonical C_t representative) == x."""
    n = len(x)
    img = [0] * n
    pos = 0
    for cyc in cycle_decomposition(x):
        img[2 * pos], img[2 * pos + 1] = cyc[0], cyc[1]
        pos += 1
    if pos != t:
        raise ValueError("x does not have t transpositions")
    for j, f in enumerate(x.fixed_points()):
        img[2 * t + j] = f
    return Permutation(img)


def _transposition_moves(b: Permutation) -> Iterator[tuple[int, int]]:
    """One representative transposition (i, j) per cycle-type effect of b * (i j)."""
    cycles = _all_cycles(b)
    seen_merge = set()
    for a in range(len(cycles)):
        for c in range(a + 1, len(cycles)):
            key = tuple(sorted((len(cycles[a]), len(cycles[c]))))
            if key in seen_merge:
                continue
            seen_merge.add(key)
            yield cycles[a][0], cycles[c][0]
    seen_split = set()
    for cyc in cycles:
        k = len(cyc)
        if k < 2 or k in seen_split:
            continue
        seen_split.add(k)
        for p in range(1, k // 2 + 1):
            yield cyc[0], cyc[p]


@dataclass(frozen=True)
class TwoConjugates:
    """b ~ conjugate(g, a) * conjugate(h, a) for the canonical a with t transpositions.

    ``error`` is the exact distance of the product from b. When infeasible,
    ``error_lower_bound`` is a proven lower bound for every factorization.
    """

    b: Permutation
    t: int
    feasible: bool
    g: Permutation | None
    h: Permutation | None
    error: Fraction | None
    min_t: int | None
    max_t: int | None
    error_lower_bound: Fraction
    reason: str = ""

    def product(self) -> Permutation:
        a = InvolutionClass(len(self.b), self.t).representative()
        return compose(conjugate(self.g, a), conjugate(self.h, a))


def two_conjugates(b: Permutation, t: int, epsilon: Fraction = Fraction(0)) -> TwoConjugates:
    """Write b, up to ``epsilon``, as a product of two conjugates of the canonical
    involution with t transpositions.

    Exact when b is even and t lies in the range returned by ``factor_range``.
    Otherwise the closest product reachable by one transposition correction
    (distance 2/n) is tried. Products of two conjugates are even, so even b
    outside the range is at distance >= 3/n from every product and odd b at
    distance 2/n or >= 4/n; the feasibility verdict is exact for
    epsilon < 3/n.
    """
    n = len(b)
    epsilon = Fraction(epsilon)
    if t < 0 or 2 * t > n:
        raise ValueError(f"no involution class with n={n}, t={t}")
    even, lo, hi = factor_range(b)
    a = InvolutionClass(n, t).representative()

    def build(target: Permutation, err: Fraction, lo_, hi_) -> TwoConjugates:
        x, y = _factor_exact(target, t)
        g, h = _conjugator_to(x, t), _conjugator_to(y, t)
        assert compose(conjugate(g, a), conjugate(h, a)) == target
        return TwoConjugates(b, t, err <= epsilon, g, h, err, lo_, hi_, err,
                             "" if err <= epsilon else f"best error {err} exceeds epsilon")

    if even:
        if lo <= t <= hi:
            return build(b, Fraction(0), lo, hi)
        reason = f"t={t} below minimum {lo}" if t < lo else f"t={t} above maximum {hi} (no room for padding)"
        return TwoConjugates(b, t, False, None, None, None, lo, hi, Fraction(min(3, n), n), reason)
    for i, j in _transposition_moves(b):
        img = list(b.image)
        img[i], img[j] = img[j], img[i]
        z = Permutation(img, check=False)  # b * (i j)
        ev, zlo, zhi = factor_range(z)
        if ev and zlo <= t <= zhi:
            return build(z, Fraction(2, n), None, None)
    return TwoConjugates(b, t, False, None, None, None, None, None, Fraction(min(4, n), n),
                         "odd permutation with no one-transposition correction in C_t^2")


# ---------------------------------------------------------------------------
# class-pair tables


@dataclass(frozen=True)
class ClassPairRow:
    n: int
    t1: int
    t2: int
    oplus: Fraction
    predicted: Fraction
    inclusion_defect: Fraction
    witness_type: tuple[int, ...]
    d1_leq: bool


def class_pair_table(n_max: int, n_min: int = 1) -> list[ClassPairRow]:
    _check_cap(n_max)
    rows = []
    for n in range(n_min, n_max + 1):
        for t1 in range(n // 2 + 1):
            for t2 in range(n // 2 + 1):
                C1, C2 = InvolutionClass(n, t1), InvolutionClass(n, t2)
                inc = inclusion_defect(C1, C2)
                rows.append(ClassPairRow(
                    n, t1, t2, oplus_empirical(C1, C2), oplus_predicted(C1, C2),
                    inc.value, cycle_type(inc.witness) if inc.witness is not None else (),
                    C1.d1 <= C2.d1,
                ))
    return rows


def format_type(ct: tuple[int, ...]) -> str:
    return "+".join(str(k) for k in ct) if ct else "1"


def class_pair_csv(rows: list[ClassPairRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "t1", "t2", "oplus_empirical", "oplus_predicted", "inclusion_defect",
                "witness_type", "d1_leq"])
    for r in rows:
        w.writerow([r.n, r.t1, r.t2, r.oplus, r.predicted, r.inclusion_defect,
                    format_type(r.witness_type), int(r.d1_leq)])
    return buf.getvalue()
