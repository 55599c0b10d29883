"""Slow brute-force ground truth for small degrees.

Nothing here calls the fast paths it is used to check: permutations are plain
tuples, the cut follows the definition literally, and every search is an
exhaustive loop over the symmetric group.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from .perm import Permutation

ENUM_CAP = 8
PAIR_CAP = 6


def enumerate_sym(n: int) -> Iterator[Permutation]:
    """All n! permutations of degree n in lexicographic order of images."""
    if n > ENUM_CAP:
        raise ValueError(f"enumerate_sym is capped at n <= {ENUM_CAP}")
    if n < 1:
        raise ValueError("n must be >= 1")
    for img in itertools.permutations(range(n)):
        yield Permutation(img, check=False)


def _tuples(n: int) -> list[tuple[int, ...]]:
    if n > ENUM_CAP:
        raise ValueError(f"oracle degree capped at {ENUM_CAP}")
    return list(itertools.permutations(range(n)))


def _mul(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    return tuple(p[j] for j in q)


def _dist(p: Sequence[int], q: Sequence[int]) -> int:
    return sum(1 for a, b in zip(p, q) if a != b)


def _ctype(p: Sequence[int]) -> tuple[int, ...]:
    seen = set()
    lengths = []
    for s in range(len(p)):
        if s in seen:
            continue
        L = 0
        x = s
        while x not in seen:
            seen.add(x)
            x = p[x]
            L += 1
        if L > 1:
            lengths.append(L)
    return tuple(sorted(lengths, reverse=True))


def _involutions(n: int, t: int) -> list[tuple[int, ...]]:
    out = []
    for p in _tuples(n):
        if all(p[p[i]] == i for i in range(n)) and sum(1 for i in range(n) if p[i] != i) == 2 * t:
            out.append(p)
    return out


def oracle_cut(sigma: Permutation, l: int) -> Permutation:
    """Iterate sigma from each i until the orbit lands back in {0..l-1}."""
    m = len(sigma)
    if not 1 <= l <= m:
        raise ValueError("need 1 <= l <= degree")
    out = []
    for i in range(l):
        x = sigma(i)
        while x >= l:
            x = sigma(x)
        out.append(x)
    return Permutation(out)


def oracle_min_conjugator(
    phi: Callable[[Permutation], Permutation], n: int, m: int
) -> tuple[Permutation, Fraction]:
    """Exhaustive minimizer over alpha in Sym(n) of

        sup_sigma d_{n v m}(phi(sigma) lifted, ad_alpha(sigma) lifted).

    Ties go to the lexicographically first alpha.
    """
    if n > 7:
        raise ValueError("oracle_min_conjugator is capped at n <= 7")
    top = max(n, m)
    sigmas = np.array(_tuples(n), dtype=np.int64)
    pad_n = np.arange(n, top, dtype=np.int64)
    pad_m = np.arange(m, top, dtype=np.int64)
    targets = np.array(
        [tuple(phi(Permutation(s.tolist(), check=False)).image) for s in sigmas], dtype=np.int64
    )
    targets = np.hstack([targets, np.broadcast_to(pad_m, (len(sigmas), top - m))])
    best_alpha, best = None, top + 1
    for alpha in sigmas:
        # ad_alpha(sigma) sends alpha[i] to alpha[sigma[i]]
        conj = np.empty((len(sigmas), n), dtype=np.int64)
        conj[:, alpha] = alpha[sigmas]
        conj = np.hstack([conj, np.broadcast_to(pad_n, (len(sigmas), top - n))])
        worst = int((conj != targets).sum(axis=1).max())
        if worst < best:
            best, best_alpha = worst, alpha
            if best == 0:
                break
    return Permutation(best_alpha.tolist()), Fraction(best, top)


def oracle_squared_class(n: int, t: int) -> set[tuple[int, ...]]:
    """Cycle types of all products ab with a, b involutions with t transpositions."""
    if n > 7:
        raise ValueError("oracle_squared_class is capped at n <= 7")
    C = _involutions(n, t)
    return {_ctype(_mul(a, b)) for a in C for b in C}


def oracle_squared_set(n: int, t: int) -> set[tuple[int, ...]]:
    C = _involutions(n, t)
    return {_mul(a, b) for a in C for b in C}


def oracle_oplus(n: int, t1: int, t2: int) -> Fraction:
    """max over a in C_t1, b in C_t2 of d(1, ab), with no symmetry reduction."""
    C1, C2 = _involutions(n, t1), _involutions(n, t2)
    ident = tuple(range(n))
    return Fraction(max(_dist(ident, _mul(a, b)) for a in C1 for b in C2), n)


def oracle_inclusion_defect(n: int, t1: int, t2: int) -> Fraction:
    """max over x in C_t1^2 of min over y in C_t2^2 of d(x, y)."""
    S1, S2 = oracle_squared_set(n, t1), oracle_squared_set(n, t2)
    return Fraction(max(min(_dist(x, y) for y in S2) for x in S1), n)


def oracle_two_conjugates(b: Permutation, t: int) -> tuple[Fraction, Permutation, Permutation]:
    """min over involutions x, y with t transpositions of d(b, xy), with a witness."""
    n = len(b)
    if n > PAIR_CAP:
        raise ValueError(f"oracle_two_conjugates is capped at n <= {PAIR_CAP}")
    C = _involutions(n, t)
    target = b.image
    best = None
    for x in C:
        for y in C:
            d = _dist(target, _mul(x, y))
            if best is None or d < best[0]:
                best = (d, x, y)
                if d == 0:
                    return Fraction(0), Permutation(x), Permutation(y)
    d, x, y = best
    return Fraction(d, n), Permutation(x), Permutation(y)


def oracle_neg_slack(a: Permutation) -> Fraction:
    """Smallest slack over involutions b commuting with a.

    The slack of b is max(|d(1,b) - (1 - d(1,a))|, 1 - d(1,ab)).
    """
    n = len(a)
    if n > PAIR_CAP:
        raise ValueError(f"oracle_neg_slack is capped at n <= {PAIR_CAP}")
    ai = a.image
    ident = tuple(range(n))
    da = Fraction(_dist(ident, ai), n)
    best = None
    for b in _tuples(n):
        if any(b[b[i]] != i for i in range(n)):
            continue
        if _mul(ai, b) != _mul(b, ai):
            continue
        db = Fraction(_dist(ident, b), n)
        dab = Fraction(_dist(ident, _mul(ai, b)), n)
        slack = max(abs(db - (1 - da)), 1 - dab)
        if best is None or slack < best:
            best = slack
    return best


def oracle_hom_defect(fn: Callable[[Permutation], Permutation], k: int) -> Fraction:
    if k > PAIR_CAP:
        raise ValueError(f"oracle_hom_defect is capped at k <= {PAIR_CAP}")
    G = _tuples(k)
    table = {g: fn(Permutation(g, check=False)).image for g in G}
    l = len(next(iter(table.values())))
    worst = max(_dist(_mul(table[x], table[y]), table[_mul(x, y)]) for x in G for y in G)
    return Fraction(worst, l)


def oracle_surj_defect(fn: Callable[[Permutation], Permutation], k: int, l: int) -> Fraction:
    if k > 7 or l > 7:
        raise ValueError("oracle_surj_defect is capped at degree 7")
    image = {fn(Permutation(g, check=False)).image for g in _tuples(k)}
    return Fraction(max(min(_dist(x, y) for y in image) for x in _tuples(l)), l)


def oracle_max_matching(k: Sequence[int], l: Sequence[int], epsilon: Fraction) -> int:
    """Largest number of n with k[f(n)], l[n] within ratio 1 + epsilon, over all bijections f."""
    N = len(l)
    if N > 8:
        raise ValueError("oracle_max_matching is capped at horizon 8")
    eps = Fraction(epsilon)

    def ok(a, b):
        return max(a, b) <= (1 + eps) * min(a, b)

    return max(sum(1 for n in range(N) if ok(k[f[n]], l[n])) for f in itertools.permutations(range(N)))
