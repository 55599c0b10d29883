"""Permutations of {0, ..., n-1} and the normalized Hamming metric.

Points are 0-based internally. The text formats (``parse`` / ``format_image``)
are 1-based.

Composition convention, fixed for the whole package: ``compose(p, q)`` is the
permutation ``i -> p(q(i))``, i.e. the right factor acts first. ``p * q`` is
the same thing.
"""
from __future__ import annotations

import functools
import re
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Permutation",
    "HammingValue",
    "identity",
    "compose",
    "inverse",
    "hamming",
    "conjugate",
    "direct_sum",
    "cycle_decomposition",
    "cycle_type",
    "from_cycles",
    "transposition",
    "random_permutation",
    "random_involution",
    "parse",
    "format_image",
    "format_cycles",
]

MAX_DEGREE = 2**32 - 1


class Permutation:
    """An immutable bijection of ``{0, ..., n-1}`` stored in image notation."""

    __slots__ = ("_image",)

    def __init__(self, image: Iterable[int], check: bool = True):
        img = tuple(int(x) for x in image)
        if check:
            n = len(img)
            if n == 0:
                raise ValueError("permutation degree must be at least 1")
            if n > MAX_DEGREE:
                raise ValueError(f"degree {n} exceeds {MAX_DEGREE}")
            seen = bytearray(n)
            for v in img:
                if v < 0 or v >= n or seen[v]:
                    raise ValueError(f"{list(img)!r} is not a permutation of 0..{n - 1}")
                seen[v] = 1
        self._image = img

    @property
    def image(self) -> tuple[int, ...]:
        return self._image

    @property
    def degree(self) -> int:
        return len(self._image)

    def __len__(self) -> int:
        return len(self._image)

    def __call__(self, i: int) -> int:
        return self._image[i]

    def __getitem__(self, i: int) -> int:
        return self._image[i]

    def __iter__(self):
        return iter(self._image)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Permutation):
            return self._image == other._image
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._image)

    def __lt__(self, other: "Permutation") -> bool:
        return (len(self), self._image) < (len(other), other._image)

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __invert__(self) -> "Permutation":
        return inverse(self)

    def __pow__(self, k: int) -> "Permutation":
        n = len(self._image)
        out = list(range(n))
        for cyc in cycle_decomposition(self):
            L = len(cyc)
            for pos, x in enumerate(cyc):
                out[x] = cyc[(pos + k) % L]
        return Permutation(out, check=False)

    def __repr__(self) -> str:
        return f"Permutation({list(self._image)!r})"

    def __str__(self) -> str:
        return format_image(self)

    def is_identity(self) -> bool:
        return all(i == v for i, v in enumerate(self._image))

    def is_involution(self) -> bool:
        img = self._image
        return all(img[v] == i for i, v in enumerate(img))

    def fixed_points(self) -> list[int]:
        return [i for i, v in enumerate(self._image) if i == v]

    def support(self) -> list[int]:
        return [i for i, v in enumerate(self._image) if i != v]

    def sign(self) -> int:
        odd = sum(len(c) - 1 for c in cycle_decomposition(self)) % 2
        return -1 if odd else 1

    def array(self) -> np.ndarray:
        return np.asarray(self._image, dtype=np.int64)


@functools.total_ordering
class HammingValue:
    """Exact normalized Hamming distance ``numerator / denominator``.

    Comparisons and equality are by rational value, so ``HammingValue(2, 4)``
    equals ``HammingValue(1, 2)`` and both compare with ``Fraction`` and ``int``.
    """

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: int, denominator: int):
        if denominator < 1:
            raise ValueError("denominator must be positive")
        if not 0 <= numerator <= denominator:
            raise ValueError("numerator must lie in [0, denominator]")
        self.numerator = numerator
        self.denominator = denominator

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.numerator / self.denominator

    @staticmethod
    def _coerce(other):
        if isinstance(other, HammingValue):
            return other.value
        if isinstance(other, (int, Fraction)):
            return other
        if isinstance(other, float):
            return Fraction(other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.value == o

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.value < o

    def __hash__(self) -> int:
        return hash(self.value)

    def __repr__(self) -> str:
        return f"HammingValue({self.numerator}/{self.denominator})"


def _check_same_degree(p: Permutation, q: Permutation) -> None:
    if len(p) != len(q):
        raise ValueError(f"degree mismatch: {len(p)} vs {len(q)}")


def identity(n: int) -> Permutation:
    if n < 1:
        raise ValueError("identity needs n >= 1")
    return Permutation(range(n), check=False)


def compose(p: Permutation, q: Permutation) -> Permutation:
    """``i -> p(q(i))``."""
    _check_same_degree(p, q)
    pi = p.image
    return Permutation([pi[j] for j in q.image], check=False)


def inverse(p: Permutation) -> Permutation:
    out = [0] * len(p)
    for i, v in enumerate(p.image):
        out[v] = i
    return Permutation(out, check=False)


def hamming(p: Permutation, q: Permutation) -> HammingValue:
    _check_same_degree(p, q)
    diff = sum(1 for a, b in zip(p.image, q.image) if a != b)
    return HammingValue(diff, len(p))


def conjugate(alpha: Permutation, sigma: Permutation) -> Permutation:
    """``alpha * sigma * alpha^-1``: maps ``alpha(i)`` to ``alpha(sigma(i))``."""
    _check_same_degree(alpha, sigma)
    a, s = alpha.image, sigma.image
    out = [0] * len(a)
    for i, v in enumerate(s):
        out[a[i]] = a[v]
    return Permutation(out, check=False)


def direct_sum(p: Permutation, q: Permutation) -> Permutation:
    n = len(p)
    return Permutation(p.image + tuple(v + n for v in q.image), check=False)


def cycle_decomposition(p: Permutation) -> list[list[int]]:
    """Non-trivial cycles, each starting at its minimum, ordered by minimum."""
    img = p.image
    seen = bytearray(len(img))
    cycles = []
    for start in range(len(img)):
        if seen[start] or img[start] == start:
            continue
        cyc = []
        x = start
        while not seen[x]:
            seen[x] = 1
            cyc.append(x)
            x = img[x]
        cycles.append(cyc)
    return cycles


def cycle_type(p: Permutation) -> tuple[int, ...]:
    """Lengths of the non-trivial cycles, descending. ``()`` is the identity."""
    return tuple(sorted((len(c) for c in cycle_decomposition(p)), reverse=True))


def from_cycles(n: int, cycles: Iterable[Sequence[int]]) -> Permutation:
    out = list(range(n))
    for cyc in cycles:
        L = len(cyc)
        for pos, x in enumerate(cyc):
            out[x] = cyc[(pos + 1) % L]
    return Permutation(out)


def transposition(n: int, i: int, j: int) -> Permutation:
    if i == j:
        raise ValueError("a transposition needs two distinct points")
    out = list(range(n))
    out[i], out[j] = j, i
    return Permutation(out)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_permutation(n: int, seed=None) -> Permutation:
    """Uniform element of Sym(n) (numpy's Fisher-Yates shuffle)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Permutation(_rng(seed).permutation(n).tolist(), check=False)


def random_involution(n: int, t: int, seed=None) -> Permutation:
    """Uniform involution of Sym(n) with exactly ``t`` transpositions.

    A uniform shuffle paired off as (s0 s1)(s2 s3)... hits every such
    involution exactly ``t! 2^t (n-2t)!`` times, hence uniformly.
    """
    if t < 0 or 2 * t > n:
        raise ValueError(f"need 0 <= 2t <= n, got n={n}, t={t}")
    order = _rng(seed).permutation(n).tolist()
    out = list(range(n))
    for k in range(t):
        a, b = order[2 * k], order[2 * k + 1]
        out[a], out[b] = b, a
    return Permutation(out, check=False)


_IMAGE_RE = re.compile(r"^\s*(\d+)\s*:\s*([\d\s]*)$")
_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse(text: str) -> Permutation:
    """Parse 1-based image notation ``"n: i1 ... in"`` or cycle notation.

    Cycle notation is ``"(a b c)(d e)"``, optionally prefixed by ``"n:"`` to
    fix the degree; without a prefix the degree is the largest point named.
    """
    text = text.strip()
    m = _IMAGE_RE.match(text)
    if m:
        n = int(m.group(1))
        vals = [int(v) - 1 for v in m.group(2).split()]
        if len(vals) != n:
            raise ValueError(f"expected {n} images, got {len(vals)}")
        return Permutation(vals)
    n = None
    body = text
    head, sep, rest = text.partition(":")
    if sep and head.strip().isdigit():
        n = int(head)
        body = rest.strip()
    if _CYCLE_RE.sub("", body).strip():
        raise ValueError(f"cannot parse permutation {text!r}")
    cycles = [[int(v) - 1 for v in c.split()] for c in _CYCLE_RE.findall(body)]
    cycles = [c for c in cycles if c]
    pts = [x for c in cycles for x in c]
    if any(x < 0 for x in pts) or len(pts) != len(set(pts)):
        raise ValueError(f"cycles in {text!r} are not disjoint positive points")
    if n is None:
        if not pts:
            raise ValueError("identity in cycle notation needs an 'n:' prefix")
        n = max(pts) + 1
    if pts and max(pts) >= n:
        raise ValueError(f"point {max(pts) + 1} exceeds degree {n}")
    return from_cycles(n, cycles)


def format_image(p: Permutation) -> str:
    return f"{len(p)}: " + " ".join(str(v + 1) for v in p.image)


def format_cycles(p: Permutation) -> str:
    cycles = cycle_decomposition(p)
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(x + 1) for x in c) + ")" for c in cycles)
