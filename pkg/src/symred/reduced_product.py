"""Finite-horizon representatives of elements of Sym[(k_n)].

Everything here works on a finite prefix of the stage sequence. Limit
statements (limsup, lim) become tail-window estimates, and each report says
so through a ``horizon_estimate`` flag.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _symtab
from .cut_lift import cut, updown
from .perm import Permutation, conjugate, format_image, hamming, identity, parse

EXHAUSTIVE_CAP = 7
PAIRWISE_CAP = 6


# ---------------------------------------------------------------------------
# shape sequences


@dataclass(frozen=True)
class TailRule:
    """Closed-form stage sizes: ``affine`` a*n + b, or ``geometric`` ceil(a * r**n)."""

    kind: str
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if self.kind not in ("affine", "geometric"):
            raise ValueError(f"unknown tail rule {self.kind!r}")
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def __call__(self, n: int) -> int:
        if self.kind == "affine":
            return math.ceil(self.a * n + self.b)
        return math.ceil(self.a * self.b**n)

    def is_unbounded(self) -> bool:
        """Monotone and tending to infinity."""
        if self.kind == "affine":
            return self.a > 0
        return self.a > 0 and self.b > 1

    @classmethod
    def parse(cls, text: str) -> "TailRule":
        parts = text.split()
        if len(parts) != 3:
            raise ValueError(f"expected 'affine a b' or 'geometric a r', got {text!r}")
        return cls(parts[0], Fraction(parts[1]), Fraction(parts[2]))

    def __str__(self) -> str:
        return f"{self.kind} {self.a} {self.b}"


@dataclass(frozen=True)
class ShapeSequence:
    """Stage degrees ``k_0, ..., k_{N-1}`` with an optional rule beyond the prefix."""

    prefix: tuple[int, ...]
    tail_rule: TailRule | None = None

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(k) for k in self.prefix))
        if any(k < 1 for k in self.prefix):
            raise ValueError("stage degrees must be >= 1")

    @classmethod
    def from_rule(cls, rule: TailRule | str, horizon: int) -> "ShapeSequence":
        if isinstance(rule, str):
            rule = TailRule.parse(rule)
        return cls(tuple(rule(n) for n in range(horizon)), rule)

    @property
    def horizon(self) -> int:
        return len(self.prefix)

    def __len__(self) -> int:
        return len(self.prefix)

    def __getitem__(self, n: int) -> int:
        if 0 <= n < len(self.prefix):
            return self.prefix[n]
        if n >= 0 and self.tail_rule is not None:
            k = self.tail_rule(n)
            if k < 1:
                raise ValueError(f"tail rule gives degree {k} at stage {n}")
            return k
        raise IndexError(f"stage {n} beyond horizon {len(self.prefix)} and no tail rule")

    def __iter__(self):
        return iter(self.prefix)

    def extend(self, horizon: int) -> "ShapeSequence":
        return ShapeSequence(tuple(self[n] for n in range(horizon)), self.tail_rule)

    def is_unbounded(self) -> bool:
        return self.tail_rule is not None and self.tail_rule.is_unbounded()

    def require_unbounded(self) -> None:
        if not self.is_unbounded():
            raise ValueError("experiment needs k_n -> infinity: declare a monotone unbounded tail rule")

    @classmethod
    def parse(cls, text: str, horizon: int | None = None) -> "ShapeSequence":
        """A generator spec (``affine a b`` / ``geometric a r``) or whitespace separated integers."""
        text = text.strip()
        if text.split()[0] in ("affine", "geometric"):
            if horizon is None:
                raise ValueError("a generator spec needs a horizon")
            return cls.from_rule(text, horizon)
        return cls(tuple(int(v) for v in text.split()))


# ---------------------------------------------------------------------------
# truncated elements


@dataclass(frozen=True)
class TruncatedElement:
    shape: ShapeSequence
    stages: tuple[Permutation, ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        for n, p in enumerate(self.stages):
            if len(p) != self.shape[n]:
                raise ValueError(f"stage {n} has degree {len(p)}, shape says {self.shape[n]}")

    @property
    def horizon(self) -> int:
        return len(self.stages)

    def __getitem__(self, n: int) -> Permutation:
        return self.stages[n]

    @classmethod
    def identity(cls, shape: ShapeSequence) -> "TruncatedElement":
        return cls(shape, tuple(identity(k) for k in shape.prefix))

    def dumps(self) -> str:
        lines = ["shape: " + " ".join(str(k) for k in self.shape.prefix[: self.horizon])]
        lines += [format_image(p) for p in self.stages]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "TruncatedElement":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines or not lines[0].startswith("shape:"):
            raise ValueError("missing 'shape:' header line")
        shape = ShapeSequence(tuple(int(v) for v in lines[0][len("shape:"):].split()))
        stages = tuple(parse(ln) for ln in lines[1:])
        if len(stages) != shape.horizon:
            raise ValueError(f"header lists {shape.horizon} stages, file has {len(stages)}")
        return cls(shape, stages)


def stage_distances(a: TruncatedElement, b: TruncatedElement) -> list[Fraction]:
    if a.shape.prefix[: a.horizon] != b.shape.prefix[: b.horizon] or a.horizon != b.horizon:
        raise ValueError("shape mismatch")
    return [hamming(x, y).value for x, y in zip(a.stages, b.stages)]


# ---------------------------------------------------------------------------
# index sets and the pseudometrics d^S


@dataclass(frozen=True)
class IndexSet:
    """A subset of the stage indices.

    ``explicit`` sets are finite and therefore refused by ``d_S_profile``;
    ``progression`` (start + step*j) and ``periodic`` (residues mod period)
    describe infinite sets.
    """

    kind: str
    members: tuple[int, ...] = ()
    start: int = 0
    step: int = 1

    @classmethod
    def explicit(cls, members: Iterable[int]) -> "IndexSet":
        return cls("explicit", tuple(sorted(set(members))))

    @classmethod
    def progression(cls, start: int, step: int) -> "IndexSet":
        if step < 1 or start < 0:
            raise ValueError("progression needs start >= 0 and step >= 1")
        return cls("progression", start=start, step=step)

    @classmethod
    def periodic(cls, residues: Iterable[int], period: int) -> "IndexSet":
        res = tuple(sorted({r % period for r in residues}))
        if not res:
            raise ValueError("periodic index set needs at least one residue")
        return cls("periodic", members=res, step=period)

    @classmethod
    def evens(cls) -> "IndexSet":
        return cls.progression(0, 2)

    @classmethod
    def odds(cls) -> "IndexSet":
        return cls.progression(1, 2)

    @classmethod
    def all(cls) -> "IndexSet":
        return cls.progression(0, 1)

    def is_infinite(self) -> bool:
        return self.kind != "explicit"

    def __contains__(self, n: int) -> bool:
        if self.kind == "explicit":
            return n in self.members
        if self.kind == "progression":
            return n >= self.start and (n - self.start) % self.step == 0
        return n % self.step in self.members

    def within(self, horizon: int) -> list[int]:
        return [n for n in range(horizon) if n in self]


@dataclass(frozen=True)
class DSProfile:
    """``values[j]`` = sup of the stage distances over members of S in [j, N)."""

    values: tuple[Fraction, ...]
    window_starts: tuple[int, ...]
    limsup_estimate: Fraction
    horizon_estimate: bool = True


def tail_windows(horizon: int) -> tuple[int, ...]:
    return tuple(sorted({0, horizon // 4, horizon // 2, (3 * horizon) // 4}))


def d_S_profile(a: TruncatedElement, b: TruncatedElement, S: IndexSet) -> DSProfile:
    if not S.is_infinite():
        raise ValueError("d^S needs an infinite index set; finite sets are trivial modulo Fin")
    dist = stage_distances(a, b)
    N = len(dist)
    values = [Fraction(0)] * N
    running = Fraction(0)
    for j in range(N - 1, -1, -1):
        if j in S and dist[j] > running:
            running = dist[j]
        values[j] = running
    windows = tail_windows(N)
    est = values[windows[-1]] if N else Fraction(0)
    return DSProfile(tuple(values), windows, est)


# ---------------------------------------------------------------------------
# almost permutations and psi_f


@dataclass(frozen=True)
class AlmostPermutation:
    """A self-map of the naturals known on ``[0, N)``.

    ``images[n]`` is f(n) for n < N; beyond the horizon ``tail_shift`` (if set)
    gives f(n) = n + tail_shift. ``exceptional`` is the finite set off which f
    is injective and ``co_range`` the finite set of values f misses.
    """

    images: tuple[int, ...]
    exceptional: frozenset[int] = frozenset()
    co_range: frozenset[int] = frozenset()
    tail_shift: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(int(v) for v in self.images))
        object.__setattr__(self, "exceptional", frozenset(self.exceptional))
        object.__setattr__(self, "co_range", frozenset(self.co_range))
        if any(v < 0 for v in self.images):
            raise ValueError("almost permutation values must be natural numbers")

    @property
    def horizon(self) -> int:
        return len(self.images)

    def __call__(self, n: int) -> int:
        if n < len(self.images):
            return self.images[n]
        if self.tail_shift is not None:
            return n + self.tail_shift
        raise IndexError(f"f({n}) is beyond the horizon")

    @classmethod
    def identity(cls, horizon: int) -> "AlmostPermutation":
        return cls(tuple(range(horizon)), tail_shift=0)

    @classmethod
    def shift(cls, c: int, horizon: int) -> "AlmostPermutation":
        """f(n) = n + c, with the first -c points sent to 0 when c < 0."""
        if c >= 0:
            return cls(tuple(n + c for n in range(horizon)), co_range=frozenset(range(c)), tail_shift=c)
        d = -c
        imgs = tuple(max(n - d, 0) for n in range(horizon))
        return cls(imgs, exceptional=frozenset(range(min(d, horizon))), tail_shift=c)

    def compose(self, g: "AlmostPermutation") -> "AlmostPermutation":
        """``n -> self(g(n))`` on the horizon of ``g`` (where defined)."""
        imgs = []
        for n in range(g.horizon):
            imgs.append(self(g(n)))
        shift = None
        if self.tail_shift is not None and g.tail_shift is not None:
            shift = self.tail_shift + g.tail_shift
        exc = set(g.exceptional) | {n for n in range(g.horizon) if g(n) in self.exceptional}
        return AlmostPermutation(tuple(imgs), frozenset(exc), tail_shift=shift)

    def violations(self) -> list[str]:
        """Horizon checks of injectivity off ``exceptional`` and of the co-range."""
        problems = []
        seen: dict[int, int] = {}
        for n, v in enumerate(self.images):
            if n in self.exceptional:
                continue
            if v in seen:
                problems.append(f"f({seen[v]}) = f({n}) = {v} outside the exceptional set")
            else:
                seen[v] = n
        N = self.horizon
        if self.tail_shift is not None:
            # values >= N + tail_shift are hit by the tail beyond the horizon
            top = N + self.tail_shift
        else:
            top = N - sum(1 for v in self.images if v >= N)
        hit = set(self.images)
        for v in range(max(0, top)):
            if v not in hit and v not in self.co_range:
                problems.append(f"value {v} missed but not declared in the co-range")
        return problems

    def disagreements(self, other: "AlmostPermutation") -> list[int]:
        N = min(self.horizon, other.horizon)
        return [n for n in range(N) if self(n) != other(n)]

    def to_json(self) -> dict:
        return {
            "f": list(self.images),
            "exceptional": sorted(self.exceptional),
            "co_range": sorted(self.co_range),
            "tail_shift": self.tail_shift,
        }


@dataclass(frozen=True)
class PsiResult:
    element: TruncatedElement
    flagged: tuple[tuple[int, str], ...]
    ratios: tuple[Fraction | None, ...]
    ratio_certificate: Fraction
    horizon_estimate: bool = True


def psi_f(
    a: TruncatedElement,
    f: AlmostPermutation,
    target: ShapeSequence,
    horizon: int | None = None,
) -> PsiResult:
    """Stage n of the result is ``updown(a[f(n)], l_n)``.

    Stages with f(n) outside the horizon of ``a``, or n in the exceptional set
    of f, get the identity and a flag. ``ratio_certificate`` is the largest
    |k_{f(n)} / l_n - 1| over the unflagged stages.
    """
    if horizon is None:
        horizon = target.horizon
    stages = []
    flags = []
    ratios: list[Fraction | None] = []
    worst = Fraction(0)
    for n in range(horizon):
        l = target[n]
        try:
            src = f(n)
        except IndexError:
            src = None
        if src is None or src >= a.horizon:
            stages.append(identity(l))
            flags.append((n, "out-of-horizon"))
            ratios.append(None)
            continue
        if n in f.exceptional:
            stages.append(identity(l))
            flags.append((n, "exceptional"))
            ratios.append(None)
            continue
        stages.append(updown(a[src], l))
        r = Fraction(a.shape[src], l)
        ratios.append(r)
        worst = max(worst, abs(r - 1))
    elem = TruncatedElement(target.extend(horizon), tuple(stages))
    return PsiResult(elem, tuple(flags), tuple(ratios), worst)


# ---------------------------------------------------------------------------
# stagewise maps and their defects


@dataclass(frozen=True)
class StageMap:
    """A family of maps h_n: Sym(source[n]) -> Sym(target[n])."""

    source: ShapeSequence
    target: ShapeSequence
    fn: Callable[[int, Permutation], Permutation]
    name: str = "h"

    def __call__(self, n: int, x: Permutation) -> Permutation:
        return self.fn(n, x)

    def at(self, n: int) -> Callable[[Permutation], Permutation]:
        return lambda x: self.fn(n, x)


def updown_family(source: ShapeSequence, target: ShapeSequence) -> StageMap:
    return StageMap(source, target, lambda n, x: updown(x, target[n]), "updown")


def cut_family(source: ShapeSequence) -> StageMap:
    """h_n = cut to degree k_n - 1."""
    target = ShapeSequence(tuple(max(k - 1, 1) for k in source.prefix))
    return StageMap(source, target, lambda n, x: cut(x, target[n]), "cut")


def conjugation_family(
    source: ShapeSequence, target: ShapeSequence, alphas: Sequence[Permutation]
) -> StageMap:
    """h_n(x) = ad_{alpha_n}(updown(x, l_n))."""
    return StageMap(
        source, target, lambda n, x: conjugate(alphas[n], updown(x, target[n])), "conjugation"
    )


def constant_family(source: ShapeSequence, target: ShapeSequence) -> StageMap:
    return StageMap(source, target, lambda n, x: identity(target[n]), "constant")


@dataclass(frozen=True)
class DefectValue:
    """A measured defect. ``bound`` says how it relates to the true supremum."""

    value: Fraction
    bound: str  # exact | lower | upper | estimate
    samples: int | None = None

    def __float__(self) -> float:
        return float(self.value)


def stage_rng(seed: int, n: int, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, n, salt])


def _random_rows(rng: np.random.Generator, count: int, k: int) -> np.ndarray:
    return rng.permuted(np.tile(np.arange(k, dtype=np.int64), (count, 1)), axis=1)


def _resolve_mode(mode: str, size: int, cap: int) -> str:
    if mode == "auto":
        return "exhaustive" if size <= cap else "sampled"
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exhaustive" and size > cap:
        raise ValueError(f"exhaustive mode is capped at degree {cap}, got {size}")
    return mode


def hom_defect(
    h: StageMap, n: int, mode: str = "auto", samples: int = 2000, seed: int = 0
) -> DefectValue:
    """sup over x, y of d(h(x)h(y), h(xy)) at stage n."""
    k, l = h.source[n], h.target[n]
    mode = _resolve_mode(mode, k, EXHAUSTIVE_CAP)
    hn = h.at(n)
    if mode == "exhaustive":
        G = _symtab.sym_array(k).astype(np.int64)
        H = _symtab.tabulate(hn, k)
        worst = 0
        for lo, hi in _symtab.chunks(len(G), 64):
            hxhy = _symtab.compose_rows(H[lo:hi], H)
            xy = _symtab.compose_rows(G[lo:hi], G)
            hxy = H[_symtab.fast_rank(xy)]
            worst = max(worst, int((hxhy != hxy).sum(axis=2).max()))
        return DefectValue(Fraction(worst, l), "exact")
    rng = stage_rng(seed, n, 1)
    worst = 0
    for _ in range(samples):
        x = Permutation(rng.permutation(k).tolist(), check=False)
        y = Permutation(rng.permutation(k).tolist(), check=False)
        d = hamming(hn(x) * hn(y), hn(x * y)).numerator
        worst = max(worst, d)
    return DefectValue(Fraction(worst, l), "lower", samples)


def _min_dist_counts(xs: np.ndarray, image: np.ndarray) -> np.ndarray:
    out = np.empty(len(xs), dtype=np.int64)
    for lo, hi in _symtab.chunks(len(xs), max(1, 200_000 // max(len(image), 1))):
        diff = (xs[lo:hi, None, :] != image[None, :, :]).sum(axis=2)
        out[lo:hi] = diff.min(axis=1)
    return out


def surj_defect(
    h: StageMap, n: int, mode: str = "auto", samples: int = 2000, seed: int = 0
) -> DefectValue:
    """sup over x in Sym(l) of inf over y in Sym(k) of d(x, h(y)) at stage n.

    Outer and inner ranges are each exhaustive when within the size cap and
    sampled otherwise; ``bound`` records the resulting direction.
    """
    k, l = h.source[n], h.target[n]
    outer = _resolve_mode(mode, l, EXHAUSTIVE_CAP)
    inner = "exhaustive" if k <= EXHAUSTIVE_CAP else "sampled"
    if mode == "exhaustive" and inner == "sampled":
        raise ValueError(f"exhaustive mode is capped at degree {EXHAUSTIVE_CAP}, got source {k}")
    hn = h.at(n)
    rng = stage_rng(seed, n, 2)
    if inner == "exhaustive":
        image = np.unique(_symtab.tabulate(hn, k), axis=0)
    else:
        ys = _random_rows(rng, samples, k)
        image = np.unique(
            np.array([hn(Permutation(r.tolist(), check=False)).image for r in ys], dtype=np.int64),
            axis=0,
        )
    if outer == "exhaustive":
        xs = _symtab.sym_array(l).astype(np.int64)
    else:
        xs = _random_rows(rng, samples, l)
    worst = int(_min_dist_counts(xs, image).max())
    bound = {
        ("exhaustive", "exhaustive"): "exact",
        ("sampled", "exhaustive"): "lower",
        ("exhaustive", "sampled"): "upper",
        ("sampled", "sampled"): "estimate",
    }[(outer, inner)]
    return DefectValue(Fraction(worst, l), bound, None if bound == "exact" else samples)


def iso_defect(
    h: StageMap, n: int, mode: str = "auto", samples: int = 2000, seed: int = 0
) -> DefectValue:
    """sup over x, y of |d_k(x, y) - d_l(h(x), h(y))| at stage n."""
    k, l = h.source[n], h.target[n]
    mode = _resolve_mode(mode, k, PAIRWISE_CAP)
    hn = h.at(n)
    if mode == "exhaustive":
        G = _symtab.sym_array(k).astype(np.int64)
        H = _symtab.tabulate(hn, k)
        worst = 0
        for lo, hi in _symtab.chunks(len(G), 64):
            dk = (G[lo:hi, None, :] != G[None, :, :]).sum(axis=2)
            dl = (H[lo:hi, None, :] != H[None, :, :]).sum(axis=2)
            worst = max(worst, int(np.abs(dk * l - dl * k).max()))
        return DefectValue(Fraction(worst, k * l), "exact")
    rng = stage_rng(seed, n, 3)
    worst = Fraction(0)
    for _ in range(samples):
        x = Permutation(rng.permutation(k).tolist(), check=False)
        y = Permutation(rng.permutation(k).tolist(), check=False)
        worst = max(worst, abs(hamming(x, y).value - hamming(hn(x), hn(y)).value))
    return DefectValue(worst, "lower", samples)


@dataclass(frozen=True)
class StageDefects:
    stage: int
    hom: DefectValue
    surj: DefectValue
    iso: DefectValue


@dataclass
class DefectReport:
    """Per-stage defects plus suffix suprema of max(hom, surj).

    ``tail_sup[j]`` bounds, within the horizon, the quantity whose vanishing
    in the limit characterizes an induced isomorphism.
    """

    per_stage: list[StageDefects]
    tail_sup: list[Fraction] = field(default_factory=list)
    horizon_estimate: bool = True

    def __post_init__(self):
        if not self.tail_sup:
            running = Fraction(0)
            sups = []
            for row in reversed(self.per_stage):
                running = max(running, row.hom.value, row.surj.value)
                sups.append(running)
            self.tail_sup = sups[::-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stage", "hom", "surj", "iso", "tail_sup", "hom_bound", "surj_bound", "iso_bound"])
        for row, sup in zip(self.per_stage, self.tail_sup):
            w.writerow([
                row.stage, row.hom.value, row.surj.value, row.iso.value, sup,
                row.hom.bound, row.surj.bound, row.iso.bound,
            ])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for row, sup in zip(self.per_stage, self.tail_sup):
            rows.append({
                "stage": row.stage,
                "hom": str(row.hom.value),
                "surj": str(row.surj.value),
                "iso": str(row.iso.value),
                "tail_sup": str(sup),
                "bounds": {"hom": row.hom.bound, "surj": row.surj.bound, "iso": row.iso.bound},
            })
        return json.dumps({"horizon_estimate": self.horizon_estimate, "stages": rows}, indent=2) + "\n"


def defect_report(
    h: StageMap,
    stages: Iterable[int],
    mode: str = "auto",
    samples: int = 500,
    seed: int = 0,
    threads: int = 1,
) -> DefectReport:
    def one(n: int) -> StageDefects:
        return StageDefects(
            n,
            hom_defect(h, n, mode, samples, seed),
            surj_defect(h, n, mode, samples, seed),
            iso_defect(h, n, "auto" if mode == "exhaustive" else mode, samples, seed),
        )

    stages = list(stages)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(one, stages))
    else:
        rows = [one(n) for n in stages]
    return DefectReport(rows)
