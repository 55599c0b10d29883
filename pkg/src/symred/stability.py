"""Synthetic Ulam-stability experiments for maps Sym(n) -> Sym(m).

A ``PerturbedMap`` is a conjugation embedding (moved between degrees by
``updown``) whose every output has been corrupted on at most floor(delta*m)
points. ``recover_conjugator`` looks only at the map's outputs and tries to
find the conjugator back. The report then checks (1 - delta) m <= n <=
(1 + c delta) m, distance to the conjugation <= 4 c delta and isometry defect
<= 5 c delta, and gives the smallest c that makes all of them hold.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import _symtab
from .cut_lift import lift, updown
from .oracles import oracle_min_conjugator
from .perm import Permutation, conjugate, hamming, random_permutation, transposition
from .reduced_product import (
    DefectValue,
    ShapeSequence,
    StageMap,
    TruncatedElement,
    hom_defect,
    stage_rng,
)

DEFAULT_C = 10
TABLE_CAP = 7


class SymMap:
    """A black-box map Sym(n) -> Sym(m)."""

    def __init__(self, n: int, m: int, fn: Callable[[Permutation], Permutation]):
        self.n = n
        self.m = m
        self._fn = fn

    def __call__(self, sigma: Permutation) -> Permutation:
        if len(sigma) != self.n:
            raise ValueError(f"expected degree {self.n}, got {len(sigma)}")
        return self._fn(sigma)

    def as_stage_map(self) -> StageMap:
        return StageMap(ShapeSequence((self.n,)), ShapeSequence((self.m,)), lambda _, x: self(x))


def _corrupt(base: list[int], s: int, rng: np.random.Generator) -> list[int]:
    """Overwrite s random points with random values, then repair.

    Values held by untouched points never move; a chosen point whose new value
    collides is handed one of the values left free, in a random cyclic order.
    Only the s chosen points can change.
    """
    m = len(base)
    if s <= 0:
        return base
    img = list(base)
    chosen = [int(p) for p in rng.choice(m, size=s, replace=False)]
    chosen_set = set(chosen)
    for p in chosen:
        img[p] = int(rng.integers(m))
    used = {img[q] for q in range(m) if q not in chosen_set}
    displaced = []
    for p in chosen:
        if img[p] in used:
            displaced.append(p)
        else:
            used.add(img[p])
    free = [v for v in range(m) if v not in used]
    if displaced:
        off = int(rng.integers(len(free)))
        for i, p in enumerate(displaced):
            img[p] = free[(i + off) % len(free)]
    return img


class PerturbedMap(SymMap):
    """sigma -> updown(ad_alpha(sigma), m), corrupted on <= floor(delta*m) points.

    The corruption of each output is seeded by (seed, n, m, sigma), so the map
    is a genuine function. For n <= 7 the whole table can be materialized.
    """

    def __init__(self, n: int, m: int, alpha: Permutation, delta: Fraction, seed: int,
                 flags: tuple[str, ...] = (), explicit: bool = False):
        self.ground_truth_alpha = alpha
        self.delta = Fraction(delta)
        self.seed = seed
        self.flags = flags
        self.corrupt_points = math.floor(self.delta * m)
        self.table: dict[Permutation, Permutation] | None = None
        super().__init__(n, m, self._evaluate)
        if explicit:
            if n > TABLE_CAP:
                raise ValueError(f"explicit tables are capped at n <= {TABLE_CAP}")
            G = _symtab.sym_array(n)
            self.table = {}
            for row in G:
                s = Permutation(row.tolist(), check=False)
                self.table[s] = self._procedural(s)

    def clean(self, sigma: Permutation) -> Permutation:
        return updown(conjugate(self.ground_truth_alpha, sigma), self.m)

    def _procedural(self, sigma: Permutation) -> Permutation:
        base = list(self.clean(sigma).image)
        if self.corrupt_points == 0:
            return Permutation(base, check=False)
        rng = np.random.default_rng([self.seed, self.n, self.m, *sigma.image])
        return Permutation(_corrupt(base, self.corrupt_points, rng), check=False)

    def _evaluate(self, sigma: Permutation) -> Permutation:
        if self.table is not None:
            return self.table[sigma]
        return self._procedural(sigma)


def make_perturbed(n: int, m: int, alpha: Permutation, delta, seed: int,
                   c: float = DEFAULT_C, explicit: bool | None = None) -> PerturbedMap:
    """Build a near-homomorphism with a known conjugator.

    Parameters outside the regime where recovery is guaranteed are allowed and recorded in
    ``flags``: degrees below 7, delta >= 1/(3c), and n < (1 - delta) m.
    """
    delta = Fraction(delta)
    if len(alpha) != n:
        raise ValueError(f"alpha has degree {len(alpha)}, expected {n}")
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    if n < 1 or m < 1:
        raise ValueError("degrees must be positive")
    flags = []
    if min(n, m) < 7:
        flags.append("outside guaranteed regime: degree below 7")
    if delta >= Fraction(1) / (3 * Fraction(c)):
        flags.append("outside guaranteed regime: delta >= 1/(3c)")
    if n < (1 - delta) * m:
        flags.append("n < (1 - delta) m: not almost surjective")
    if explicit is None:
        explicit = n <= TABLE_CAP
    return PerturbedMap(n, m, alpha, delta, seed, tuple(flags), explicit)


# ---------------------------------------------------------------------------
# recovery


@dataclass
class StabilityReport:
    n: int
    m: int
    delta: Fraction
    recovered_alpha: Permutation
    success: bool
    inconclusive: list[int]
    conjugation_distance: DefectValue
    isometry_defect: DefectValue
    lower_size_ok: bool
    size_bounds_ok: bool
    empirical_c: float
    c: float = DEFAULT_C
    alpha_exact: bool | None = None
    strategy: str = "transposition_vote"

    def conclusions_hold(self, c: float) -> bool:
        d = self.delta
        return (
            self.lower_size_ok
            and self.n <= (1 + c * d) * self.m
            and self.conjugation_distance.value <= 4 * c * d
            and self.isometry_defect.value <= 5 * c * d
        )


def _vote(phi: SymMap, samples: int | None, seed: int, threshold: float):
    n, m = phi.n, phi.m
    counts = np.zeros((n, n), dtype=np.int64)
    queries = np.zeros(n, dtype=np.int64)
    if samples is None or samples >= n - 1:
        pairs = [(i, k) for i in range(n) for k in range(i + 1, n)]
    else:
        rng = np.random.default_rng([seed, 7])
        pairs = set()
        for i in range(n):
            others = [k for k in range(n) if k != i]
            for k in rng.choice(others, size=samples, replace=False):
                pairs.add((min(i, int(k)), max(i, int(k))))
        pairs = sorted(pairs)
    for i, k in pairs:
        img = phi(transposition(n, i, k)).image
        supp = [x for x in range(min(n, m)) if img[x] != x]
        for p in (i, k):
            queries[p] += 1
            counts[p, supp] += 1
    conf = counts / np.maximum(queries, 1)[:, None]
    alpha = [-1] * n
    used = set()
    order = sorted(range(n), key=lambda i: (-conf[i].max(), i))
    inconclusive = []
    for i in order:
        best = conf[i].max()
        if best <= threshold:
            inconclusive.append(i)
        # candidates by decreasing vote share, ties to the smallest point
        for x in sorted(range(n), key=lambda x: (-counts[i, x], x)):
            if counts[i, x] == 0:
                break
            if x not in used:
                alpha[i] = x
                used.add(x)
                break
    spare = iter(sorted(set(range(n)) - used))
    for i in range(n):
        if alpha[i] < 0:
            alpha[i] = next(spare)
    return Permutation(alpha), sorted(inconclusive)


def conjugation_distance(phi: SymMap, alpha: Permutation, samples: int = 200, seed: int = 0) -> DefectValue:
    """sup over sigma of d_{n v m}(phi(sigma) lifted, ad_alpha(sigma) lifted)."""
    n, m = phi.n, phi.m
    top = max(n, m)
    if n <= TABLE_CAP:
        sigmas = (Permutation(r.tolist(), check=False) for r in _symtab.sym_array(n))
        bound, count = "exact", None
    else:
        rng = np.random.default_rng([seed, 11])
        sigmas = (random_permutation(n, rng) for _ in range(samples))
        bound, count = "lower", samples
    worst = 0
    for s in sigmas:
        d = hamming(lift(phi(s), top), lift(conjugate(alpha, s), top)).numerator
        worst = max(worst, d)
    return DefectValue(Fraction(worst, top), bound, count)


def isometry_defect(phi: SymMap, samples: int = 200, seed: int = 0) -> DefectValue:
    """max over pairs of |d_n(sigma, tau) - d_m(phi(sigma), phi(tau))|; exhaustive for n <= 6."""
    from .reduced_product import iso_defect

    h = phi.as_stage_map()
    return iso_defect(h, 0, "auto", samples, seed)


def _empirical_c(n: int, m: int, delta: Fraction, dist: Fraction, iso: Fraction) -> float:
    needs = [Fraction(0)]
    if n > m:
        needs.append(Fraction(n - m, m))  # c * delta must reach this
    needs_dist = dist / 4
    needs_iso = iso / 5
    worst = max(needs + [needs_dist, needs_iso])
    if delta == 0:
        return 0.0 if worst == 0 else math.inf
    return float(worst / delta)


def recover_conjugator(
    phi: SymMap,
    strategy: str = "transposition_vote",
    samples: int | None = None,
    seed: int = 0,
    c: float = DEFAULT_C,
    threshold: float = 0.5,
    eval_samples: int = 200,
) -> StabilityReport:
    """Find alpha with phi ~ ad_alpha and measure the three conclusions.

    ``transposition_vote``: for each point i the support of phi((i k)) sits
    near {alpha(i), alpha(k)}; alpha(i) is the point that shows up most often
    over k, and a greedy pass resolves clashes so alpha is a bijection.
    Points with no majority above ``threshold`` are inconclusive; more than
    n - m of them (the points that can legitimately fall outside the target)
    marks the recovery as failed, though a completed alpha is still returned.

    ``exhaustive`` minimizes the conjugation distance over all of Sym(n)
    (n <= 7) and is the ground truth for the vote.
    """
    n, m = phi.n, phi.m
    delta = getattr(phi, "delta", Fraction(0))
    if strategy == "exhaustive":
        alpha, _ = oracle_min_conjugator(phi, n, m)
        inconclusive: list[int] = []
    elif strategy == "transposition_vote":
        alpha, inconclusive = _vote(phi, samples, seed, threshold)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    success = len(inconclusive) <= max(0, n - m)
    dist = conjugation_distance(phi, alpha, eval_samples, seed)
    iso = isometry_defect(phi, eval_samples, seed)
    lower_ok = (1 - delta) * m <= n
    size_ok = lower_ok and n <= (1 + Fraction(c) * delta) * m
    report = StabilityReport(
        n, m, delta, alpha, success, inconclusive, dist, iso, lower_ok, size_ok,
        _empirical_c(n, m, delta, dist.value, iso.value), c, strategy=strategy,
    )
    truth = getattr(phi, "ground_truth_alpha", None)
    if truth is not None:
        report.alpha_exact = alpha == truth
    return report


# ---------------------------------------------------------------------------
# product-form maps


@dataclass
class ProductFormAnalysis:
    ratio_profile: list[Fraction]
    sigma: TruncatedElement
    residuals: list[Fraction | None]
    skipped: list[tuple[int, str]]
    ratio_flags: list[int]
    tail_ratio_ok: bool
    horizon_estimate: bool = True


def analyze_product_form(
    h: StageMap,
    horizon: int,
    stages_from: int = 0,
    defect_threshold: Fraction = Fraction(1, 4),
    ratio_tolerance: Fraction = Fraction(1, 4),
    samples: int = 200,
    seed: int = 0,
    vote_samples: int | None = None,
) -> ProductFormAnalysis:
    """Recover sigma_n = updown(alpha_n, l_n) stage by stage.

    A stage is skipped (identity filler) when its sampled homomorphism
    defect exceeds ``defect_threshold`` or the vote fails. Residuals are the
    sampled maxima of d(h_n(a), ad_{sigma_n}(updown(a, l_n))).
    """
    ratios, stages, residuals, skipped, flags = [], [], [], [], []
    for n in range(horizon):
        k, l = h.source[n], h.target[n]
        r = Fraction(k, l)
        ratios.append(r)
        if abs(r - 1) > ratio_tolerance:
            flags.append(n)
        ident = Permutation(range(l), check=False)
        if n < stages_from:
            stages.append(ident)
            residuals.append(None)
            skipped.append((n, "before stages_from"))
            continue
        hd = hom_defect(h, n, "sampled", samples, seed)
        if hd.value > defect_threshold:
            stages.append(ident)
            residuals.append(None)
            skipped.append((n, f"hom defect {hd.value} above threshold"))
            continue
        phi = SymMap(k, l, h.at(n))
        rep_seed = int(np.random.default_rng([seed, n]).integers(2**31))
        alpha, inconclusive = _vote(phi, vote_samples, rep_seed, 0.5)
        if len(inconclusive) > max(0, k - l):
            stages.append(ident)
            residuals.append(None)
            skipped.append((n, f"vote inconclusive at {len(inconclusive)} points"))
            continue
        sigma_n = updown(alpha, l)
        stages.append(sigma_n)
        rng = stage_rng(seed, n, 5)
        worst = 0
        for _ in range(samples):
            a = random_permutation(k, rng)
            worst = max(worst, hamming(h(n, a), conjugate(sigma_n, updown(a, l))).numerator)
        residuals.append(Fraction(worst, l))
    windows = sorted({horizon // 2, (3 * horizon) // 4, horizon - 1}) if horizon else []
    tail_ok = all(abs(ratios[w] - 1) <= ratio_tolerance for w in windows)
    element = TruncatedElement(h.target.extend(horizon), tuple(stages))
    return ProductFormAnalysis(ratios, element, residuals, skipped, flags, tail_ok)


# ---------------------------------------------------------------------------
# Monte-Carlo trials


@dataclass(frozen=True)
class TrialRow:
    trial: int
    n: int
    m: int
    delta: Fraction
    seed: int
    alpha_exact: bool
    success: bool
    conjugation_distance: Fraction
    isometry_defect: Fraction
    empirical_c: float
    size_bounds_ok: bool


def trial_seed(seed: int, n: int, m: int, delta: Fraction, trial: int) -> int:
    ss = np.random.SeedSequence([seed, n, m, delta.numerator, delta.denominator, trial])
    return int(ss.generate_state(1)[0])


def run_trial(n: int, m: int, delta, trial: int, seed: int, strategy: str = "transposition_vote",
              c: float = DEFAULT_C, eval_samples: int = 100, vote_samples: int | None = None) -> TrialRow:
    delta = Fraction(delta)
    ts = trial_seed(seed, n, m, delta, trial)
    alpha = random_permutation(n, np.random.default_rng([ts, 0]))
    phi = make_perturbed(n, m, alpha, delta, ts, c)
    rep = recover_conjugator(phi, strategy, vote_samples, ts, c, eval_samples=eval_samples)
    return TrialRow(trial, n, m, delta, ts, bool(rep.alpha_exact), rep.success,
                    rep.conjugation_distance.value, rep.isometry_defect.value,
                    rep.empirical_c, rep.size_bounds_ok)


def run_grid(degrees, deltas, trials: int, seed: int, strategy: str = "transposition_vote",
             c: float = DEFAULT_C, threads: int = 1, eval_samples: int = 100,
             vote_samples: int | None = None) -> list[TrialRow]:
    """All trials of the (n, m) x delta grid, ordered by cell then trial index."""
    jobs = [(n, m, Fraction(d), t) for n, m in degrees for d in deltas for t in range(trials)]

    def one(job):
        n, m, d, t = job
        return run_trial(n, m, d, t, seed, strategy, c, eval_samples, vote_samples)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, jobs))
    return [one(j) for j in jobs]


def _fmt_c(c: float) -> str:
    return "inf" if math.isinf(c) else repr(round(c, 12))


def trials_csv(rows: list[TrialRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "m", "delta", "trial", "seed", "alpha_exact", "success",
                "conjugation_distance", "isometry_defect", "empirical_c", "size_bounds_ok"])
    for r in rows:
        w.writerow([r.n, r.m, r.delta, r.trial, r.seed, int(r.alpha_exact), int(r.success),
                    r.conjugation_distance, r.isometry_defect, _fmt_c(r.empirical_c),
                    int(r.size_bounds_ok)])
    return buf.getvalue()


@dataclass
class CellSummary:
    n: int
    m: int
    delta: Fraction
    trials: int
    recovery_rate: float
    run_c: float
    c_quantiles: dict[str, float] = field(default_factory=dict)
    mean_distance: float = 0.0
    bounds_hold: bool = True
    in_regime: bool = True


def _nearest_rank(sorted_vals: list[float], p: float) -> float:
    return sorted_vals[round(p * (len(sorted_vals) - 1))]


def summarize(rows: list[TrialRow], c: float = DEFAULT_C) -> list[CellSummary]:
    """Per-cell recovery rate and empirical c.

    ``run_c`` is the largest per-trial c in the cell, so every trial satisfies
    the distance and isometry conclusions with that single constant.
    ``bounds_hold`` checks those conclusions exactly at the configured ``c``.
    """
    cells: dict[tuple, list[TrialRow]] = {}
    for r in rows:
        cells.setdefault((r.n, r.m, r.delta), []).append(r)
    cf = Fraction(c)
    out = []
    for (n, m, d), rs in cells.items():
        cs = sorted(r.empirical_c for r in rs)
        q = {name: _nearest_rank(cs, p) for name, p in
             (("min", 0.0), ("q25", 0.25), ("median", 0.5), ("q75", 0.75), ("max", 1.0))}
        hold = all(
            r.conjugation_distance <= 4 * cf * d
            and r.isometry_defect <= 5 * cf * d
            and max(n - m, 0) <= cf * d * m
            for r in rs
        )
        out.append(CellSummary(
            n, m, d, len(rs), sum(r.alpha_exact for r in rs) / len(rs), cs[-1], q,
            float(sum(r.conjugation_distance for r in rs) / len(rs)), hold,
            all(r.size_bounds_ok for r in rs),
        ))
    return out


def summary_json(rows: list[TrialRow], c: float = DEFAULT_C) -> str:
    cells = summarize(rows, c)
    payload = {
        "configured_c": c,
        "cells": [
            {
                "n": s.n, "m": s.m, "delta": str(s.delta), "trials": s.trials,
                "recovery_rate": s.recovery_rate,
                "run_c": _fmt_c(s.run_c),
                "empirical_c_quantiles": {k: _fmt_c(v) for k, v in s.c_quantiles.items()},
                "mean_conjugation_distance": round(s.mean_distance, 12),
                "bounds_hold": s.bounds_hold,
                "in_regime": s.in_regime,
            }
            for s in cells
        ],
    }
    return json.dumps(payload, indent=2) + "\n"
