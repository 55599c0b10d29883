"""Command-line experiment driver.

Exit codes: 0 when every asserted bound holds, 1 when a bound is violated,
2 for usage and I/O errors.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import involutions, rearrangement, reduced_product as rp, stability
from .cut_lift import cut, cut_hom_bound, lift, roundtrip_bound
from .perm import hamming, random_permutation

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def int_range(text: str) -> list[int]:
    """``"6"``, ``"3-6"`` or ``"3,5,8"``."""
    try:
        out = []
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(v) for v in part.split("-", 1))
                if lo > hi:
                    raise ValueError
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed range {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"range {text!r} must contain positive integers")
    return out


def fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _emit(args, name: str, payload: str, suffix: str) -> None:
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{suffix}").write_text(payload)
    else:
        sys.stdout.write(payload)


def _rows_to(fmt: str, header: list[str], rows: list[list]) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, [str(v) if isinstance(v, Fraction) else v for v in r]))
                           for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------


def cmd_cutlift(args) -> int:
    rows, ok_all = [], True
    for n in args.n:
        ms = [m for m in (args.m or range(1, n + 1)) if m <= n]
        if args.m and not ms:
            raise UsageError(f"no m <= n={n} in the requested m range")
        for m in ms:
            h = rp.StageMap(rp.ShapeSequence((n,)), rp.ShapeSequence((m,)), lambda _, x, m=m: cut(x, m))
            mode = "exhaustive" if args.exhaustive else "sampled"
            if args.exhaustive and n > rp.EXHAUSTIVE_CAP:
                raise UsageError(f"--exhaustive is capped at n <= {rp.EXHAUSTIVE_CAP}")
            hd = rp.hom_defect(h, 0, mode, args.samples, args.seed + n * 1000 + m)
            bound = cut_hom_bound(n, m)
            rt = _roundtrip_max(n, m, args.exhaustive, args.samples, args.seed)
            rt_bound = roundtrip_bound(n, m)
            ok = hd.value <= bound and rt <= rt_bound
            ok_all &= ok
            rows.append([n, m, mode, hd.value, bound, rt, rt_bound, int(ok)])
    header = ["n", "m", "mode", "hom_defect", "hom_bound", "roundtrip", "roundtrip_bound", "ok"]
    _emit(args, "cutlift", _rows_to(args.format, header, rows), args.format)
    if not ok_all:
        print("BOUND VIOLATED: cutting exceeded its stated bound", file=sys.stderr)
    return EXIT_OK if ok_all else EXIT_VIOLATION


def _roundtrip_max(n: int, m: int, exhaustive: bool, samples: int, seed: int) -> Fraction:
    from .oracles import enumerate_sym

    if exhaustive:
        sigmas = enumerate_sym(n)
    else:
        rng = np.random.default_rng([seed, n, m, 3])
        sigmas = (random_permutation(n, rng) for _ in range(samples))
    return max(hamming(lift(cut(s, m), n), s).value for s in sigmas)


def read_manifest(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"manifest not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string("[manifest]\n" + p.read_text())
    return dict(parser["manifest"])


def _degrees(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "x" in part:
            n, m = part.split("x")
            out.append((int(n), int(m)))
        else:
            out.append((int(part), int(part)))
    return out


def cmd_stability(args) -> int:
    man = read_manifest(args.manifest)
    try:
        degrees = _degrees(man.get("degrees", "20"))
        deltas = [Fraction(d.strip()) for d in man.get("deltas", "0").split(",")]
        trials = int(man.get("trials", "10"))
        strategy = man.get("strategy", "transposition_vote")
        seed = int(man.get("seed", str(args.seed)))
        c = float(man.get("c", str(stability.DEFAULT_C)))
        eval_samples = int(man.get("eval_samples", "100"))
        vote = man.get("vote_samples")
        vote_samples = int(vote) if vote else None
    except ValueError as exc:
        raise UsageError(f"bad manifest value: {exc}") from None
    rows = stability.run_grid(degrees, deltas, trials, seed, strategy, c, args.threads,
                              eval_samples, vote_samples)
    summary = stability.summary_json(rows, c)
    if args.out_dir:
        _emit(args, "stability_trials", stability.trials_csv(rows), "csv")
        _emit(args, "stability_summary", summary, "json")
    elif args.format == "json":
        sys.stdout.write(summary)
    else:
        sys.stdout.write(stability.trials_csv(rows))
    cells = stability.summarize(rows, c)
    # cells with n < (1 - delta) m are reported but carry no guarantee
    ok = all(s.bounds_hold for s in cells if s.in_regime)
    for s in cells:
        if not s.in_regime:
            print(f"note: n={s.n} m={s.m} delta={s.delta} is outside n >= (1 - delta) m", file=sys.stderr)
    if not ok:
        print("BOUND VIOLATED: some cell needs a constant above the configured c", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_lattice(args) -> int:
    if args.n > involutions.EXHAUSTIVE_CAP:
        raise UsageError(f"--n is capped at {involutions.EXHAUSTIVE_CAP}")
    rows = involutions.class_pair_table(args.n)
    ok = True
    for r in rows:
        if r.oplus > r.predicted or (2 * r.t1 + 2 * r.t2 <= r.n and r.oplus != r.predicted):
            ok = False
    for n in range(1, args.n + 1):
        sup = [involutions.max_support(involutions.InvolutionClass(n, t)) for t in range(n // 2 + 1)]
        ok &= all(a <= b for a, b in zip(sup, sup[1:]))
    if args.format == "json":
        payload = json.dumps([
            {"n": r.n, "t1": r.t1, "t2": r.t2, "oplus_empirical": str(r.oplus),
             "oplus_predicted": str(r.predicted), "inclusion_defect": str(r.inclusion_defect),
             "witness_type": involutions.format_type(r.witness_type), "d1_leq": r.d1_leq}
            for r in rows], indent=2) + "\n"
    else:
        payload = involutions.class_pair_csv(rows)
    _emit(args, "lattice", payload, args.format)
    if not ok:
        print("BOUND VIOLATED: oplus or monotonicity check failed", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VIOLATION


def _read_seq(path: str, horizon: int | None) -> tuple[int, ...]:
    p = Path(path)
    if p.is_file():
        return rearrangement.read_sequence(p.read_text(), horizon)
    try:
        return rearrangement.read_sequence(path, horizon)
    except (ValueError, IndexError):
        raise UsageError(f"cannot read sequence {path!r}") from None


def cmd_rearrange(args) -> int:
    k = _read_seq(args.k, args.horizon)
    l = _read_seq(args.l, args.horizon)
    if args.horizon:
        k, l = k[: args.horizon], l[: args.horizon]
    if len(k) != len(l):
        raise UsageError(f"horizon mismatch: {len(k)} vs {len(l)}")
    r = rearrangement.find_rearrangement(k, l, args.epsilon, args.budget, args.equivalent)
    bad = rearrangement.check_rearrangement(k, l, r)
    payload = json.loads(r.to_json())
    if len(k) >= 2:
        gap = rearrangement.log_gap(k)
        payload["log_gap_k"] = {"windows": list(gap.windows),
                                "min_ratio": [None if x is None else str(x) for x in gap.min_ratios],
                                "value": list(gap.values)}
    shadow = rearrangement.out_shadow(k, args.epsilon)
    payload["out_shadow_k"] = {"discrete": shadow.is_discrete(),
                               "component_sizes": {str(a): b for a, b in shadow.histogram().items()}}
    _emit(args, "rearrange", json.dumps(payload, indent=2) + "\n", "json")
    if args.out_dir:
        _emit(args, "out_shadow", shadow.to_dot(), "dot")
    if bad:
        print("BOUND VIOLATED: certificate recheck failed: " + "; ".join(bad), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _shape(spec: str, horizon: int | None) -> rp.ShapeSequence:
    try:
        return rp.ShapeSequence.parse(spec, horizon)
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad shape spec {spec!r}: {exc}") from None


def _stage_map(kind: str, source: rp.ShapeSequence, target: rp.ShapeSequence, seed: int) -> rp.StageMap:
    if kind == "cut":
        return rp.cut_family(source)
    if kind == "updown":
        return rp.updown_family(source, target)
    if kind == "constant":
        return rp.constant_family(source, target)
    if kind == "conjugation":
        alphas = [random_permutation(target[n], np.random.default_rng([seed, n])) for n in range(target.horizon)]
        return rp.conjugation_family(source, target, alphas)
    raise UsageError(f"unknown map {kind!r}")


def cmd_defects(args) -> int:
    horizon = args.horizon or 16
    source = _shape(args.source, horizon)
    target = _shape(args.target, horizon) if args.target else source
    h = _stage_map(args.map, source, target, args.seed)
    report = rp.defect_report(h, range(horizon), args.mode, args.samples, args.seed, args.threads)
    _emit(args, "defects", report.to_json() if args.format == "json" else report.to_csv(), args.format)
    ok = True
    if args.map in ("cut", "updown"):
        for row in report.per_stage:
            k, l = h.source[row.stage], h.target[row.stage]
            if k > l and row.hom.value > cut_hom_bound(k, l):
                ok = False
            if k <= l and row.hom.value != 0:
                ok = False
    if not ok:
        print("BOUND VIOLATED: cut/lift homomorphism defect above its bound", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VIOLATION


def _almost_perm(spec: str, horizon: int) -> rp.AlmostPermutation:
    parts = spec.split()
    if parts[0] == "shift" and len(parts) == 2:
        return rp.AlmostPermutation.shift(int(parts[1]), horizon)
    if parts[0] == "identity":
        return rp.AlmostPermutation.identity(horizon)
    if parts[0] == "explicit":
        return rp.AlmostPermutation(tuple(int(v) for v in parts[1:]))
    raise UsageError(f"bad almost permutation spec {spec!r}")


def cmd_psif(args) -> int:
    path = Path(args.element)
    if not path.is_file():
        raise UsageError(f"element file not found: {args.element}")
    try:
        a = rp.TruncatedElement.loads(path.read_text())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    horizon = args.horizon or a.horizon
    target = _shape(args.target, horizon) if args.target else a.shape
    f = _almost_perm(args.f, horizon)
    res = rp.psi_f(a, f, target, horizon)
    cert = {
        "ratio_certificate": str(res.ratio_certificate),
        "ratio_certificate_float": float(res.ratio_certificate),
        "flagged": [{"stage": n, "reason": why} for n, why in res.flagged],
        "horizon_estimate": True,
    }
    if args.out_dir:
        _emit(args, "psif_element", res.element.dumps(), "txt")
        _emit(args, "psif_certificate", json.dumps(cert, indent=2) + "\n", "json")
    elif args.format == "json":
        sys.stdout.write(json.dumps(cert, indent=2) + "\n")
    else:
        sys.stdout.write(res.element.dumps())
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--horizon", type=int, default=None)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="symred", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cutlift", parents=[common], help="cutting/lifting bounds")
    p.add_argument("--n", type=int_range, required=True)
    p.add_argument("--m", type=int_range, default=None)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int, default=10_000)
    p.set_defaults(func=cmd_cutlift)

    p = sub.add_parser("stability", parents=[common], help="conjugator recovery experiments")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("lattice", parents=[common], help="involution class-pair table")
    p.add_argument("--n", type=int, default=7)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("rearrange", parents=[common], help="almost rearrangement of sequences")
    p.add_argument("k")
    p.add_argument("l")
    p.add_argument("--epsilon", type=fraction, default=Fraction(0))
    p.add_argument("--budget", type=int, default=0)
    p.add_argument("--equivalent", action="store_true")
    p.set_defaults(func=cmd_rearrange)

    p = sub.add_parser("defects", parents=[common], help="defect report of a stagewise map")
    p.add_argument("--source", required=True, help="'affine a b', 'geometric a r' or integers")
    p.add_argument("--target", default=None)
    p.add_argument("--map", choices=("cut", "updown", "constant", "conjugation"), default="cut")
    p.add_argument("--mode", choices=("auto", "exhaustive", "sampled"), default="auto")
    p.add_argument("--samples", type=int, default=500)
    p.set_defaults(func=cmd_defects)

    p = sub.add_parser("psif", parents=[common], help="apply psi_f to a truncated element")
    p.add_argument("element")
    p.add_argument("--f", required=True, help="'shift c', 'identity' or 'explicit f0 f1 ...'")
    p.add_argument("--target", default=None)
    p.set_defaults(func=cmd_psif)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"symred: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"symred: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
