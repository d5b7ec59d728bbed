"""Command-line front end.

Subcommands:
  find    run the one- or two-pass engine over a file or stdin and print
          the verified periods (optionally cross-checked against the
          brute-force oracle, optionally dumping space stats as JSON)
  gen     write corpus strings (planted periods, alternating runs, hard
          concatenations, random bytes) as raw bytes
  report  run the measurement sweeps and render CSV tables plus PNG
          figures into a directory

Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 oracle disagreement.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .corpus import alternating_runs_prefix, hard_pair, planted, random_bytes, sample_hard_pair
from .errors import StreamPeriodError
from .onepass import find_k_periods_one_pass
from .oracle import brute_force_k_periods, write_bound_checks_csv
from .report import SpaceStats
from .twopass import find_k_periods_two_pass

USAGE_ERROR = 2
IO_ERROR = 1
ORACLE_DISAGREEMENT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamperiod",
        description="Find all k-periods of a byte stream in one or two passes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    find = sub.add_parser("find", help="detect k-periods of a stream")
    find.add_argument("input", help="input file path, or - for stdin")
    find.add_argument("--k", type=int, required=True, help="mismatch budget")
    find.add_argument("--passes", type=int, choices=(1, 2), default=2)
    find.add_argument("--mode", choices=("all", "min", "max"), default="all")
    find.add_argument("--backend", choices=("exact", "sketch"), default="sketch")
    find.add_argument("--seed", type=int, default=0)
    find.add_argument("--stats", metavar="PATH", help="write space stats JSON here")
    find.add_argument(
        "--oracle-check",
        action="store_true",
        help="recompute with the quadratic oracle and fail on any disagreement",
    )
    find.add_argument(
        "--length",
        type=int,
        help="declared stream length (required for stdin; files use their size)",
    )

    gen = sub.add_parser("gen", help="generate corpus strings (raw bytes)")
    gen.add_argument("--out", "-o", default="-", help="output path (default stdout)")
    gensub = gen.add_subparsers(dest="generator", required=True)

    g = gensub.add_parser("planted", help="periodic string with planted mismatches")
    g.add_argument("--block", required=True, help="repeating block (text)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--mismatches", default="", help="comma-separated positions")
    g.add_argument("--seed", type=int, default=0)

    g = gensub.add_parser("runs", help="prefix of 1 0 11 00 111 000 ...")
    g.add_argument("--n", type=int, required=True)

    g = gensub.add_parser("hard", help="x.y.x.x whose periodicity flips on one mismatch")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--exceed", action="store_true", help="use HAM(x,y)=k/2+1 instead of k/2")
    g.add_argument("--seed", type=int, default=0)

    g = gensub.add_parser("random", help="uniform random bytes")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--alphabet", type=int, default=256)
    g.add_argument("--seed", type=int, default=0)

    rep = sub.add_parser("report", help="run sweeps; write CSV + PNG figures")
    rep.add_argument("--out-dir", default="report", help="output directory")
    rep.add_argument("--k", type=int, default=2)
    rep.add_argument("--seed", type=int, default=1)
    rep.add_argument(
        "--sizes",
        default="4096,8192,16384,32768,65536",
        help="comma-separated stream lengths for the space sweep",
    )
    rep.add_argument("--bound-samples", type=int, default=300, help="instances per bound kind")
    return parser


def _run_find(args) -> int:
    from_stdin = args.input == "-"
    if from_stdin:
        if args.length is None:
            print("error: --length is required when reading stdin", file=sys.stderr)
            return USAGE_ERROR
        if args.passes == 2:
            print("error: two passes need a replayable input file, not a pipe", file=sys.stderr)
            return USAGE_ERROR
        n = args.length
        source = lambda: iter(lambda: sys.stdin.buffer.read(65536), b"")
    else:
        try:
            import os

            n = os.path.getsize(args.input)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return IO_ERROR
        source = args.input
    stats = None
    if args.stats:
        stats = SpaceStats(n=n, k=args.k, passes=args.passes, backend=args.backend)
    try:
        if args.passes == 2:
            report = find_k_periods_two_pass(
                source, args.k, n=n, backend=args.backend, seed=args.seed, stats=stats
            )
        else:
            report = find_k_periods_one_pass(
                source, args.k, n=n, backend=args.backend, seed=args.seed, stats=stats
            )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except StreamPeriodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    if args.mode == "all":
        for p in report.periods:
            print(p)
    elif args.mode == "min" and report.periods:
        print(report.periods[0])
    elif args.mode == "max" and report.periods:
        print(report.periods[-1])

    if args.stats:
        with open(args.stats, "w") as handle:
            handle.write(stats.to_json() + "\n")

    if args.oracle_check:
        if from_stdin:
            print("error: --oracle-check needs a file input", file=sys.stderr)
            return USAGE_ERROR
        with open(args.input, "rb") as handle:
            data = handle.read(n)
        expect = brute_force_k_periods(data, args.k)
        if args.passes == 1:
            expect = [p for p in expect if p <= n // 2]
        if report.periods != expect:
            print(
                f"oracle disagreement: engine={report.periods} oracle={expect}",
                file=sys.stderr,
            )
            return ORACLE_DISAGREEMENT
    return 0


def _run_gen(args) -> int:
    if args.generator == "planted":
        positions = {int(tok) for tok in args.mismatches.split(",") if tok.strip()}
        data = planted(args.block.encode(), args.n, positions, seed=args.seed)
    elif args.generator == "runs":
        data = alternating_runs_prefix(args.n)
    elif args.generator == "hard":
        x, y = sample_hard_pair(args.n, args.k, exceed=args.exceed, seed=args.seed)
        data = hard_pair(x, y)
    else:
        data = random_bytes(args.n, alphabet=args.alphabet, seed=args.seed)
    if args.out == "-":
        sys.stdout.buffer.write(data)
    else:
        with open(args.out, "wb") as handle:
            handle.write(data)
    return 0


def _run_report(args) -> int:
    import os

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .sweeps import bound_check_sweep, doubling_ratios, space_scaling

    os.makedirs(args.out_dir, exist_ok=True)
    sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]

    rows = space_scaling(sizes, k=args.k, seed=args.seed)
    space_csv = os.path.join(args.out_dir, "space_scaling.csv")
    with open(space_csv, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {space_csv}")

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for backend, marker in (("sketch", "o"), ("exact", "s")):
        xs = [r["n"] for r in rows if r["backend"] == backend]
        ys = [r["peak_total"] for r in rows if r["backend"] == backend]
        ax.plot(xs, ys, marker=marker, label=backend)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=2)
    ax.set_xlabel("stream length n")
    ax.set_ylabel("peak streaming state (bytes)")
    ax.set_title(f"two-pass peak state, k={args.k}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    space_png = os.path.join(args.out_dir, "space_scaling.png")
    fig.savefig(space_png, dpi=150, bbox_inches="tight")
    plt.close(fig)
    print(f"wrote {space_png}")
    for n, ratio in doubling_ratios(rows, "sketch"):
        print(f"  sketch peak ratio at n={n}: {ratio:.3f}")

    checks = []
    for kind in ("pairwise", "mway", "interval"):
        checks.extend(bound_check_sweep(kind, args.bound_samples, seed=args.seed))
    bounds_csv = os.path.join(args.out_dir, "bound_checks.csv")
    write_bound_checks_csv(bounds_csv, checks)
    print(f"wrote {bounds_csv} ({len(checks)} instances, violations: "
          f"{sum(not c.holds for c in checks)})")

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    colors = {"pairwise": "tab:blue", "mway": "tab:orange", "interval": "tab:green"}
    for kind in colors:
        xs = [c.bound for c in checks if c.kind == kind]
        ys = [c.observed for c in checks if c.kind == kind]
        ax.scatter(xs, ys, s=12, alpha=0.5, label=kind, color=colors[kind])
    top = max(c.bound for c in checks)
    ax.plot([0, top], [0, top], "k--", linewidth=1, label="bound")
    ax.set_xlabel("proved ceiling")
    ax.set_ylabel("observed mismatches at the gcd shift")
    ax.set_title("gcd-shift mismatch counts vs proved ceilings")
    ax.legend()
    ax.grid(True, alpha=0.3)
    bounds_png = os.path.join(args.out_dir, "bound_checks.png")
    fig.savefig(bounds_png, dpi=150, bbox_inches="tight")
    plt.close(fig)
    print(f"wrote {bounds_png}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "find":
            return _run_find(args)
        if args.command == "gen":
            return _run_gen(args)
        return _run_report(args)
    except StreamPeriodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
