"""Command-line entry points: gen, precompute, query, verify, report.

Exit statuses: 0 ok, 2 usage, 3 parse/io, 4 invariant violation,
5 verification mismatch.  Every failure prints one line to stderr:
``error: <category>: <reason>``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from .baselines import (
    ENUMERATION_GUARD,
    dominance_prune,
    iter_sequences,
    minima_by_length,
    sequence_count,
)
from .core import Instance, Origin
from .errors import (
    InvariantError,
    MissingLevelError,
    MsrecError,
    NoRouteError,
    ParseError,
    VerificationError,
)
from .growth import backward_growth, batch_view, generation_work_bound
from .pruning import PruneStats, batch_prune
from .query import Query, query_routes
from .storage import load_instance, load_store, save_instance, save_store, synthetic_instance

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INVARIANT = 4
EXIT_MISMATCH = 5


def _parse_origin(text: str, inst: Instance) -> Origin:
    if "," in text:
        parts = text.split(",")
        if len(parts) != 2:
            raise InvariantError(f"origin coordinates need exactly x,y: {text!r}")
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise InvariantError(f"origin coordinates are not numbers: {text!r}") from None
        return Origin.from_xy(x, y, inst)
    try:
        point = int(text)
    except ValueError:
        raise InvariantError(f"origin must be a point id or x,y coordinates: {text!r}") from None
    if not 0 <= point < inst.n:
        raise InvariantError(f"origin point {point} not in instance of {inst.n} points")
    return Origin.at_point(point)


def _emit_json(payload):
    json.dump(payload, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")


def cmd_gen(args) -> int:
    inst = synthetic_instance(args.n, args.seed, args.area)
    save_instance(inst, args.out)
    _emit_json({"instance": args.out, "n": inst.n, "horizon": inst.horizon})
    return EXIT_OK


def cmd_precompute(args) -> int:
    inst = load_instance(args.instance)
    store, stats = backward_growth(
        inst, args.l_max, batch=args.batch, destination=args.dest, tol=args.tol
    )
    save_store(store, args.store)
    payload = {
        "store": args.store,
        "kind": store.kind,
        "candidates": store.total_candidates(),
        "total_enumerated": stats.total_enumerated,
        "levels": {
            str(length): {
                "enumerated": s.enumerated_extensions,
                "kept_ip": s.kept_after_ip,
                "kept_batch": s.kept_after_batch,
                "peak_live": s.peak_live_candidates,
                "seconds": s.wall_time,
            }
            for length, s in sorted(stats.levels.items())
        },
    }
    if args.dest is None and args.l_max == inst.n:
        payload["work_bound"] = generation_work_bound(inst.n)
    _emit_json(payload)
    return EXIT_OK


def cmd_query(args) -> int:
    inst = load_instance(args.instance)
    store = load_store(args.store, inst)
    origin = _parse_origin(args.origin, inst)
    q = Query(origin=origin, l_min=args.l_min, l_max=args.l_max, destination=args.dest)
    result = query_routes(store, inst, q)
    _emit_json({
        "cost": result.cost,
        "count": len(result.routes),
        "routes": [
            {
                "points": list(r.candidate.seq.points),
                "travel_cost": r.candidate.travel_cost,
                "pickup_prob": r.candidate.pickup_prob,
            }
            for r in result.routes
        ],
    })
    return EXIT_OK


def cmd_verify(args) -> int:
    """Self-contained oracle-equivalence suite over random instances.

    For every instance and origin, the minimum cost reported by queries on
    the incrementally pruned store and on its batch view must match the
    brute-force minimum for every length window, to 1e-12 relative.
    """
    n = args.n
    l_max = args.l_max if args.l_max is not None else n
    if not 1 <= l_max <= n:
        raise InvariantError(f"l_max {l_max} outside 1..{n}")
    checks = 0
    mismatches = 0
    worst = 0.0
    for s in range(args.seeds):
        inst = synthetic_instance(n, args.seed + s)
        ip_store, _ = backward_growth(inst, l_max, tol=args.tol)
        stores = [ip_store, batch_view(ip_store, tol=args.tol)]

        rng = np.random.default_rng(7_000_000 + args.seed + s)
        origins = [
            Origin.from_xy(x, y, inst)
            for x, y in rng.uniform(-0.25, 1.25, size=(args.trials, 2))
        ]
        oracle = minima_by_length(inst, origins, 1, l_max)
        for oi, origin in enumerate(origins):
            for store in stores:
                per_length = np.array([
                    query_routes(store, inst, Query(origin, length, length)).cost
                    for length in range(1, l_max + 1)
                ])
                for l1 in range(1, l_max + 1):
                    for l2 in range(l1, l_max + 1):
                        want = oracle[oi, l1 - 1:l2].min()
                        got = per_length[l1 - 1:l2].min()
                        rel = abs(got - want) / max(abs(want), 1e-300)
                        worst = max(worst, rel)
                        checks += 1
                        if rel > 1e-12:
                            mismatches += 1
                # full-range scan exercises the multi-level path directly
                got = query_routes(store, inst, Query(origin, 1, l_max)).cost
                rel = abs(got - oracle[oi].min()) / max(abs(oracle[oi].min()), 1e-300)
                worst = max(worst, rel)
                checks += 1
                if rel > 1e-12:
                    mismatches += 1
    _emit_json({
        "n": n,
        "instances": args.seeds,
        "origins": args.trials,
        "checks": checks,
        "mismatches": mismatches,
        "worst_rel_error": worst,
    })
    if mismatches:
        raise VerificationError(f"{mismatches} of {checks} checks disagreed with the oracle")
    return EXIT_OK


def cmd_report(args) -> int:
    """Per-length pruning counts and ratios for each algorithm, as CSV."""
    inst = load_instance(args.instance)
    if not 1 <= args.l_max <= inst.n:
        raise InvariantError(f"l_max {args.l_max} outside 1..{inst.n}")
    ip_store, stats = backward_growth(inst, args.l_max, tol=args.tol)

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["algorithm", "n", "length", "enumerated", "surviving", "ratio", "seconds"])

    def emit(tag, length, stats_row: PruneStats, seconds):
        writer.writerow([
            tag, inst.n, length, stats_row.enumerated, stats_row.kept,
            repr(stats_row.ratio), repr(seconds),
        ])

    for length in range(1, args.l_max + 1):
        total = sequence_count(inst.n, length)
        ip_level = ip_store.levels[length]
        level_stats = stats.levels[length]
        emit("IP", length, PruneStats(total, len(ip_level)), level_stats.wall_time)

        t0 = time.perf_counter()
        batch_level, _ = batch_prune(list(ip_level), tol=args.tol)
        emit("IBP", length, PruneStats(total, len(batch_level)),
             level_stats.wall_time + time.perf_counter() - t0)

        if total <= ENUMERATION_GUARD:
            t0 = time.perf_counter()
            seqs = list(iter_sequences(inst.n, length))
            _, lcp_stats = dominance_prune(seqs, inst)
            emit("LCP", length, lcp_stats, time.perf_counter() - t0)

            t0 = time.perf_counter()
            count = sum(1 for _ in iter_sequences(inst.n, length))
            emit("BFS-enum", length, PruneStats(count, count), time.perf_counter() - t0)
        else:
            print(
                f"note: skipping LCP and BFS-enum at length {length}: "
                f"{total} sequences exceed the enumeration guard",
                file=sys.stderr,
            )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msrec",
        description="Precompute pruned pick-up sequences and answer "
                    "minimal-expected-cost route queries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random synthetic instance file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--area", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("precompute", help="grow and prune candidates, write a store file")
    p.add_argument("--instance", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--l-max", type=int, required=True)
    p.add_argument("--batch", action=argparse.BooleanOptionalAction, default=False,
                   help="store the batch-pruned view instead of the raw pruned levels")
    p.add_argument("--dest", type=int, default=None,
                   help="only grow sequences ending at this point")
    p.add_argument("--tol", type=float, default=0.0)
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("query", help="find all minimum-cost routes for a cab position")
    p.add_argument("--instance", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--origin", required=True, help='point id or "x,y"')
    p.add_argument("--l-min", type=int, required=True)
    p.add_argument("--l-max", type=int, required=True)
    p.add_argument("--dest", type=int, default=None)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("verify", help="check engine results against brute force")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seeds", type=int, required=True, help="number of random instances")
    p.add_argument("--trials", type=int, required=True, help="random origins per instance")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--l-max", type=int, default=None)
    p.add_argument("--tol", type=float, default=0.0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="per-length pruning comparison as CSV")
    p.add_argument("--instance", required=True)
    p.add_argument("--l-max", type=int, required=True)
    p.add_argument("--tol", type=float, default=0.0)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: parse: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except VerificationError as exc:
        print(f"error: verification: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (MissingLevelError, NoRouteError, InvariantError) as exc:
        print(f"error: invariant: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except MsrecError as exc:
        print(f"error: invariant: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
