"""Command-line entry point.

Exit codes (stable):
    0  success / smooth / replay reproduced the final marking
    1  singular
    2  input could not be parsed
    3  symmetry group does not preserve the arrangement
    4  smoothness indeterminate (irrational singular candidates)
    5  trace corruption or replay mismatch
    6  run aborted: an action failed past its retries, or a guard raised
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import statistics
import sys
from pathlib import Path

from . import _kernels
from .arrangement import ArrangementError, Arrangement, feasible, load_arrangement, validate_symmetry
from .charts import (
    INDETERMINATE,
    SINGULAR,
    PlaneCurveOracle,
    SyntheticOracle,
    load_smooth_spec,
    run_smoothness,
)
from .petri import Marking, PetriError, PetriNet, load_marking, load_net
from .poly import BiPoly, PolyError
from .runtime import (
    FaultedTransitionError,
    RunConfig,
    RunResult,
    TraceCorruptionError,
    dump_trace,
    load_trace,
    replay,
)
from .symmetry import GroupOverflowError, group_from_json, load_group, parse_signs
from .traversal import ChamberOracle, result_json, traverse

log = logging.getLogger("fanfire")

EXIT_OK = 0
EXIT_SINGULAR = 1
EXIT_PARSE = 2
EXIT_SYMMETRY = 3
EXIT_INDETERMINATE = 4
EXIT_CORRUPT = 5
EXIT_FAULTED = 6

PARSE_ERRORS = (OSError, ValueError, KeyError, TypeError, ArrangementError, PolyError, GroupOverflowError)


def default_workers() -> int:
    env = os.environ.get("FANFIRE_WORKERS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _config(args) -> RunConfig:
    workers = args.workers if args.workers is not None else default_workers()
    return RunConfig(
        workers=workers,
        seed=args.seed,
        trace_enabled=bool(args.trace),
        failure_injection=args.inject_failures,
        max_retries=args.max_retries,
    )


def _write_json(path: str | None, data) -> None:
    text = json.dumps(data, indent=2, sort_keys=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def write_trace_bundle(path: str, net: PetriNet, result: RunResult) -> None:
    """Trace as JSON lines at ``path`` plus ``.net.json``, ``.initial.json``, ``.final.json`` beside it."""
    with open(path, "w") as fh:
        dump_trace(result.trace or [], fh)
    Path(path + ".net.json").write_text(json.dumps(net.to_json()))
    Path(path + ".initial.json").write_text(json.dumps(result.initial.to_json()))
    Path(path + ".final.json").write_text(json.dumps(result.final.to_json()))


def cmd_traverse(args) -> int:
    try:
        arr = load_arrangement(args.arrangement)
        group = load_group(args.group) if args.group else None
    except PARSE_ERRORS as exc:
        log.error("cannot parse input: %s", exc)
        return EXIT_PARSE
    if group is not None:
        if group.m != arr.m:
            log.error("group acts on %d indices, arrangement has %d hyperplanes", group.m, arr.m)
            return EXIT_SYMMETRY
        bad = validate_symmetry(arr, group, seed=args.seed)
        if bad is not None:
            log.error("symmetry violation: %s", bad)
            return EXIT_SYMMETRY
    oracle = ChamberOracle(arr, group, cost_ms=args.cost_ms)
    outcome = traverse(oracle, group, _config(args))
    rows = result_json(outcome)
    if args.witnesses:
        for row in rows:
            w = feasible(arr, parse_signs(row["state"]))
            row["witness"] = [f"{x.numerator}/{x.denominator}" for x in w]
    _write_json(args.out, rows)
    if args.trace:
        write_trace_bundle(args.trace, outcome.net, outcome.run)
    log.info("%d representatives, %d firings", len(rows), outcome.run.stats.total_firings)
    return EXIT_OK


def cmd_smooth(args) -> int:
    try:
        oracle, roots = load_smooth_spec(args.spec)
    except PARSE_ERRORS as exc:
        log.error("cannot parse input: %s", exc)
        return EXIT_PARSE
    res = run_smoothness(oracle, roots, _config(args))
    _write_json(args.out, res.to_json())
    if args.trace and res.run is not None:
        write_trace_bundle(args.trace, res.net, res.run)
    if res.verdict.kind == INDETERMINATE:
        log.error("indeterminate: %s", res.verdict.diagnostic)
        return EXIT_INDETERMINATE
    return EXIT_SINGULAR if res.verdict.kind == SINGULAR else EXIT_OK


def load_workload(path):
    """Return a callable ``(config) -> RunResult`` for a bench workload file."""
    data = json.loads(Path(path).read_text())
    kind = data.get("kind") or ("smooth" if "branching" in data else "traverse")
    if kind == "smooth":
        spec = data.get("spec", data)
        oracle = SyntheticOracle.from_json(spec) if isinstance(spec, dict) else PlaneCurveOracle(BiPoly.from_json(spec))

        def go(cfg):
            return run_smoothness(oracle, oracle.roots(), cfg).run

        return go
    if kind == "traverse":
        arr = Arrangement.from_json(data["arrangement"])
        group = group_from_json(data["group"]) if data.get("group") else None
        oracle = ChamberOracle(arr, group, cost_ms=float(data.get("cost_ms", 0.0)))

        def go(cfg):
            return traverse(oracle, group, cfg).run

        return go
    raise ValueError(f"unknown workload kind {kind!r}")


def bench(workload, workers_list, reps: int, seed: int = 0):
    """Run ``workload`` for every worker count and repetition; returns row dicts.

    ``speedup`` is the median 1-worker wall time over the median wall time
    at that worker count, so every 1-worker row reports exactly 1.0.
    """
    counts = list(dict.fromkeys(workers_list))
    _kernels.iterations_per_ms()  # calibrate (and compile) outside the timed runs
    measure = counts if 1 in counts else [1] + counts
    walls: dict[int, list[float]] = {}
    raw = []
    for w in measure:
        for rep in range(reps):
            result = workload(RunConfig(workers=w, seed=seed, trace_enabled=False))
            wall_ms = result.stats.wall_time_s * 1000.0
            walls.setdefault(w, []).append(wall_ms)
            raw.append((w, rep, wall_ms, result.stats.total_firings, result.stats.busy_fraction()))
    base = statistics.median(walls[1])
    rows = []
    for w, rep, wall_ms, firings, busy in raw:
        if w not in counts:
            continue
        speedup = 1.0 if w == 1 else base / statistics.median(walls[w])
        rows.append({"workers": w, "rep": rep, "wall_ms": wall_ms, "firings": firings, "speedup": speedup, "busy": busy})
    return rows


def cmd_bench(args) -> int:
    try:
        workload = load_workload(args.workload)
        workers_list = [int(x) for x in args.workers_list.split(",") if x.strip()]
    except PARSE_ERRORS as exc:
        log.error("cannot parse input: %s", exc)
        return EXIT_PARSE
    rows = bench(workload, workers_list, args.reps, args.seed)
    out = open(args.csv, "w", newline="") if args.csv and args.csv != "-" else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["workers", "rep", "wall_ms", "firings", "speedup"])
        for r in rows:
            writer.writerow([r["workers"], r["rep"], f"{r['wall_ms']:.3f}", r["firings"], f"{r['speedup']:.4f}"])
    finally:
        if out is not sys.stdout:
            out.close()
    if args.report:
        _write_json(args.report, rows)
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        net = load_net(args.net)
        initial = load_marking(args.initial)
        expect = args.expect
        if expect is None and Path(args.trace + ".final.json").exists():
            expect = args.trace + ".final.json"
        expected = load_marking(expect) if expect else None
    except (*PARSE_ERRORS, PetriError) as exc:
        log.error("cannot parse input: %s", exc)
        return EXIT_PARSE
    try:
        trace = load_trace(args.trace)
        final = replay(net, initial, trace)
    except TraceCorruptionError as exc:
        log.error("trace corrupt at sequence %d: %s", exc.seq, exc)
        return EXIT_CORRUPT
    if expected is not None:
        same = final == expected or (args.modulo_ids and final.equal_modulo_ids(expected))
        if not same:
            log.error("replayed marking differs from the expected one (after %d records)", len(trace))
            return EXIT_CORRUPT
    if args.out:
        _write_json(args.out, final.to_json())
    return EXIT_OK


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=int, default=None, help="worker count (default: $FANFIRE_WORKERS or CPU count)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", default=None, metavar="PATH", help="write a JSON-lines trace (plus net/marking sidecars)")
    p.add_argument("--inject-failures", type=float, default=0.0, metavar="P")
    p.add_argument("--max-retries", type=int, default=10)
    p.add_argument("--out", default=None, metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fanfire", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("traverse", help="enumerate chambers (or orbit representatives) of an arrangement")
    p.add_argument("arrangement")
    p.add_argument("--group", default=None)
    p.add_argument("--cost-ms", type=float, default=0.0, help="extra busy work per expansion")
    p.add_argument("--witnesses", action="store_true", help="add an interior point to every output row")
    _run_flags(p)
    p.set_defaults(func=cmd_traverse)

    p = sub.add_parser("smooth", help="run the chart-descent smoothness search")
    p.add_argument("spec")
    _run_flags(p)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("bench", help="time a workload across worker counts; writes CSV")
    p.add_argument("workload")
    p.add_argument("--workers-list", default="1,2,4,8")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--csv", default=None, metavar="PATH")
    p.add_argument("--report", default=None, metavar="PATH", help="JSON rows including per-worker busy fractions")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="re-apply a trace and compare with the recorded final marking")
    # without --expect, TRACE.final.json (written next to every --trace output) is used when present
    p.add_argument("net")
    p.add_argument("initial")
    p.add_argument("trace")
    p.add_argument("--expect", default=None, metavar="FINAL")
    p.add_argument("--modulo-ids", action="store_true", help="accept a final marking equal up to token ids")
    p.add_argument("--out", default=None, metavar="PATH")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except FaultedTransitionError as exc:
        log.error("%s", exc)
        return EXIT_FAULTED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
