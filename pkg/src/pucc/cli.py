"""Command-line front end.

Exit codes: 0 success, 1 negative answer (infeasible decision, failed
verification), 2 usage, input or I/O error.
"""

from __future__ import annotations

import argparse
import functools
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from pucc.clock import WallClock, WorkClock
from pucc.core import InvalidInstanceError, Solution, SolverParams, Trace, contest_instance, make_rng
from pucc.driver import solve
from pucc.io import (
    ParseError,
    load_instance,
    load_solution,
    load_targets,
    render_svg,
    verify_solution,
    write_history_csv,
    write_instance,
    write_results_csv,
    write_solution,
    write_trace_csv,
)
from pucc.its import InfeasibleRadiusError, its_decide, multistart_decide

log = logging.getLogger("pucc")

STRATEGIES = {
    "its": its_decide,
    "mts": functools.partial(multistart_decide, local_search="tabu"),
    "sd": functools.partial(multistart_decide, local_search="descent"),
}


class UsageError(Exception):
    pass


def _read_instance(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such instance file: {path}")
    return load_instance(p.read_text(), name=p.stem)


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    elif path:
        Path(path).write_text(text)


def _params(args) -> SolverParams:
    return SolverParams(feasibility_tol=args.tol) if args.tol else SolverParams()


def _clock(args):
    # a seeded run is measured in deterministic work units unless told otherwise
    if args.seed is not None and not args.wall_clock:
        return WorkClock()
    return WallClock()


def cmd_gen_contest(args):
    inst = contest_instance(args.n)
    _write(args.out or "-", write_instance(inst, comment=f"contest n={args.n}, r_i = i"))
    return 0


def cmd_solve(args):
    inst = _read_instance(args.instance)
    trace = Trace() if args.trace else None
    run = solve(
        inst,
        _params(args),
        args.time_limit,
        args.seed,
        clock=_clock(args),
        trace=trace,
        decide=STRATEGIES[args.strategy],
        target_radius=args.target,
    )
    print(f"{inst.name}: best R = {run.best.radius:.10f} (max violation {run.best.max_violation:.2e})")
    _write(args.out, write_solution(run.best))
    history = args.history or (f"{args.out}.history.csv" if args.out and args.out != "-" else None)
    _write(history, write_history_csv(run.history))
    if trace is not None:
        _write(args.trace, write_trace_csv(trace))
    if args.svg:
        _write(args.svg, render_svg(inst, run.best))
    return 0


def cmd_decide(args):
    inst = _read_instance(args.instance)
    trace = Trace() if args.trace else None
    rng = make_rng(args.seed)
    try:
        out = STRATEGIES[args.strategy](
            inst, args.radius, _params(args), args.time_limit, rng, trace=trace, clock=_clock(args)
        )
    except InfeasibleRadiusError as exc:
        raise UsageError(str(exc)) from None
    verdict = "feasible" if out.feasible else "infeasible"
    print(
        f"{inst.name} at R = {args.radius:.10f}: {verdict} "
        f"(energy {out.energy:.3e}, restarts {out.restarts}, rounds {out.perturb_rounds})"
    )
    if args.out:
        _write(args.out, write_solution(Solution(args.radius, out.pattern, out.max_violation, inst.name)))
    if trace is not None:
        _write(args.trace, write_trace_csv(trace))
    return 0 if out.feasible else 1


def cmd_verify(args):
    inst = _read_instance(args.instance)
    sol = load_solution(Path(args.solution).read_text(), inst)
    rep = verify_solution(inst, sol, args.tol or 1e-9)
    status = "feasible" if rep.feasible else "INFEASIBLE"
    where = " ".join(map(str, rep.worst)) or "none"
    print(f"{status}: R = {sol.radius:.10f}, max violation {rep.max_violation:.3e} (worst: {where})")
    return 0 if rep.feasible else 1


def cmd_render(args):
    inst = _read_instance(args.instance)
    sol = load_solution(Path(args.solution).read_text(), inst)
    _write(args.out or "-", render_svg(inst, sol))
    return 0


def _bench_cell(path, seed, args):
    inst = _read_instance(path)
    clock = WallClock() if args.wall_clock else WorkClock()
    run = solve(inst, _params(args), args.time_limit, seed, clock=clock, decide=STRATEGIES[args.strategy])
    return inst.name, run


def cmd_bench(args):
    root = Path(args.directory)
    paths = sorted(p for p in root.glob("*.txt")) if root.is_dir() else []
    if not paths:
        raise UsageError(f"no instance files (*.txt) in {args.directory}")
    targets = load_targets(Path(args.targets).read_text()) if args.targets else {}
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else list(range(args.repeats))
    cells = [(p, s) for p in paths for s in seeds]
    work = functools.partial(_bench_cell, args=args)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            runs = list(pool.map(work, *zip(*cells)))
    else:
        runs = [work(p, s) for p, s in cells]
    rows = []
    for (path, seed), (name, run) in zip(cells, runs):
        target = targets.get(name)
        hit = "" if target is None else int(run.best.radius <= target * (1 + args.hit_rtol))
        rows.append(
            dict(
                instance=name,
                seed=seed,
                strategy=args.strategy,
                best_R=repr(run.best.radius),
                time_to_best_s=f"{run.time_to_best:.3f}",
                feasible=int(run.best.max_violation <= (args.tol or 1e-9)),
                hit=hit,
            )
        )
        log.info("%s seed=%d R=%.10f", name, seed, run.best.radius)
    _write(args.out or "-", write_results_csv(rows))
    return 0


def _positive(kind):
    def parse(text):
        v = kind(text)
        if not v > 0 or (isinstance(v, float) and not math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pucc", description="Pack unequal circles into the smallest circle.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, strategy=True):
        p.add_argument("--time-limit", type=_positive(float), default=60.0, help="seconds (default 60)")
        p.add_argument("--seed", type=int, default=None, help="seed; makes every output reproducible")
        p.add_argument("--wall-clock", action="store_true", help="budget in real seconds even when seeded")
        p.add_argument("--tol", type=_positive(float), default=None, help="feasibility tolerance (1e-9)")
        if strategy:
            p.add_argument("--strategy", choices=sorted(STRATEGIES), default="its")

    p = sub.add_parser("gen-contest", help="write the contest instance r_i = i")
    p.add_argument("n", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_contest)

    p = sub.add_parser("solve", help="minimize the container radius")
    p.add_argument("instance")
    common(p)
    p.add_argument("--out", help="solution file")
    p.add_argument("--history", help="history CSV (default <out>.history.csv)")
    p.add_argument("--trace", help="trace CSV")
    p.add_argument("--svg", help="SVG rendering of the best packing")
    p.add_argument("--target", type=_positive(float), help="stop once R <= target")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("decide", help="search for a feasible packing at a fixed radius")
    p.add_argument("instance")
    p.add_argument("--radius", type=_positive(float), required=True)
    common(p)
    p.add_argument("--out", help="solution file with the best pattern found")
    p.add_argument("--trace", help="trace CSV")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("verify", help="check a solution file")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--tol", type=_positive(float), default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="draw a solution as SVG")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="solve every instance in a directory for several seeds")
    p.add_argument("directory")
    common(p)
    p.add_argument("--seeds", help="comma-separated seeds (default 0..repeats-1)")
    p.add_argument("--repeats", type=_positive(int), default=10)
    p.add_argument("--targets", help="file of 'name radius' best-known values")
    p.add_argument("--hit-rtol", type=float, default=1e-5)
    p.add_argument("--jobs", type=_positive(int), default=1)
    p.add_argument("--out", help="results CSV (default stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, ParseError, InvalidInstanceError, OSError) as exc:
        print(f"pucc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
