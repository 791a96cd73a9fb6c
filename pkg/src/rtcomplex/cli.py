"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 a run failed
(or a replay did not reproduce its recorded result).
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import experiment as ex
from .complexity import MEASURES, StabilityConfig, profile
from .core import UsageError, make_problem, suboptimality, validate_solution
from .dbio import DatabaseFormatError, load_db, save_db
from .ingest import ParseError, SamplingError, SubSpaceSpec, emit_movingai, generate_maze, sample_subspace
from .realtime import astar
from .stats import CorrelationResult, format_table

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUN = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def map_spec(text: str, co: str | None = None) -> ex.MapSpec:
    """A file path (.map, .gr) or an inline ``kind:key=val,...`` spec."""
    low = text.lower()
    if low.endswith(".map"):
        return ex.MapSpec("movingai", (("path", text),))
    if low.endswith(".gr"):
        co = co or text[:-3] + ".co"
        return ex.MapSpec("dimacs", (("gr", text), ("co", co)))
    return ex.parse_map_spec(text)


def space_from_args(args):
    spec = map_spec(args.map, getattr(args, "co", None))
    space = ex.load_map(spec)
    if args.size:
        space = sample_subspace(space, SubSpaceSpec(args.size, args.sample_seed))
    return space


def _space_args(p):
    p.add_argument("--map", required=True, help="map file (.map/.gr) or spec like maze:size=127,corridor=1")
    p.add_argument("--co", help="DIMACS coordinate file (default: .gr path with .co)")
    p.add_argument("--size", type=int, default=0, help="carve a breadth-first sub-space of this many states")
    p.add_argument("--sample-seed", type=int, default=0)


def _db_args(p):
    p.add_argument("--algo", required=True, choices=ex.DB_ALGORITHMS)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("-N", type=int, default=1000)
    p.add_argument("-r", type=int, default=1)
    p.add_argument("-b", type=int, default=250)
    p.add_argument("--db-seed", type=int, default=0)
    p.add_argument("--max-regions", type=int, default=4000)


def _cfg_from_db_args(args) -> ex.ExperimentConfig:
    return ex.make_config(levels=args.levels, N=args.N, r=args.r, b=args.b,
                          max_regions=args.max_regions)


def cmd_gen_maze(args):
    grid = generate_maze(args.width, args.height or args.width, args.corridor, args.seed)
    text = emit_movingai(grid)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        print(f"{args.output}: {grid.width}x{grid.height}, {grid.open_count} open cells")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sample(args):
    space = space_from_args(args)
    meta = space.meta
    print(f"states\t{space.n}\nedges\t{space.edge_count()}\ndigest\t{space.digest()}")
    if "origin" in meta:
        print(f"origin\t{meta['origin']}")
    if args.output:
        with open(args.output, "w") as fh:
            fh.write("# sub-space state id -> parent map state id, x, y\n")
            parents = meta.get("parent_ids", list(range(space.n)))
            for s in range(space.n):
                fh.write(f"{s}\t{parents[s]}\t{space.x[s]:g}\t{space.y[s]:g}\n")
    return EXIT_OK


def cmd_profile(args):
    space = space_from_args(args)
    stab = StabilityConfig(args.min_samples, args.max_samples, args.window, args.tol)
    prof = profile(space, stab, args.seed, args.b)
    header = ["states", *MEASURES, *[f"samples_{m}" for m in MEASURES], "unstable"]
    row = {"states": space.n, **prof.values(), **{f"samples_{m}": prof.samples[m] for m in MEASURES},
           "unstable": ";".join(prof.unstable)}
    text = ex.csv_text(header, [row])
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_build_db(args):
    space = space_from_args(args)
    cfg = _cfg_from_db_args(args)
    db = ex.build_db(args.algo, space, cfg, args.db_seed)
    save_db(args.output, db, space)
    print(f"{args.algo} database for {space.n} states written to {args.output} (work {db.work})")
    if args.verify and args.algo in ("knn", "hcdps"):
        bad = db.certificate(space)
        print(f"certificate: {'ok' if not bad else f'{len(bad)} failures'}")
        if bad:
            return EXIT_RUN
    return EXIT_OK


def cmd_solve(args):
    space = space_from_args(args)
    problem = make_problem(space, args.start, args.goal)
    cfg = ex.make_config(d=args.depth, R=args.R, M=args.M, b=args.b, step_cap=args.step_cap,
                         levels=args.levels, N=args.N, r=args.r)
    db = None
    if args.algo in ex.DB_ALGORITHMS:
        db = load_db(args.db, space) if args.db else ex.build_db(args.algo, space, cfg, args.db_seed)
    sol = ex.solve(args.algo, space, db, problem, cfg)
    opt, _ = astar(space, problem)
    print(f"solved\t{int(sol.solved)}\ncost\t{sol.cost:.6f}\noptimal\t{opt.cost:.6f}")
    if sol.solved:
        validate_solution(space, problem, sol)
        print(f"suboptimality\t{suboptimality(sol.cost, opt.cost):.6f}")
    print(f"moves\t{sol.moves}\nexpansions\t{sol.expansions}\nflags\t{';'.join(sol.flags)}")
    if args.path:
        print("path\t" + " ".join(map(str, sol.path)))
    return EXIT_OK if sol.solved else EXIT_RUN


def cmd_bench(args):
    overrides = {k: getattr(args, k) for k in ("out", "workers", "seed", "subspaces",
                                                "subspace_size", "problems")}
    if args.maps:
        overrides["maps"] = args.maps
    if args.algorithms:
        overrides["algorithms"] = args.algorithms
    if args.config:
        cfg = ex.load_config(args.config, **overrides)
    else:
        cfg = ex.make_config(**{k: v for k, v in overrides.items() if v is not None})
    summary = ex.run_experiment(cfg)
    print(f"{len(summary.results)} sub-spaces -> {summary.out}")
    for f in summary.failures:
        print(f"failure: {f}", file=sys.stderr)
    return summary.exit_code


def _load_tables(args):
    profiles = ex.read_csv(args.profiles)
    perf = ex.read_csv(args.performance)
    algs = tuple(dict.fromkeys(p["algorithm"] for p in perf))
    return profiles, perf, algs


def cmd_correlate(args):
    profiles, perf, algs = _load_tables(args)
    if len(profiles) < 3:
        raise UsageError("need at least three profiled sub-spaces")
    rows = ex.correlation_rows(profiles, perf, algs)
    if args.table:
        table = {(r["axis1"], r["axis2"]): CorrelationResult(r["rho"], r["n"], r["p"], bool(r["significant"]))
                 for r in rows if r["stat"] == args.table}
        cols = [f"{a}:{args.table}" for a in algs
                if args.table != "build_work" or a in ex.DB_ALGORITHMS]
        print(format_table(table, list(MEASURES), cols))
        return EXIT_OK
    text = ex.csv_text(ex.CORR_HEADER, rows)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_predict(args):
    profiles, perf, algs = _load_tables(args)
    cfg = ex.make_config(folds=args.folds, bins=args.bins, seed=args.seed)
    summary, per_fold, coef = ex.prediction_outputs(profiles, perf, algs, cfg)
    sys.stdout.write(ex.csv_text(["target", "model", "n", "accuracy", "rmse", "rrse", "error"], summary))
    if args.coefficients:
        with open(args.coefficients, "w") as fh:
            fh.write(coef)
    return EXIT_OK


def cmd_replay(args):
    sol, row = ex.replay(args.out, args.space_id, args.problem, args.algorithm)
    same = ex.replay_matches(sol, row)
    print(f"recorded\tcost={row['cost']} moves={row['moves']} expansions={row['expansions']}")
    print(f"replayed\tcost={ex.fmt(sol.cost)} moves={sol.moves} expansions={sol.expansions}")
    print("match" if same else "MISMATCH")
    return EXIT_OK if same else EXIT_RUN


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rtcomplex", description="Real-time search benchmarks and search-space complexity.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("gen-maze", help="write a generated maze in MovingAI format")
    q.add_argument("--width", type=int, required=True)
    q.add_argument("--height", type=int)
    q.add_argument("--corridor", type=int, default=1, choices=(1, 2, 4, 8))
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_gen_maze)

    q = sub.add_parser("sample", help="carve a breadth-first sub-space and describe it")
    _space_args(q)
    q.add_argument("-o", "--output", help="write the sub-space -> map state id table")
    q.set_defaults(func=cmd_sample)

    q = sub.add_parser("profile", help="compute the eight complexity measures")
    _space_args(q)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-b", type=int, default=250)
    q.add_argument("--min-samples", type=int, default=100)
    q.add_argument("--max-samples", type=int, default=1000)
    q.add_argument("--window", type=int, default=50)
    q.add_argument("--tol", type=float, default=0.02)
    q.add_argument("-o", "--output")
    q.set_defaults(func=cmd_profile)

    q = sub.add_parser("build-db", help="build and save a subgoal database")
    _space_args(q)
    _db_args(q)
    q.add_argument("-o", "--output", required=True)
    q.add_argument("--verify", action="store_true", help="re-check the HC guarantees after building")
    q.set_defaults(func=cmd_build_db)

    q = sub.add_parser("solve", help="solve one problem with one algorithm")
    _space_args(q)
    q.add_argument("--algo", required=True, choices=ex.ALGORITHMS)
    q.add_argument("--start", type=int, required=True)
    q.add_argument("--goal", type=int, required=True)
    q.add_argument("--db", help="saved database (otherwise built on the fly)")
    q.add_argument("--db-seed", type=int, default=0)
    q.add_argument("--depth", type=int, default=1)
    q.add_argument("-R", type=int, default=5)
    q.add_argument("-M", type=int, default=10)
    q.add_argument("-N", type=int, default=1000)
    q.add_argument("-b", type=int, default=250)
    q.add_argument("-r", type=int, default=1)
    q.add_argument("--levels", type=int, default=5)
    q.add_argument("--step-cap", type=int, default=0)
    q.add_argument("--path", action="store_true")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("bench", help="run a corpus experiment")
    q.add_argument("--config", help="key = value config file; flags below override it")
    q.add_argument("--map", dest="maps", action="append", help="map spec (repeatable)")
    q.add_argument("--algorithms", help="comma-separated subset of " + ",".join(ex.ALGORITHMS))
    q.add_argument("--out")
    q.add_argument("--workers", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--subspaces", type=int)
    q.add_argument("--subspace-size", type=int)
    q.add_argument("--problems", type=int)
    q.set_defaults(func=cmd_bench)

    for name, func, hlp in (("correlate", cmd_correlate, "Spearman tables from bench output"),
                            ("predict", cmd_predict, "cross-validated predictors from bench output")):
        q = sub.add_parser(name, help=hlp)
        q.add_argument("--profiles", required=True)
        q.add_argument("--performance", required=True)
        if name == "correlate":
            q.add_argument("--table", choices=("mean", "median", "build_work"),
                           help="print a formatted measure x algorithm table instead of CSV")
            q.add_argument("-o", "--output")
        else:
            q.add_argument("--folds", type=int, default=10)
            q.add_argument("--bins", type=int, default=10)
            q.add_argument("--seed", type=int, default=0)
            q.add_argument("--coefficients", help="write fitted regression coefficients here")
        q.set_defaults(func=func)

    q = sub.add_parser("replay", help="re-solve one recorded problem from a bench run")
    q.add_argument("--out", required=True, help="bench output directory")
    q.add_argument("--space-id", required=True)
    q.add_argument("--problem", type=int, required=True)
    q.add_argument("--algorithm", required=True, choices=ex.ALGORITHMS)
    q.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (ParseError, DatabaseFormatError, SamplingError, OSError, csv.Error, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
