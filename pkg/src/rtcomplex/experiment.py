"""Corpus experiments: sample sub-spaces, profile them, run every algorithm, report.

Each sub-space is an independent job whose seeds derive from the master
seed, the map index and the sub-space index, so results do not depend on
the worker count or completion order.
"""
from __future__ import annotations

import csv
import io
import json
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np

from . import ingest
from .complexity import MEASURES, ComplexityProfile, StabilityConfig, profile
from .core import Problem, SearchSpace, Solution, UsageError, make_problem, suboptimality
from .predict import (MODELS, DegenerateBins, Dataset, cross_validate, db_size_dataset,
                      ols_regression, predict_db_size)
from .realtime import LssConfig, _AStar, lrta_star, tba_star
from .stats import aggregate, correlation_table
from .subgoal import (DatabaseBuildError, build_dlrta_db, build_hcdps_db, build_knn_db,
                      solve_dlrta, solve_hcdps, solve_knn)

ALGORITHMS = ("lrta", "dlrta", "knn", "hcdps", "tba")
DB_ALGORITHMS = ("dlrta", "knn", "hcdps")
MAP_KINDS = ("movingai", "dimacs", "maze", "rooms", "obstacles", "open")


class ConfigError(UsageError):
    pass


# ------------------------------------------------------------------ config

@dataclass(frozen=True)
class MapSpec:
    kind: str
    params: tuple[tuple[str, str], ...] = ()

    def get(self, key: str, default: Any = None) -> Any:
        return dict(self.params).get(key, default)

    @property
    def name(self) -> str:
        given = self.get("name")
        if given:
            return given
        if self.kind == "movingai":
            return os.path.splitext(os.path.basename(self.get("path", "map")))[0]
        if self.kind == "dimacs":
            return os.path.splitext(os.path.basename(self.get("gr", "road")))[0]
        return self.kind + "".join(f"-{k}{v}" for k, v in self.params)

    def text(self) -> str:
        return self.kind + (":" + ",".join(f"{k}={v}" for k, v in self.params) if self.params else "")


def parse_map_spec(text: str) -> MapSpec:
    """``kind:key=val,key=val`` (for example ``maze:size=127,corridor=1,seed=3``)."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip()
    if kind not in MAP_KINDS:
        raise ConfigError(f"unknown map kind {kind!r}; choose from {MAP_KINDS}")
    params = []
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"map parameter {item!r} is not key=value")
        params.append((key.strip(), val.strip()))
    return MapSpec(kind, tuple(params))


@dataclass(frozen=True)
class ExperimentConfig:
    maps: tuple[MapSpec, ...] = ()
    subspaces: int = 10
    subspace_size: int = 20000
    problems: int = 250
    min_cost: float = 10.0
    algorithms: tuple[str, ...] = ALGORITHMS
    d: int = 1
    levels: int = 5
    N: int = 1000
    M: int = 10
    r: int = 1
    b: int = 250
    R: int = 5
    step_cap: int = 0
    max_regions: int = 4000
    stability_min: int = 100
    stability_max: int = 1000
    stability_window: int = 50
    stability_tol: float = 0.02
    db_sizes: tuple[int, ...] = ()
    folds: int = 10
    bins: int = 10
    seed: int = 0
    workers: int = 1
    out: str = "out"

    def __post_init__(self):
        for name in ("subspaces", "subspace_size", "problems", "d", "levels", "N", "r", "b",
                     "R", "max_regions", "workers", "folds", "bins"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.M < 0 or self.step_cap < 0 or self.min_cost < 0:
            raise ConfigError("M, step_cap and min_cost must be non-negative")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithms {bad}; choose from {ALGORITHMS}")
        if any(s < 1 for s in self.db_sizes):
            raise ConfigError("database sizes must be positive")
        self.stability()

    def stability(self) -> StabilityConfig:
        try:
            return StabilityConfig(self.stability_min, self.stability_max,
                                   self.stability_window, self.stability_tol)
        except UsageError as e:
            raise ConfigError(str(e)) from None

    def lss(self) -> LssConfig:
        return LssConfig(self.d, self.step_cap or None)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["maps"] = [m.text() for m in self.maps]
        d["algorithms"] = list(self.algorithms)
        d["db_sizes"] = list(self.db_sizes)
        return d


_LIST_KEYS = {"algorithms", "db_sizes"}


def _coerce(name: str, value: Any) -> Any:
    f = {x.name: x for x in fields(ExperimentConfig)}.get(name)
    if f is None:
        raise ConfigError(f"unknown config key {name!r}")
    if name == "maps":
        items = value if isinstance(value, (list, tuple)) else [value]
        return tuple(m if isinstance(m, MapSpec) else parse_map_spec(m) for m in items)
    if name in _LIST_KEYS:
        items = value.split(",") if isinstance(value, str) else list(value)
        items = [str(i).strip() for i in items if str(i).strip()]
        return tuple(int(i) for i in items) if name == "db_sizes" else tuple(items)
    try:
        if name in ("min_cost", "stability_tol"):
            return float(value)
        if name == "out":
            return str(value)
        return int(value)
    except ValueError:
        raise ConfigError(f"bad value {value!r} for {name}") from None


def make_config(**kw: Any) -> ExperimentConfig:
    return ExperimentConfig(**{k: _coerce(k, v) for k, v in kw.items()})


def parse_config(text: str) -> dict[str, Any]:
    """Key-value lines; ``#`` starts a comment; ``map`` may repeat."""
    out: dict[str, Any] = {}
    maps: list[str] = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise ConfigError(f"line {no}: expected key = value")
        key, val = key.strip(), val.strip()
        if key == "map":
            maps.append(val)
        else:
            out[key] = val
    if maps:
        out["maps"] = maps
    return out


def load_config(path: str, **overrides: Any) -> ExperimentConfig:
    with open(path) as fh:
        kv = parse_config(fh.read())
    kv.update({k: v for k, v in overrides.items() if v is not None})
    return make_config(**kv)


# ------------------------------------------------------------------ corpus

def load_map(spec: MapSpec) -> SearchSpace:
    g = spec.get
    if spec.kind == "movingai":
        return ingest.load_movingai(g("path")).to_space()
    if spec.kind == "dimacs":
        graph = ingest.load_dimacs(g("gr"), g("co"))
        return graph.to_space(admissible_scale=g("admissible", "0") in ("1", "true", "yes"))
    seed = int(g("seed", 0))
    w = int(g("width", g("size", 64)))
    h = int(g("height", g("size", w)))
    if spec.kind == "maze":
        grid = ingest.generate_maze(w, h, int(g("corridor", 1)), seed)
    elif spec.kind == "rooms":
        grid = ingest.generate_rooms(w, h, int(g("room", 16)), int(g("door", 3)), seed,
                                     float(g("density", 0.0)))
    elif spec.kind == "obstacles":
        grid = ingest.generate_obstacles(w, h, float(g("density", 0.2)), seed, int(g("blob", 1)))
    else:
        grid = ingest.GridMap(np.ones((h, w), dtype=bool), f"open{w}x{h}")
    return grid.to_space()


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


_STREAMS = {"sample": 0, "problems": 1, "profile": 2, "dlrta": 3, "knn": 4, "hcdps": 5, "dbsize": 6}


@dataclass(frozen=True)
class SpaceJob:
    map_index: int
    sub_index: int
    map: MapSpec
    space_seed: int

    @property
    def space_id(self) -> str:
        return f"{self.map.name}#{self.sub_index:02d}"

    def seed(self, stream: str) -> int:
        return derive_seed(self.space_seed, _STREAMS[stream])


def plan_jobs(cfg: ExperimentConfig) -> list[SpaceJob]:
    return [SpaceJob(mi, si, m, derive_seed(cfg.seed, mi, si))
            for mi, m in enumerate(cfg.maps) for si in range(cfg.subspaces)]


def gen_problems(space: SearchSpace, count: int, min_optimal_cost: float, seed: int,
                 max_tries: int | None = None) -> list[tuple[Problem, float]]:
    """Random solvable problems with optimal cost >= ``min_optimal_cost``."""
    if count < 1:
        raise UsageError("count must be >= 1")
    if space.n < 2:
        raise ingest.SamplingError("space has fewer than two states")
    rng = np.random.default_rng(seed)
    tries = max_tries if max_tries is not None else 50 * count + 1000
    out: list[tuple[Problem, float]] = []
    while len(out) < count:
        if tries <= 0:
            raise ingest.SamplingError(
                f"only {len(out)} of {count} problems with optimal cost >= {min_optimal_cost}")
        tries -= 1
        s, g = (int(v) for v in rng.integers(space.n, size=2))
        if s == g:
            continue
        a = _AStar(space, s, g)
        if not a.run():
            continue
        cost = a.g[g]
        if cost >= min_optimal_cost - 1e-9:
            out.append((make_problem(space, s, g), cost))
    return out


_MAP_CACHE: dict[MapSpec, SearchSpace] = {}


def job_space(job: SpaceJob, cfg: ExperimentConfig) -> SearchSpace:
    full = _MAP_CACHE.get(job.map)
    if full is None:
        full = _MAP_CACHE[job.map] = load_map(job.map)
    if cfg.subspace_size >= full.n and full.n > 1:
        return full
    return ingest.sample_subspace(full, ingest.SubSpaceSpec(cfg.subspace_size, job.seed("sample")))


def build_db(name: str, space: SearchSpace, cfg: ExperimentConfig, seed: int, N: int | None = None):
    if name == "dlrta":
        return build_dlrta_db(space, cfg.levels, seed)
    if name == "knn":
        return build_knn_db(space, N or cfg.N, cfg.b, seed)
    if name == "hcdps":
        return build_hcdps_db(space, cfg.r, cfg.b, seed, cfg.max_regions)
    raise UsageError(f"{name} has no database")


def solve(name: str, space: SearchSpace, db, problem: Problem, cfg: ExperimentConfig) -> Solution:
    lss = cfg.lss()
    if name == "lrta":
        return lrta_star(space, problem, lss)
    if name == "tba":
        return tba_star(space, problem, cfg.R, lss.step_cap)
    if name == "dlrta":
        return solve_dlrta(space, db, problem, lss)
    if name == "knn":
        return solve_knn(space, db, problem, cfg.M, cfg.b, lss)
    if name == "hcdps":
        return solve_hcdps(space, db, problem, cfg.b)
    raise UsageError(f"unknown algorithm {name!r}")


# ----------------------------------------------------------------- running

@dataclass
class SpaceResult:
    job: SpaceJob
    n_states: int = 0
    digest: str = ""
    profile: ComplexityProfile | None = None
    perf: dict[str, dict] = field(default_factory=dict)
    problems: list[dict] = field(default_factory=list)
    timings: list[dict] = field(default_factory=list)
    dbsize: list[dict] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)


def _flag(sol: Solution) -> str:
    return ";".join(sol.flags)


def run_job(job: SpaceJob, cfg: ExperimentConfig) -> SpaceResult:
    res = SpaceResult(job)
    try:
        space = job_space(job, cfg)
        res.n_states, res.digest = space.n, space.digest()
        t0 = time.perf_counter()
        res.profile = profile(space, cfg.stability(), job.seed("profile"), cfg.b, cfg.lss())
        res.timings.append({"space_id": job.space_id, "stage": "profile",
                            "seconds": time.perf_counter() - t0})
        probs = gen_problems(space, cfg.problems, cfg.min_cost, job.seed("problems"))
    except Exception as e:  # noqa: BLE001 - recorded, the corpus continues
        res.failures.append(f"{job.space_id}: setup: {type(e).__name__}: {e}")
        return res
    for alg in cfg.algorithms:
        db = None
        work = 0
        if alg in DB_ALGORITHMS:
            t0 = time.perf_counter()
            try:
                db = build_db(alg, space, cfg, job.seed(alg))
            except (DatabaseBuildError, UsageError) as e:
                res.failures.append(f"{job.space_id}: {alg} build: {e}")
                res.perf[alg] = {"attempted": len(probs), "error": str(e)}
                continue
            res.timings.append({"space_id": job.space_id, "stage": f"build:{alg}",
                                "seconds": time.perf_counter() - t0})
            work = db.work
        t0 = time.perf_counter()
        subs = []
        for i, (p, opt) in enumerate(probs):
            sol = solve(alg, space, db, p, cfg)
            sub = suboptimality(sol.cost, opt) if sol.solved else float("nan")
            subs.append(sub)
            res.problems.append({
                "space_id": job.space_id, "problem": i, "start": p.start, "goal": p.goal,
                "optimal": opt, "algorithm": alg, "solved": int(sol.solved), "cost": sol.cost,
                "suboptimality": sub, "moves": sol.moves, "expansions": sol.expansions,
                "flags": _flag(sol)})
        res.timings.append({"space_id": job.space_id, "stage": f"solve:{alg}",
                            "seconds": time.perf_counter() - t0})
        agg = aggregate(subs, len(subs))
        res.perf[alg] = {"mean": agg.mean, "median": agg.median, "solve_rate": agg.solve_rate,
                         "solved": agg.solved, "attempted": agg.attempted, "build_work": work}
    for size in cfg.db_sizes:
        try:
            db = build_db("knn", space, cfg, job.seed("dbsize"), N=size)
        except DatabaseBuildError as e:
            res.failures.append(f"{job.space_id}: knn size {size}: {e}")
            continue
        subs = [suboptimality(s.cost, opt) if s.solved else float("nan")
                for s, opt in ((solve("knn", space, db, p, cfg), opt) for p, opt in probs)]
        res.dbsize.append({"space_id": job.space_id, "db_size": size,
                           "mean_suboptimality": aggregate(subs, len(subs)).mean})
    return res


def _run_job_star(args):
    return run_job(*args)


def run_jobs(cfg: ExperimentConfig, jobs: list[SpaceJob]) -> list[SpaceResult]:
    if cfg.workers <= 1 or len(jobs) <= 1:
        results = [run_job(j, cfg) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_job_star, [(j, cfg) for j in jobs]))
    return sorted(results, key=lambda r: (r.job.map_index, r.job.sub_index))


# ------------------------------------------------------------------ output

def fmt(v: Any) -> str:
    if isinstance(v, float):
        if v != v:
            return "nan"
        return repr(round(v, 10))
    return str(v)


def write_csv(path: str, header: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(r.get(h, "")) for h in header])


def read_csv(path: str) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


PROFILE_HEADER = ["space_id", "map", "n_states", "digest", "space_seed", *MEASURES,
                  *[f"samples_{m}" for m in MEASURES], "unstable", "flags"]
PERF_HEADER = ["space_id", "algorithm", "mean", "median", "solve_rate", "solved", "attempted",
               "build_work", "error"]
PROBLEM_HEADER = ["space_id", "problem", "start", "goal", "optimal", "algorithm", "solved",
                  "cost", "suboptimality", "moves", "expansions", "flags"]
CORR_HEADER = ["axis1", "axis2", "stat", "rho", "n", "p", "significant"]


def profile_rows(results: list[SpaceResult]) -> list[dict]:
    rows = []
    for r in results:
        if r.profile is None:
            continue
        row = {"space_id": r.job.space_id, "map": r.job.map.name, "n_states": r.n_states,
               "digest": r.digest, "space_seed": r.job.space_seed,
               "unstable": ";".join(r.profile.unstable), "flags": len(r.profile.flags)}
        row.update(r.profile.values())
        row.update({f"samples_{m}": r.profile.samples[m] for m in MEASURES})
        rows.append(row)
    return rows


def perf_rows(results: list[SpaceResult], algorithms: tuple[str, ...]) -> list[dict]:
    rows = []
    for r in results:
        for alg in algorithms:
            if alg in r.perf:
                rows.append({"space_id": r.job.space_id, "algorithm": alg, **r.perf[alg]})
    return rows


def correlation_rows(profiles: list[dict], perf: list[dict], algorithms: tuple[str, ...]) -> list[dict]:
    """Spearman across sub-spaces for every analysed axis pair."""
    ids = [p["space_id"] for p in profiles]
    cols: dict[str, list[float]] = {m: [float(p[m]) for p in profiles] for m in MEASURES}
    index = {(p["space_id"], p["algorithm"]): p for p in perf}
    nan = float("nan")
    for alg in algorithms:
        for stat in ("mean", "median", "build_work"):
            if stat == "build_work" and alg not in DB_ALGORITHMS:
                continue
            cols[f"{alg}:{stat}"] = [float(index.get((i, alg), {}).get(stat, nan)) for i in ids]
    groups = {
        "mean": [f"{a}:mean" for a in algorithms],
        "median": [f"{a}:median" for a in algorithms],
        "build_work": [f"{a}:build_work" for a in algorithms if a in DB_ALGORITHMS],
    }
    pairs: list[tuple[str, str, str]] = []
    for a_i, a in enumerate(MEASURES):
        for b in MEASURES[a_i + 1:]:
            pairs.append((a, b, "measure"))
    for stat in ("mean", "median"):
        g = groups[stat]
        for i, a in enumerate(g):
            for b in g[i + 1:]:
                pairs.append((a, b, stat))
    for stat, g in groups.items():
        for m in MEASURES:
            for a in g:
                pairs.append((m, a, stat))
    table = correlation_table(cols, [(a, b) for a, b, _ in pairs])
    rows = []
    for a, b, stat in pairs:
        c = table[(a, b)]
        rows.append({"axis1": a, "axis2": b, "stat": stat, "rho": c.rho, "n": c.n, "p": c.p,
                     "significant": int(c.significant)})
    return rows


def prediction_outputs(profiles: list[dict], perf: list[dict], algorithms: tuple[str, ...],
                       cfg: ExperimentConfig) -> tuple[list[dict], list[dict], str]:
    summary, per_fold, coef = [], [], []
    index = {(p["space_id"], p["algorithm"]): p for p in perf}
    for alg in algorithms:
        for stat in ("mean", "median"):
            X, y, ids = [], [], []
            for p in profiles:
                v = index.get((p["space_id"], alg), {}).get(stat)
                if v is None or v != v:
                    continue
                X.append([float(p[m]) for m in MEASURES])
                y.append(float(v))
                ids.append(p["space_id"])
            target = f"{alg}:{stat}"
            if len(y) < max(cfg.folds, cfg.bins):
                continue
            ds = Dataset(np.array(X), np.array(y), list(MEASURES), ids)
            for model in MODELS:
                try:
                    rep = cross_validate(ds, model, cfg.folds, cfg.seed, cfg.bins)
                except (DegenerateBins, UsageError) as e:
                    summary.append({"target": target, "model": model, "n": len(y), "error": str(e)})
                    continue
                summary.append({"target": target, "model": model, "n": rep.n,
                                "accuracy": rep.accuracy, "rmse": rep.rmse, "rrse": rep.rrse})
                for row in rep.rows():
                    per_fold.append({"target": target, **row})
            coef.append(f"# {target}\n" + ols_regression(ds).dump())
    return summary, per_fold, "".join(coef)


def dbsize_outputs(results: list[SpaceResult], profiles: list[dict], cfg: ExperimentConfig):
    prof = {p["space_id"]: p for p in profiles}
    rows = [d for r in results for d in r.dbsize if d["space_id"] in prof]
    rows = [d for d in rows if d["mean_suboptimality"] == d["mean_suboptimality"]]
    if len(rows) < cfg.folds or len({d["db_size"] for d in rows}) < 2:
        return rows, [], ""
    ds = db_size_dataset([[float(prof[d["space_id"]][m]) for m in MEASURES] for d in rows],
                         [d["mean_suboptimality"] for d in rows], [d["db_size"] for d in rows],
                         MEASURES, [d["space_id"] for d in rows])
    model, reports = predict_db_size(ds, cfg.folds, cfg.seed)
    summary = [{"target": "knn:db_size", "model": m, "n": r.n, "accuracy": r.accuracy,
                "rmse": r.rmse, "rrse": r.rrse} for m, r in reports.items()]
    return rows, summary, "# knn:db_size\n" + model.dump()


@dataclass
class RunSummary:
    results: list[SpaceResult]
    out: str
    failures: list[str]

    @property
    def exit_code(self) -> int:
        return 3 if self.failures else 0


def run_experiment(cfg: ExperimentConfig) -> RunSummary:
    if not cfg.maps:
        raise ConfigError("no maps configured")
    os.makedirs(cfg.out, exist_ok=True)
    results = run_jobs(cfg, plan_jobs(cfg))
    write_outputs(cfg, results)
    return RunSummary(results, cfg.out, [f for r in results for f in r.failures])


def write_outputs(cfg: ExperimentConfig, results: list[SpaceResult]) -> None:
    out = cfg.out
    profiles = profile_rows(results)
    perf = perf_rows(results, cfg.algorithms)
    write_csv(os.path.join(out, "profiles.csv"), PROFILE_HEADER, profiles)
    write_csv(os.path.join(out, "performance.csv"), PERF_HEADER, perf)
    write_csv(os.path.join(out, "problems.csv"), PROBLEM_HEADER,
              [p for r in results for p in r.problems])
    if len(profiles) >= 3:
        write_csv(os.path.join(out, "correlations.csv"), CORR_HEADER,
                  correlation_rows(profiles, perf, cfg.algorithms))
    summary, per_fold, coef = prediction_outputs(profiles, perf, cfg.algorithms, cfg)
    dbrows, dbsummary, dbcoef = dbsize_outputs(results, profiles, cfg)
    pred_header = ["target", "model", "n", "accuracy", "rmse", "rrse", "error"]
    write_csv(os.path.join(out, "predictions.csv"), pred_header, summary + dbsummary)
    write_csv(os.path.join(out, "prediction_folds.csv"),
              ["target", "model", "fold", "n_test", "accuracy", "rmse", "effective_k"], per_fold)
    with open(os.path.join(out, "coefficients.txt"), "w") as fh:
        fh.write(coef + dbcoef)
    if cfg.db_sizes:
        write_csv(os.path.join(out, "dbsize.csv"), ["space_id", "db_size", "mean_suboptimality"],
                  dbrows)
    # wall-clock data lives apart from the deterministic tables
    write_csv(os.path.join(out, "timings.csv"), ["space_id", "stage", "seconds"],
              [t for r in results for t in r.timings])
    with open(os.path.join(out, "failures.txt"), "w") as fh:
        fh.writelines(f + "\n" for r in results for f in r.failures)
    meta = {"config": cfg.to_dict(), "machine": platform.platform(),
            "processor": platform.processor() or platform.machine(),
            "python": platform.python_version(), "numpy": np.__version__,
            "spaces": [{"space_id": r.job.space_id, "map_index": r.job.map_index,
                        "sub_index": r.job.sub_index, "space_seed": r.job.space_seed,
                        "n_states": r.n_states, "digest": r.digest} for r in results]}
    with open(os.path.join(out, "run_meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


DETERMINISTIC_OUTPUTS = ("profiles.csv", "performance.csv", "problems.csv", "correlations.csv",
                         "predictions.csv", "prediction_folds.csv", "coefficients.txt",
                         "dbsize.csv", "failures.txt")


# ------------------------------------------------------------------ replay

def config_from_meta(out: str) -> ExperimentConfig:
    with open(os.path.join(out, "run_meta.json")) as fh:
        meta = json.load(fh)
    return make_config(**meta["config"])


def replay(out: str, space_id: str, problem: int, algorithm: str) -> tuple[Solution, dict]:
    """Re-solve one recorded problem in isolation; returns (solution, recorded row)."""
    cfg = config_from_meta(out)
    jobs = {j.space_id: j for j in plan_jobs(cfg)}
    if space_id not in jobs:
        raise UsageError(f"no sub-space {space_id!r} in this run")
    job = jobs[space_id]
    rows = [r for r in read_csv(os.path.join(out, "problems.csv"))
            if r["space_id"] == space_id and int(r["problem"]) == problem
            and r["algorithm"] == algorithm]
    if not rows:
        raise UsageError(f"no recorded run for {space_id} #{problem} {algorithm}")
    row = rows[0]
    space = job_space(job, cfg)
    db = build_db(algorithm, space, cfg, job.seed(algorithm)) if algorithm in DB_ALGORITHMS else None
    sol = solve(algorithm, space, db, make_problem(space, int(row["start"]), int(row["goal"])), cfg)
    return sol, row


def replay_matches(sol: Solution, row: dict) -> bool:
    return (int(row["solved"]) == int(sol.solved) and fmt(sol.cost) == row["cost"]
            and int(row["moves"]) == sol.moves and int(row["expansions"]) == sol.expansions)


def csv_text(header: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(r.get(h, "")) for h in header])
    return buf.getvalue()
