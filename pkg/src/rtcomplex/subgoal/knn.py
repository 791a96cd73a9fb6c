"""kNN LRTA*: compressed optimal solutions to random problems, reused online."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import HeuristicOverlay, Problem, SearchSpace, Solution, UsageError, start_solution
from ..realtime import LssConfig, _AStar, _lrta_leg, hill_climb, hc_reachable
from .compress import chain_certificate, compress_path


class DatabaseBuildError(RuntimeError):
    pass


@dataclass(frozen=True)
class KnnRecord:
    start: int
    goal: int
    chain: tuple[int, ...]


@dataclass
class KnnDatabase:
    records: list[KnnRecord]
    b: int
    seed: int
    work: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def certificate(self, space: SearchSpace) -> list[tuple[int, int]]:
        """(record index, link index) pairs that fail HC re-verification."""
        bad = []
        for i, r in enumerate(self.records):
            for k in chain_certificate(space, r.start, list(r.chain), self.b):
                bad.append((i, k))
            if r.chain and r.chain[-1] != r.goal:
                bad.append((i, -1))
        return bad


def build_knn_db(space: SearchSpace, N: int, b: int = 250, seed: int = 0,
                 max_tries: int | None = None) -> KnnDatabase:
    if N < 1:
        raise UsageError("database size N must be >= 1")
    if space.n < 2:
        raise DatabaseBuildError("space has fewer than two states")
    rng = np.random.default_rng(seed)
    tries = max_tries if max_tries is not None else 20 * N
    records: list[KnnRecord] = []
    work = 0
    while len(records) < N:
        if tries <= 0:
            raise DatabaseBuildError(f"found only {len(records)} solvable problems")
        tries -= 1
        s, g = (int(v) for v in rng.integers(space.n, size=2))
        if s == g:
            continue
        a = _AStar(space, s, g)
        ok = a.run()
        work += len(a.closed)
        if not ok:
            continue
        path = a.trace(g)
        records.append(KnnRecord(s, g, tuple(compress_path(space, path, b))))
    return KnnDatabase(records, b, seed, work)


def rank_records(space: SearchSpace, db: KnnDatabase, problem: Problem) -> np.ndarray:
    """Record indices by ascending similarity distance (stable on ties)."""
    if not db.records:
        return np.zeros(0, dtype=np.int64)
    starts = np.fromiter((r.start for r in db.records), dtype=np.int64, count=len(db.records))
    goals = np.fromiter((r.goal for r in db.records), dtype=np.int64, count=len(db.records))
    sim = (space.h_pairs(np.full_like(starts, problem.start), starts)
           + space.h_pairs(np.full_like(goals, problem.goal), goals))
    return np.argsort(sim, kind="stable")


def select_record(space: SearchSpace, db: KnnDatabase, problem: Problem, M: int,
                  b: int) -> KnnRecord | None:
    for i in rank_records(space, db, problem)[:max(M, 0)]:
        r = db.records[int(i)]
        if hc_reachable(space, problem.start, r.start, b) and \
                hc_reachable(space, r.goal, problem.goal, b):
            return r
    return None


def _append_hc(space: SearchSpace, sol: Solution, target: int, b: int) -> bool:
    ok, path, cost = hill_climb(space, sol.path[-1], target, b)
    visits = sol.visit_counts
    for s in path[1:]:
        visits[s] = visits.get(s, 0) + 1
    sol.path.extend(path[1:])
    sol.cost += cost
    sol.expansions += len(path) - 1
    return ok


def solve_knn(space: SearchSpace, db: KnnDatabase, problem: Problem, M: int = 10,
              b: int = 250, cfg: LssConfig = LssConfig(), direct: bool = True) -> Solution:
    """With ``direct``, a goal HC-reachable from the start is climbed to at once,
    as if the database held the problem itself; otherwise records are consulted."""
    sol = start_solution(problem.start)
    if direct and hc_reachable(space, problem.start, problem.goal, b):
        _append_hc(space, sol, problem.goal, b)
        sol.flags.append("direct")
        sol.solved = True
        return sol
    rec = select_record(space, db, problem, M, b)
    cap = cfg.cap_for(space)
    if rec is None:
        sol.flags.append("fallback")
        ov = HeuristicOverlay(space, problem.goal)
        sol.solved = _lrta_leg(space, sol, ov, cfg.depth, cap)
        if not sol.solved:
            sol.flags.append("step-cap")
        return sol
    if not _append_hc(space, sol, rec.start, b):
        sol.flags.append("guarantee-violation")
        return sol
    for sub in rec.chain:
        ov = HeuristicOverlay(space, sub)
        if not _lrta_leg(space, sol, ov, cfg.depth, cap - sol.moves):
            sol.flags.append("step-cap")
            return sol
    if not _append_hc(space, sol, problem.goal, b):
        sol.flags.append("guarantee-violation")
        return sol
    sol.solved = sol.path[-1] == problem.goal
    return sol
