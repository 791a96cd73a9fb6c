"""HCDPS: hill-climbing regions plus dynamic-programming subgoal records.

Region records are assembled on demand from the region-graph shortest-path
tree and cached; :meth:`HcdpsDatabase.materialize` fills the whole table.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

from ..core import Problem, SearchSpace, Solution, UsageError, start_solution
from ..realtime import _AStar, hc_reachable, hill_climb
from .compress import compress_path
from .knn import DatabaseBuildError


def hc_partition(space: SearchSpace, b: int = 250, seed: int = 0) -> tuple[list[int], list[int], int]:
    """Grow HC regions breadth-first from random seeds.

    A state joins a region when it neighbors a member and is mutually
    HC-reachable with the region's seed.  Returns (region per state, seeds,
    number of HC checks performed).
    """
    rng = np.random.default_rng(seed)
    order = rng.permutation(space.n).tolist()
    region = [-1] * space.n
    seeds: list[int] = []
    adj = space.adj
    checks = 0
    for s0 in order:
        if region[s0] >= 0:
            continue
        rid = len(seeds)
        seeds.append(s0)
        region[s0] = rid
        tested = {s0}
        queue = deque([s0])
        while queue:
            u = queue.popleft()
            for v, _ in adj[u]:
                if region[v] >= 0 or v in tested:
                    continue
                tested.add(v)
                checks += 1
                if hc_reachable(space, v, s0, b) and hc_reachable(space, s0, v, b):
                    region[v] = rid
                    queue.append(v)
    return region, seeds, checks


@dataclass(frozen=True)
class HcdpsRecord:
    regions: tuple[int, ...]
    chain: tuple[int, ...]
    cost: float


@dataclass
class HcdpsDatabase:
    region: list[int]
    seeds: list[int]
    adjacency: list[list[int]]
    base_paths: dict[tuple[int, int], list[int]]
    base_costs: dict[tuple[int, int], float]
    r: int
    b: int
    seed: int
    predecessors: np.ndarray
    distances: np.ndarray
    work: int = 0
    _space: SearchSpace | None = field(default=None, repr=False)
    _records: dict[tuple[int, int], HcdpsRecord] = field(default_factory=dict, repr=False)

    @property
    def regions(self) -> int:
        return len(self.seeds)

    def connected(self, a: int, b: int) -> bool:
        return a != b and bool(np.isfinite(self.distances[a, b]))

    def record_count(self) -> int:
        """Ordered region pairs that have a record (materialised or not)."""
        return int(np.isfinite(self.distances).sum()) - self.regions

    def region_route(self, a: int, b: int) -> list[int]:
        if not self.connected(a, b):
            raise KeyError((a, b))
        route = [b]
        pred = self.predecessors[a]
        while route[-1] != a:
            route.append(int(pred[route[-1]]))
        route.reverse()
        return route

    def seed_path(self, a: int, b: int) -> list[int]:
        route = self.region_route(a, b)
        path = [self.seeds[a]]
        for u, v in zip(route, route[1:]):
            path.extend(self.base_path(u, v)[1:])
        return path

    def base_path(self, u: int, v: int) -> list[int]:
        if (u, v) in self.base_paths:
            return self.base_paths[(u, v)]
        return self.base_paths[(v, u)][::-1]

    def record(self, a: int, b: int) -> HcdpsRecord:
        key = (a, b)
        rec = self._records.get(key)
        if rec is None:
            if self._space is None:
                raise RuntimeError("database is not attached to a space")
            route = self.region_route(a, b)
            chain = compress_path(self._space, self.seed_path(a, b), self.b)
            rec = HcdpsRecord(tuple(route), tuple(chain), float(self.distances[a, b]))
            self._records[key] = rec
        return rec

    def records(self) -> dict[tuple[int, int], HcdpsRecord]:
        return dict(self._records)

    def materialize(self) -> int:
        for a in range(self.regions):
            for b in range(self.regions):
                if self.connected(a, b):
                    self.record(a, b)
        return len(self._records)

    def attach(self, space: SearchSpace) -> None:
        if len(self.region) != space.n:
            raise UsageError("database was built for a different space")
        self._space = space

    def certificate(self, space: SearchSpace) -> list[int]:
        """States failing mutual HC-reachability with their region seed."""
        bad = []
        for s, rid in enumerate(self.region):
            seed = self.seeds[rid]
            if not (hc_reachable(space, s, seed, self.b) and hc_reachable(space, seed, s, self.b)):
                bad.append(s)
        return bad


def region_adjacency(space: SearchSpace, region: list[int], count: int) -> list[list[int]]:
    nb: list[set[int]] = [set() for _ in range(count)]
    for s, row in enumerate(space.adj):
        a = region[s]
        for t, _ in row:
            if region[t] != a:
                nb[a].add(region[t])
    return [sorted(x) for x in nb]


def build_hcdps_db(space: SearchSpace, r: int = 1, b: int = 250, seed: int = 0,
                   max_regions: int = 4000, materialize: bool = False) -> HcdpsDatabase:
    if r < 1:
        raise UsageError("neighborhood radius r must be >= 1")
    region, seeds, checks = hc_partition(space, b, seed)
    k = len(seeds)
    if k > max_regions:
        raise DatabaseBuildError(
            f"HC partition produced {k} regions, over the budget of {max_regions}")
    adjacency = region_adjacency(space, region, k)
    work = checks
    pairs = set()
    for a in range(k):
        # regions within r hops of a
        depth = {a: 0}
        q = deque([a])
        while q:
            u = q.popleft()
            if depth[u] == r:
                continue
            for v in adjacency[u]:
                if v not in depth:
                    depth[v] = depth[u] + 1
                    q.append(v)
        for v in depth:
            if v > a:
                pairs.add((a, v))
    base_paths: dict[tuple[int, int], list[int]] = {}
    base_costs: dict[tuple[int, int], float] = {}
    rows, cols, vals = [], [], []
    for a, v in sorted(pairs):
        search = _AStar(space, seeds[a], seeds[v])
        ok = search.run()
        work += len(search.closed)
        if not ok:
            continue
        base_paths[(a, v)] = search.trace(seeds[v])
        cost = search.g[seeds[v]]
        base_costs[(a, v)] = cost
        rows += [a, v]
        cols += [v, a]
        vals += [cost, cost]
    graph = csr_matrix((vals, (rows, cols)), shape=(k, k))
    dist, pred = csgraph_dijkstra(graph, directed=True, return_predecessors=True)
    db = HcdpsDatabase(region, seeds, adjacency, base_paths, base_costs, r, b, seed,
                       pred.astype(np.int32), dist, work)
    db.attach(space)
    if materialize:
        db.materialize()
    return db


def _climb(space: SearchSpace, sol: Solution, target: int, b: int) -> bool:
    ok, path, cost = hill_climb(space, sol.path[-1], target, b)
    if not ok:
        return False
    visits = sol.visit_counts
    for s in path[1:]:
        visits[s] = visits.get(s, 0) + 1
    sol.path.extend(path[1:])
    sol.cost += cost
    sol.expansions += len(path) - 1
    return True


def solve_hcdps(space: SearchSpace, db: HcdpsDatabase, problem: Problem, b: int = 250) -> Solution:
    """Pure hill-climbing through region seeds and record subgoals."""
    if db._space is not space:
        db.attach(space)
    start, goal = problem.start, problem.goal
    ra, rb = db.region[start], db.region[goal]
    sol = start_solution(start)
    if ra == rb:
        if _climb(space, sol, goal, b):
            sol.solved = True
            return sol
        legs = [db.seeds[ra], goal]
    elif db.connected(ra, rb):
        legs = [db.seeds[ra], *db.record(ra, rb).chain, goal]
    else:
        sol.flags.append("unreachable")
        return sol
    for target in legs:
        if not _climb(space, sol, target, b):
            sol.flags.append("guarantee-violation")
            return sol
    sol.solved = sol.path[-1] == goal
    return sol
