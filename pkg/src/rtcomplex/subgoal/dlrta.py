"""D LRTA*: clique-abstraction partitions with one stored subgoal per partition pair."""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ..core import HeuristicOverlay, Problem, SearchSpace, Solution, UsageError, start_solution
from ..realtime import LssConfig, _lrta_leg


def _clique_round(nodes: int, nbrs: list[set[int]]) -> list[int]:
    group = [-1] * nodes
    count = 0
    for v in range(nodes):
        if group[v] >= 0:
            continue
        members = [v]
        group[v] = count
        for u in sorted(nbrs[v]):
            if len(members) == 4:
                break
            if group[u] < 0 and all(u in nbrs[m] for m in members[1:]):
                members.append(u)
                group[u] = count
        count += 1
    return group


def clique_abstraction(space: SearchSpace, levels: int) -> list[int]:
    """Partition id per state after ``levels`` rounds of greedy clique merging.

    Each round scans abstract nodes in ascending id and groups a node with up
    to three unassigned neighbors that are pairwise adjacent, falling back to
    smaller groups.  Abstract nodes inherit the union of their members' edges.
    """
    if levels < 1:
        raise UsageError("abstraction levels must be >= 1")
    nbrs = [set(t for t, _ in row) for row in space.adj]
    part = list(range(space.n))
    for _ in range(levels):
        group = _clique_round(len(nbrs), nbrs)
        count = max(group) + 1 if group else 0
        if count == len(nbrs):
            break
        merged: list[set[int]] = [set() for _ in range(count)]
        for v, row in enumerate(nbrs):
            gv = group[v]
            for u in row:
                gu = group[u]
                if gu != gv:
                    merged[gv].add(gu)
        part = [group[p] for p in part]
        nbrs = merged
    return part


@dataclass
class DlrtaDatabase:
    partition: list[int]
    representatives: list[int]
    subgoals: dict[tuple[int, int], int]
    levels: int
    seed: int
    work: int = 0

    @property
    def partitions(self) -> int:
        return len(self.representatives)

    def subgoal(self, a: int, b: int) -> int | None:
        return self.subgoals.get((a, b))


def build_dlrta_db(space: SearchSpace, levels: int = 5, seed: int = 0) -> DlrtaDatabase:
    """Clique partitions, random representatives, and first-exit subgoals.

    Optimal representative-to-representative paths come from one Dijkstra
    tree per representative.
    """
    part = clique_abstraction(space, levels)
    k = max(part) + 1 if part else 0
    members: list[list[int]] = [[] for _ in range(k)]
    for s, p in enumerate(part):
        members[p].append(s)
    rng = np.random.default_rng(seed)
    reps = [m[int(rng.integers(len(m)))] for m in members]
    adj = space.adj
    subgoals: dict[tuple[int, int], int] = {}
    work = 0
    for a in range(k):
        src = reps[a]
        dist = {src: 0.0}
        parent = {src: -1}
        done = set()
        heap = [(0.0, src)]
        while heap:
            d, s = heapq.heappop(heap)
            if s in done:
                continue
            done.add(s)
            work += 1
            for t, c in adj[s]:
                nd = d + c
                if nd < dist.get(t, float("inf")) - 1e-12:
                    dist[t] = nd
                    parent[t] = s
                    heapq.heappush(heap, (nd, t))
        for b in range(k):
            if b == a or reps[b] not in parent:
                continue
            route = []
            s = reps[b]
            while s != -1:
                route.append(s)
                s = parent[s]
            route.reverse()
            for s in route:
                if part[s] != a:
                    subgoals[(a, b)] = s
                    break
    return DlrtaDatabase(part, reps, subgoals, levels, seed, work)


def solve_dlrta(space: SearchSpace, db: DlrtaDatabase, problem: Problem,
                cfg: LssConfig = LssConfig()) -> Solution:
    """LRTA* aimed at the stored subgoal for (current partition, goal partition).

    The target changes whenever the agent crosses into another partition and
    learning restarts from the base heuristic on every retarget.  Because a
    leg then depends only on its starting state and target, a repeated
    (state, target) leg start means the subgoals alone can never finish the
    run; the agent then falls back on LRTA* toward the global goal and the
    run is flagged ``livelock``.
    """
    if len(db.partition) != space.n:
        raise UsageError("database was built for a different space")
    part = db.partition
    goal = problem.goal
    gpart = part[goal]
    sol = start_solution(problem.start)
    cap = cfg.cap_for(space)
    legs: set[tuple[int, int]] = set()
    s = problem.start
    while s != goal and sol.moves < cap:
        cur = part[s]
        target = goal if cur == gpart else db.subgoals.get((cur, gpart), goal)
        if (s, target) in legs:
            sol.flags.append("livelock")
            _lrta_leg(space, sol, HeuristicOverlay(space, goal), cfg.depth, cap - sol.moves)
            s = sol.path[-1]
            break
        legs.add((s, target))
        ov = HeuristicOverlay(space, target)
        before = sol.moves
        _lrta_leg(space, sol, ov, cfg.depth, cap - before,
                  stop=lambda t, c=cur: part[t] != c)
        s = sol.path[-1]
        if sol.moves == before:
            break
    sol.solved = s == goal
    if not sol.solved and "livelock" not in sol.flags:
        sol.flags.append("step-cap")
    return sol
