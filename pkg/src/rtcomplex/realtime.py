"""Database-free search: A*/Dijkstra oracles, LRTA*, hill-climbing and TBA*.

Tie-breaking is deterministic everywhere: A* and TBA* prefer the larger g on
equal f and then the smaller state id; LRTA* and hill-climbing pick the
smallest id among equally good neighbors.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .core import (EPS, OCTILE, DIAGONAL_COST, HeuristicOverlay, Problem, SearchSpace,
                   Solution, UsageError, start_solution)

INF = math.inf


def _q(v: float) -> int:
    # quantised key so float noise never decides a tie
    return round(v * 1e6)


@dataclass(frozen=True)
class LssConfig:
    depth: int = 1
    step_cap: int | None = None

    def __post_init__(self):
        if self.depth < 1:
            raise UsageError("lookahead depth must be >= 1")
        if self.step_cap is not None and self.step_cap < 1:
            raise UsageError("step cap must be >= 1")

    def cap_for(self, space: SearchSpace) -> int:
        return self.step_cap if self.step_cap is not None else default_step_cap(space)


def default_step_cap(space: SearchSpace) -> int:
    return 100 * max(space.n, 1)


@dataclass
class AStarStats:
    closed: int
    open: int


class _AStar:
    """Incremental A* from one start; TBA* drives it a slice at a time."""

    def __init__(self, space: SearchSpace, start: int, goal: int, h: list[float] | None = None):
        self.adj = space.adj
        self.h = h if h is not None else space.h_to(goal)
        self.start = start
        self.goal = goal
        self.g = {start: 0.0}
        self.parent = {start: -1}
        self.closed: set[int] = set()
        self.heap = [(_q(self.h[start]), 0, start, 0.0)]
        self.found = False

    def top(self) -> int:
        heap, g, closed = self.heap, self.g, self.closed
        while heap:
            _, _, s, gs = heap[0]
            if s in closed or gs != g[s]:
                heapq.heappop(heap)
                continue
            return s
        return -1

    def run(self, budget: float = INF) -> bool:
        """Expand up to ``budget`` states; True once the goal reaches the head."""
        if self.found:
            return True
        adj, h, g, parent, closed, heap = self.adj, self.h, self.g, self.parent, self.closed, self.heap
        goal = self.goal
        pop, push = heapq.heappop, heapq.heappush
        done = 0
        while done < budget:
            if not heap:
                return False
            _, _, s, gs = heap[0]
            if s in closed or gs != g[s]:
                pop(heap)
                continue
            if s == goal:
                pop(heap)
                closed.add(s)
                self.found = True
                return True
            pop(heap)
            closed.add(s)
            done += 1
            for t, c in adj[s]:
                gt = gs + c
                old = g.get(t)
                if old is None or gt < old - 1e-12:
                    g[t] = gt
                    parent[t] = s
                    if t in closed:
                        closed.discard(t)
                    push(heap, (_q(gt + h[t]), -_q(gt), t, gt))
        return self.found

    def trace(self, s: int) -> list[int]:
        out = []
        parent = self.parent
        while s != -1:
            out.append(s)
            s = parent[s]
        out.reverse()
        return out

    def open_count(self) -> int:
        return len({s for _, _, s, gs in self.heap if s not in self.closed and gs == self.g[s]})


def _path_cost(space: SearchSpace, path: list[int]) -> float:
    cost = space.costs()
    return sum(cost[a][b] for a, b in zip(path, path[1:]))


def astar(space: SearchSpace, problem: Problem) -> tuple[Solution, AStarStats]:
    a = _AStar(space, problem.start, problem.goal)
    found = a.run()
    stats = AStarStats(len(a.closed), a.open_count())
    if not found:
        sol = start_solution(problem.start)
        sol.expansions = len(a.closed)
        sol.flags.append("unreachable")
        return sol, stats
    path = a.trace(problem.goal)
    sol = Solution(path, a.g[problem.goal], {s: 1 for s in path}, len(a.closed), True)
    return sol, stats


def dijkstra_from(space: SearchSpace, goal: int) -> dict[int, float]:
    """Exact cost-to-goal for every state that can reach ``goal``."""
    if not space.valid(goal):
        raise UsageError(f"invalid goal {goal}")
    adj = space.adj
    dist = {goal: 0.0}
    done = set()
    heap = [(0.0, goal)]
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        d, s = pop(heap)
        if s in done:
            continue
        done.add(s)
        for t, c in adj[s]:
            nd = d + c
            old = dist.get(t)
            if old is None or nd < old:
                dist[t] = nd
                push(heap, (nd, t))
    return dist


def dijkstra_array(space: SearchSpace, goal: int) -> list[float]:
    """Like :func:`dijkstra_from` but dense, with ``inf`` for unreachable states."""
    out = [INF] * space.n
    for s, d in dijkstra_from(space, goal).items():
        out[s] = d
    return out


# --------------------------------------------------------------------- LRTA*

def _lrta_leg(space: SearchSpace, sol: Solution, ov: HeuristicOverlay, depth: int,
              max_moves: int, stop: Callable[[int], bool] | None = None) -> bool:
    """Walk ``sol`` from its last state toward ``ov.goal``.

    Returns True when the target is reached.  Returns False when the move
    budget runs out, when ``stop`` fires after a move, or on a dead end.
    """
    if depth > 1:
        return _lrta_leg_deep(space, sol, ov, depth, max_moves, stop)
    adj = space.adj
    h = ov.values
    learned = ov.learned
    target = ov.goal
    path = sol.path
    visits = sol.visit_counts
    s = path[-1]
    moves = 0
    cost = sol.cost
    updates = 0
    try:
        while s != target:
            if moves >= max_moves:
                return False
            best_t = -1
            best_f = INF
            best_c = 0.0
            for t, c in adj[s]:
                f = c + h[t]
                if f < best_f - EPS:
                    best_f = f
                    best_t = t
                    best_c = c
            sol.expansions += 1
            if best_t < 0:
                return False
            if best_f > h[s]:
                h[s] = best_f
                learned[s] = best_f
                updates += 1
            s = best_t
            path.append(s)
            visits[s] = visits.get(s, 0) + 1
            cost += best_c
            moves += 1
            if stop is not None and stop(s):
                return s == target
        return True
    finally:
        sol.cost = cost
        sol.heuristic_updates += updates
        ov.updates += updates


def _lrta_leg_deep(space: SearchSpace, sol: Solution, ov: HeuristicOverlay, depth: int,
                   max_moves: int, stop: Callable[[int], bool] | None) -> bool:
    adj = space.adj
    h = ov.values
    target = ov.goal
    s = sol.path[-1]
    moves = 0
    while s != target:
        if moves >= max_moves:
            return False
        # breadth-limited local search space, then Dijkstra inside it
        level = {s: 0}
        frontier_q = deque([s])
        found_goal = False
        while frontier_q:
            u = frontier_q.popleft()
            if level[u] == depth or u == target:
                if u == target:
                    found_goal = True
                continue
            for t, _ in adj[u]:
                if t not in level:
                    level[t] = level[u] + 1
                    frontier_q.append(t)
        sol.expansions += sum(1 for u, lv in level.items() if lv < depth and u != target)
        g = {s: 0.0}
        parent = {s: -1}
        heap = [(0.0, s)]
        closed = set()
        while heap:
            gu, u = heapq.heappop(heap)
            if u in closed:
                continue
            closed.add(u)
            if level[u] == depth or u == target:
                continue
            for t, c in adj[u]:
                if t in level:
                    gt = gu + c
                    if gt < g.get(t, INF):
                        g[t] = gt
                        parent[t] = u
                        heapq.heappush(heap, (gt, t))
        if found_goal and target in g:
            frontier = [target]
        else:
            frontier = sorted(u for u, lv in level.items() if lv == depth and u in g)
        if not frontier:
            return False
        best = -1
        best_f = INF
        for u in frontier:
            f = g[u] + h[u]
            if f < best_f - EPS:
                best_f = f
                best = u
        # one-step backup as well: every move then satisfies h(s) >= c + h(next),
        # which rules out endless cycling once learning has settled
        near, near_f = -1, INF
        for t, c in adj[s]:
            if c + h[t] < near_f - EPS:
                near, near_f = t, c + h[t]
        if max(best_f, near_f) > h[s]:
            ov.raise_to(s, max(best_f, near_f))
            sol.heuristic_updates += 1
        step = best
        while parent[step] != s:
            step = parent[step]
        cost_of = space.costs()[s]
        if cost_of[step] + h[step] > h[s] + EPS:
            step = near
        sol.cost += cost_of[step]
        s = step
        sol.path.append(s)
        sol.visit_counts[s] = sol.visit_counts.get(s, 0) + 1
        moves += 1
        if stop is not None and stop(s):
            return s == target
    return True


def lrta_star(space: SearchSpace, problem: Problem, cfg: LssConfig = LssConfig()) -> Solution:
    sol = start_solution(problem.start)
    ov = HeuristicOverlay(space, problem.goal)
    sol.solved = _lrta_leg(space, sol, ov, cfg.depth, cfg.cap_for(space))
    if not sol.solved:
        sol.flags.append("step-cap")
    return sol


# ------------------------------------------------------------- hill-climbing

def hill_climb(space: SearchSpace, s1: int, s2: int, b: int) -> tuple[bool, list[int], float]:
    """Greedy descent toward ``s2`` with no learning (HC-Reachable).

    Stops unsuccessfully at a state whose heuristic is no larger than every
    neighbor's, or after ``b`` moves.
    """
    adj = space.adj
    X, Y = space.x, space.y
    gx, gy = X[s2], Y[s2]
    octile = space.heuristic == OCTILE
    scale = space.h_scale
    path = [s1]
    cost = 0.0
    s = s1
    i = 0
    if octile:
        dx = abs(X[s] - gx)
        dy = abs(Y[s] - gy)
        hs = abs(dx - dy) + DIAGONAL_COST * (dx if dx < dy else dy)
    else:
        hs = math.sqrt((X[s] - gx) ** 2 + (Y[s] - gy) ** 2) * scale
    while s != s2 and i < b:
        best_t = -1
        best_f = INF
        best_c = 0.0
        best_h = 0.0
        min_h = INF
        for t, c in adj[s]:
            if octile:
                dx = X[t] - gx
                if dx < 0:
                    dx = -dx
                dy = Y[t] - gy
                if dy < 0:
                    dy = -dy
                ht = (dx - dy if dx > dy else dy - dx) + DIAGONAL_COST * (dx if dx < dy else dy)
            else:
                ex = X[t] - gx
                ey = Y[t] - gy
                ht = math.sqrt(ex * ex + ey * ey) * scale
            if ht < min_h:
                min_h = ht
            f = c + ht
            if f < best_f - EPS:
                best_f = f
                best_t = t
                best_c = c
                best_h = ht
        if not min_h < hs - EPS:
            return False, path, cost
        s = best_t
        hs = best_h
        path.append(s)
        cost += best_c
        i += 1
    return s == s2, path, cost


def hc_reachable(space: SearchSpace, s1: int, s2: int, b: int) -> bool:
    return hill_climb(space, s1, s2, b)[0]


# ---------------------------------------------------------------------- TBA*

def tba_star(space: SearchSpace, problem: Problem, R: float = 5,
             step_cap: int | None = None) -> Solution:
    """Time-sliced A*: ``R`` expansions per move toward the best open state."""
    if not R >= 1:
        raise UsageError("expansion budget R must be >= 1")
    cap = step_cap if step_cap is not None else default_step_cap(space)
    start, goal = problem.start, problem.goal
    search = _AStar(space, start, goal)
    cost_of = space.costs()
    sol = start_solution(start)
    path, visits = sol.path, sol.visit_counts
    agent = start
    trail = [start]
    route: list[int] = [start]
    route_pos = {start: 0}
    route_target = -2
    moves = 0
    idle = 0
    while agent != goal:
        if moves >= cap or idle > cap:
            sol.flags.append("step-cap")
            break
        if not search.found:
            before = len(search.closed)
            search.run(R)
            sol.expansions += len(search.closed) - before
        target = goal if search.found else search.top()
        if target < 0:
            sol.flags.append("unreachable")
            break
        if target != route_target or not search.found:
            route = search.trace(target)
            route_pos = {s: i for i, s in enumerate(route)}
            route_target = target
        pos = route_pos.get(agent)
        if pos is None:
            # off the new route: retrace own steps until it is rejoined
            trail.pop()
            nxt = trail[-1]
        elif pos + 1 < len(route):
            nxt = route[pos + 1]
            trail.append(nxt)
        else:
            idle += 1
            continue
        sol.cost += cost_of[agent][nxt]
        agent = nxt
        path.append(agent)
        visits[agent] = visits.get(agent, 0) + 1
        moves += 1
    sol.solved = agent == goal
    return sol
