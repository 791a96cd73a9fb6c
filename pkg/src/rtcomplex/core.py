"""Search-space model shared by every algorithm and measure.

States are dense integers ``0..n-1``.  Adjacency lists are sorted by neighbor
id so that every scan over them is deterministic.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

# Comparison tolerance for accumulated path costs.
EPS = 1e-6
DIAGONAL_COST = 1.4

OCTILE = "octile"
EUCLIDEAN = "euclidean"


class UsageError(ValueError):
    """Raised when an operation is called with arguments outside its contract."""


class SearchSpace:
    """Undirected weighted graph with per-state coordinates and a base heuristic.

    ``heuristic`` is ``"octile"`` (grid maps) or ``"euclidean"`` (road graphs).
    ``h_scale`` multiplies the euclidean heuristic; it stays 1.0 unless the
    admissibility fix was requested when the space was built.
    """

    __slots__ = ("adj", "x", "y", "heuristic", "h_scale", "meta", "_xa", "_ya",
                 "_hash", "_cost")

    def __init__(self, adj: Sequence[Sequence[tuple[int, float]]],
                 x: Sequence[float], y: Sequence[float],
                 heuristic: str = OCTILE, h_scale: float = 1.0,
                 meta: dict | None = None, validate: bool = True):
        if heuristic not in (OCTILE, EUCLIDEAN):
            raise UsageError(f"unknown heuristic kind {heuristic!r}")
        self.adj: list[list[tuple[int, float]]] = [sorted(a) for a in adj]
        self.x = list(x)
        self.y = list(y)
        self.heuristic = heuristic
        self.h_scale = float(h_scale)
        self.meta = dict(meta or {})
        self._xa = np.asarray(self.x, dtype=np.float64) if heuristic == EUCLIDEAN \
            else np.asarray(self.x, dtype=np.int64)
        self._ya = np.asarray(self.y, dtype=np.float64) if heuristic == EUCLIDEAN \
            else np.asarray(self.y, dtype=np.int64)
        self._hash: str | None = None
        self._cost: list[dict[int, float]] | None = None
        if validate:
            self.check()

    @property
    def n(self) -> int:
        return len(self.adj)

    def __len__(self) -> int:
        return len(self.adj)

    def check(self) -> None:
        n = len(self.adj)
        if len(self.x) != n or len(self.y) != n:
            raise ValueError("coordinates missing for some states")
        cost = self.costs()
        for s, row in enumerate(self.adj):
            for t, c in row:
                if not 0 <= t < n:
                    raise ValueError(f"edge {s}->{t} leaves the space")
                if t == s:
                    raise ValueError(f"self-loop at state {s}")
                if not c > 0:
                    raise ValueError(f"non-positive edge cost {c} on {s}->{t}")
                back = cost[t].get(s)
                if back is None or abs(back - c) > EPS:
                    raise ValueError(f"edge {s}->{t} is not symmetric")

    def costs(self) -> list[dict[int, float]]:
        if self._cost is None:
            self._cost = [dict(row) for row in self.adj]
        return self._cost

    def edge_cost(self, a: int, b: int) -> float:
        try:
            return self.costs()[a][b]
        except KeyError:
            raise UsageError(f"states {a} and {b} are not adjacent") from None

    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def valid(self, s: int) -> bool:
        return 0 <= s < len(self.adj)

    def h(self, a: int, b: int) -> float:
        return base_h(self, a, b)

    def h_to(self, goal: int) -> list[float]:
        """Base heuristic of every state toward ``goal`` as a plain list."""
        return self.h_array(goal).tolist()

    def h_array(self, goal: int) -> np.ndarray:
        if self.heuristic == OCTILE:
            dx = np.abs(self._xa - self._xa[goal])
            dy = np.abs(self._ya - self._ya[goal])
            return np.abs(dx - dy) + DIAGONAL_COST * np.minimum(dx, dy)
        dx = self._xa - self._xa[goal]
        dy = self._ya - self._ya[goal]
        return np.sqrt(dx * dx + dy * dy) * self.h_scale

    def h_pairs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorised base heuristic between aligned arrays of states."""
        if self.heuristic == OCTILE:
            dx = np.abs(self._xa[a] - self._xa[b])
            dy = np.abs(self._ya[a] - self._ya[b])
            return np.abs(dx - dy) + DIAGONAL_COST * np.minimum(dx, dy)
        dx = self._xa[a] - self._xa[b]
        dy = self._ya[a] - self._ya[b]
        return np.sqrt(dx * dx + dy * dy) * self.h_scale

    def h_fn(self) -> Callable[[int, int], float]:
        """A fast scalar heuristic closure for hot loops."""
        X, Y = self.x, self.y
        if self.heuristic == OCTILE:
            def octile(a: int, b: int) -> float:
                dx = abs(X[a] - X[b])
                dy = abs(Y[a] - Y[b])
                return abs(dx - dy) + DIAGONAL_COST * (dx if dx < dy else dy)
            return octile
        scale = self.h_scale

        def eucl(a: int, b: int) -> float:
            dx = X[a] - X[b]
            dy = Y[a] - Y[b]
            return math.sqrt(dx * dx + dy * dy) * scale
        return eucl

    def digest(self) -> str:
        """Content hash used to tie saved databases to the space they index."""
        if self._hash is None:
            m = hashlib.sha256()
            m.update(f"{self.heuristic}:{self.h_scale!r}:{len(self.adj)}\n".encode())
            for s, row in enumerate(self.adj):
                m.update(f"{self.x[s]!r},{self.y[s]!r}:".encode())
                m.update(",".join(f"{t}:{c!r}" for t, c in row).encode())
                m.update(b"\n")
            self._hash = m.hexdigest()[:16]
        return self._hash

    def induced(self, states: Iterable[int], meta: dict | None = None) -> "SearchSpace":
        """Subgraph on ``states``, relabelled in ascending original-id order."""
        keep = sorted(set(states))
        remap = {s: i for i, s in enumerate(keep)}
        adj = [[(remap[t], c) for t, c in self.adj[s] if t in remap] for s in keep]
        m = dict(self.meta)
        m.update(meta or {})
        m["parent_ids"] = keep
        return SearchSpace(adj, [self.x[s] for s in keep], [self.y[s] for s in keep],
                           self.heuristic, self.h_scale, m, validate=False)


@dataclass(frozen=True)
class Problem:
    start: int
    goal: int


def make_problem(space: SearchSpace, start: int, goal: int) -> Problem:
    if not (space.valid(start) and space.valid(goal)):
        raise UsageError(f"problem ({start}, {goal}) references states outside the space")
    if start == goal:
        raise UsageError("start and goal must differ")
    return Problem(int(start), int(goal))


@dataclass
class Solution:
    path: list[int]
    cost: float
    visit_counts: dict[int, int]
    expansions: int
    solved: bool
    heuristic_updates: int = 0
    flags: list[str] = field(default_factory=list)

    @property
    def moves(self) -> int:
        return len(self.path) - 1


def start_solution(start: int) -> Solution:
    return Solution([start], 0.0, {start: 1}, 0, False)


def validate_solution(space: SearchSpace, problem: Problem, sol: Solution) -> None:
    """Raise ``AssertionError`` if a solved solution breaks its invariants."""
    if not sol.solved:
        return
    p = sol.path
    assert p[0] == problem.start, "path does not begin at start"
    assert p[-1] == problem.goal, "path does not end at goal"
    cost = space.costs()
    total = 0.0
    for a, b in zip(p, p[1:]):
        c = cost[a].get(b)
        assert c is not None, f"consecutive states {a},{b} are not adjacent"
        total += c
    assert abs(total - sol.cost) <= EPS * max(1.0, total), "cost mismatch"
    for s in p:
        assert sol.visit_counts.get(s, 0) >= 1, f"state {s} missing visit count"


class HeuristicOverlay:
    """Learned heuristic values toward one goal, layered over the base heuristic.

    ``values`` is a dense cache of the effective heuristic that solvers read
    directly; ``learned`` holds only the states whose value was raised.
    """

    __slots__ = ("goal", "base", "values", "learned", "updates")

    def __init__(self, space: SearchSpace, goal: int):
        if not space.valid(goal):
            raise UsageError(f"goal {goal} is not a state")
        self.goal = goal
        self.base = space.h_to(goal)
        self.values = list(self.base)
        self.learned: dict[int, float] = {}
        self.updates = 0

    def __getitem__(self, s: int) -> float:
        return self.values[s]

    def raise_to(self, s: int, v: float) -> bool:
        # learning only ever raises h
        if v > self.values[s]:
            self.values[s] = v
            self.learned[s] = v
            self.updates += 1
            return True
        return False

    def __len__(self) -> int:
        return len(self.learned)


def neighbors(space: SearchSpace, s: int) -> list[tuple[int, float]]:
    if not space.valid(s):
        raise UsageError(f"invalid state id {s}")
    return list(space.adj[s])


def base_h(space: SearchSpace, a: int, b: int) -> float:
    if not (space.valid(a) and space.valid(b)):
        raise UsageError(f"invalid state id in ({a}, {b})")
    if space.heuristic == OCTILE:
        dx = abs(space.x[a] - space.x[b])
        dy = abs(space.y[a] - space.y[b])
        return abs(dx - dy) + DIAGONAL_COST * min(dx, dy)
    dx = space.x[a] - space.x[b]
    dy = space.y[a] - space.y[b]
    return math.sqrt(dx * dx + dy * dy) * space.h_scale


def suboptimality(solution_cost: float, optimal_cost: float) -> float:
    if not optimal_cost > 0:
        raise UsageError("optimal cost must be positive")
    return solution_cost / optimal_cost


def effective_h(overlay: HeuristicOverlay, space: SearchSpace, s: int, goal: int) -> float:
    if overlay.goal != goal:
        raise UsageError(f"overlay targets {overlay.goal}, not {goal}")
    v = overlay.learned.get(s)
    return base_h(space, s, goal) if v is None else v


def grid_space(open_cells: np.ndarray, meta: dict | None = None) -> SearchSpace:
    """Eight-connected octile space over the ``True`` cells of a boolean grid.

    A diagonal move needs both adjacent cardinal cells open.  State ids run
    row-major over open cells.
    """
    grid = np.asarray(open_cells, dtype=bool)
    h, w = grid.shape
    ids = np.full((h, w), -1, dtype=np.int64)
    ys, xs = np.nonzero(grid)
    ids[ys, xs] = np.arange(len(xs))
    pad = np.zeros((h + 2, w + 2), dtype=bool)
    pad[1:-1, 1:-1] = grid
    pid = np.full((h + 2, w + 2), -1, dtype=np.int64)
    pid[1:-1, 1:-1] = ids

    n = len(xs)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    # offsets in ascending neighbor-id order for row-major ids
    offsets = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    cols = []
    for dy, dx in offsets:
        ok = pad[1 + dy:1 + dy + h, 1 + dx:1 + dx + w][ys, xs].copy()
        if dy and dx:
            ok &= pad[1 + dy:1 + dy + h, 1:1 + w][ys, xs]
            ok &= pad[1:1 + h, 1 + dx:1 + dx + w][ys, xs]
        nb = pid[1 + dy:1 + dy + h, 1 + dx:1 + dx + w][ys, xs]
        cols.append((np.where(ok, nb, -1).tolist(), DIAGONAL_COST if dy and dx else 1.0))
    for nbs, c in cols:
        for s, t in enumerate(nbs):
            if t >= 0:
                adj[s].append((t, c))
    m = {"kind": "grid", "width": w, "height": h}
    m.update(meta or {})
    return SearchSpace(adj, xs.tolist(), ys.tolist(), OCTILE, 1.0, m, validate=False)


def connected_components(space: SearchSpace) -> list[int]:
    """Component label per state (labels in order of lowest member id)."""
    comp = [-1] * space.n
    label = 0
    for s in range(space.n):
        if comp[s] >= 0:
            continue
        comp[s] = label
        stack = [s]
        while stack:
            u = stack.pop()
            for t, _ in space.adj[u]:
                if comp[t] < 0:
                    comp[t] = label
                    stack.append(t)
        label += 1
    return comp
