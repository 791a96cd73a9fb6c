"""Algorithm-independent search-space complexity measures.

Every sampled measure draws sample ``i`` from its own generator seeded by
``(seed, measure index, i)``, so a fixed-count measurement and a
stability-driven one agree on their common prefix.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import SearchSpace, UsageError, connected_components
from .realtime import LssConfig, _AStar, dijkstra_array, hc_reachable, lrta_star
from .subgoal.compress import compress_path
from .subgoal.hcdps import hc_partition

MEASURES = (
    "hc_region_size",
    "hc_probability",
    "scrubbing_complexity",
    "path_compressibility",
    "astar_difficulty",
    "heuristic_error",
    "depression_width",
    "depression_capacity",
)

_NONE = -1


# ------------------------------------------------------------- depressions

@dataclass
class DepressionAnalysis:
    goal: int
    member: np.ndarray
    depth: np.ndarray
    goal_basin: np.ndarray
    depressions: list[frozenset[int]] = field(default_factory=list)

    @property
    def width(self) -> int:
        return int(self.member.sum())

    @property
    def capacity(self) -> float:
        return float(self.depth[self.member].sum())


class _Forest:
    """Union-find over states plus the merge tree of its components."""

    def __init__(self, n: int, keep: bool):
        self.parent = list(range(n))
        self.node = [_NONE] * n
        self.leaf = [_NONE] * n
        self.tparent: list[int] = []
        self.mark: list[int] = []
        self.gmark: list[int] = []
        self.members: dict[int, list[int]] | None = {} if keep else None

    def new_node(self) -> int:
        self.tparent.append(_NONE)
        self.mark.append(_NONE)
        self.gmark.append(_NONE)
        return len(self.tparent) - 1

    def add_leaf(self, v: int) -> int:
        t = self.new_node()
        self.node[v] = self.leaf[v] = t
        if self.members is not None:
            self.members[v] = [v]
        return t

    def find(self, v: int) -> int:
        p = self.parent
        root = v
        while p[root] != root:
            root = p[root]
        while p[v] != root:
            p[v], v = root, p[v]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        t = self.new_node()
        self.tparent[self.node[ra]] = t
        self.tparent[self.node[rb]] = t
        if ra > rb:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.node[ra] = t
        if self.members is not None:
            self.members[ra].extend(self.members.pop(rb))

    def settle(self, marks: list[int]) -> list[int]:
        best = list(marks)
        tp = self.tparent
        for t in range(len(best) - 1, -1, -1):
            p = tp[t]
            if p != _NONE and best[p] > best[t]:
                best[t] = best[p]
        return best


def find_depressions(space: SearchSpace, goal: int, keep_sets: bool = False) -> DepressionAnalysis:
    """Heuristic depressions toward ``goal`` by a level-by-level watershed.

    Heights are the base heuristic quantised to 1e-6.  At each distinct level
    mu the states below mu form components; a level-mu state joins the closure
    of a component set K when all its lower neighbors lie in K.  A closure is
    a locally maximal depression exactly when some level-mu state outside it
    touches it (that state blocks further growth).  A state's depth is the
    highest such blocking level over every goal-free depression containing it,
    minus its own height.  States outside the goal's connected component are
    ignored.  With ``keep_sets`` the member sets of all closures found are
    returned (nested depressions included).  Every returned set is a locally
    maximal depression and together they cover all members, but a maximal
    depression that is the union of two reported ones may be left out.
    """
    if not space.valid(goal):
        raise UsageError(f"invalid goal {goal}")
    n = space.n
    adj = space.adj
    hq = [round(v * 1e6) for v in space.h_to(goal)]

    seen = [False] * n
    seen[goal] = True
    queue = deque([goal])
    levels: dict[int, list[int]] = {}
    while queue:
        u = queue.popleft()
        levels.setdefault(hq[u], []).append(u)
        for v, _ in adj[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)

    forest = _Forest(n, keep_sets)
    active = [False] * n
    found: list[frozenset[int]] = []
    for mu in sorted(levels):
        L = sorted(levels[mu])
        in_level = set(L)
        low: dict[int, frozenset[int]] = {}
        lnbrs: dict[int, list[int]] = {}
        touching: dict[int, list[int]] = {}
        for v in L:
            forest.add_leaf(v)
        for v in L:
            lows = set()
            same = []
            for u, _ in adj[v]:
                if active[u]:
                    lows.add(forest.find(u))
                elif u in in_level:
                    same.append(u)
            low[v] = frozenset(lows)
            lnbrs[v] = same
            for c in lows:
                touching.setdefault(c, []).append(v)
        goal_root = forest.find(goal) if active[goal] else _NONE

        def closure(K: frozenset[int], seeds: list[int]) -> tuple[set[int], bool]:
            inside = set()
            q = deque()
            for v in seeds:
                if v not in inside:
                    inside.add(v)
                    q.append(v)
            for c in K:
                for v in touching[c]:
                    if v not in inside and low[v] <= K:
                        inside.add(v)
                        q.append(v)
            while q:
                v = q.popleft()
                for u in lnbrs[v]:
                    if u not in inside and low[u] <= K:
                        inside.add(u)
                        q.append(u)
            blocked = any(u not in inside for v in inside for u in lnbrs[v]) or \
                any(v not in inside for c in K for v in touching[c])
            return inside, blocked

        keys: list[tuple[frozenset[int], list[int]]] = []
        seen_keys = set()
        for c in sorted(touching):
            K = frozenset((c,))
            seen_keys.add(K)
            keys.append((K, []))
        in_blob = set()
        for v in L:
            K = low[v]
            if len(K) >= 2 and K not in seen_keys:
                seen_keys.add(K)
                keys.append((K, [v]))
            elif not K and v not in in_blob:
                blob, _ = closure(K, [v])
                in_blob |= blob
                keys.append((K, [v]))

        for K, seeds in keys:
            inside, blocked = closure(K, seeds)
            if not blocked:
                continue
            has_goal = goal_root in K or goal in inside
            marks = forest.gmark if has_goal else forest.mark
            for c in K:
                t = forest.node[c]
                if marks[t] < mu:
                    marks[t] = mu
            for v in inside:
                t = forest.leaf[v]
                if marks[t] < mu:
                    marks[t] = mu
            if keep_sets and not has_goal:
                members = set(inside)
                for c in K:
                    members.update(forest.members[c])
                found.append(frozenset(members))

        for v in L:
            active[v] = True
        for v in L:
            for u, _ in adj[v]:
                if active[u]:
                    forest.union(v, u)

    best = forest.settle(forest.mark)
    gbest = forest.settle(forest.gmark)
    member = np.zeros(n, dtype=bool)
    depth = np.zeros(n)
    basin = np.zeros(n, dtype=bool)
    for mu, states in levels.items():
        for s in states:
            leaf = forest.leaf[s]
            b = best[leaf]
            if b != _NONE:
                member[s] = True
                depth[s] = (b - mu) / 1e6
            elif gbest[leaf] != _NONE:
                basin[s] = True
    if keep_sets:
        found = sorted(set(found), key=lambda d: (min(d), len(d), sorted(d)))
    return DepressionAnalysis(goal, member, depth, basin, found)



# ---------------------------------------------------------------- sampling

@dataclass(frozen=True)
class StabilityConfig:
    min_samples: int = 100
    max_samples: int = 1000
    window: int = 50
    tolerance: float = 0.02

    def __post_init__(self):
        if self.min_samples < 1 or self.window < 1:
            raise UsageError("min_samples and window must be >= 1")
        if self.min_samples > self.max_samples:
            raise UsageError("min_samples must not exceed max_samples")
        if not self.tolerance > 0:
            raise UsageError("tolerance must be > 0")


@dataclass
class SampleRun:
    mean: float
    count: int
    stable: bool
    values: list[float]


def is_stable(prefix_sums: list[float], cfg: StabilityConfig) -> bool:
    """Running mean moved by at most ``tolerance`` (relative) over the last window."""
    n = len(prefix_sums) - 1
    if n < cfg.min_samples or n <= cfg.window:
        return False
    now = prefix_sums[n] / n
    then = prefix_sums[n - cfg.window] / (n - cfg.window)
    return abs(now - then) <= cfg.tolerance * abs(now)


def sample_until_stable(draw: Callable[[int], float], cfg: StabilityConfig) -> SampleRun:
    values: list[float] = []
    sums = [0.0]
    while len(values) < cfg.max_samples:
        v = float(draw(len(values)))
        values.append(v)
        sums.append(sums[-1] + v)
        if is_stable(sums, cfg):
            return SampleRun(sums[-1] / len(values), len(values), True, values)
    return SampleRun(sums[-1] / len(values), len(values), False, values)


def sample_rng(seed: int, measure: str, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, MEASURES.index(measure), i])


class _Sampler:
    """Draws solvable random problems and goals inside one space."""

    def __init__(self, space: SearchSpace):
        if space.n < 2:
            raise UsageError("space needs at least two states")
        self.space = space
        comp = connected_components(space)
        self.comp = comp
        sizes = np.bincount(np.asarray(comp))
        if sizes.max() < 2:
            raise UsageError("space has no connected pair of states")
        self.sizes = sizes

    def pair(self, rng: np.random.Generator) -> tuple[int, int]:
        n = self.space.n
        for _ in range(10000):
            s, g = (int(v) for v in rng.integers(n, size=2))
            if s != g and self.comp[s] == self.comp[g]:
                return s, g
        raise UsageError("could not draw a solvable problem")

    def goal(self, rng: np.random.Generator) -> int:
        n = self.space.n
        for _ in range(10000):
            g = int(rng.integers(n))
            if self.sizes[self.comp[g]] >= 2:
                return g
        raise UsageError("could not draw a goal")


def _hc_probability_sample(sp: _Sampler, rng, b: int) -> float:
    # ordered pair of distinct states, reachable or not
    n = sp.space.n
    while True:
        s, g = (int(v) for v in rng.integers(n, size=2))
        if s != g:
            return 1.0 if hc_reachable(sp.space, s, g, b) else 0.0


def _scrubbing_sample(sp: _Sampler, rng, cfg: LssConfig, flags: list[str]) -> float:
    from .core import make_problem
    s, g = sp.pair(rng)
    sol = lrta_star(sp.space, make_problem(sp.space, s, g), cfg)
    if not sol.solved:
        flags.append(f"unsolved:{s}->{g}")
    counts = sol.visit_counts
    return sum(counts.values()) / len(counts)


def _astar_path(sp: _Sampler, rng) -> tuple[list[int], int]:
    s, g = sp.pair(rng)
    a = _AStar(sp.space, s, g)
    if not a.run():
        raise UsageError("sampled pair is not connected")
    return a.trace(g), len(a.closed)


def _compress_sample(sp: _Sampler, rng, b: int) -> float:
    path, _ = _astar_path(sp, rng)
    return float(len(compress_path(sp.space, path, b)))


def _astar_sample(sp: _Sampler, rng) -> float:
    path, closed = _astar_path(sp, rng)
    return closed / len(path)


def _herror_sample(sp: _Sampler, rng) -> float:
    g = sp.goal(rng)
    hstar = np.asarray(dijkstra_array(sp.space, g))
    h0 = sp.space.h_array(g)
    ok = np.isfinite(hstar)
    gap = hstar[ok] - h0[ok]
    # h0 <= h* holds exactly; drop float noise so exact heuristics score 0
    gap[gap < 1e-9] = 0.0
    return float(np.sum(gap))


def _depression_sample(sp: _Sampler, rng) -> DepressionAnalysis:
    return find_depressions(sp.space, sp.goal(rng))


def _fixed(measure: str, seed: int, count: int, draw: Callable[[np.random.Generator], float]) -> float:
    if count < 1:
        raise UsageError("sample count must be >= 1")
    return float(np.mean([draw(sample_rng(seed, measure, i)) for i in range(count)]))


def measure_hc_region_size(space: SearchSpace, b: int = 250, seed: int = 0) -> float:
    region, seeds, _ = hc_partition(space, b, seed)
    return space.n / len(seeds)


def measure_hc_probability(space: SearchSpace, n_pairs: int, b: int = 250, seed: int = 0) -> float:
    sp = _Sampler(space)
    return _fixed("hc_probability", seed, n_pairs, lambda r: _hc_probability_sample(sp, r, b))


def measure_scrubbing(space: SearchSpace, n_problems: int, cfg: LssConfig = LssConfig(),
                      seed: int = 0) -> float:
    sp = _Sampler(space)
    flags: list[str] = []
    return _fixed("scrubbing_complexity", seed, n_problems,
                  lambda r: _scrubbing_sample(sp, r, cfg, flags))


def measure_path_compressibility(space: SearchSpace, n_problems: int, b: int = 250,
                                 seed: int = 0) -> float:
    sp = _Sampler(space)
    return _fixed("path_compressibility", seed, n_problems, lambda r: _compress_sample(sp, r, b))


def measure_astar_difficulty(space: SearchSpace, n_problems: int, seed: int = 0) -> float:
    sp = _Sampler(space)
    return _fixed("astar_difficulty", seed, n_problems, lambda r: _astar_sample(sp, r))


def measure_heuristic_error(space: SearchSpace, n_goals: int, seed: int = 0) -> float:
    sp = _Sampler(space)
    return _fixed("heuristic_error", seed, n_goals, lambda r: _herror_sample(sp, r))


def measure_depression_width(space: SearchSpace, n_goals: int, seed: int = 0) -> float:
    sp = _Sampler(space)
    return _fixed("depression_width", seed, n_goals,
                  lambda r: _depression_sample(sp, r).width)


def measure_depression_capacity(space: SearchSpace, n_goals: int, seed: int = 0) -> float:
    sp = _Sampler(space)
    # shares goals with depression_width so both match profile()
    return _fixed("depression_width", seed, n_goals,
                  lambda r: _depression_sample(sp, r).capacity)


# ----------------------------------------------------------------- profile

@dataclass
class ComplexityProfile:
    hc_region_size: float
    hc_probability: float
    scrubbing_complexity: float
    path_compressibility: float
    astar_difficulty: float
    heuristic_error: float
    depression_width: float
    depression_capacity: float
    samples: dict[str, int]
    seed: int
    unstable: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def values(self) -> dict[str, float]:
        return {m: getattr(self, m) for m in MEASURES}

    def check_ranges(self) -> list[str]:
        """Names of measures outside their declared range (empty when sound)."""
        lo = {"hc_region_size": 1, "hc_probability": 0, "scrubbing_complexity": 1,
              "path_compressibility": 1, "astar_difficulty": 1, "heuristic_error": 0,
              "depression_width": 0, "depression_capacity": 0}
        bad = [m for m in MEASURES if not getattr(self, m) >= lo[m] - 1e-9]
        if self.hc_probability > 1:
            bad.append("hc_probability")
        return bad


def profile(space: SearchSpace, stability: StabilityConfig = StabilityConfig(), seed: int = 0,
            b: int = 250, lss: LssConfig = LssConfig()) -> ComplexityProfile:
    """All eight measures, each sampled until its running mean settles.

    HC region size is a census over every state (one partition), so its
    sample count is |S|.  Depression width and capacity share goals: both
    read the same per-goal analysis from the width stream.
    """
    sp = _Sampler(space)
    flags: list[str] = []
    samples: dict[str, int] = {}
    unstable: list[str] = []
    values: dict[str, float] = {}

    values["hc_region_size"] = measure_hc_region_size(space, b, seed)
    samples["hc_region_size"] = space.n

    def run(name: str, fn: Callable[[np.random.Generator], float]) -> None:
        res = sample_until_stable(lambda i: fn(sample_rng(seed, name, i)), stability)
        values[name] = res.mean
        samples[name] = res.count
        if not res.stable:
            unstable.append(name)

    run("hc_probability", lambda r: _hc_probability_sample(sp, r, b))
    run("scrubbing_complexity", lambda r: _scrubbing_sample(sp, r, lss, flags))
    run("path_compressibility", lambda r: _compress_sample(sp, r, b))
    run("astar_difficulty", lambda r: _astar_sample(sp, r))
    run("heuristic_error", lambda r: _herror_sample(sp, r))

    # width and capacity from the same goals; stop when both have settled
    widths: list[float] = []
    caps: list[float] = []
    wsum, csum = [0.0], [0.0]
    stable = False
    while len(widths) < stability.max_samples:
        da = _depression_sample(sp, sample_rng(seed, "depression_width", len(widths)))
        widths.append(float(da.width))
        caps.append(da.capacity)
        wsum.append(wsum[-1] + widths[-1])
        csum.append(csum[-1] + caps[-1])
        if is_stable(wsum, stability) and is_stable(csum, stability):
            stable = True
            break
    for name, series in (("depression_width", widths), ("depression_capacity", caps)):
        values[name] = float(np.mean(series))
        samples[name] = len(series)
        if not stable:
            unstable.append(name)

    return ComplexityProfile(**values, samples=samples, seed=seed, unstable=unstable, flags=flags)
