"""Map and graph loaders, map generators and fixed-size sub-space extraction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import EUCLIDEAN, SearchSpace, UsageError, grid_space


class ParseError(ValueError):
    """Malformed map or graph file; message names the offending line."""


class SamplingError(RuntimeError):
    pass


OPEN_CODES = frozenset(".G")
BLOCKED_CODES = frozenset("@OTSW")


@dataclass
class GridMap:
    """Binary occupancy grid.  ``cells[y, x]`` is True for open cells."""

    cells: np.ndarray
    name: str = "map"

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def open_count(self) -> int:
        return int(self.cells.sum())

    def ids(self) -> np.ndarray:
        """StateId per cell, -1 for blocked cells (row-major over open cells)."""
        ids = np.full(self.cells.shape, -1, dtype=np.int64)
        ys, xs = np.nonzero(self.cells)
        ids[ys, xs] = np.arange(len(xs))
        return ids

    def to_space(self) -> SearchSpace:
        return grid_space(self.cells, {"name": self.name})


@dataclass
class RoadGraph:
    n: int
    arcs: list[tuple[int, int, float]]
    coords: list[tuple[int, int]]
    name: str = "road"

    def to_space(self, admissible_scale: bool = False) -> SearchSpace:
        adj: list[dict[int, float]] = [{} for _ in range(self.n)]
        for u, v, w in self.arcs:
            if u == v:
                continue
            for a, b in ((u, v), (v, u)):
                old = adj[a].get(b)
                if old is None or w < old:
                    adj[a][b] = w
        xs = [float(c[0]) for c in self.coords]
        ys = [float(c[1]) for c in self.coords]
        scale = 1.0
        if admissible_scale:
            ratios = []
            for u in range(self.n):
                for v, w in adj[u].items():
                    d = math.hypot(xs[u] - xs[v], ys[u] - ys[v])
                    if d > 0:
                        ratios.append(w / d)
            scale = min(ratios + [1.0]) if ratios else 1.0
        return SearchSpace([sorted(a.items()) for a in adj], xs, ys, EUCLIDEAN, scale,
                           {"kind": "road", "name": self.name})


@dataclass(frozen=True)
class SubSpaceSpec:
    size: int = 20000
    seed: int = 0
    max_tries: int = 200

    def __post_init__(self):
        if self.size < 2:
            raise UsageError("sub-space size must be at least 2")


def parse_movingai(text: str, name: str = "map") -> GridMap:
    lines = text.splitlines()
    header: dict[str, str] = {}
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw == "map":
            break
        parts = raw.split()
        if len(parts) != 2 or parts[0] not in ("type", "height", "width"):
            raise ParseError(f"line {i}: malformed header line {raw!r}")
        header[parts[0]] = parts[1]
    else:
        raise ParseError(f"line {i}: missing 'map' line")
    for key in ("type", "height", "width"):
        if key not in header:
            raise ParseError(f"line {i}: header lacks '{key}'")
    try:
        h, w = int(header["height"]), int(header["width"])
    except ValueError:
        raise ParseError(f"line {i}: non-integer map dimensions") from None
    if h <= 0 or w <= 0:
        raise ParseError(f"line {i}: map dimensions must be positive")
    cells = np.zeros((h, w), dtype=bool)
    for r in range(h):
        lineno = i + r + 1
        if i + r >= len(lines):
            raise ParseError(f"line {lineno}: expected {h} map rows, found {r}")
        row = lines[i + r].rstrip("\r\n")
        if len(row) != w:
            raise ParseError(f"line {lineno}: row has {len(row)} cells, expected {w}")
        for c, ch in enumerate(row):
            if ch in OPEN_CODES:
                cells[r, c] = True
            elif ch not in BLOCKED_CODES:
                raise ParseError(f"line {lineno}: unknown terrain code {ch!r}")
    for extra in lines[i + h:]:
        if extra.strip():
            raise ParseError(f"line {i + h + 1}: unexpected data after map body")
    return GridMap(cells, name)


def emit_movingai(grid: GridMap) -> str:
    out = ["type octile", f"height {grid.height}", f"width {grid.width}", "map"]
    for row in grid.cells:
        out.append("".join("." if v else "@" for v in row))
    return "\n".join(out) + "\n"


def load_movingai(path: str) -> GridMap:
    with open(path) as fh:
        return parse_movingai(fh.read(), name=path.rsplit("/", 1)[-1].rsplit(".", 1)[0])


def parse_dimacs(gr_text: str, co_text: str, name: str = "road") -> RoadGraph:
    n = m = None
    arcs: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(gr_text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "sp" or n is not None:
                raise ParseError(f".gr line {lineno}: bad problem line {raw!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f".gr line {lineno}: bad problem line {raw!r}") from None
        elif parts[0] == "a":
            if n is None:
                raise ParseError(f".gr line {lineno}: arc before problem line")
            if len(parts) != 4:
                raise ParseError(f".gr line {lineno}: bad arc line {raw!r}")
            try:
                u, v, w = int(parts[1]), int(parts[2]), float(parts[3])
            except ValueError:
                raise ParseError(f".gr line {lineno}: bad arc line {raw!r}") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise ParseError(f".gr line {lineno}: node id out of range in {raw!r}")
            if not w > 0:
                raise ParseError(f".gr line {lineno}: non-positive weight {w}")
            arcs.append((u - 1, v - 1, w))
        else:
            raise ParseError(f".gr line {lineno}: unknown line type {parts[0]!r}")
    if n is None:
        raise ParseError(".gr: missing problem line")
    if m is not None and len(arcs) != m:
        raise ParseError(f".gr: problem line declares {m} arcs, found {len(arcs)}")

    coords: list[tuple[int, int] | None] = [None] * n
    for lineno, raw in enumerate(co_text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] in ("c", "p"):
            continue
        if parts[0] != "v" or len(parts) != 4:
            raise ParseError(f".co line {lineno}: bad coordinate line {raw!r}")
        try:
            i, x, y = int(parts[1]), int(parts[2]), int(parts[3])
        except ValueError:
            raise ParseError(f".co line {lineno}: bad coordinate line {raw!r}") from None
        if not 1 <= i <= n:
            raise ParseError(f".co line {lineno}: node id {i} out of range")
        coords[i - 1] = (x, y)
    used = set()
    for u, v, _ in arcs:
        used.add(u)
        used.add(v)
    for u in sorted(used):
        if coords[u] is None:
            raise ParseError(f".co: missing coordinate for node {u + 1}")
    # isolated nodes without coordinates get the origin; they carry no edges
    full = [c if c is not None else (0, 0) for c in coords]
    return RoadGraph(n, arcs, full, name)


def emit_dimacs(graph: RoadGraph) -> tuple[str, str]:
    gr = [f"p sp {graph.n} {len(graph.arcs)}"]
    gr += [f"a {u + 1} {v + 1} {w:g}" for u, v, w in graph.arcs]
    co = [f"p aux sp co {graph.n}"]
    co += [f"v {i + 1} {x} {y}" for i, (x, y) in enumerate(graph.coords)]
    return "\n".join(gr) + "\n", "\n".join(co) + "\n"


def load_dimacs(gr_path: str, co_path: str) -> RoadGraph:
    with open(gr_path) as g, open(co_path) as c:
        return parse_dimacs(g.read(), c.read(), name=gr_path.rsplit("/", 1)[-1].split(".")[0])


MAZE_CORRIDORS = (1, 2, 4, 8)


def generate_maze(width: int, height: int, corridor_width: int, seed: int) -> GridMap:
    """Perfect maze (recursive backtracker) with passages ``corridor_width`` cells wide.

    The maze is carved on a unit lattice of ``width // corridor_width`` by
    ``height // corridor_width`` cells, which must both be odd and at least 3,
    and every lattice cell is then blown up to a square block.
    """
    c = corridor_width
    if c not in MAZE_CORRIDORS:
        raise UsageError(f"corridor width must be one of {MAZE_CORRIDORS}")
    if width % c or height % c:
        raise UsageError("map dimensions must be multiples of the corridor width")
    lw, lh = width // c, height // c
    if lw < 3 or lh < 3 or lw % 2 == 0 or lh % 2 == 0:
        raise UsageError("lattice dimensions (size / corridor width) must be odd and >= 3")
    rng = np.random.default_rng(seed)
    base = np.zeros((lh, lw), dtype=bool)
    cw, ch = (lw - 1) // 2, (lh - 1) // 2
    seen = np.zeros((ch, cw), dtype=bool)
    start = (int(rng.integers(ch)), int(rng.integers(cw)))
    seen[start] = True
    base[2 * start[0] + 1, 2 * start[1] + 1] = True
    stack = [start]
    while stack:
        r, q = stack[-1]
        options = [(r + dr, q + dq) for dr, dq in ((-1, 0), (1, 0), (0, -1), (0, 1))
                   if 0 <= r + dr < ch and 0 <= q + dq < cw and not seen[r + dr, q + dq]]
        if not options:
            stack.pop()
            continue
        nr, nq = options[int(rng.integers(len(options)))]
        seen[nr, nq] = True
        base[2 * nr + 1, 2 * nq + 1] = True
        base[r + nr + 1, q + nq + 1] = True
        stack.append((nr, nq))
    cells = np.kron(base, np.ones((c, c), dtype=bool)).astype(bool)
    return GridMap(cells, f"maze{width}x{height}c{c}s{seed}")


def generate_rooms(width: int, height: int, room: int, door: int, seed: int,
                   density: float = 0.0) -> GridMap:
    """Rectangular rooms separated by one-cell walls with ``door``-wide gaps.

    Every wall segment between two neighboring rooms gets one door, so the
    room graph is connected before optional scattered obstacles are added.
    """
    if room < 3 or door < 1 or door >= room:
        raise UsageError("need room >= 3 and 1 <= door < room")
    rng = np.random.default_rng(seed)
    cells = np.ones((height, width), dtype=bool)
    walls_x = list(range(room, width - 1, room + 1))
    walls_y = list(range(room, height - 1, room + 1))
    for wx in walls_x:
        cells[:, wx] = False
    for wy in walls_y:
        cells[wy, :] = False
    ybounds = [-1] + walls_y + [height]
    xbounds = [-1] + walls_x + [width]
    for wx in walls_x:
        for y0, y1 in zip(ybounds, ybounds[1:]):
            span = y1 - y0 - 1
            if span <= 0:
                continue
            d = min(door, span)
            off = y0 + 1 + int(rng.integers(span - d + 1))
            cells[off:off + d, wx] = True
    for wy in walls_y:
        for x0, x1 in zip(xbounds, xbounds[1:]):
            span = x1 - x0 - 1
            if span <= 0:
                continue
            d = min(door, span)
            off = x0 + 1 + int(rng.integers(span - d + 1))
            cells[wy, off:off + d] = True
    if density > 0:
        cells &= rng.random(cells.shape) >= density
    return GridMap(cells, f"rooms{width}x{height}r{room}d{door}s{seed}")


def generate_obstacles(width: int, height: int, density: float, seed: int,
                       blob: int = 1) -> GridMap:
    """Open field with square obstacle blobs covering roughly ``density`` of it."""
    if not 0 <= density < 1:
        raise UsageError("density must lie in [0, 1)")
    if blob < 1:
        raise UsageError("blob size must be positive")
    rng = np.random.default_rng(seed)
    cells = np.ones((height, width), dtype=bool)
    target = int(density * width * height)
    while (~cells).sum() < target:
        y = int(rng.integers(height))
        x = int(rng.integers(width))
        cells[y:y + blob, x:x + blob] = False
    return GridMap(cells, f"field{width}x{height}p{density:g}b{blob}s{seed}")


def bfs_layers(space: SearchSpace, origin: int, limit: int) -> list[int]:
    """First ``limit`` states in breadth-first order from ``origin``.

    Layers are scanned in ascending id; the last layer is cut by ascending id
    to reach the exact size.
    """
    seen = {origin}
    taken = [origin]
    layer = [origin]
    while layer and len(taken) < limit:
        nxt = set()
        for u in layer:
            for t, _ in space.adj[u]:
                if t not in seen:
                    nxt.add(t)
        layer = sorted(nxt)
        seen.update(layer)
        room = limit - len(taken)
        taken.extend(layer[:room])
    return taken


def sample_subspace(space: SearchSpace, spec: SubSpaceSpec) -> SearchSpace:
    if spec.size > space.n:
        raise SamplingError(f"space has {space.n} states, fewer than {spec.size}")
    rng = np.random.default_rng(spec.seed)
    for _ in range(spec.max_tries):
        origin = int(rng.integers(space.n))
        states = bfs_layers(space, origin, spec.size)
        if len(states) == spec.size:
            return space.induced(states, {"origin": origin, "sample_seed": spec.seed})
    raise SamplingError(f"no origin with {spec.size} reachable states after "
                        f"{spec.max_tries} tries")
