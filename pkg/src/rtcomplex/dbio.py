"""Line-oriented text files for subgoal databases.

Layout::

    rtcomplex-db <version>
    kind <dlrta|knn|hcdps>
    space <digest of the space the database was built on>
    param <name> <value>
    ...payload lines...

Loading checks the digest, so a database is never used on the wrong space.
"""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

from .core import SearchSpace
from .subgoal import DlrtaDatabase, HcdpsDatabase, KnnDatabase, KnnRecord

FORMAT = "rtcomplex-db"
VERSION = 1


class DatabaseFormatError(ValueError):
    pass


class StaleDatabase(DatabaseFormatError):
    """The file was built for a different search space."""


def _ints(xs) -> str:
    return " ".join(str(int(x)) for x in xs)


def dump_db(db, space: SearchSpace) -> str:
    if isinstance(db, DlrtaDatabase):
        kind = "dlrta"
        params = {"levels": db.levels, "seed": db.seed, "work": db.work}
        body = [f"partition {_ints(db.partition)}", f"reps {_ints(db.representatives)}"]
        body += [f"subgoal {a} {b} {s}" for (a, b), s in sorted(db.subgoals.items())]
    elif isinstance(db, KnnDatabase):
        kind = "knn"
        params = {"b": db.b, "seed": db.seed, "work": db.work}
        body = [f"record {r.start} {r.goal} {_ints(r.chain)}".rstrip() for r in db.records]
    elif isinstance(db, HcdpsDatabase):
        kind = "hcdps"
        params = {"r": db.r, "b": db.b, "seed": db.seed, "work": db.work}
        body = [f"region {_ints(db.region)}", f"seeds {_ints(db.seeds)}"]
        for (u, v), path in sorted(db.base_paths.items()):
            body.append(f"base {u} {v} {db.base_costs[(u, v)]!r} {_ints(path)}")
    else:
        raise TypeError(f"not a subgoal database: {type(db).__name__}")
    head = [f"{FORMAT} {VERSION}", f"kind {kind}", f"space {space.digest()}"]
    head += [f"param {k} {v}" for k, v in params.items()]
    return "\n".join(head + body) + "\n"


def save_db(path: str, db, space: SearchSpace) -> None:
    with open(path, "w") as fh:
        fh.write(dump_db(db, space))


def parse_db(text: str, space: SearchSpace):
    lines = text.splitlines()
    if not lines or lines[0].split()[:1] != [FORMAT]:
        raise DatabaseFormatError("not a database file")
    try:
        version = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise DatabaseFormatError("bad header line") from None
    if version != VERSION:
        raise DatabaseFormatError(f"unsupported format version {version}")
    kind = digest = None
    params: dict[str, int] = {}
    body: list[list[str]] = []
    for no, line in enumerate(lines[1:], 2):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "kind":
                kind = parts[1]
            elif parts[0] == "space":
                digest = parts[1]
            elif parts[0] == "param":
                params[parts[1]] = int(parts[2])
            else:
                body.append(parts)
        except (IndexError, ValueError):
            raise DatabaseFormatError(f"line {no}: malformed") from None
    if digest != space.digest():
        raise StaleDatabase("database was built for a different search space")
    try:
        if kind == "dlrta":
            return _load_dlrta(body, params)
        if kind == "knn":
            return _load_knn(body, params)
        if kind == "hcdps":
            return _load_hcdps(body, params, space)
    except (KeyError, IndexError, ValueError) as e:
        raise DatabaseFormatError(f"corrupt {kind} payload: {e}") from None
    raise DatabaseFormatError(f"unknown database kind {kind!r}")


def load_db(path: str, space: SearchSpace):
    with open(path) as fh:
        return parse_db(fh.read(), space)


def _section(body, tag):
    for parts in body:
        if parts[0] == tag:
            return [int(x) for x in parts[1:]]
    raise KeyError(tag)


def _load_dlrta(body, params) -> DlrtaDatabase:
    subgoals = {(int(p[1]), int(p[2])): int(p[3]) for p in body if p[0] == "subgoal"}
    return DlrtaDatabase(_section(body, "partition"), _section(body, "reps"), subgoals,
                         params["levels"], params["seed"], params.get("work", 0))


def _load_knn(body, params) -> KnnDatabase:
    recs = [KnnRecord(int(p[1]), int(p[2]), tuple(int(x) for x in p[3:]))
            for p in body if p[0] == "record"]
    return KnnDatabase(recs, params["b"], params["seed"], params.get("work", 0))


def _load_hcdps(body, params, space) -> HcdpsDatabase:
    from .subgoal.hcdps import region_adjacency

    region = _section(body, "region")
    seeds = _section(body, "seeds")
    if len(region) != space.n:
        raise ValueError("region map size does not match the space")
    k = len(seeds)
    paths, costs = {}, {}
    rows, cols, vals = [], [], []
    for p in body:
        if p[0] != "base":
            continue
        u, v, c = int(p[1]), int(p[2]), float(p[3])
        paths[(u, v)] = [int(x) for x in p[4:]]
        costs[(u, v)] = c
        rows += [u, v]
        cols += [v, u]
        vals += [c, c]
    graph = csr_matrix((vals, (rows, cols)), shape=(k, k))
    dist, pred = csgraph_dijkstra(graph, directed=True, return_predecessors=True)
    db = HcdpsDatabase(region, seeds, region_adjacency(space, region, k), paths, costs,
                       params["r"], params["b"], params["seed"], pred.astype(np.int32), dist,
                       params.get("work", 0))
    db.attach(space)
    return db
