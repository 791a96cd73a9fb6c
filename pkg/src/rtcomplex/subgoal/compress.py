from __future__ import annotations

from ..core import SearchSpace, UsageError
from ..realtime import hc_reachable


def compress_path(space: SearchSpace, path: list[int], b: int) -> list[int]:
    """Compress ``path`` into subgoals, each hill-climbable from the previous one.

    From the current anchor the scan walks forward along the path and keeps
    the last state before hill-climbing from the anchor first fails; that
    state becomes the next subgoal and anchor.  The final element is always
    the path's end.  The anchor itself (the path start) is not included.
    """
    if b < 1:
        raise UsageError("HC bound must be >= 1")
    n = len(path)
    chain: list[int] = []
    i = 0
    while i < n - 1:
        anchor = path[i]
        j = i + 1
        while j + 1 < n and hc_reachable(space, anchor, path[j + 1], b):
            j += 1
        chain.append(path[j])
        i = j
    return chain


def chain_certificate(space: SearchSpace, start: int, chain: list[int], b: int) -> list[int]:
    """Indices of chain links that fail ``hc_reachable`` (empty when sound)."""
    bad = []
    prev = start
    for k, s in enumerate(chain):
        if s != prev and not hc_reachable(space, prev, s, b):
            bad.append(k)
        prev = s
    return bad
