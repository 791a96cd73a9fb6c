import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rtcomplex.core import EUCLIDEAN, SearchSpace, grid_space  # noqa: E402


def grid(text: str):
    """Space from a picture: '.' open, '#' blocked, rows separated by newlines."""
    rows = [r.strip() for r in text.strip().splitlines()]
    return grid_space(np.array([[c == "." for c in r] for r in rows]))


def open_grid(w: int, h: int):
    return grid_space(np.ones((h, w), dtype=bool))


def cell(space, x, y) -> int:
    for s in range(space.n):
        if space.x[s] == x and space.y[s] == y:
            return s
    raise KeyError((x, y))


def chain(n: int, costs=None, xs=None):
    """Path graph 0-1-...-(n-1) with euclidean coordinates on a line by default."""
    costs = costs or [1.0] * (n - 1)
    xs = xs if xs is not None else np.cumsum([0.0] + list(costs)).tolist()
    adj = [[] for _ in range(n)]
    for i, c in enumerate(costs):
        adj[i].append((i + 1, c))
        adj[i + 1].append((i, c))
    return SearchSpace(adj, xs, [0.0] * n, EUCLIDEAN)


# Goal on top, a cup opening downward under it: the two cells inside the cup
# lie closer to the goal than the way around.
UTRAP = """
.....
.###.
.#.#.
.#.#.
.....
"""

# Same idea with a deeper pocket; 16 open cells so the exhaustive oracle is cheap.
POCKET16 = """
.....
.###.
.#.#.
.....
"""

TWO_ROOMS = """
.........#.........
.........#.........
.........#.........
...................
.........#.........
.........#.........
.........#.........
"""


@pytest.fixture
def utrap():
    return grid(UTRAP)


@pytest.fixture
def two_rooms():
    return grid(TWO_ROOMS)
