"""Real-time heuristic search algorithms and search-space complexity measures."""
from .core import (EPS, EUCLIDEAN, OCTILE, HeuristicOverlay, Problem, SearchSpace, Solution,
                   UsageError, base_h, effective_h, grid_space, make_problem, neighbors,
                   suboptimality, validate_solution)
from .realtime import LssConfig, astar, dijkstra_from, hc_reachable, hill_climb, lrta_star, tba_star

__version__ = "0.1.0"

__all__ = [
    "EPS", "EUCLIDEAN", "OCTILE", "HeuristicOverlay", "LssConfig", "Problem", "SearchSpace",
    "Solution", "UsageError", "astar", "base_h", "dijkstra_from", "effective_h", "grid_space",
    "hc_reachable", "hill_climb", "lrta_star", "make_problem", "neighbors", "suboptimality",
    "tba_star", "validate_solution",
]
