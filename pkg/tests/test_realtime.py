import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import UTRAP, cell, chain, grid, open_grid
from rtcomplex.core import (HeuristicOverlay, UsageError, base_h, grid_space, make_problem,
                            start_solution, suboptimality, validate_solution)
from rtcomplex.realtime import (LssConfig, _lrta_leg, astar, dijkstra_from, hc_reachable,
                                hill_climb, lrta_star, tba_star)

# cost of the R=1 walk out of the cup, recorded from a simulation (optimal is 9)
TBA_UTRAP_COST = 21.0


def test_astar_open_3x3_diagonal():
    sp = open_grid(3, 3)
    p = make_problem(sp, cell(sp, 0, 0), cell(sp, 2, 2))
    sol, stats = astar(sp, p)
    assert sol.cost == pytest.approx(2.8)
    assert sol.path == [cell(sp, 0, 0), cell(sp, 1, 1), cell(sp, 2, 2)]
    assert stats.closed >= len(sol.path)
    validate_solution(sp, p, sol)


def test_astar_adjacent_and_unreachable():
    sp = chain(2, costs=[3.5])
    sol, _ = astar(sp, make_problem(sp, 0, 1))
    assert sol.cost == 3.5
    walled = grid("..#..")
    sol, _ = astar(walled, make_problem(walled, 0, 3))
    assert not sol.solved


def test_dijkstra_examples():
    sp = open_grid(3, 3)
    h = dijkstra_from(sp, 4)
    assert h[0] == h[2] == h[6] == h[8] == pytest.approx(1.4)
    assert h[1] == h[3] == h[5] == h[7] == 1.0
    assert dijkstra_from(chain(3), 2) == {2: 0.0, 1: 1.0, 0: 2.0}
    assert 0 not in dijkstra_from(grid(".#."), 1)


def test_true_distance_dominates_octile(utrap):
    for g in range(utrap.n):
        h = dijkstra_from(utrap, g)
        assert all(h[s] >= base_h(utrap, s, g) - 1e-9 for s in h)


random_grids = st.tuples(st.integers(3, 9), st.integers(3, 9), st.integers(0, 2**31 - 1)).map(
    lambda a: grid_space(np.random.default_rng(a[2]).random((a[1], a[0])) > 0.3))


@given(random_grids, st.data())
@settings(max_examples=40, deadline=None)
def test_astar_matches_dijkstra(sp, data):
    if sp.n < 2:
        return
    for _ in range(25):
        s = data.draw(st.integers(0, sp.n - 1))
        g = data.draw(st.integers(0, sp.n - 1))
        if s == g:
            continue
        sol, _ = astar(sp, make_problem(sp, s, g))
        d = dijkstra_from(sp, g)
        if s in d:
            assert sol.solved and math.isclose(sol.cost, d[s], abs_tol=1e-6)
        else:
            assert not sol.solved


def test_lrta_open_grid_is_perfect():
    sp = open_grid(3, 3)
    sol = lrta_star(sp, make_problem(sp, cell(sp, 0, 0), cell(sp, 2, 2)))
    assert sol.solved and sol.cost == pytest.approx(2.8)
    assert set(sol.visit_counts.values()) == {1}


def test_lrta_chain_needs_no_learning():
    sp = chain(3)
    sol = lrta_star(sp, make_problem(sp, 0, 2))
    assert sol.moves == 2 and sol.heuristic_updates == 0


def _utrap_problem(sp):
    # start inside the cup, goal just above the closed top wall
    return make_problem(sp, cell(sp, 2, 3), cell(sp, 2, 0))


def test_lrta_scrubs_the_utrap(utrap):
    p = _utrap_problem(utrap)
    ov = HeuristicOverlay(utrap, p.goal)
    sol = start_solution(p.start)
    assert _lrta_leg(utrap, sol, ov, 1, 10_000)
    validate_solution(utrap, p, sol)
    assert max(sol.visit_counts.values()) >= 2
    pocket = cell(utrap, 2, 2)
    assert ov[pocket] > base_h(utrap, pocket, p.goal)
    # learned values never pass the true distance with a consistent base
    hstar = dijkstra_from(utrap, p.goal)
    assert all(ov[s] <= hstar[s] + 1e-9 for s in range(utrap.n))


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_lrta_complete_on_small_spaces(depth):
    rng = np.random.default_rng(depth)
    for _ in range(3):
        sp = grid_space(rng.random((6, 6)) > 0.25)
        for s, g in itertools.permutations(range(sp.n), 2):
            d = dijkstra_from(sp, g)
            if s not in d:
                continue
            sol = lrta_star(sp, make_problem(sp, s, g), LssConfig(depth))
            assert sol.solved
            validate_solution(sp, make_problem(sp, s, g), sol)


@given(st.integers(2, 7), st.integers(2, 7), st.data())
@settings(max_examples=40, deadline=None)
def test_lrta_visits_each_state_once_on_open_grids(w, h, data):
    sp = open_grid(w, h)
    s = data.draw(st.integers(0, sp.n - 1))
    g = data.draw(st.integers(0, sp.n - 1).filter(lambda x: x != s))
    sol = lrta_star(sp, make_problem(sp, s, g))
    assert set(sol.visit_counts.values()) == {1}
    assert sol.cost == pytest.approx(base_h(sp, s, g))


def test_lrta_step_cap_marks_unsolved(utrap):
    sol = lrta_star(utrap, _utrap_problem(utrap), LssConfig(1, step_cap=2))
    assert not sol.solved and sol.moves == 2 and "step-cap" in sol.flags
    with pytest.raises(UsageError):
        LssConfig(1, step_cap=0)


def test_hill_climb_open_grid():
    sp = open_grid(8, 6)
    for s, g in [(0, 47), (5, 40), (17, 30)]:
        ok, path, cost = hill_climb(sp, s, g, 250)
        assert ok and cost == pytest.approx(base_h(sp, s, g))
        assert path[0] == s and path[-1] == g


def test_hill_climb_identity_and_budget():
    sp = open_grid(4, 4)
    assert hill_climb(sp, 5, 5, 0) == (True, [5], 0.0)
    assert not hc_reachable(sp, 0, 15, 0)
    assert not hc_reachable(sp, 0, 15, 2)
    assert hc_reachable(sp, 0, 15, 3)


def test_hill_climb_stops_in_the_trap(utrap):
    p = _utrap_problem(utrap)
    ok, path, _ = hill_climb(utrap, p.start, p.goal, 250)
    assert not ok
    assert path[-1] == cell(utrap, 2, 2)
    assert not hc_reachable(utrap, p.start, p.goal, 250)
    # reachability is not symmetric: the corner descends the side corridor to
    # the mouth, but from the mouth greedy moves walk up into the cup
    corner, mouth = cell(utrap, 0, 0), cell(utrap, 2, 4)
    assert hc_reachable(utrap, corner, mouth, 250)
    assert not hc_reachable(utrap, mouth, corner, 250)


@given(random_grids, st.data())
@settings(max_examples=30, deadline=None)
def test_hc_reachable_reflexive_and_identical_to_hill_climb(sp, data):
    if sp.n == 0:
        return
    s = data.draw(st.integers(0, sp.n - 1))
    g = data.draw(st.integers(0, sp.n - 1))
    b = data.draw(st.integers(0, 40))
    assert hc_reachable(sp, s, s, b)
    assert hc_reachable(sp, s, g, b) == hill_climb(sp, s, g, b)[0]


def test_tba_open_grid():
    sp = open_grid(3, 3)
    p = make_problem(sp, cell(sp, 0, 0), cell(sp, 2, 2))
    sol = tba_star(sp, p, R=5)
    assert sol.solved and sol.cost == pytest.approx(2.8)


def test_tba_with_unbounded_slice_follows_astar(two_rooms):
    p = make_problem(two_rooms, 0, two_rooms.n - 1)
    sol = tba_star(two_rooms, p, R=math.inf)
    assert sol.path == astar(two_rooms, p)[0].path


def test_tba_utrap_detour(utrap):
    p = _utrap_problem(utrap)
    sol = tba_star(utrap, p, R=1)
    validate_solution(utrap, p, sol)
    opt = astar(utrap, p)[0].cost
    assert sol.solved and suboptimality(sol.cost, opt) > 1
    # regression fixture for the simulated walk
    assert sol.cost == pytest.approx(TBA_UTRAP_COST)


def test_tba_unreachable_and_budget():
    sp = grid("..#..")
    sol = tba_star(sp, make_problem(sp, 0, 3), R=2)
    assert not sol.solved
    with pytest.raises(UsageError):
        tba_star(sp, make_problem(sp, 0, 1), R=0)


@given(random_grids, st.integers(1, 6), st.data())
@settings(max_examples=40, deadline=None)
def test_tba_paths_are_valid_and_never_beat_optimal(sp, R, data):
    if sp.n < 2:
        return
    s = data.draw(st.integers(0, sp.n - 1))
    g = data.draw(st.integers(0, sp.n - 1).filter(lambda x: x != s))
    p = make_problem(sp, s, g)
    opt, _ = astar(sp, p)
    sol = tba_star(sp, p, R=R)
    assert sol.solved == opt.solved
    if sol.solved:
        validate_solution(sp, p, sol)
        assert sol.cost >= opt.cost - 1e-6

