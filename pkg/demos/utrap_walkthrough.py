"""Five agents on one U-shaped trap.

The goal sits above a cup that opens away from it.  LRTA* must learn its way
out of the cup (scrubbing), TBA* pays for its time slices, and the database
agents route around the cup with subgoals.

    python3 demos/utrap_walkthrough.py
"""
import numpy as np

from rtcomplex.core import grid_space, make_problem, suboptimality
from rtcomplex.realtime import astar, lrta_star, tba_star
from rtcomplex.subgoal import build_dlrta_db, build_hcdps_db, build_knn_db, solve_dlrta, solve_hcdps, solve_knn

PICTURE = """
..........G..........
.....................
....#############....
....#...........#....
....#...........#....
....#.....S.....#....
....#...........#....
.....................
"""


def main():
    rows = [r for r in PICTURE.strip().splitlines()]
    cells = np.array([[c != "#" for c in r] for r in rows])
    space = grid_space(cells)
    where = {c: (x, y) for y, r in enumerate(rows) for x, c in enumerate(r) if c in "SG"}
    ids = {c: next(s for s in range(space.n) if (space.x[s], space.y[s]) == xy)
           for c, xy in where.items()}
    p = make_problem(space, ids["S"], ids["G"])
    opt = astar(space, p)[0].cost
    print(f"{space.n} open cells, optimal cost {opt:.1f}\n")
    runs = {
        "lrta": lrta_star(space, p),
        "tba": tba_star(space, p, R=5),
        "dlrta": solve_dlrta(space, build_dlrta_db(space, 3, seed=1), p),
        "knn": solve_knn(space, build_knn_db(space, 200, seed=1), p),
        "hcdps": solve_hcdps(space, build_hcdps_db(space, seed=1), p),
    }
    print(f"{'agent':6} {'cost':>7} {'subopt':>7} {'moves':>6} {'max visits':>10}  flags")
    for name, sol in runs.items():
        visits = max(sol.visit_counts.values()) if sol.visit_counts else 0
        sub = f"{suboptimality(sol.cost, opt):7.2f}" if sol.solved else "      -"
        print(f"{name:6} {sol.cost:7.1f} {sub} {sol.moves:6d} "
              f"{visits:10d}  {';'.join(sol.flags)}")


if __name__ == "__main__":
    main()
