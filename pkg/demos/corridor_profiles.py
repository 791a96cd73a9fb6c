"""How corridor width moves the complexity measures.

Generates one maze per corridor width, carves a breadth-first sub-space from
each and prints its profile next to an obstacle-free grid of the same size.

    python3 demos/corridor_profiles.py [--size 3000]
"""
import argparse

import numpy as np

from rtcomplex.complexity import MEASURES, StabilityConfig, profile
from rtcomplex.core import grid_space
from rtcomplex.ingest import SubSpaceSpec, generate_maze, sample_subspace


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=3000, help="states per sub-space")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    stability = StabilityConfig(40, 200, 20, 0.03)
    spaces = {}
    for width in (1, 2, 4, 8):
        side = (127 // width) * width if (127 // width) % 2 else (127 // width - 1) * width
        full = generate_maze(side, side, width, args.seed).to_space()
        spaces[f"maze w={width}"] = sample_subspace(full, SubSpaceSpec(args.size, args.seed))
    spaces["open"] = sample_subspace(grid_space(np.ones((127, 127), dtype=bool)),
                                     SubSpaceSpec(args.size, args.seed))
    print("measure".ljust(22) + "".join(name.rjust(12) for name in spaces))
    profiles = {name: profile(sp, stability, seed=args.seed) for name, sp in spaces.items()}
    for m in MEASURES:
        print(m.ljust(22) + "".join(f"{profiles[n].values()[m]:12.3f}" for n in spaces))


if __name__ == "__main__":
    main()
