"""Mean / std tables for the Gaussian-Beta-Uniform example, plus timings.

    python3 scripts/reproduce_tables.py [--m 100000] [--seed 20161016] [--N 10]
"""

import argparse
import time
from dataclasses import dataclass

import numpy as np

from rcheb import closedform, montecarlo
from rcheb.moments import Beta, Normal, Uniform
from rcheb.series import TruncatedSolution


@dataclass(frozen=True)
class TableConfig:
    N: int = 10
    m_values: tuple = (50_000, 100_000)
    seed: int = 20161016
    grid: tuple = (0.1, 0.3, 0.5, 0.7, 0.9)
    variance: float = 0.25


def run(cfg: TableConfig):
    A, Y0, Y1 = Normal.from_variance(0.0, cfg.variance), Beta(1.0, 3.0), Uniform(0.0, 2.0)
    grid = np.array(cfg.grid)
    cols, times = {}, {}

    t0 = time.perf_counter()
    cols["tsm"] = TruncatedSolution.from_models(A, Y0, Y1, cfg.N).solve_grid(grid)
    times["tsm"] = time.perf_counter() - t0
    for m in cfg.m_values:
        t0 = time.perf_counter()
        cols[f"mc{m}"] = montecarlo.simulate(montecarlo.SimulationConfig(m, cfg.seed, grid, A, Y0, Y1))
        times[f"mc{m}"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    ic = (Y0.raw_moment(1), Y0.raw_moment(2), Y1.raw_moment(1), Y1.raw_moment(2))
    cols["theoretical"] = closedform.theoretical_grid(A, *ic, grid)
    times["theoretical"] = time.perf_counter() - t0
    return grid, cols, times


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, nargs="+", default=[50_000, 100_000])
    p.add_argument("--seed", type=int, default=20161016)
    p.add_argument("--N", type=int, default=10)
    args = p.parse_args()
    grid, cols, times = run(TableConfig(N=args.N, m_values=tuple(args.m), seed=args.seed))

    for stat in ("mean", "std"):
        print(f"\n{stat}")
        print("s," + ",".join(cols))
        for i, s in enumerate(grid):
            print(f"{s:.1f}," + ",".join(f"{getattr(c, stat)[i]:.6f}" for c in cols.values()))
    print("\nmethod,seconds")
    for k, v in times.items():
        print(f"{k},{v:.6f}")


if __name__ == "__main__":
    main()
