"""How fast do TSM (in N) and Monte Carlo (in m) approach the untruncated statistics?

    python3 scripts/convergence_sweep.py [--seed 1] [--threads 4]
"""

import argparse

import numpy as np

from rcheb import closedform, montecarlo
from rcheb.moments import Beta, Normal, Uniform
from rcheb.series import TruncatedSolution

GRID = np.array([0.1, 0.3, 0.5, 0.7, 0.9])


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=montecarlo.default_threads())
    p.add_argument("--variance", type=float, default=0.25)
    args = p.parse_args()

    A, Y0, Y1 = Normal.from_variance(0.0, args.variance), Beta(1.0, 3.0), Uniform(0.0, 2.0)
    ic = (Y0.raw_moment(1), Y0.raw_moment(2), Y1.raw_moment(1), Y1.raw_moment(2))
    ref = closedform.theoretical_grid(A, *ic, GRID)

    print("N,max_abs_err_mean,max_abs_err_std")
    for N in range(1, 16):
        out = TruncatedSolution.from_models(A, Y0, Y1, N).solve_grid(GRID)
        print(f"{N},{np.max(np.abs(out.mean - ref.mean)):.3e},{np.max(np.abs(out.std - ref.std)):.3e}")

    cfg = montecarlo.SimulationConfig(1, args.seed, GRID, A, Y0, Y1, args.threads)
    print("\nm,max_abs_err_mean")
    for m, err in montecarlo.convergence_sweep(cfg, [10**k for k in range(2, 7)]):
        print(f"{m},{err:.3e}")


if __name__ == "__main__":
    main()
