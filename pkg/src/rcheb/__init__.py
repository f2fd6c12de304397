"""Mean-square solution statistics of the random Chebyshev equation."""

from .closedform import (cheb_T, cheb_U, exact_mean_discrete, exact_second_moment_discrete, path_Y,
                         path_Y_cheb, theoretical_grid, theoretical_mean, theoretical_std)
from .moments import (Beta, Discrete, Normal, PointMass, Truncated, Uniform, a2_moment_table, a2_norm4,
                      check_growth_condition, parse_distribution, raw_moment, truncate_for_admissibility)
from .montecarlo import SimulationConfig, convergence_sweep, simulate
from .series import StatSeries, TruncatedSolution, eval_F, eval_G, theta

__version__ = "0.1.0"
