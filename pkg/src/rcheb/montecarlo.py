"""Plain Monte Carlo over (A, Y0, Y1) using the closed-form path.

Every variate is fixed by ``(seed, stream, block)``: draws are cut into blocks
of ``BLOCK`` samples and each block of each stream gets its own Philox
generator, so results do not depend on how blocks are spread over threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .closedform import path_Y
from .moments import DistributionModel
from .series import StatSeries, TruncatedSolution, theta

BLOCK = 1 << 14
STREAM_A, STREAM_Y0, STREAM_Y1 = 0, 1, 2


class ConfigError(ValueError):
    pass


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SimulationConfig:
    m: int
    seed: int
    grid: tuple
    A: DistributionModel
    Y0: DistributionModel
    Y1: DistributionModel
    threads: int = 1

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "grid", tuple(float(s) for s in np.atleast_1d(self.grid)))
        theta(np.asarray(self.grid))


def draw_block(cfg: SimulationConfig, block: int):
    """Samples of (A, Y0, Y1) for one block; the last block may be short."""
    n = min(BLOCK, cfg.m - block * BLOCK)
    return tuple(np.asarray(model.sample(block_generator(cfg.seed, stream, block), n), dtype=float)
                 for stream, model in ((STREAM_A, cfg.A), (STREAM_Y0, cfg.Y0), (STREAM_Y1, cfg.Y1)))


def _block_stats(cfg: SimulationConfig, block: int):
    a, y0, y1 = draw_block(cfg, block)
    s = np.asarray(cfg.grid)
    paths = path_Y(a[:, None], y0[:, None], y1[:, None], s[None, :])
    paths = np.atleast_2d(paths)
    # shifted by the first path: exact for degenerate ensembles, stable otherwise
    d = paths - paths[0]
    dmean = d.mean(axis=0)
    return len(a), paths[0] + dmean, ((d - dmean) ** 2).sum(axis=0)


def _merge(acc, part):
    # Chan et al. pairwise combination of (count, mean, sum of squared deviations)
    n_a, mean_a, m2_a = acc
    n_b, mean_b, m2_b = part
    n = n_a + n_b
    delta = mean_b - mean_a
    mean = mean_a + delta * (n_b / n)
    m2 = m2_a + m2_b + delta * delta * (n_a * n_b / n)
    return n, mean, m2


def simulate(cfg: SimulationConfig) -> StatSeries:
    """Sample mean, (m-1) standard deviation and standard error per grid point."""
    n_blocks = math.ceil(cfg.m / BLOCK)
    workers = max(1, min(int(cfg.threads), n_blocks))
    if workers == 1:
        parts = [_block_stats(cfg, b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda b: _block_stats(cfg, b), range(n_blocks)))
    acc = parts[0]
    for part in parts[1:]:
        acc = _merge(acc, part)
    n, mean, ssd = acc
    var = ssd / (n - 1) if n > 1 else np.zeros_like(mean)
    std = np.sqrt(var)
    return StatSeries(np.asarray(cfg.grid), mean, std, mean * mean + var, "mc", std / math.sqrt(n))


def convergence_sweep(cfg: SimulationConfig, m_list, reference: TruncatedSolution | None = None):
    """Rows of (m, max |mc mean - reference mean| over the grid).

    ``reference`` defaults to the order-20 truncated series built from the
    config's models.
    """
    m_list = [int(m) for m in m_list]
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ConfigError(f"m_list must be strictly increasing, got {m_list}")
    if reference is None:
        reference = TruncatedSolution.from_models(cfg.A, cfg.Y0, cfg.Y1, 20)
    target = reference.solve_grid(cfg.grid).mean
    rows = []
    for m in m_list:
        sub = SimulationConfig(m, cfg.seed, cfg.grid, cfg.A, cfg.Y0, cfg.Y1, cfg.threads)
        rows.append((m, float(np.max(np.abs(simulate(sub).mean - target)))))
    return rows


def default_threads() -> int:
    return os.cpu_count() or 1
