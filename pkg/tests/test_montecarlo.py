import math

import numpy as np
import pytest

from rcheb.closedform import path_Y, theoretical_grid
from rcheb.moments import Beta, Normal, PointMass, Truncated, Uniform
from rcheb.montecarlo import BLOCK, ConfigError, SimulationConfig, convergence_sweep, draw_block, simulate

from conftest import TABLE_GRID

SEED = 314159


def cfg_for(models, m, seed=SEED, grid=TABLE_GRID, threads=1):
    return SimulationConfig(m, seed, grid, *models, threads=threads)


def all_draws(cfg):
    blocks = [draw_block(cfg, b) for b in range(math.ceil(cfg.m / BLOCK))]
    return tuple(np.concatenate(x) for x in zip(*blocks))


def test_degenerate_ensemble_is_exact():
    models = (PointMass(1.3), PointMass(-0.4), PointMass(0.8))
    out = simulate(cfg_for(models, 40_000))
    np.testing.assert_array_equal(out.mean, path_Y(1.3, -0.4, 0.8, TABLE_GRID))
    np.testing.assert_array_equal(out.std, np.zeros(len(TABLE_GRID)))
    assert out.method == "mc"


def test_config_validation():
    with pytest.raises(ConfigError):
        SimulationConfig(0, 1, [0.1], PointMass(1), PointMass(1), PointMass(1))
    with pytest.raises(ValueError):
        SimulationConfig(10, 1, [1.0], PointMass(1), PointMass(1), PointMass(1))


def test_block_merge_matches_direct_statistics(gbu):
    cfg = cfg_for(gbu, 3 * BLOCK + 1234)
    a, y0, y1 = all_draws(cfg)
    paths = path_Y(a[:, None], y0[:, None], y1[:, None], TABLE_GRID[None, :])
    out = simulate(cfg)
    np.testing.assert_allclose(out.mean, paths.mean(axis=0), rtol=1e-13)
    np.testing.assert_allclose(out.std, paths.std(axis=0, ddof=1), rtol=1e-12)
    np.testing.assert_allclose(out.stderr, out.std / math.sqrt(cfg.m), rtol=1e-15)
    np.testing.assert_allclose(out.std ** 2, out.second_moment - out.mean ** 2, atol=1e-12)


def test_reproducible_and_thread_independent(gbu):
    runs = [simulate(cfg_for(gbu, 70_000, threads=t)) for t in (1, 1, 3, 8)]
    for r in runs[1:]:
        assert r.to_csv() == runs[0].to_csv()
        assert r.to_json() == runs[0].to_json()
    other = simulate(cfg_for(gbu, 70_000, seed=SEED + 1))
    assert other.to_json() != runs[0].to_json()


def test_stream_independence(gbu):
    m = 100_000
    a, y0, y1 = all_draws(cfg_for(gbu, m))
    for x, y in ((a, y0), (a, y1), (y0, y1)):
        assert abs(np.corrcoef(x, y)[0, 1]) < 4 / math.sqrt(m)


def test_truncated_model_sampling():
    models = (Truncated(Normal(0, 0.5), -0.6, 0.6), Beta(1, 3), Uniform(0, 2))
    a, _, _ = all_draws(cfg_for(models, 20_000))
    assert a.min() >= -0.6 and a.max() <= 0.6


def test_statistical_consistency(gbu, gbu_ic):
    exact = theoretical_grid(gbu[0], *gbu_ic, TABLE_GRID)
    out = simulate(cfg_for(gbu, 100_000))
    assert np.all(np.abs(out.mean - exact.mean) <= 4 * out.stderr)


def test_std_band_at_half(gbu):
    out = simulate(cfg_for(gbu, 50_000, grid=[0.5]))
    assert abs(out.std[0] - 0.353343) <= 4 * out.std[0] / math.sqrt(2 * 50_000)


def test_convergence_sweep(gbu):
    rows = convergence_sweep(cfg_for(gbu, 1), [1_000, 10_000, 100_000])
    assert [m for m, _ in rows] == [1_000, 10_000, 100_000]
    assert rows[-1][1] < rows[0][1]
    assert rows == convergence_sweep(cfg_for(gbu, 1), [1_000, 10_000, 100_000])
    with pytest.raises(ConfigError):
        convergence_sweep(cfg_for(gbu, 1), [100, 10])


def test_convergence_sweep_degenerate():
    models = (PointMass(2.0), PointMass(1.0), PointMass(0.5))
    # order-20 Taylor remainder at |a theta| <= pi is below 1e-12
    for _, err in convergence_sweep(cfg_for(models, 1), [10, 1000]):
        assert err < 1e-12


def test_convergence_sweep_at_zero(gbu):
    cfg = cfg_for(gbu, 1, grid=[0.0])
    rows = convergence_sweep(cfg, [500, 5000])
    for m, err in rows:
        _, y0, _ = all_draws(cfg_for(gbu, m, grid=[0.0]))
        assert err == pytest.approx(abs(y0.mean() - 0.25), rel=1e-9, abs=1e-15)
