"""Truncated-series statistics of the random Chebyshev equation.

The truncated solution is ``Y_N(s) = Y0 F(s; A, N) + Y1 G(s; A, N)`` with

    F = sum_k (-1)^k     (A^2)^k theta^(2k)   / (2k)!
    G = sum_k (-1)^(k+1) (A^2)^k theta^(2k+1) / (2k+1)!

and ``theta = arccos(s) - pi/2``.  Because the series are polynomials in A^2,
their first and second moments only need ``E[A^(2n)]``, n <= 2N.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .moments import DistributionModel, MomentTable, a2_moment_table


class DomainError(ValueError):
    pass


class MomentOrderError(ValueError):
    def __init__(self, needed: int, have: int):
        super().__init__(f"moment table stops at order {have}; order {needed} is required")
        self.needed = needed


class VarianceError(ArithmeticError):
    pass


VARIANCE_CLAMP = 1e-12


def theta(s):
    """arccos(s) - pi/2 for s in (-1, 1)."""
    arr = np.asarray(s, dtype=float)
    bad = ~(np.abs(arr) < 1)
    if np.any(bad):
        raise DomainError(f"s must lie in (-1, 1), got {arr[bad].ravel()[0]!r}")
    out = np.arccos(arr) - np.pi / 2
    return float(out) if out.ndim == 0 else out


def _f_coeffs(N: int) -> np.ndarray:
    c = np.empty(N + 1)
    c[0] = 1.0
    for k in range(N):
        c[k + 1] = -c[k] / ((2 * k + 1) * (2 * k + 2))
    return c


def _g_coeffs(N: int) -> np.ndarray:
    c = np.empty(N + 1)
    c[0] = -1.0
    for k in range(N):
        c[k + 1] = -c[k] / ((2 * k + 2) * (2 * k + 3))
    return c


def eval_F(s, a2, N: int):
    """F(s; A, N) for a realisation ``a2`` of A**2 (scalar or array)."""
    th = theta(s)
    x = -np.asarray(a2, dtype=float) * th * th
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(N):
        term = term * x / ((2 * k + 1) * (2 * k + 2))
        total = total + term
    return float(total) if total.ndim == 0 else total


def eval_G(s, a2, N: int):
    th = theta(s)
    x = -np.asarray(a2, dtype=float) * th * th
    term = -th * np.ones_like(x)
    total = term.copy()
    for k in range(N):
        term = term * x / ((2 * k + 2) * (2 * k + 3))
        total = total + term
    return float(total) if total.ndim == 0 else total


@dataclass(frozen=True)
class TruncatedSolution:
    """Order-N truncation with the moments it needs.

    ``table[n] = E[A^(2n)]`` must reach order 2N for second moments.  The four
    initial-condition moments are E[Y0], E[Y0^2], E[Y1], E[Y1^2]; independence
    of A, Y0 and Y1 is assumed throughout.
    """

    N: int
    table: MomentTable
    y0_m1: float
    y0_m2: float
    y1_m1: float
    y1_m2: float
    _f: np.ndarray = field(init=False, repr=False, compare=False)
    _g: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        object.__setattr__(self, "_f", _f_coeffs(self.N))
        object.__setattr__(self, "_g", _g_coeffs(self.N))

    @classmethod
    def from_models(cls, A: DistributionModel, Y0: DistributionModel, Y1: DistributionModel,
                    N: int = 10, *, y0_m1=None, y0_m2=None, y1_m1=None, y1_m2=None):
        """Build from distribution models; any ``y*_m*`` given overrides the model moment."""
        table = a2_moment_table(A, 2 * N)
        pick = lambda override, model, k: float(override) if override is not None else model.raw_moment(k)
        return cls(N, table, pick(y0_m1, Y0, 1), pick(y0_m2, Y0, 2), pick(y1_m1, Y1, 1), pick(y1_m2, Y1, 2))

    def _moments(self, order: int) -> np.ndarray:
        if self.table.max_order < order:
            raise MomentOrderError(order, self.table.max_order)
        return np.asarray(self.table.values[: order + 1])

    # polynomial coefficients in x = theta^2
    def _mean_polys(self):
        mu = self._moments(self.N)
        return self._f * mu, self._g * mu

    def _square_polys(self):
        mu = self._moments(2 * self.N)
        ff = np.convolve(self._f, self._f) * mu
        gg = np.convolve(self._g, self._g) * mu
        fg = np.convolve(self._f, self._g) * mu
        return ff, gg, fg

    def expected_F(self, s):
        pf, _ = self._mean_polys()
        th = theta(s)
        return _horner(pf, th * th)

    def expected_G(self, s):
        _, pg = self._mean_polys()
        th = theta(s)
        return th * _horner(pg, th * th)

    def expected_F2(self, s):
        ff, _, _ = self._square_polys()
        th = theta(s)
        return _horner(ff, th * th)

    def expected_G2(self, s):
        _, gg, _ = self._square_polys()
        th = theta(s)
        return th * th * _horner(gg, th * th)

    def expected_FG(self, s):
        _, _, fg = self._square_polys()
        th = theta(s)
        return th * _horner(fg, th * th)

    def mean(self, s):
        return self.y0_m1 * self.expected_F(s) + self.y1_m1 * self.expected_G(s)

    def second_moment(self, s):
        return (self.y0_m2 * self.expected_F2(s) + self.y1_m2 * self.expected_G2(s)
                + 2.0 * self.y0_m1 * self.y1_m1 * self.expected_FG(s))

    def std(self, s):
        m = self.mean(s)
        return _clamped_std(self.second_moment(s) - m * m)

    def solve_grid(self, grid) -> "StatSeries":
        grid = np.atleast_1d(np.asarray(grid, dtype=float))
        bad = ~(np.abs(grid) < 1)
        if np.any(bad):
            raise DomainError(f"grid point {grid[bad][0]!r} is outside (-1, 1)")
        th = np.arccos(grid) - np.pi / 2
        x = th * th
        pf, pg = self._mean_polys()
        ff, gg, fg = self._square_polys()
        mean = self.y0_m1 * _horner(pf, x) + self.y1_m1 * th * _horner(pg, x)
        m2 = (self.y0_m2 * _horner(ff, x) + self.y1_m2 * x * _horner(gg, x)
              + 2.0 * self.y0_m1 * self.y1_m1 * th * _horner(fg, x))
        return StatSeries.from_moments(grid, mean, m2, "tsm")


def _horner(coeffs: np.ndarray, x):
    acc = np.zeros_like(np.asarray(x, dtype=float)) + coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return float(acc) if np.ndim(acc) == 0 else acc


def _clamped_std(var):
    var = np.asarray(var, dtype=float)
    if np.any(var < -VARIANCE_CLAMP):
        raise VarianceError(f"negative variance {float(np.min(var))!r} beyond roundoff")
    out = np.sqrt(np.maximum(var, 0.0))
    return float(out) if out.ndim == 0 else out


# Functional aliases
def expected_F(sol: TruncatedSolution, s):
    return sol.expected_F(s)


def expected_G(sol: TruncatedSolution, s):
    return sol.expected_G(s)


def expected_F2(sol: TruncatedSolution, s):
    return sol.expected_F2(s)


def expected_G2(sol: TruncatedSolution, s):
    return sol.expected_G2(s)


def expected_FG(sol: TruncatedSolution, s):
    return sol.expected_FG(s)


def tsm_mean(sol: TruncatedSolution, s):
    return sol.mean(s)


def tsm_second_moment(sol: TruncatedSolution, s):
    return sol.second_moment(s)


def tsm_std(sol: TruncatedSolution, s):
    return sol.std(s)


def tsm_solve_grid(sol: TruncatedSolution, grid) -> "StatSeries":
    return sol.solve_grid(grid)


@dataclass
class StatSeries:
    """Mean / std / second moment on a grid of s values.

    For Monte Carlo series ``second_moment`` is ``mean**2 + std**2`` with the
    unbiased (m-1) std, so the identity std**2 = second_moment - mean**2 holds
    for every method.
    """

    grid: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    second_moment: np.ndarray
    method: str
    stderr: np.ndarray | None = None

    @classmethod
    def from_moments(cls, grid, mean, second_moment, method, stderr=None) -> "StatSeries":
        mean = np.asarray(mean, dtype=float)
        m2 = np.asarray(second_moment, dtype=float)
        std = np.atleast_1d(_clamped_std(m2 - mean * mean))
        return cls(np.asarray(grid, dtype=float), mean, std, m2, method, stderr)

    def columns(self) -> list[str]:
        cols = ["s", "mean", "std", "second_moment"]
        return cols + ["stderr"] if self.stderr is not None else cols

    def rows(self):
        for i, s in enumerate(self.grid):
            row = [s, self.mean[i], self.std[i], self.second_moment[i]]
            if self.stderr is not None:
                row.append(self.stderr[i])
            yield row

    def to_csv(self, digits: int = 6) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns()) + "\n")
        for row in self.rows():
            buf.write(",".join(f"{v:.{digits}f}" for v in row) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        d = {"method": self.method}
        for name, col in zip(self.columns(), zip(*self.rows())):
            d[name] = [float(v) for v in col]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "StatSeries":
        stderr = np.asarray(d["stderr"]) if "stderr" in d else None
        return cls(np.asarray(d["s"]), np.asarray(d["mean"]), np.asarray(d["std"]),
                   np.asarray(d["second_moment"]), d["method"], stderr)


def taylor_remainder_bound(a2: float, s: float, N: int) -> tuple[float, float]:
    """Lagrange bounds on |F - cos(sqrt(a2) theta)| and |G + sin(sqrt(a2) theta)/sqrt(a2)|."""
    x = math.sqrt(a2) * abs(theta(s))
    bF = x ** (2 * N + 2) / math.factorial(2 * N + 2)
    bG = x ** (2 * N + 3) / math.factorial(2 * N + 3) / math.sqrt(a2) if a2 > 0 else 0.0
    return bF, bG
