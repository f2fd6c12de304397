"""Closed-form sample paths and exact statistics.

``path_Y`` is the trigonometric solution
``Y(s) = y0 cos(a theta) - (y1/a) sin(a theta)``, ``theta = arccos(s) - pi/2``,
and ``path_Y_cheb`` the same path written with Chebyshev polynomials T_a and
U_{a-1} for integer a.  The "theoretical" statistics take expectations of the
untruncated path by summing its even-moment series to convergence.
"""

from __future__ import annotations

import math

import numpy as np

from .moments import Discrete, DistributionModel, PointMass
from .series import DomainError, StatSeries, _clamped_std, theta


class ConvergenceError(ArithmeticError):
    pass


class ContractError(ValueError):
    pass


SERIES_RTOL = 1e-12
SERIES_MAX_TERMS = 600
# each term carries one rounding error of about this size
CANCELLATION_EPS = 2.0 ** -52
CANCELLATION_ATOL = 1e-10


def _check_closed(s):
    arr = np.asarray(s, dtype=float)
    if np.any(np.abs(arr) > 1):
        raise DomainError(f"s must lie in [-1, 1], got {arr[np.abs(arr) > 1].ravel()[0]!r}")
    return arr


def cheb_T(n: int, s):
    """Chebyshev polynomial of the first kind, by three-term recurrence."""
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    s = _check_closed(s)
    prev, cur = np.ones_like(s), s.copy()
    if n == 0:
        return _scalar(prev)
    for _ in range(n - 1):
        prev, cur = cur, 2 * s * cur - prev
    return _scalar(cur)


def cheb_U(n: int, s):
    """Chebyshev polynomial of the second kind; ``cheb_U(-1, s) = 0``."""
    if n < -1:
        raise ValueError(f"degree must be >= -1, got {n}")
    s = _check_closed(s)
    if n == -1:
        return _scalar(np.zeros_like(s))
    prev, cur = np.ones_like(s), 2 * s
    if n == 0:
        return _scalar(prev)
    for _ in range(n - 1):
        prev, cur = cur, 2 * s * cur - prev
    return _scalar(cur)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def sinc(x):
    """sin(x)/x with sinc(0) = 1 (unnormalised, unlike ``np.sinc``)."""
    return np.sinc(np.asarray(x) / np.pi)


def path_Y(a, y0, y1, s):
    """Closed-form path; broadcasts over all arguments.

    The y1 term is evaluated as ``-y1 * theta * sinc(a theta)`` so ``a = 0`` is
    the straight line ``y0 - y1 theta``.
    """
    th = theta(s)
    a = np.asarray(a, dtype=float)
    x = a * th
    return _scalar(y0 * np.cos(x) - y1 * th * sinc(x))


def path_Y_cheb(a: int, y0, y1, s):
    """Path for a positive integer ``a`` via T_a and U_{a-1}."""
    if int(a) != a or a < 1:
        raise ContractError(f"path_Y_cheb needs a positive integer a, got {a!r}; use path_Y")
    a = int(a)
    theta(s)  # domain check on the open interval
    s = np.asarray(s, dtype=float)
    T = cheb_T(a, s)
    Usin = cheb_U(a - 1, s) * np.sqrt(1 - s * s)
    # cos(a pi/2), sin(a pi/2) exactly
    c, sn = ((1, 0), (0, 1), (-1, 0), (0, -1))[a % 4]
    return _scalar(c * (y0 * T - (y1 / a) * Usin) + sn * (y0 * Usin + (y1 / a) * T))


def _integer_atoms(model: DistributionModel):
    if isinstance(model, PointMass):
        atoms = [(model.c, 1.0)]
    elif isinstance(model, Discrete):
        atoms = list(zip(model.values, model.probs))
    else:
        raise ContractError(f"exact statistics need an integer-valued discrete A, got {model.label}")
    if any(not float(v).is_integer() for v, _ in atoms):
        raise ContractError(f"{model.label} has non-integer support")
    return [(int(v), p) for v, p in atoms if p > 0]


def _atom_paths(a: int, s):
    # cos(a theta) and -sin(a theta)/a, the y0 and y1 coefficients of the path
    a = abs(a)  # both coefficients are even in a
    if a == 0:
        th = theta(s)
        return np.ones_like(np.asarray(th)), -np.asarray(th)
    return np.asarray(path_Y_cheb(a, 1.0, 0.0, s)), np.asarray(path_Y_cheb(a, 0.0, 1.0, s))


def exact_mean_discrete(A: DistributionModel, y0_mean: float, y1_mean: float, s):
    """E[Y(s)] for integer-valued discrete A independent of (Y0, Y1)."""
    tot = 0.0
    for a, p in _integer_atoms(A):
        c, d = _atom_paths(a, s)
        tot = tot + p * (y0_mean * c + y1_mean * d)
    return _scalar(tot)


def exact_second_moment_discrete(A: DistributionModel, y0_m1: float, y0_m2: float,
                                 y1_m1: float, y1_m2: float, s):
    """E[Y(s)^2]; the cross term uses E[Y0 Y1] = E[Y0] E[Y1]."""
    tot = 0.0
    for a, p in _integer_atoms(A):
        c, d = _atom_paths(a, s)
        tot = tot + p * (y0_m2 * c * c + y1_m2 * d * d + 2 * y0_m1 * y1_m1 * c * d)
    return _scalar(tot)


def exact_discrete_grid(A, y0_m1, y0_m2, y1_m1, y1_m2, grid) -> StatSeries:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    mean = exact_mean_discrete(A, y0_m1, y1_m1, grid)
    m2 = exact_second_moment_discrete(A, y0_m1, y0_m2, y1_m1, y1_m2, grid)
    return StatSeries.from_moments(grid, mean, m2, "exact")


class _SeriesSum:
    """Sums ``(-scale)^k E[A^(2k)] x^(2k+offset) / (2k+offset)!`` over k >= 0.

    Coefficients advance by ratio so nothing overflows before convergence.
    """

    def __init__(self, model: DistributionModel):
        self.model = model
        self._mom = [1.0]

    def moment(self, k: int) -> float:
        while len(self._mom) <= k:
            self._mom.append(self.model.raw_moment(2 * len(self._mom)))
        return self._mom[k]

    def total(self, x: float, offset: int, scale: float = 1.0) -> float:
        if x == 0.0:
            return 0.0 if offset else 1.0
        return self._sum(x ** offset / math.factorial(offset), x, offset, scale)

    def _sum(self, coef: float, x: float, offset: int, scale: float) -> float:
        terms = []
        small_run = 0
        prev = last_ratio = math.nan
        for k in range(SERIES_MAX_TERMS):
            term = coef * self.moment(k)
            terms.append(term)
            last_ratio = abs(term / prev) if prev else math.nan
            prev = term
            if abs(term) <= SERIES_RTOL * abs(math.fsum(terms)):
                small_run += 1
                if small_run >= 3:
                    total = math.fsum(terms)
                    lost = max(map(abs, terms)) * CANCELLATION_EPS
                    # the expectations summed here are all bounded by pi/2 in size
                    if lost > CANCELLATION_ATOL:
                        raise ConvergenceError(f"alternating series lost precision: largest term "
                                               f"{max(map(abs, terms)):.3g} vs sum {total:.3g}")
                    return total
            else:
                small_run = 0
            coef *= -scale * x * x / ((2 * k + offset + 1) * (2 * k + offset + 2))
        raise ConvergenceError(f"moment series did not converge in {SERIES_MAX_TERMS} terms "
                               f"(last term ratio {last_ratio!r})")


def _expectations(A: DistributionModel, th: float, acc: _SeriesSum | None = None):
    """E[cos], E[-sin/A], E[cos^2], E[sin^2/A^2], E[-cos sin/A] at angle A*th."""
    acc = acc or _SeriesSum(A)
    c = acc.total(th, 0)
    d = -acc.total(th, 1)
    cos2a = acc.total(th, 0, scale=4.0)
    c2 = 0.5 * (1.0 + cos2a)
    # sin^2(a th)/a^2 = sum_{k>=1} (-1)^(k+1) 4^k a^(2k-2) th^(2k) / (2 (2k)!)
    #                 = 2 th^2 sum_{j>=0} (-4)^j a^(2j) th^(2j) / (2j+2)!
    d2 = 2.0 * th * th * _shifted_sum(acc, th)
    # sin(a th) cos(a th)/a = sin(2 a th)/(2a) = sum_k (-4)^k a^(2k) th^(2k+1)/(2k+1)!
    cd = -acc.total(th, 1, scale=4.0)
    return c, d, c2, d2, cd


def _shifted_sum(acc: _SeriesSum, th: float) -> float:
    # sum_j (-4)^j E[A^(2j)] th^(2j) / (2j+2)!; same recurrence as offset 2 with the
    # k-th coefficient th^(2k+2)/(2k+2)! divided through by th^2
    if th == 0.0:
        return 0.5
    return acc._sum(0.5, th, 2, 4.0)


def theoretical_mean(A: DistributionModel, y0_m1: float, y1_m1: float, s):
    """E[Y(s)] of the untruncated solution."""
    acc = _SeriesSum(A)
    out = [y0_m1 * c + y1_m1 * d for c, d, *_ in
           (_expectations(A, float(t), acc) for t in np.atleast_1d(theta(s)))]
    return out[0] if np.ndim(s) == 0 else np.array(out)


def theoretical_second_moment(A: DistributionModel, y0_m1, y0_m2, y1_m1, y1_m2, s):
    acc = _SeriesSum(A)
    out = []
    for t in np.atleast_1d(theta(s)):
        _, _, c2, d2, cd = _expectations(A, float(t), acc)
        out.append(y0_m2 * c2 + y1_m2 * d2 + 2.0 * y0_m1 * y1_m1 * cd)
    return out[0] if np.ndim(s) == 0 else np.array(out)


def theoretical_std(A: DistributionModel, y0_m1, y0_m2, y1_m1, y1_m2, s):
    m = theoretical_mean(A, y0_m1, y1_m1, s)
    m2 = theoretical_second_moment(A, y0_m1, y0_m2, y1_m1, y1_m2, s)
    return _clamped_std(np.asarray(m2) - np.asarray(m) ** 2)


def theoretical_grid(A, y0_m1, y0_m2, y1_m1, y1_m2, grid) -> StatSeries:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    acc = _SeriesSum(A)
    mean, m2 = [], []
    for t in theta(grid):
        c, d, c2, d2, cd = _expectations(A, float(t), acc)
        mean.append(y0_m1 * c + y1_m1 * d)
        m2.append(y0_m2 * c2 + y1_m2 * d2 + 2.0 * y0_m1 * y1_m1 * cd)
    return StatSeries.from_moments(grid, mean, m2, "theoretical")
