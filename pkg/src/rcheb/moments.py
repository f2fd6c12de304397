"""Distribution models for the random coefficient A and the initial conditions.

Every model answers raw-moment queries, 4-norms of powers of A**2, and draws
samples from a numpy ``Generator``.  Moment-growth admissibility of A**2 is
checked by :func:`check_growth_condition`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate, special


class UnsupportedMomentError(ValueError):
    """A moment of the requested order has no closed form or finite value."""


class MomentOverflowError(OverflowError):
    def __init__(self, order: int):
        super().__init__(f"moment of order {order} overflows double precision")
        self.order = order


class SamplingStallError(RuntimeError):
    pass


QUAD_RTOL = 1e-12
REJECTION_ROUNDS = 1000


class DistributionModel:
    """Base class; subclasses are frozen dataclasses."""

    bounded = False

    @property
    def label(self) -> str:
        raise NotImplementedError

    def raw_moment(self, k: int) -> float:
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def ppf(self, u):
        """Inverse CDF, vectorised over ``u``."""
        raise NotImplementedError

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def pdf(self, x):
        raise UnsupportedMomentError(f"{self.label} has no density")

    def sample(self, rng: np.random.Generator, size=None):
        return self.ppf(open_uniforms(rng, size))

    @property
    def mean(self) -> float:
        return self.raw_moment(1)

    @property
    def variance(self) -> float:
        m1 = self.raw_moment(1)
        return max(self.raw_moment(2) - m1 * m1, 0.0)

    def __str__(self) -> str:
        return self.label


def open_uniforms(rng: np.random.Generator, size=None):
    """Uniforms on the open interval (0, 1) with 53 random bits."""
    k = rng.integers(0, 1 << 53, size=size, dtype=np.int64)
    return (k + 0.5) * (1.0 / (1 << 53))


def _fmt(x: float) -> str:
    return repr(float(x)).removesuffix(".0") if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class Normal(DistributionModel):
    """Gaussian parametrised by mean and standard deviation."""

    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"normal: sigma must be positive, got {self.sigma}")

    @classmethod
    def from_variance(cls, mu: float, var: float) -> "Normal":
        if not var > 0:
            raise ValueError(f"normal: variance must be positive, got {var}")
        return cls(mu, math.sqrt(var))

    @property
    def centered(self) -> bool:
        return self.mu == 0.0

    @property
    def label(self) -> str:
        return f"normal({_fmt(self.mu)},{_fmt(self.sigma ** 2)})"

    def raw_moment(self, k: int) -> float:
        _check_order(k)
        if self.centered:
            if k % 2:
                return 0.0
            # E[X^{2m}] = (2m-1)!! sigma^{2m}, built by ratio updates
            v = self.sigma ** 2
            m = 1.0
            for j in range(1, k // 2 + 1):
                m *= (2 * j - 1) * v
                if math.isinf(m):
                    raise MomentOverflowError(k)
            return m
        # m_k = mu m_{k-1} + (k-1) sigma^2 m_{k-2}
        v = self.sigma ** 2
        prev, cur = 1.0, self.mu
        if k == 0:
            return 1.0
        for j in range(2, k + 1):
            prev, cur = cur, self.mu * cur + (j - 1) * v * prev
            if math.isinf(cur):
                raise MomentOverflowError(k)
        return cur

    def log_even_moment(self, k: int) -> float:
        """log E[X^k] for even k of a centred Gaussian; never overflows."""
        m = k // 2
        return (math.lgamma(2 * m + 1) - m * math.log(2.0) - math.lgamma(m + 1)
                + 2 * m * math.log(self.sigma))

    def ppf(self, u):
        return self.mu + self.sigma * special.ndtri(u)

    def cdf(self, x: float) -> float:
        return float(special.ndtr((x - self.mu) / self.sigma))

    def pdf(self, x):
        z = (np.asarray(x) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2 * math.pi))


@dataclass(frozen=True)
class Uniform(DistributionModel):
    a: float
    b: float
    bounded = True

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"uniform: need a < b, got ({self.a}, {self.b})")

    @property
    def label(self) -> str:
        return f"uniform({_fmt(self.a)},{_fmt(self.b)})"

    def support(self):
        return (self.a, self.b)

    def raw_moment(self, k: int) -> float:
        _check_order(k)
        a, b = self.a, self.b
        if k == 0:
            return 1.0
        try:
            # mean of x^k over [a, b] as a sum of a^i b^(k-i), avoiding b^(k+1) - a^(k+1)
            val = math.fsum(a ** i * b ** (k - i) for i in range(k + 1)) / (k + 1)
        except OverflowError:
            raise MomentOverflowError(k) from None
        if math.isinf(val):
            raise MomentOverflowError(k)
        return val

    def ppf(self, u):
        return self.a + (self.b - self.a) * np.asarray(u)

    def cdf(self, x: float) -> float:
        return min(max((x - self.a) / (self.b - self.a), 0.0), 1.0)

    def pdf(self, x):
        x = np.asarray(x)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)


@dataclass(frozen=True)
class Beta(DistributionModel):
    alpha: float
    beta: float
    bounded = True

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"beta: parameters must be positive, got ({self.alpha}, {self.beta})")

    @property
    def label(self) -> str:
        return f"beta({_fmt(self.alpha)},{_fmt(self.beta)})"

    def support(self):
        return (0.0, 1.0)

    def raw_moment(self, k: int) -> float:
        _check_order(k)
        m = 1.0
        for r in range(k):
            m *= (self.alpha + r) / (self.alpha + self.beta + r)
        return m

    def ppf(self, u):
        u = np.asarray(u)
        if self.alpha == 1.0:
            return 1.0 - (1.0 - u) ** (1.0 / self.beta)
        return special.betaincinv(self.alpha, self.beta, u)

    def cdf(self, x: float) -> float:
        return float(special.betainc(self.alpha, self.beta, min(max(x, 0.0), 1.0)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < 1)
        xc = np.clip(x, 1e-300, 1 - 1e-16)
        logp = ((self.alpha - 1) * np.log(xc) + (self.beta - 1) * np.log1p(-xc)
                - special.betaln(self.alpha, self.beta))
        return np.where(inside, np.exp(logp), 0.0)


@dataclass(frozen=True)
class Discrete(DistributionModel):
    values: tuple[float, ...]
    probs: tuple[float, ...]
    bounded = True

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not self.values or len(self.values) != len(self.probs):
            raise ValueError("discrete: values and probs must be non-empty and equally long")
        if any(p < 0 for p in self.probs):
            raise ValueError("discrete: probabilities must be >= 0")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"discrete: probabilities sum to {math.fsum(self.probs)!r}, not 1")

    @property
    def label(self) -> str:
        atoms = ",".join(f"{_fmt(v)}:{_fmt(p)}" for v, p in zip(self.values, self.probs))
        return f"discrete({atoms})"

    def support(self):
        return (min(self.values), max(self.values))

    @property
    def integer_valued(self) -> bool:
        return all(float(v).is_integer() for v in self.values)

    def raw_moment(self, k: int) -> float:
        _check_order(k)
        try:
            val = math.fsum(p * v ** k for v, p in zip(self.values, self.probs))
        except OverflowError:
            raise MomentOverflowError(k) from None
        if math.isinf(val):
            raise MomentOverflowError(k)
        return val

    def ppf(self, u):
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, np.asarray(u), side="right")
        return np.asarray(self.values)[np.minimum(idx, len(self.values) - 1)]

    def cdf(self, x: float) -> float:
        return math.fsum(p for v, p in zip(self.values, self.probs) if v <= x)


@dataclass(frozen=True)
class PointMass(DistributionModel):
    c: float
    bounded = True

    @property
    def label(self) -> str:
        return f"point({_fmt(self.c)})"

    def support(self):
        return (self.c, self.c)

    def raw_moment(self, k: int) -> float:
        _check_order(k)
        try:
            val = float(self.c) ** k
        except OverflowError:
            raise MomentOverflowError(k) from None
        if math.isinf(val):
            raise MomentOverflowError(k)
        return val

    def ppf(self, u):
        return np.full(np.shape(u), float(self.c)) if np.ndim(u) else float(self.c)

    def cdf(self, x: float) -> float:
        return 1.0 if x >= self.c else 0.0


@dataclass(frozen=True)
class Truncated(DistributionModel):
    """``base`` conditioned on ``lower <= X <= upper``."""

    base: DistributionModel
    lower: float
    upper: float
    bounded = True
    _mass: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"trunc: need lower < upper, got ({self.lower}, {self.upper})")
        mass = self._interval_mass()
        if not mass > 0:
            raise ValueError(f"trunc: [{self.lower}, {self.upper}] has zero mass under {self.base.label}")
        object.__setattr__(self, "_mass", mass)

    def _interval_mass(self) -> float:
        b = self.base
        if isinstance(b, Discrete):
            return math.fsum(p for v, p in zip(b.values, b.probs) if self.lower <= v <= self.upper)
        if isinstance(b, PointMass):
            return 1.0 if self.lower <= b.c <= self.upper else 0.0
        return b.cdf(self.upper) - b.cdf(self.lower)

    @property
    def label(self) -> str:
        return f"trunc({self.base.label},{_fmt(self.lower)},{_fmt(self.upper)})"

    def support(self):
        lo, hi = self.base.support()
        return (max(lo, self.lower), min(hi, self.upper))

    def reduced(self) -> DistributionModel | None:
        """Equivalent untruncated model when one exists in closed form."""
        b = self.base
        lo, hi = self.support()
        if isinstance(b, PointMass):
            return b
        if isinstance(b, Uniform):
            return Uniform(lo, hi)
        if isinstance(b, Discrete):
            atoms = [(v, p) for v, p in zip(b.values, b.probs) if self.lower <= v <= self.upper]
            tot = math.fsum(p for _, p in atoms)
            return Discrete(tuple(v for v, _ in atoms), tuple(p / tot for _, p in atoms))
        return None

    def raw_moment(self, k: int) -> float:
        _check_order(k)
        if k == 0:
            return 1.0
        red = self.reduced()
        if red is not None:
            return red.raw_moment(k)
        lo, hi = self.support()
        try:
            val, _ = integrate.quad(lambda x: x ** k * float(self.base.pdf(x)), lo, hi,
                                    epsabs=0.0, epsrel=QUAD_RTOL, limit=500,
                                    points=[0.0] if lo < 0.0 < hi else None)
        except OverflowError:
            raise MomentOverflowError(k) from None
        val /= self._mass
        if not math.isfinite(val):
            raise MomentOverflowError(k)
        return val

    def cdf(self, x: float) -> float:
        if x < self.lower:
            return 0.0
        if x >= self.upper:
            return 1.0
        return (self.base.cdf(x) - self.base.cdf(self.lower)) / self._mass

    def pdf(self, x):
        x = np.asarray(x)
        return np.where((x >= self.lower) & (x <= self.upper), self.base.pdf(x) / self._mass, 0.0)

    def ppf(self, u):
        raise UnsupportedMomentError("truncated models are sampled by rejection, not inverse CDF")

    def sample(self, rng: np.random.Generator, size=None):
        n = 1 if size is None else int(np.prod(size))
        out = np.empty(n)
        filled = 0
        for _ in range(REJECTION_ROUNDS):
            need = n - filled
            batch = max(16, int(need / max(self._mass, 1e-3) * 1.1) + 1)
            cand = np.asarray(self.base.sample(rng, batch), dtype=float)
            keep = cand[(cand >= self.lower) & (cand <= self.upper)][:need]
            out[filled:filled + keep.size] = keep
            filled += keep.size
            if filled == n:
                return out[0] if size is None else out.reshape(size)
        raise SamplingStallError(f"rejection sampler for {self.label} stalled after "
                                 f"{REJECTION_ROUNDS} rounds ({filled}/{n} accepted)")


def _check_order(k: int) -> None:
    if int(k) != k or k < 0:
        raise UnsupportedMomentError(f"moment order must be a non-negative integer, got {k!r}")


def raw_moment(model: DistributionModel, k: int) -> float:
    """E[X**k]."""
    return model.raw_moment(k)


@dataclass(frozen=True)
class MomentTable:
    """``values[n] = E[A**(2n)]`` for ``n = 0..max_order``."""

    model: DistributionModel
    values: np.ndarray
    precision: str = "float64"

    @property
    def max_order(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)


def a2_moment_table(model: DistributionModel, max_order: int) -> MomentTable:
    if max_order < 0:
        raise ValueError(f"max_order must be >= 0, got {max_order}")
    vals = np.array([model.raw_moment(2 * n) for n in range(max_order + 1)], dtype=float)
    vals[0] = 1.0
    vals.setflags(write=False)
    return MomentTable(model, vals)


def a2_norm4(model: DistributionModel, n: int) -> float:
    """||(A**2)**n||_4 = E[A**(8n)]**(1/4)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return 1.0
    return model.raw_moment(8 * n) ** 0.25


def _log_a2_norm4(model: DistributionModel, n: int) -> float:
    if isinstance(model, Normal) and model.centered:
        return model.log_even_moment(8 * n) / 4.0
    v = a2_norm4(model, n)
    if v == 0.0:
        return -math.inf
    return math.log(v)


def support_bound(model: DistributionModel) -> float:
    """H = max(1, a1**2, a2**2) for a model supported on [a1, a2]."""
    lo, hi = model.support()
    return max(1.0, lo * lo, hi * hi)


@dataclass
class GrowthReport:
    max_n: int
    ratios: np.ndarray
    kappa: float
    M: float
    verdict: str
    note: str = ""

    def to_dict(self) -> dict:
        return {"max_n": self.max_n, "ratios": [float(r) for r in self.ratios],
                "kappa": self.kappa, "M": self.M, "verdict": self.verdict, "note": self.note}


def growth_ratios(model: DistributionModel, n_max: int) -> np.ndarray:
    """||(A^2)^(n+1)||_4 / ||(A^2)^n||_4 for n = 0..n_max-1; stops at the first overflow."""
    out = []
    prev = _log_a2_norm4(model, 0)
    for n in range(n_max):
        cur = _log_a2_norm4(model, n + 1)
        out.append(0.0 if cur == -math.inf else math.exp(cur - prev))
        prev = cur
    return np.array(out)


def check_growth_condition(model: DistributionModel, n_max: int = 20) -> GrowthReport:
    """Check the ratio form of the moment-growth condition on A**2.

    Bounded models and centred Gaussians use their proven exponents (0 and 1).
    Anything else gets a least-squares fit of log(ratio) against log(n) and is
    at best reported "inconclusive".
    """
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    try:
        ratios = growth_ratios(model, n_max)
    except MomentOverflowError as exc:
        partial = []
        for n in range(exc.order // 8):
            try:
                partial = growth_ratios(model, n + 1)
            except MomentOverflowError:
                break
        return GrowthReport(len(partial), np.asarray(partial), math.nan, math.nan, "inconclusive",
                            note=f"moment overflow at order {exc.order}")

    if model.bounded:
        H = support_bound(model)
        return GrowthReport(n_max, ratios, 0.0, H * H, "admissible", note=f"bounded, H={H!r}")
    if isinstance(model, Normal) and model.centered:
        ns = np.arange(1, n_max)
        M = float(np.max(ratios[1:] / ns))
        return GrowthReport(n_max, ratios, 1.0, M, "admissible", note="centred gaussian")

    ns = np.arange(2, n_max)
    if len(ns) < 2:
        return GrowthReport(n_max, ratios, math.nan, math.nan, "inconclusive", note="too few points to fit")
    slope, intercept = np.polyfit(np.log(ns), np.log(ratios[2:]), 1)
    kappa = float(max(slope, 0.0))
    M = float(np.max(ratios[1:] / np.arange(1, n_max) ** kappa))
    note = "fitted exponent" + (" >= 2" if kappa >= 2 else "")
    return GrowthReport(n_max, ratios, kappa, M, "inconclusive", note=note)


def truncate_for_admissibility(model: DistributionModel, k: float = 10.0) -> DistributionModel:
    """Restrict ``model`` to mean +- k std, which makes A**2 bounded."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    sd = math.sqrt(model.variance)
    if sd == 0.0:
        return model
    mu = model.mean
    return Truncated(model, mu - k * sd, mu + k * sd)


def sample(model: DistributionModel, rng: np.random.Generator, size=None):
    return model.sample(rng, size)


def centered_gaussian(sigma: float) -> Normal:
    return Normal(0.0, sigma)


def discrete(values: Sequence[float], probs: Sequence[float]) -> Discrete:
    return Discrete(tuple(values), tuple(probs))


class DistributionParseError(ValueError):
    pass


def _number(tok: str) -> float:
    tok = tok.strip()
    try:
        if "/" in tok:
            num, den = tok.split("/")
            return float(Fraction(num.strip()) / Fraction(den.strip()))
        return float(tok)
    except (ValueError, ZeroDivisionError):
        raise DistributionParseError(f"not a number: {tok!r}") from None


def _split_args(body: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def parse_distribution(text: str) -> DistributionModel:
    """Parse ``normal(0,0.25)``, ``uniform(0,2)``, ``beta(1,3)``,
    ``discrete(2:1/3,4:1/3,6:1/3)``, ``point(0.7)`` or ``trunc(<dist>,lo,hi)``.

    The second argument of ``normal`` is the variance.
    """
    s = text.strip()
    if "(" not in s or not s.endswith(")"):
        raise DistributionParseError(f"expected name(args), got {text!r}")
    name, body = s.split("(", 1)
    name = name.strip().lower()
    args = _split_args(body[:-1])
    try:
        if name in ("normal", "gaussian"):
            _arity(name, args, 2)
            return Normal.from_variance(_number(args[0]), _number(args[1]))
        if name == "uniform":
            _arity(name, args, 2)
            return Uniform(_number(args[0]), _number(args[1]))
        if name == "beta":
            _arity(name, args, 2)
            return Beta(_number(args[0]), _number(args[1]))
        if name == "point":
            _arity(name, args, 1)
            return PointMass(_number(args[0]))
        if name == "discrete":
            vals, probs = [], []
            for atom in args:
                if ":" not in atom:
                    raise DistributionParseError(f"discrete atom needs value:prob, got {atom!r}")
                v, p = atom.split(":", 1)
                vals.append(_number(v))
                probs.append(_number(p))
            return Discrete(tuple(vals), tuple(probs))
        if name == "trunc":
            _arity(name, args, 3)
            return Truncated(parse_distribution(args[0]), _number(args[1]), _number(args[2]))
    except DistributionParseError:
        raise
    except ValueError as exc:
        raise DistributionParseError(str(exc)) from None
    raise DistributionParseError(f"unknown distribution {name!r}")


def _arity(name: str, args: list[str], n: int) -> None:
    if len(args) != n:
        raise DistributionParseError(f"{name} takes {n} argument(s), got {len(args)}")
