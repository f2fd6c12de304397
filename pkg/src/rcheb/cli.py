"""Command-line front end.

    rcheb solve   --A "normal(0,0.25)" --Y0 "beta(1,3)" --Y1 "uniform(0,2)" --method tsm
    rcheb compare --method tsm,theoretical,mc --m 100000
    rcheb check   --A "normal(0,0.25)" --nmax 20
    rcheb verify  --h-ladder 1e-2,5e-3,2.5e-3
    rcheb bench

Distribution specs: normal(mu,VARIANCE), uniform(a,b), beta(a,b),
discrete(v:p,...), point(c), trunc(<spec>,lo,hi).
"""

from __future__ import annotations

import argparse
import io
import json
import os
import re
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import closedform, montecarlo, msverify
from .moments import (DistributionModel, DistributionParseError, MomentOverflowError, SamplingStallError,
                      UnsupportedMomentError, check_growth_condition, parse_distribution)
from .series import StatSeries, TruncatedSolution

METHODS = ("tsm", "theoretical", "mc", "exact")
SEED_ENV = "RCHEB_SEED"
DEFAULT_SEED = 20161016
EXAMPLE_GRID = "0.1,0.3,0.5,0.7,0.9"

MATH_ERRORS = (ArithmeticError, UnsupportedMomentError, MomentOverflowError, SamplingStallError,
               closedform.ContractError, montecarlo.ConfigError, ValueError)


@dataclass
class RunSpec:
    A: DistributionModel
    Y0: DistributionModel
    Y1: DistributionModel
    methods: list[str]
    N: int = 10
    grid: np.ndarray = field(default_factory=lambda: np.array([0.1, 0.3, 0.5, 0.7, 0.9]))
    m: int = 100_000
    seed: int = DEFAULT_SEED
    fmt: str = "csv"
    output: str | None = None
    threads: int = 1
    y0_m1: float | None = None
    y0_m2: float | None = None
    y1_m1: float | None = None
    y1_m2: float | None = None

    def ic_moments(self) -> tuple[float, float, float, float]:
        pick = lambda v, model, k: float(v) if v is not None else model.raw_moment(k)
        return (pick(self.y0_m1, self.Y0, 1), pick(self.y0_m2, self.Y0, 2),
                pick(self.y1_m1, self.Y1, 1), pick(self.y1_m2, self.Y1, 2))


def run_method(spec: RunSpec, method: str) -> StatSeries:
    y0_m1, y0_m2, y1_m1, y1_m2 = spec.ic_moments()
    if method == "tsm":
        sol = TruncatedSolution.from_models(spec.A, spec.Y0, spec.Y1, spec.N, y0_m1=y0_m1, y0_m2=y0_m2,
                                            y1_m1=y1_m1, y1_m2=y1_m2)
        return sol.solve_grid(spec.grid)
    if method == "theoretical":
        return closedform.theoretical_grid(spec.A, y0_m1, y0_m2, y1_m1, y1_m2, spec.grid)
    if method == "exact":
        return closedform.exact_discrete_grid(spec.A, y0_m1, y0_m2, y1_m1, y1_m2, spec.grid)
    if method == "mc":
        cfg = montecarlo.SimulationConfig(spec.m, spec.seed, spec.grid, spec.A, spec.Y0, spec.Y1, spec.threads)
        return montecarlo.simulate(cfg)
    raise ValueError(f"unknown method {method!r}")


def timed(spec: RunSpec, method: str) -> tuple[StatSeries, float]:
    t0 = time.perf_counter()
    out = run_method(spec, method)
    return out, time.perf_counter() - t0


# Parsing ---------------------------------------------------------------------

def _dist(text: str) -> DistributionModel:
    try:
        return parse_distribution(text)
    except DistributionParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


_LINSPACE = re.compile(r"^\s*linspace\(([^,]+),([^,]+),([^,]+)\)\s*$")


def _grid(text: str) -> np.ndarray:
    mt = _LINSPACE.match(text)
    try:
        if mt:
            lo, hi, n = float(mt[1]), float(mt[2]), int(mt[3])
            grid = np.linspace(lo, hi, n)
        else:
            grid = np.array(_float_list(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if grid.size == 0:
        raise argparse.ArgumentTypeError("grid is empty")
    if np.any(np.abs(grid) >= 1):
        raise argparse.ArgumentTypeError(f"grid point {grid[np.abs(grid) >= 1][0]!r} outside (-1, 1)")
    return grid


def _methods(text: str) -> list[str]:
    out = [m.strip().lower() for m in text.split(",") if m.strip()]
    bad = [m for m in out if m not in METHODS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad or text!r}; choose from {', '.join(METHODS)}")
    return out


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _pos_int(text: str) -> int:
    v = _nonneg_int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _fraction(text: str) -> float:
    try:
        if "/" in text:
            num, den = text.split("/")
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_SEED


def _add_models(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("models")
    g.add_argument("--A", type=_dist, default=_dist("normal(0,0.25)"),
                   help="coefficient distribution; normal(mu,v) takes the VARIANCE v (default normal(0,0.25))")
    g.add_argument("--Y0", type=_dist, default=_dist("beta(1,3)"), help="Y(0) distribution (default beta(1,3))")
    g.add_argument("--Y1", type=_dist, default=_dist("uniform(0,2)"), help="Y'(0) distribution (default uniform(0,2))")
    for name in ("Y0-m1", "Y0-m2", "Y1-m1", "Y1-m2"):
        g.add_argument(f"--{name}", type=_fraction, default=None,
                       help=f"override E[{name[:2]}^{name[-1]}] instead of taking it from the distribution")


def _add_run(p: argparse.ArgumentParser, methods_default: str) -> None:
    p.add_argument("--method", type=_methods, default=_methods(methods_default),
                   help=f"comma-separated subset of {','.join(METHODS)} (default {methods_default})")
    p.add_argument("--N", type=_nonneg_int, default=10, help="truncation order (default 10)")
    p.add_argument("--grid", type=_grid, default=_grid(EXAMPLE_GRID),
                   help=f"s values: comma list or linspace(lo,hi,count) (default {EXAMPLE_GRID})")
    p.add_argument("--m", type=_pos_int, default=100_000, help="Monte Carlo sample count (default 100000)")
    p.add_argument("--threads", type=_pos_int, default=1, help="Monte Carlo worker cap (default 1)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_default_seed(), help=f"RNG seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    p.add_argument("--config", default=None, help="key = value file mirroring the long flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcheb", description=__doc__.split("\n\n")[0], allow_abbrev=False,
                                     formatter_class=argparse.RawDescriptionHelpFormatter,
                                     epilog="normal(mu,v): the second argument is the variance, "
                                            "so normal(0,0.25) has standard deviation 0.5.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub_kw = dict(allow_abbrev=False)

    p = sub.add_parser("solve", **sub_kw, help="mean/std of the solution on a grid")
    _add_models(p)
    _add_run(p, "tsm")
    _add_common(p)

    p = sub.add_parser("compare", **sub_kw, help="side-by-side methods with absolute differences")
    _add_models(p)
    _add_run(p, "tsm,theoretical,mc")
    _add_common(p)

    p = sub.add_parser("check", **sub_kw, help="moment-growth admissibility of A^2")
    p.add_argument("--A", type=_dist, default=_dist("normal(0,0.25)"), help="coefficient distribution")
    p.add_argument("--nmax", type=_pos_int, default=20, help="largest order checked (default 20)")
    _add_common(p)

    p = sub.add_parser("verify", **sub_kw, help="mean-square chain-rule and change-of-variable checks")
    p.add_argument("--m", type=_pos_int, default=10_000, help="ensemble size (default 10000)")
    p.add_argument("--h-ladder", type=_float_list, default=[1e-2, 5e-3, 2.5e-3, 1.25e-3],
                   help="step sizes, largest first (default 1e-2,5e-3,2.5e-3,1.25e-3)")
    p.add_argument("--t", type=float, default=1.0, help="evaluation point in (0, pi) (default 1)")
    _add_common(p)

    p = sub.add_parser("bench", **sub_kw, help="wall-clock per method")
    _add_models(p)
    _add_run(p, "tsm,theoretical,mc")
    p.add_argument("--repeat", type=_pos_int, default=3, help="repetitions; the best time is kept (default 3)")
    _add_common(p)
    return parser


def _config_defaults(parser: argparse.ArgumentParser, sub: argparse.ArgumentParser, path: str) -> None:
    flags = {s.lstrip("-").replace("-", "_").lower(): a for a in sub._actions for s in a.option_strings}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        parser.exit(2, f"rcheb: error: cannot read config {path!r}: {exc}\n")
    defaults = {}
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.exit(2, f"rcheb: error: config line {no}: expected key = value\n")
        key, value = (x.strip() for x in line.split("=", 1))
        action = flags.get(key.replace("-", "_").lower())
        if action is None or action.dest in ("config", "help"):
            parser.exit(2, f"rcheb: error: config line {no}: unknown key {key!r}\n")
        try:
            defaults[action.dest] = action.type(value) if action.type else value
        except argparse.ArgumentTypeError as exc:
            parser.exit(2, f"rcheb: error: config key {key}: {exc}\n")
        if action.choices and defaults[action.dest] not in action.choices:
            parser.exit(2, f"rcheb: error: config key {key}: invalid choice {value!r}\n")
    sub.set_defaults(**defaults)


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _config_defaults(parser, sub, args.config)
        args = parser.parse_args(argv)
    return args


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    return RunSpec(A=args.A, Y0=args.Y0, Y1=args.Y1, methods=args.method, N=args.N, grid=args.grid,
                   m=args.m, seed=args.seed, fmt=args.fmt, output=args.output, threads=args.threads,
                   y0_m1=args.Y0_m1, y0_m2=args.Y0_m2, y1_m1=args.Y1_m1, y1_m2=args.Y1_m2)


# Output ----------------------------------------------------------------------

def _f6(x: float) -> str:
    return f"{x:.6f}"


def comparison_table(series: dict[str, StatSeries], fmt: str) -> str:
    names = list(series)
    first = series[names[0]]
    if fmt == "json":
        d = {"s": [float(s) for s in first.grid],
             "methods": {k: v.to_dict() for k, v in series.items()},
             "absdiff": {f"{k}-{names[0]}": {"mean": np.abs(v.mean - first.mean).tolist(),
                                             "std": np.abs(v.std - first.std).tolist()}
                         for k, v in series.items() if k != names[0]}}
        return json.dumps(d, indent=2)
    cols = ["s"]
    for k, v in series.items():
        cols += [f"{k}_mean", f"{k}_std"] + ([f"{k}_stderr"] if v.stderr is not None else [])
    for k in names[1:]:
        cols += [f"absdiff_{k}_mean", f"absdiff_{k}_std"]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for i, s in enumerate(first.grid):
        row = [s]
        for v in series.values():
            row += [v.mean[i], v.std[i]] + ([v.stderr[i]] if v.stderr is not None else [])
        for k in names[1:]:
            row += [abs(series[k].mean[i] - first.mean[i]), abs(series[k].std[i] - first.std[i])]
        buf.write(",".join(_f6(x) for x in row) + "\n")
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# Commands --------------------------------------------------------------------

def cmd_solve(spec: RunSpec) -> int:
    if len(spec.methods) == 1:
        out = run_method(spec, spec.methods[0])
        _emit(out.to_json() + "\n" if spec.fmt == "json" else out.to_csv(), spec.output)
        return 0
    return cmd_compare(spec, timings=False)


def cmd_compare(spec: RunSpec, timings: bool = True) -> int:
    results, times = {}, {}
    for method in spec.methods:
        results[method], times[method] = timed(spec, method)
    text = comparison_table(results, spec.fmt)
    _emit(text + ("\n" if spec.fmt == "json" else ""), spec.output)
    if timings:
        # wall-clock varies between runs, so it stays off the data stream
        for method, sec in times.items():
            print(f"# {method}: {sec:.6f} s", file=sys.stderr)
    return 0


def cmd_check(A: DistributionModel, nmax: int, fmt: str, output: str | None) -> int:
    rep = check_growth_condition(A, nmax)
    if fmt == "json":
        d = rep.to_dict()
        d["A"] = A.label
        text = json.dumps(d, indent=2) + "\n"
    else:
        lines = [f"# A = {A.label}", f"# verdict = {rep.verdict}", f"# kappa = {rep.kappa:g}",
                 f"# M = {rep.M:.6g}", f"# note = {rep.note}", "n,ratio"]
        lines += [f"{n},{r:.10g}" for n, r in enumerate(rep.ratios)]
        text = "\n".join(lines) + "\n"
    _emit(text, output)
    return 1 if rep.verdict == "violated" else 0


def cmd_verify(m: int, seed: int, h_ladder, t: float, fmt: str, output: str | None) -> int:
    results = msverify.run_verification(h_ladder, m, seed, t)
    if fmt == "json":
        text = json.dumps([r.__dict__ for r in results], indent=2) + "\n"
    else:
        lines = ["check,status," + ",".join(f"h={h:g}" for h in h_ladder) + ",detail"]
        for r in results:
            status = ("expected-fail" if r.passed else "UNEXPECTED-PASS") if r.expected_fail else \
                ("pass" if r.passed else "FAIL")
            cells = [f"{x:.6e}" for x in r.residuals] + [""] * (len(h_ladder) - len(r.residuals))
            lines.append(",".join([r.name, status] + cells + [r.detail]))
        text = "\n".join(lines) + "\n"
    _emit(text, output)
    return 0 if all(r.passed for r in results) else 1


def cmd_bench(spec: RunSpec, repeat: int) -> int:
    best = {}
    for method in spec.methods:
        best[method] = min(timed(spec, method)[1] for _ in range(repeat))
    base_name = "tsm" if "tsm" in best else spec.methods[0]
    base = best[base_name]
    lines = ["method,seconds,percent_increase_from_" + base_name]
    for method, sec in best.items():
        lines.append(f"{method},{sec:.6f},{100.0 * (sec - base) / base:.1f}")
    _emit("\n".join(lines) + "\n", spec.output)
    return 0


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(args.A, args.nmax, args.fmt, args.output)
        if args.command == "verify":
            if not 0 < args.t < np.pi:
                print(f"rcheb: error: argument --t: must lie in (0, pi), got {args.t}", file=sys.stderr)
                return 2
            return cmd_verify(args.m, args.seed, args.h_ladder, args.t, args.fmt, args.output)
        spec = spec_from_args(args)
        if args.command == "solve":
            return cmd_solve(spec)
        if args.command == "compare":
            if len(spec.methods) < 2:
                print("rcheb: error: argument --method: compare needs at least two methods", file=sys.stderr)
                return 2
            return cmd_compare(spec)
        if args.command == "bench":
            return cmd_bench(spec, args.repeat)
    except MATH_ERRORS as exc:
        print(f"rcheb: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
