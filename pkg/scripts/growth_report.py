"""Moment-growth ratios for a few models of A (see ``rcheb check`` for one model)."""

import sys

from rcheb.moments import check_growth_condition, parse_distribution

DEFAULT = ["normal(0,0.25)", "normal(0,4)", "uniform(0,2)", "beta(2,5)", "discrete(2:1/3,4:1/3,6:1/3)",
           "trunc(normal(1,1),-2,4)"]

for text in sys.argv[1:] or DEFAULT:
    rep = check_growth_condition(parse_distribution(text), 12)
    head = " ".join(f"{r:.4g}" for r in rep.ratios[:6])
    print(f"{text:32s} {rep.verdict:13s} kappa={rep.kappa} M={rep.M:.4g}  ratios: {head} ...")
