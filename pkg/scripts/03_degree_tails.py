#!/usr/bin/env python3
"""
03_degree_tails.py
Degree tail exponent at n = 2^15, beta = 2.5, averaged over 10 seeds.
Target slope -(beta - 1) = -1.5 within 0.15.
"""
import numpy as np
from dotenv import load_dotenv

from app.analysis import degree_tail_table
from app.bdf_parser import parse
from app.config import configure_logging, default_workers, make_params
from app.girg_sampler import sample_girg

BDF = "min(x1,x2)"
N = 2 ** 15
SEEDS = range(10)


def main() -> None:
    load_dotenv()
    configure_logging()
    bdf = parse(BDF)

    slopes = []
    for seed in SEEDS:
        instance = sample_girg(make_params(n=N, beta=2.5, seed=seed), bdf, workers=default_workers())
        tail = degree_tail_table(instance)
        slopes.append(tail.slope)
        print(f"seed {seed}: slope={tail.slope:.3f}")

    mean = float(np.mean(slopes))
    print(f"\nmean slope: {mean:.3f} (target -1.5 +- 0.15)")
    if abs(mean + 1.5) > 0.15:
        raise SystemExit("degree tail check FAILED")


if __name__ == "__main__":
    main()
