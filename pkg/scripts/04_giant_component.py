#!/usr/bin/env python3
"""
04_giant_component.py
Largest component >= 0.1 n and second largest <= 10 log^3 n,
for n in 2^12..2^16 and 10 seeds per n.
"""
import math

from dotenv import load_dotenv

from app.analysis import connected_components
from app.bdf_parser import parse
from app.config import configure_logging, default_workers, make_params
from app.girg_sampler import sample_girg

BDF = "min(x1,x2)"
N_GRID = [2 ** k for k in range(12, 17)]
SEEDS = range(10)


def main() -> None:
    load_dotenv()
    configure_logging()
    bdf = parse(BDF)

    failures = 0
    for n in N_GRID:
        for seed in SEEDS:
            comps = connected_components(sample_girg(make_params(n=n, seed=seed), bdf,
                                                     workers=default_workers()))
            first = comps.sizes[0]
            second = comps.sizes[1] if len(comps.sizes) > 1 else 0
            ok = first >= 0.1 * n and second <= 10 * math.log(n) ** 3
            failures += int(not ok)
            print(f"n={n:6d} seed={seed}: largest={first} second={second} {'ok' if ok else 'FAIL'}")

    if failures:
        raise SystemExit(f"giant component check FAILED on {failures} runs")


if __name__ == "__main__":
    main()
