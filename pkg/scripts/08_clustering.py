#!/usr/bin/env python3
"""
08_clustering.py
Clustering coefficient at defaults for n = 2^10..2^16:
every seed above 0.01 and all values within a factor 2 band.
Also prints the stochastic triangle check of the BDF.
"""
from dotenv import load_dotenv

from app.analysis import clustering_coefficient, stochastic_triangle_check
from app.bdf_parser import parse
from app.config import configure_logging, default_workers, make_params
from app.girg_sampler import sample_girg

BDF = "min(x1,x2)"
N_GRID = [2 ** k for k in range(10, 17)]
SEEDS = range(3)


def main() -> None:
    load_dotenv()
    configure_logging()
    bdf = parse(BDF)

    for row in stochastic_triangle_check(bdf, [0.25, 0.1, 0.01, 0.001], 100_000):
        print("triangle:", {k: round(v, 4) for k, v in row.items()})

    values = []
    for n in N_GRID:
        for seed in SEEDS:
            cc = clustering_coefficient(sample_girg(make_params(n=n, seed=seed), bdf,
                                                    workers=default_workers()))
            values.append(cc)
            print(f"n={n:6d} seed={seed}: cc={cc:.4f}")

    low, high = min(values), max(values)
    print(f"\nrange [{low:.4f}, {high:.4f}]")
    if low < 0.01 or high > 2 * low:
        raise SystemExit("clustering check FAILED")


if __name__ == "__main__":
    main()
