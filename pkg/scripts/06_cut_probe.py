#!/usr/bin/env python3
"""
06_cut_probe.py
Geometric cut probe on a non-SCOM BDF:
1) Fit eta at n = 2^10 as half the sparsest balanced probed cut per vertex
2) Check every balanced probed cut at larger n has >= eta n crossing edges
"""
from dotenv import load_dotenv

from app.analysis import probe_cuts
from app.bdf_parser import parse
from app.config import configure_logging, default_workers, make_params
from app.girg_sampler import sample_girg

BDF = "min(x1,x2)"
N_GRID = [2 ** k for k in range(10, 17)]
SEEDS = range(5)
DELTA = 0.1


def sparsest(n: int, seed: int) -> float:
    instance = sample_girg(make_params(n=n, seed=seed), parse(BDF), workers=default_workers())
    balanced = [r for r in probe_cuts(instance) if min(r.side_sizes) >= DELTA * n]
    return min(r.cross_edges for r in balanced) / n


def main() -> None:
    load_dotenv()
    configure_logging()

    eta = 0.5 * min(sparsest(N_GRID[0], s) for s in SEEDS)
    print(f"fitted eta = {eta:.4f}")

    failures = 0
    for n in N_GRID[1:]:
        for seed in SEEDS:
            value = sparsest(n, seed)
            failures += int(value < eta)
            print(f"n={n:6d} seed={seed}: sparsest/n = {value:.4f}")

    if failures:
        raise SystemExit(f"cut probe check FAILED on {failures} runs")


if __name__ == "__main__":
    main()
