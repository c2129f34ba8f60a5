#!/usr/bin/env python3
"""
07_two_round.py
Two-round exposure vs one-round sampling:
1) Edge counts of run_phases and sample_girg over 100 seeds at n = 2^12 (4 sigma)
2) Growth indicator |K4| <= |K3| + 3 delta n on >= 95% of seeds at n = 2^14
"""
import numpy as np
from dotenv import load_dotenv

from app.bdf_parser import parse
from app.config import configure_logging, default_workers, make_params
from app.girg_sampler import sample_girg
from app.two_round import run_phases

BDF = "min(x1,x2)"
SEEDS = range(100)
DELTA = 0.05


def main() -> None:
    load_dotenv()
    configure_logging()
    bdf = parse(BDF)
    workers = default_workers()

    two, one = [], []
    for seed in SEEDS:
        params = make_params(n=2 ** 12, seed=seed)
        two.append(len(run_phases(params, bdf, DELTA, workers=workers).g4))
        one.append(len(sample_girg(params, bdf, workers=workers).edges))
    diff = np.asarray(two, dtype=float) - np.asarray(one, dtype=float)
    z = diff.mean() / (diff.std(ddof=1) / np.sqrt(len(diff)) + 1e-12)
    print(f"mean edges two-round {np.mean(two):.1f} vs one-round {np.mean(one):.1f} (z={z:.2f})")

    held = 0
    for seed in SEEDS:
        trace = run_phases(make_params(n=2 ** 14, seed=seed), bdf, DELTA, workers=workers)
        held += int(trace.growth_ok())
    print(f"growth indicator held on {held}/{len(SEEDS)} seeds")

    if abs(z) > 4.0 or held < 0.95 * len(SEEDS):
        raise SystemExit("two-round check FAILED")


if __name__ == "__main__":
    main()
