#!/usr/bin/env python3
"""
05_separator_scaling.py
Hyperplane separator of a SCOM BDF:
1) Sample max(x1, min(x2,x3)) over n = 2^10..2^16, 5 seeds each
2) Fit the log-log slope of crossing edges vs n (limit 0.95)
3) Both sides keep a component of size >= 0.05 n after the cut
"""
import numpy as np
from dotenv import load_dotenv

from app.analysis import fit_loglog_slope, hyperplane_separator, separator_components
from app.bdf_core import depth, is_scom
from app.bdf_parser import parse
from app.config import configure_logging, default_workers, make_params
from app.girg_sampler import predicted_separator_exponent, sample_girg

BDF = "max(x1,min(x2,x3))"
N_GRID = [2 ** k for k in range(10, 17)]
SEEDS = range(5)


def main() -> None:
    load_dotenv()
    configure_logging()
    bdf = parse(BDF)
    _, k = is_scom(bdf)

    means = []
    small_sides = 0
    for n in N_GRID:
        cross = []
        for seed in SEEDS:
            instance = sample_girg(make_params(n=n, beta=2.5, alpha=1.5, seed=seed), bdf,
                                   workers=default_workers())
            report = hyperplane_separator(instance, k)
            parts = separator_components(instance, report, 0.05)
            small_sides += int(parts["small_side_flag"])
            cross.append(report.cross_edges)
        means.append(float(np.mean(cross)))
        print(f"n={n:6d}: mean crossing edges {means[-1]:.1f}")

    slope = fit_loglog_slope(N_GRID, means)
    print(f"\nfitted slope: {slope:.3f} (limit 0.95, "
          f"predicted exponent {predicted_separator_exponent(2.5, 1.5, depth(bdf)):.3f})")
    print(f"runs with a side below 0.05 n: {small_sides}")
    if slope > 0.95 or small_sides:
        raise SystemExit("separator scaling check FAILED")


if __name__ == "__main__":
    main()
