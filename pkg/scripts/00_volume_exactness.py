#!/usr/bin/env python3
"""
00_volume_exactness.py
Exact ball volumes vs Monte Carlo:
1) Draw 50 random BDFs with d <= 8
2) For 20 radii each, compare volume() with a 10^6-point estimate (4 sigma)
3) Check that the log-log slope near r -> 0 equals the depth
"""
import numpy as np
from dotenv import load_dotenv

from app import rng
from app.analysis import fit_loglog_slope
from app.bdf_core import depth, monte_carlo_volume, random_expr, volume
from app.bdf_parser import format as format_bdf
from app.config import configure_logging, env_int

EXPRS = 50
RADII = np.geomspace(1e-3, 0.5, 20)
SAMPLES = 1_000_000
SLOPE_RADII = 2.0 ** -np.arange(30, 41)


def main() -> None:
    load_dotenv()
    configure_logging()
    gen = rng.generator(env_int("GIRG_SEED", 42), rng.PROBE)

    worst = 0.0
    slope_err = 0.0
    for i in range(EXPRS):
        expr = random_expr(int(gen.integers(1, 9)), gen)
        for r in RADII:
            est, sigma = monte_carlo_volume(expr, float(r), SAMPLES, gen)
            exact = volume(expr, float(r))
            if sigma > 0:
                worst = max(worst, abs(est - exact) / sigma)
        slope = fit_loglog_slope(SLOPE_RADII, volume(expr, SLOPE_RADII))
        slope_err = max(slope_err, abs(slope - depth(expr)))
        print(f"{i:2d}. {format_bdf(expr)}  D={depth(expr)}  slope={slope:.9f}")

    print(f"\nworst deviation: {worst:.2f} sigma (limit 4)")
    print(f"worst slope error: {slope_err:.2e} (limit 1e-6)")
    if worst > 4.0 or slope_err > 1e-6:
        raise SystemExit("volume exactness check FAILED")


if __name__ == "__main__":
    main()
