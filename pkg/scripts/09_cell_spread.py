#!/usr/bin/env python3
"""
09_cell_spread.py
Cells and step connections of the two-round exposure:
1) Top r*n cells hold fewer than delta*n/2 vertices on every seed at n = 2^14
2) Pooled step connection frequency over 100 seeds stays bounded away from 0
3) log-log slope of the mean step frequency over n = 2^12 .. 2^14 (flat is good)
"""
import numpy as np
from dotenv import load_dotenv

from app.analysis import fit_loglog_slope
from app.bdf_parser import parse
from app.config import configure_logging, default_workers, make_params
from app.two_round import cell_spread_probe, run_phases, step_connection_frequency

BDFS = ["min(x1,x2)", "max(min(x1,x2),min(x3,x4))"]
SEEDS = range(100)
DELTA = 0.05
FRACTIONS = [0.0005, 0.001, 0.002]
STEPS = 200
N_GRID = [2 ** 12, 2 ** 13, 2 ** 14]


def main() -> None:
    load_dotenv()
    configure_logging()
    workers = default_workers()
    failed = False

    for source in BDFS:
        bdf = parse(source)
        by_n = {}
        spread_bad = 0
        for n in N_GRID:
            freqs = []
            for seed in SEEDS:
                trace = run_phases(make_params(n=n, seed=seed), bdf, DELTA, workers=workers)
                freqs.append(step_connection_frequency(trace, DELTA, STEPS, seed=seed)["frequency"])
                if n == N_GRID[-1]:
                    rows = cell_spread_probe(trace.relabeled_positions, trace.partition, FRACTIONS, DELTA)
                    spread_bad += int(not all(r["below"] for r in rows))
            by_n[n] = np.asarray(freqs)

        top = by_n[N_GRID[-1]]
        lower = top.mean() - 4.0 * top.std(ddof=1) / np.sqrt(len(top))
        slope = fit_loglog_slope(N_GRID, [by_n[n].mean() for n in N_GRID])
        print(f"{source}: cell spread violated on {spread_bad}/{len(SEEDS)} seeds; "
              f"step frequency {top.mean():.4f} (4 sigma lower bound {lower:.4f}); "
              f"slope over n {slope if slope is not None else float('nan'):.3f}")
        failed |= spread_bad > 0 or lower <= 0.0

    if failed:
        raise SystemExit("cell spread check FAILED")


if __name__ == "__main__":
    main()
