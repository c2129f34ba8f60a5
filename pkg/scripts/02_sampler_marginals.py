#!/usr/bin/env python3
"""
02_sampler_marginals.py
Per-pair edge frequencies against the connection probability:
1) Fix one weight/position draw at n = 200
2) For 20 pairs, count edges over 10^5 edge seeds (4 sigma)
3) KS test min(y1, y2) of the split variables against uniform
"""
import numpy as np
from dotenv import load_dotenv
from scipy import stats

from app import rng
from app.bdf_parser import parse
from app.config import configure_logging, env_int, make_params
from app.girg_sampler import power_law_weights, sample_edge_frequency, sample_positions

BDF = "min(x1,x2)"
N = 200
PAIRS = 20
SEEDS = 100_000
SPLITS = 1_000_000


def main() -> None:
    load_dotenv()
    configure_logging()
    seed = env_int("GIRG_SEED", 42)
    bdf = parse(BDF)
    params = make_params(n=N, seed=seed)
    weights = power_law_weights(N, params.beta)
    positions = sample_positions(N, 2, seed)
    gen = rng.generator(seed, rng.PROBE)

    worst = 0.0
    for _ in range(PAIRS):
        u, v = (int(x) for x in gen.choice(N, size=2, replace=False))
        freq, p = sample_edge_frequency(params, bdf, u, v, positions, weights, range(SEEDS))
        sigma = np.sqrt(max(p * (1 - p), 1e-12) / SEEDS)
        worst = max(worst, abs(freq - p) / sigma)
        print(f"pair ({u:3d},{v:3d}): p={p:.5f} freq={freq:.5f}")

    u = gen.random(SPLITS)
    w = gen.random(SPLITS)
    y = np.minimum(rng.split_from_uniform(u), rng.split_from_uniform(w))
    ks = stats.kstest(y, "uniform")

    print(f"\nworst deviation: {worst:.2f} sigma (limit 4)")
    print(f"KS p-value of min(y1,y2): {ks.pvalue:.4f} (limit 1e-3)")
    if worst > 4.0 or ks.pvalue < 1e-3:
        raise SystemExit("marginal check FAILED")


if __name__ == "__main__":
    main()
