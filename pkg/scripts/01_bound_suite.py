#!/usr/bin/env python3
"""
01_bound_suite.py
Pointwise upper bounds on 50 random BDFs, 10^5 points each:
- kappa(x) <= max over bound_subset
- kappa(x) <= outer_min_upper_bound(x) for non-SCOM outer-max trees
- kappa(x) <= min(max over S1, max over S2) for non-SCOM trees
"""
import numpy as np
from dotenv import load_dotenv

from app import rng
from app.bdf_core import (
    Max,
    bound_subset,
    depth,
    evaluate,
    is_scom,
    leaf_count,
    max_norm,
    min_of_maxes_bound,
    outer_min_upper_bound,
    random_expr,
    witness_evaluate,
)
from app.config import configure_logging, env_int

EXPRS = 50
POINTS = 100_000


def main() -> None:
    load_dotenv()
    configure_logging()
    gen = rng.generator(env_int("GIRG_SEED", 42), rng.PROBE)

    violations = 0
    structural = 0
    for _ in range(EXPRS):
        expr = random_expr(int(gen.integers(2, 9)), gen)
        x = gen.uniform(-0.5, 0.5, (POINTS, leaf_count(expr)))
        k = evaluate(expr, x)

        s = bound_subset(expr)
        structural += int(len(s) != depth(expr))
        violations += int(np.count_nonzero(k > max_norm(x, s)))

        if is_scom(expr)[0]:
            continue
        if isinstance(expr, Max):
            upper = outer_min_upper_bound(expr)
            structural += int(depth(upper) != depth(expr))
            violations += int(np.count_nonzero(k > evaluate(upper, x)))
        w = min_of_maxes_bound(expr)
        structural += int(min(len(w.s1), len(w.s2)) != depth(expr) or bool(w.s1 & w.s2))
        violations += int(np.count_nonzero(k > witness_evaluate(w, x)))

    print(f"pointwise violations: {violations}")
    print(f"structural failures: {structural}")
    if violations or structural:
        raise SystemExit("bound suite FAILED")


if __name__ == "__main__":
    main()
