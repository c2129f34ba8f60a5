"""Two-round exposure of a non-SCOM GIRG.

Each pair carries two split variables y1, y2 whose minimum is uniform. The
first round inserts pairs whose y1 beats a lower bound that only looks at the
coordinates S1; the remaining rounds walk the vertices in a fixed order and
insert every pair that satisfies the full edge rule. The final graph is a
one-round GIRG for the same positions.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app import rng
from app.analysis import ComponentDecomposition, components_from_edges
from app.bdf_core import (
    BdfExpr,
    coordinates,
    leaf_count,
    max_norm,
    min_of_maxes_bound,
    relabel,
    volume_ratio_constant,
)
from app.config import GirgParams
from app.errors import EmptyGiantError, InvariantBreach, PreconditionError
from app.girg_sampler import (
    GirgInstance,
    canonical_edges,
    edge_probability,
    map_pair_blocks,
    power_law_weights,
    sample_positions,
)

logger = logging.getLogger(__name__)

F_SAFETY = 0.9
GROWTH_SLACK = 3.0


# ---------- SPLIT VARIABLES ----------

@dataclass(frozen=True)
class SplitVariable:
    y1: float
    y2: float


def sample_split_variable(stream: np.random.Generator) -> SplitVariable:
    return SplitVariable(
        y1=rng.split_from_uniform(stream.random()),
        y2=rng.split_from_uniform(stream.random()),
    )


def eic_check(split: SplitVariable, p: float) -> bool:
    return min(split.y1, split.y2) < p


# ---------- SPLIT BOUND ----------

@dataclass(frozen=True)
class SplitBound:
    s1: frozenset                  # relabeled coordinates
    s2: frozenset                  # relabeled, always {d-m+1..d}
    m: int
    c_prime: float
    depth: int
    alpha: float
    ratio_constant: float
    permutation: Tuple[int, ...]   # new coordinate j holds original coordinate permutation[j-1]
    expr: BdfExpr                  # the BDF over relabeled coordinates


def derive_split_bound(expr: BdfExpr, params: GirgParams) -> SplitBound:
    witness = min_of_maxes_bound(expr)
    s1, s2 = witness.s1, witness.s2
    if len(s2) > len(s1):
        s1, s2 = s2, s1

    rest = [k for k in sorted(coordinates(expr)) if k not in s1 and k not in s2]
    order = sorted(s1) + rest + sorted(s2)
    mapping = {old: new for new, old in enumerate(order, start=1)}
    d = len(order)
    m = len(s2)

    d_kappa = witness.depth
    k_ratio = volume_ratio_constant(expr, witness)
    # V(kappa(x)) <= K * 2 * (2 t)^D for t the max-norm over either side
    c_prime = params.c * (2.0 ** (d_kappa + 1) * k_ratio) ** (-params.alpha)

    return SplitBound(
        s1=frozenset(mapping[k] for k in s1),
        s2=frozenset(range(d - m + 1, d + 1)),
        m=m,
        c_prime=c_prime,
        depth=d_kappa,
        alpha=params.alpha,
        ratio_constant=k_ratio,
        permutation=tuple(order),
        expr=relabel(expr, mapping),
    )


def lb_probability(c_prime: float, alpha: float, n: int, weight_product, t, d_kappa: int):
    """c' * min{1, (w_u w_v / (n t^D))^alpha}, equal to c' at t = 0."""
    wp = np.asarray(weight_product, dtype=float)
    tt = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(tt > 0.0, wp / (n * np.where(tt > 0.0, tt, 1.0) ** d_kappa), np.inf)
    out = c_prime * np.minimum(ratio, 1.0) ** alpha
    return float(out) if out.ndim == 0 else out


def lb_checks(split: SplitVariable, bound: SplitBound, w_u, w_v, delta, n: int) -> Tuple[bool, bool]:
    wp = float(w_u) * float(w_v)
    t1 = max_norm(delta, bound.s1)
    t2 = max_norm(delta, bound.s2)
    lb1 = split.y1 < lb_probability(bound.c_prime, bound.alpha, n, wp, t1, bound.depth)
    lb2 = split.y2 < lb_probability(bound.c_prime, bound.alpha, n, wp, t2, bound.depth)
    return bool(lb1), bool(lb2)


# ---------- CELLS ----------

@dataclass(frozen=True)
class CellPartition:
    M: int
    m: int

    @property
    def cells(self) -> int:
        return self.M ** self.m


def cell_partition(n: int, m: int, l: float = 1.0) -> CellPartition:
    if n < 1 or m < 1:
        raise PreconditionError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    if not 0.0 < l <= 1.0:
        raise PreconditionError(f"l must lie in (0, 1], got {l}")
    target = n / l
    M = max(1, int(math.ceil(target ** (1.0 / m))))
    # float roots can land one off either way
    while M > 1 and (M - 1) ** m >= target:
        M -= 1
    while M ** m < target:
        M += 1
    return CellPartition(M=M, m=m)


def cell_index(x, part: CellPartition):
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] < part.m:
        raise PreconditionError(f"point dimension {arr.shape[-1]} below partition dimension {part.m}")
    j = np.minimum(np.floor(arr[..., -part.m:] * part.M).astype(np.int64), part.M - 1)
    idx = np.zeros(j.shape[:-1], dtype=np.int64)
    for i in range(part.m):
        idx = idx * part.M + j[..., i]
    return int(idx) if idx.ndim == 0 else idx


def cell_spread_probe(positions: np.ndarray, part: CellPartition, r_values: Sequence[float],
                      delta: float) -> List[Dict[str, float]]:
    """Vertex mass held by the r*n most occupied cells, for each r."""
    n = len(positions)
    counts = np.sort(np.bincount(cell_index(positions, part), minlength=part.cells))[::-1]
    cumulative = np.concatenate([[0], np.cumsum(counts)])
    threshold = delta * n / 2.0
    rows = []
    for r in r_values:
        k = min(int(math.floor(r * n)), part.cells)
        mass = int(cumulative[k])
        rows.append({"r": float(r), "cells": k, "mass": mass,
                     "threshold": threshold, "below": int(mass < threshold)})
    return rows


# ---------- PHASES ----------

@dataclass
class TwoRoundTrace:
    params: GirgParams
    expr: BdfExpr
    bound: SplitBound
    partition: CellPartition
    weights: np.ndarray
    positions: np.ndarray          # original coordinate order
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    g4: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    k4: np.ndarray
    f_prime: np.ndarray
    f: np.ndarray
    ordering: np.ndarray
    constants: Dict[str, float] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    @property
    def relabeled_positions(self) -> np.ndarray:
        return self.positions[:, [k - 1 for k in self.bound.permutation]]

    def growth_ok(self) -> bool:
        return len(self.k4) <= len(self.k3) + GROWTH_SLACK * self.constants["delta"] * self.n

    def phase_rows(self) -> List[Dict[str, int]]:
        # phases 2 and 3 only choose F, so G1 also closes phase 3
        return [
            {"phase": 1, "edges": len(self.g1), "giant_size": len(self.k1)},
            {"phase": 4, "edges": len(self.g2), "giant_size": len(self.k2)},
            {"phase": 5, "edges": len(self.g3), "giant_size": len(self.k3)},
            {"phase": 6, "edges": len(self.g4), "giant_size": len(self.k4)},
        ]

    def final_instance(self) -> GirgInstance:
        return GirgInstance(
            params=self.params,
            bdf=self.expr,
            weights=self.weights,
            positions=self.positions,
            edges=self.g4,
            metadata=dict(self.metadata),
        )


def _stack(parts: List[np.ndarray]) -> np.ndarray:
    parts = [p for p in parts if len(p)]
    return np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)


def _giant_of(n: int, edges: np.ndarray, anchor: int) -> np.ndarray:
    return components_from_edges(n, edges).component_of(anchor)


def run_phases(params: GirgParams, expr: BdfExpr, delta: float = 0.05, l: float = 1.0,
               workers: Optional[int] = None, block_pairs: Optional[int] = None) -> TwoRoundTrace:
    if not 0.0 < delta < 1.0:
        raise PreconditionError(f"delta must lie in (0, 1), got {delta}")
    t0 = time.time()
    bound = derive_split_bound(expr, params)
    n = params.n
    d = leaf_count(expr)
    weights = power_law_weights(n, params.beta)
    positions = sample_positions(n, d, params.seed)
    rel = positions[:, [k - 1 for k in bound.permutation]]
    key1 = rng.stream_key(params.seed, rng.Y1)
    key2 = rng.stream_key(params.seed, rng.Y2)

    def block(u: np.ndarray, v: np.ndarray):
        diff = rel[v] - rel[u]
        wp = weights[u] * weights[v]
        y1 = rng.split_from_uniform(rng.pair_uniforms(key1, u, v))
        y2 = rng.split_from_uniform(rng.pair_uniforms(key2, u, v))
        lb1 = y1 < lb_probability(bound.c_prime, bound.alpha, n, wp, max_norm(diff, bound.s1), bound.depth)
        lb2 = y2 < lb_probability(bound.c_prime, bound.alpha, n, wp, max_norm(diff, bound.s2), bound.depth)
        eic = np.minimum(y1, y2) < edge_probability(params, bound.expr, weights[u], weights[v], diff)
        bad = int(np.count_nonzero((lb1 | lb2) & ~eic))
        return (np.stack([u[lb1], v[lb1]], axis=1), np.stack([u[eic], v[eic]], axis=1),
                int(np.count_nonzero(lb2)), bad)

    results = map_pair_blocks(block, n, workers, block_pairs)
    g1 = canonical_edges(_stack([r[0] for r in results]))
    eic_edges = canonical_edges(_stack([r[1] for r in results]))
    lb2_count = sum(r[2] for r in results)
    violations = sum(r[3] for r in results)
    if violations:
        raise InvariantBreach(f"{violations} pairs pass LB1/LB2 but fail EIC")

    # Phase 1: giant of the S1-only graph
    if len(g1) == 0:
        raise EmptyGiantError(f"empty giant: phase-1 graph has no edges at n={n}, increase n or c")
    comps: ComponentDecomposition = components_from_edges(n, g1)
    k1 = comps.largest()
    s_max = len(k1) / n

    # Phase 2: F' among the light vertices
    k1_weights = np.sort(weights[k1])
    b_prime = float(np.nextafter(k1_weights[math.ceil(len(k1) / 2) - 1], np.inf))
    f_rate = F_SAFETY * (s_max / 12.0) * min(delta, s_max)
    inclusion = min(1.0, 4.0 * f_rate / s_max)
    draws = rng.generator(params.seed, rng.F_PRIME).random(n)
    f_prime = np.flatnonzero((weights < b_prime) & (draws < inclusion))

    # Phase 3
    in_k1 = np.zeros(n, dtype=bool)
    in_k1[k1] = True
    f = f_prime[in_k1[f_prime]]
    in_f = np.zeros(n, dtype=bool)
    in_f[f] = True

    # Phases 4-6: outside K1, then K1 \ F, then F
    ordering = np.concatenate([
        np.flatnonzero(~in_k1),
        np.flatnonzero(in_k1 & ~in_f),
        np.flatnonzero(in_f),
    ])
    step = np.empty(n, dtype=np.int64)
    step[ordering] = np.arange(n)
    phase_of_vertex = np.where(step < n - len(k1), 4, np.where(step < n - len(f), 5, 6))
    if len(eic_edges):
        later = np.maximum(step[eic_edges[:, 0]], step[eic_edges[:, 1]])
        edge_phase = phase_of_vertex[ordering[later]]
    else:
        edge_phase = np.zeros(0, dtype=np.int64)

    g2 = canonical_edges(_stack([g1, eic_edges[edge_phase == 4]]))
    g3 = canonical_edges(_stack([g2, eic_edges[edge_phase == 5]]))
    g4 = canonical_edges(_stack([g3, eic_edges[edge_phase == 6]]))

    anchor = int(k1[0])
    k2 = _giant_of(n, g2, anchor)
    k3 = _giant_of(n, g3, anchor)
    k4 = _giant_of(n, g4, anchor)

    latency_ms = int((time.time() - t0) * 1000)
    trace = TwoRoundTrace(
        params=params,
        expr=expr,
        bound=bound,
        partition=cell_partition(n, bound.m, l),
        weights=weights,
        positions=positions,
        g1=g1, g2=g2, g3=g3, g4=g4,
        k1=k1, k2=k2, k3=k3, k4=k4,
        f_prime=f_prime,
        f=f,
        ordering=ordering,
        constants={
            "delta": delta,
            "l": l,
            "s_max": s_max,
            "f_rate": f_rate,
            "b_prime": b_prime,
            "inclusion_prob": inclusion,
            "c_prime": bound.c_prime,
            "ratio_constant": bound.ratio_constant,
        },
        counts={
            "lb1": len(g1),
            "lb2": lb2_count,
            "eic": len(eic_edges),
            "violations": violations,
        },
        metadata={"latency_ms": latency_ms},
    )
    logger.info("two-round n=%d |K1|=%d |K3|=%d |K4|=%d edges=%d in %d ms",
                n, len(k1), len(k3), len(k4), len(g4), latency_ms)
    if not trace.growth_ok():
        logger.warning("giant grew by %d > 3*delta*n in the last phase", len(k4) - len(k3))
    return trace


# ---------- STEP PROBE ----------

def step_connection_frequency(trace: TwoRoundTrace, delta: float, steps: int,
                              seed: int = 0) -> Dict[str, float]:
    """How often step k links u_k by an LB2 edge into a random A of size delta*n/2 from V_k."""
    n = trace.n
    a_size = math.ceil(round(delta * n / 2.0, 9))
    if a_size >= n or steps < 1:
        raise PreconditionError(f"no step k > {a_size} exists for n={n}")
    bound = trace.bound
    rel = trace.relabeled_positions
    key2 = rng.stream_key(trace.params.seed, rng.Y2)
    gen = rng.generator(seed, rng.PROBE)

    hits = 0
    for k in gen.integers(a_size, n, size=steps):
        prior = trace.ordering[:k]
        a = gen.choice(prior, size=a_size, replace=False)
        u = int(trace.ordering[k])
        y2 = rng.split_from_uniform(rng.pair_uniforms(key2, np.full(a.size, u), a))
        p = lb_probability(bound.c_prime, bound.alpha, n, trace.weights[u] * trace.weights[a],
                           max_norm(rel[a] - rel[u], bound.s2), bound.depth)
        hits += int(np.any(y2 < p))
    return {"frequency": hits / steps, "steps": steps, "set_size": a_size}
