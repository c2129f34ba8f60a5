import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from app import rng
from app.bdf_core import BdfExpr, depth, evaluate, leaf_count, volume
from app.bdf_parser import format as format_bdf
from app.config import GirgParams, default_block_pairs, default_workers
from app.errors import ConfigError, PreconditionError

logger = logging.getLogger(__name__)


@dataclass
class GirgInstance:
    params: GirgParams
    bdf: BdfExpr
    weights: np.ndarray          # (n,)
    positions: np.ndarray        # (n, d)
    edges: np.ndarray            # (m, 2), u < v, lexicographically sorted
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    @property
    def d(self) -> int:
        return int(self.positions.shape[1])

    @property
    def bdf_source(self) -> str:
        return format_bdf(self.bdf)

    def edge_set(self) -> Set[Tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def adjacency(self) -> List[Set[int]]:
        adj: List[Set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[int(u)].add(int(v))
            adj[int(v)].add(int(u))
        return adj


def canonical_edges(edges) -> np.ndarray:
    """Orient u < v, drop self-loops and duplicates, sort."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    arr = np.sort(arr, axis=1)
    arr = arr[arr[:, 0] != arr[:, 1]]
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    return np.unique(arr, axis=0)


# ---------- WEIGHTS / POSITIONS ----------

def power_law_weights(n: int, beta: float) -> np.ndarray:
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not 2.0 < beta < 3.0:
        raise ConfigError(f"beta must lie in (2, 3), got {beta}")
    v = np.arange(1, n + 1, dtype=float)
    return (n / v) ** (1.0 / (beta - 1.0))


def sample_positions(n: int, d: int, seed: int) -> np.ndarray:
    if n < 1 or d < 1:
        raise ConfigError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    return rng.generator(seed, rng.POSITIONS).random((n, d))


# ---------- CONNECTION PROBABILITY ----------

def connection_probability(c: float, alpha: float, n: int, weight_product, vol):
    """c * min{w_u w_v / (n V), 1}^alpha, with V = 0 read as an infinite ratio."""
    wp = np.asarray(weight_product, dtype=float)
    v = np.asarray(vol, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(v > 0.0, wp / (n * np.where(v > 0.0, v, 1.0)), np.inf)
    out = c * np.minimum(ratio, 1.0) ** alpha
    return float(out) if out.ndim == 0 else out


def edge_probability(params: GirgParams, bdf: BdfExpr, w_u, w_v, delta):
    r = evaluate(bdf, delta)
    return connection_probability(params.c, params.alpha, params.n,
                                  np.asarray(w_u, dtype=float) * np.asarray(w_v, dtype=float),
                                  volume(bdf, r))


# ---------- PAIR BLOCKS ----------

def pair_blocks(n: int, block_pairs: Optional[int] = None) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """All pairs u < v in row blocks; each block is a pair of flat index arrays."""
    block_pairs = block_pairs or default_block_pairs()
    rows = max(1, block_pairs // max(n, 1))
    for a in range(0, max(n - 1, 0), rows):
        b = min(a + rows, n - 1)
        us, vs = np.meshgrid(np.arange(a, b), np.arange(a + 1, n), indexing="ij")
        keep = vs > us
        yield us[keep], vs[keep]


def map_pair_blocks(fn: Callable, n: int, workers: Optional[int] = None,
                    block_pairs: Optional[int] = None) -> list:
    """fn over every pair block; results come back in block order."""
    workers = workers or default_workers()
    blocks = pair_blocks(n, block_pairs)
    if workers == 1:
        return [fn(u, v) for u, v in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda uv: fn(*uv), blocks))


# ---------- SAMPLING ----------

def sample_girg(params: GirgParams, bdf: BdfExpr, workers: Optional[int] = None,
                block_pairs: Optional[int] = None) -> GirgInstance:
    t0 = time.time()
    n = params.n
    d = leaf_count(bdf)
    weights = power_law_weights(n, params.beta)
    positions = sample_positions(n, d, params.seed)
    key = rng.stream_key(params.seed, rng.EDGES)

    def block(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        p = edge_probability(params, bdf, weights[u], weights[v], positions[v] - positions[u])
        hit = rng.pair_uniforms(key, u, v) < p
        return np.stack([u[hit], v[hit]], axis=1)

    parts = map_pair_blocks(block, n, workers, block_pairs)
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    edges = canonical_edges(edges)

    latency_ms = int((time.time() - t0) * 1000)
    logger.info("sampled GIRG n=%d d=%d edges=%d in %d ms", n, d, len(edges), latency_ms)
    return GirgInstance(
        params=params,
        bdf=bdf,
        weights=weights,
        positions=positions,
        edges=edges,
        metadata={"latency_ms": latency_ms},
    )


def sample_edge_frequency(params: GirgParams, bdf: BdfExpr, u: int, v: int,
                          positions: np.ndarray, weights: np.ndarray,
                          seeds: Sequence[int]) -> Tuple[float, float]:
    """Empirical connection frequency of one fixed pair over many edge seeds."""
    if u == v:
        raise PreconditionError("pair must consist of two distinct vertices")
    p = edge_probability(params, bdf, weights[u], weights[v], positions[v] - positions[u])
    hits = 0
    for s in seeds:
        hits += int(rng.pair_uniforms(rng.stream_key(s, rng.EDGES), u, v) < p)
    return hits / len(seeds), float(p)


# ---------- SEPARATOR SCALING PREDICTION ----------

def gamma_uv(w_u, w_v, n: int, d_kappa: int):
    out = np.minimum((np.asarray(w_u, dtype=float) * np.asarray(w_v, dtype=float) / n) ** (1.0 / d_kappa), 0.5)
    return float(out) if np.ndim(out) == 0 else out


def predicted_separator_exponent(beta: float, alpha: float, d_kappa: int, eta: float = 0.0) -> float:
    alpha_t = min(alpha, 1.0 + 1.0 / d_kappa)
    return max(3.0 - beta, 2.0 - alpha_t, 1.0 - 1.0 / d_kappa) + 2.0 * eta


def separator_gamma_sum(instance: GirgInstance) -> float:
    """sum over pairs of gamma_uv^(D * alpha~); the crossing-edge count is O(this * log n)."""
    d_kappa = depth(instance.bdf)
    alpha_t = min(instance.params.alpha, 1.0 + 1.0 / d_kappa)
    w = instance.weights
    total = 0.0
    for u, v in pair_blocks(instance.n):
        total += float(np.sum(gamma_uv(w[u], w[v], instance.n, d_kappa) ** (d_kappa * alpha_t)))
    return total
