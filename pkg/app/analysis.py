import logging
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from app.bdf_core import (
    BdfExpr,
    bound_subset,
    depth,
    evaluate,
    is_scom,
    sample_in_ball,
    volume,
)
from app.errors import PreconditionError
from app.girg_sampler import GirgInstance, separator_gamma_sum
from app import rng

logger = logging.getLogger(__name__)

TAIL_MIN_COUNT = 50
DEFAULT_OFFSETS = tuple(i / 16 for i in range(8))


# ---------- COMPONENTS ----------

class DisjointSet:

    def __init__(self, n: int):
        self.sizes = np.ones(n, dtype=np.int64)
        self.parents = np.arange(n)
        self.nc = n

    def find(self, index: int) -> int:
        parents = self.parents
        while parents[index] != index:
            parents[index] = parents[parents[index]]
            index = parents[index]
        return int(index)

    def union(self, a: int, b: int) -> bool:
        a = self.find(a)
        b = self.find(b)
        if a == b:
            return False
        if self.sizes[a] < self.sizes[b]:
            a, b = b, a
        self.parents[b] = a
        self.sizes[a] += self.sizes[b]
        self.nc -= 1
        return True

    def roots(self) -> np.ndarray:
        a = self.parents
        b = a[a]
        while (a != b).any():
            a = b
            b = a[a]
        self.parents = a
        return a


@dataclass
class ComponentDecomposition:
    labels: np.ndarray     # smallest vertex id of each vertex's component
    sizes: List[int]       # descending

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def largest(self) -> np.ndarray:
        if self.labels.size == 0:
            return np.zeros(0, dtype=np.int64)
        ids, counts = np.unique(self.labels, return_counts=True)
        # ties go to the smaller label
        return self.members(int(ids[np.argmax(counts)]))

    def component_of(self, v: int) -> np.ndarray:
        return self.members(int(self.labels[v]))


def components_from_edges(n: int, edges: np.ndarray) -> ComponentDecomposition:
    dsu = DisjointSet(n)
    for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
        dsu.union(int(u), int(v))
    roots = dsu.roots()
    smallest = np.full(n, n, dtype=np.int64)
    np.minimum.at(smallest, roots, np.arange(n))
    labels = smallest[roots]
    sizes = sorted(np.bincount(labels, minlength=n)[np.unique(labels)].tolist(), reverse=True)
    return ComponentDecomposition(labels=labels, sizes=[int(s) for s in sizes])


def connected_components(instance: GirgInstance) -> ComponentDecomposition:
    return components_from_edges(instance.n, instance.edges)


# ---------- DEGREES ----------

@dataclass
class DegreeTail:
    rows: List[Tuple[float, int]]
    slope: Optional[float]


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    keep = (x > 0) & (y > 0)
    if np.count_nonzero(keep) < 2 or np.unique(x[keep]).size < 2:
        return None
    return float(stats.linregress(np.log(x[keep]), np.log(y[keep])).slope)


def degree_tail_table(instance: GirgInstance, thresholds: Optional[Sequence[float]] = None,
                      min_count: int = TAIL_MIN_COUNT) -> DegreeTail:
    deg = instance.degrees()
    if thresholds is None:
        top = max(int(deg.max()) if deg.size else 1, 1)
        thresholds = [2.0 ** k for k in range(int(np.floor(np.log2(top))) + 1)]
    rows = [(float(w), int(np.count_nonzero(deg >= w))) for w in thresholds]

    # mid range: enough vertices to be stable, and past the saturated head of the tail
    mid = [(w, c) for w, c in rows if min_count <= c <= instance.n / 10]
    slope = fit_loglog_slope([w for w, _ in mid], [c for _, c in mid])
    return DegreeTail(rows=rows, slope=slope)


# ---------- CLUSTERING ----------

def local_clustering(instance: GirgInstance) -> np.ndarray:
    adj = instance.adjacency()
    tri = np.zeros(instance.n, dtype=np.int64)
    for u, v in instance.edges:
        common = len(adj[int(u)] & adj[int(v)])
        tri[u] += common
        tri[v] += common
    tri //= 2
    deg = instance.degrees()
    pairs = deg * (deg - 1) / 2.0
    out = np.zeros(instance.n)
    ok = deg >= 2
    out[ok] = tri[ok] / pairs[ok]
    return out


def clustering_coefficient(instance: GirgInstance) -> float:
    if instance.n == 0:
        return 0.0
    return float(local_clustering(instance).mean())


# ---------- CUTS ----------

@dataclass
class CutReport:
    side_sizes: Tuple[int, int]
    cross_edges: int
    family: str
    coordinate: int
    offset: float = 0.0

    def normalized(self, n: int) -> float:
        return self.cross_edges / n


def _upper_side(instance: GirgInstance, k: int, offset: float) -> np.ndarray:
    if not 1 <= k <= instance.d:
        raise PreconditionError(f"coordinate {k} outside 1..{instance.d}")
    return np.mod(instance.positions[:, k - 1] + offset, 1.0) >= 0.5


def _cross_mask(instance: GirgInstance, side: np.ndarray) -> np.ndarray:
    if len(instance.edges) == 0:
        return np.zeros(0, dtype=bool)
    return side[instance.edges[:, 0]] != side[instance.edges[:, 1]]


def hyperplane_separator(instance: GirgInstance, k: int, offset: float = 0.0) -> CutReport:
    """Split at x_k = 0 and x_k = 1/2 (after shifting x_k by offset)."""
    side = _upper_side(instance, k, offset)
    upper = int(np.count_nonzero(side))
    return CutReport(
        side_sizes=(instance.n - upper, upper),
        cross_edges=int(np.count_nonzero(_cross_mask(instance, side))),
        family="hyperplane" if offset == 0.0 else "shifted-hyperplane",
        coordinate=k,
        offset=offset,
    )


def separator_components(instance: GirgInstance, report: CutReport, delta: float) -> Dict[str, object]:
    """Two largest components per side once the crossing edges are gone."""
    side = _upper_side(instance, report.coordinate, report.offset)
    kept = instance.edges[~_cross_mask(instance, side)]
    comps = components_from_edges(instance.n, kept)
    out: Dict[str, object] = {}
    for name, mask in (("lower", ~side), ("upper", side)):
        labels = comps.labels[mask]
        sizes = sorted(np.unique(labels, return_counts=True)[1].tolist(), reverse=True) if labels.size else []
        out[name] = (sizes + [0, 0])[:2]
    out["small_side_flag"] = min(out["lower"][0], out["upper"][0]) < delta * instance.n
    return out


def is_delta_eta_cut(report: CutReport, n: int, delta: float, eta: float) -> bool:
    return min(report.side_sizes) >= delta * n and report.cross_edges <= eta * n


def probe_cuts(instance: GirgInstance, offsets: Sequence[float] = DEFAULT_OFFSETS) -> List[CutReport]:
    reports = []
    for k in range(1, instance.d + 1):
        for t in offsets:
            rep = hyperplane_separator(instance, k, t)
            rep.family = "coordinate-hyperplane-pair"
            reports.append(rep)
    return reports


def sparse_cut_probe(instance: GirgInstance, offsets: Sequence[float] = DEFAULT_OFFSETS,
                     delta: float = 0.1) -> Optional[CutReport]:
    """Sparsest probed cut with both sides of size at least delta * n."""
    balanced = [r for r in probe_cuts(instance, offsets) if min(r.side_sizes) >= delta * instance.n]
    if not balanced:
        logger.warning("no probed cut has both sides >= %.3f n", delta)
        return None
    return min(balanced, key=lambda r: (r.cross_edges, r.coordinate, r.offset))


# ---------- STOCHASTIC TRIANGLE INEQUALITY ----------

def stochastic_triangle_check(expr: BdfExpr, epsilons: Sequence[float], samples: int,
                              seed: int = 0, scale: float = 2.0) -> List[Dict[str, float]]:
    for eps in epsilons:
        if not 0.0 < eps <= 0.25:
            raise PreconditionError(f"epsilon must lie in (0, 1/4], got {eps}")
    gen = rng.generator(seed, rng.PROBE)
    d_kappa = depth(expr)
    rows = []
    for eps in epsilons:
        x1 = sample_in_ball(expr, eps, samples, gen)
        x2 = sample_in_ball(expr, eps, samples, gen)
        p = float(np.mean(evaluate(expr, x1 - x2) <= scale * eps))
        v_eps = volume(expr, eps)
        box = min(2.0 * eps, 1.0) ** d_kappa / v_eps
        rows.append({
            "epsilon": float(eps),
            "pr_estimate": p,
            "sigma": float(np.sqrt(p * (1.0 - p) / samples)),
            "volume_ratio": v_eps / volume(expr, scale * eps),
            "box_fraction": box,
            "pr_lower_bound": box * box,
        })
    return rows


# ---------- FULL REPORT ----------

def analyze(instance: GirgInstance, delta: float = 0.1,
            offsets: Sequence[float] = DEFAULT_OFFSETS) -> Dict[str, object]:
    t0 = time.time()
    comps = connected_components(instance)
    tail = degree_tail_table(instance)
    deg = instance.degrees()
    metrics: Dict[str, float] = {
        "n": instance.n,
        "edges": len(instance.edges),
        "mean_degree": float(deg.mean()) if deg.size else 0.0,
        "largest_component": comps.sizes[0] if comps.sizes else 0,
        "second_component": comps.sizes[1] if len(comps.sizes) > 1 else 0,
        "clustering": clustering_coefficient(instance),
        "degree_tail_slope": tail.slope if tail.slope is not None else float("nan"),
        "depth": depth(instance.bdf),
        "bound_subset_size": len(bound_subset(instance.bdf)),
    }

    scom, k = is_scom(instance.bdf)
    metrics["scom"] = int(scom)
    if scom:
        sep = hyperplane_separator(instance, k)
        parts = separator_components(instance, sep, delta)
        metrics.update({
            "separator_coordinate": k,
            "separator_cross_edges": sep.cross_edges,
            "separator_lower_size": sep.side_sizes[0],
            "separator_upper_size": sep.side_sizes[1],
            "separator_lower_largest": parts["lower"][0],
            "separator_upper_largest": parts["upper"][0],
            "separator_small_side_flag": int(parts["small_side_flag"]),
            "separator_gamma_sum": separator_gamma_sum(instance),
        })

    probe = sparse_cut_probe(instance, offsets, delta)
    if probe is not None:
        metrics.update({
            "probe_min_cross_edges": probe.cross_edges,
            "probe_min_normalized": probe.normalized(instance.n),
            "probe_coordinate": probe.coordinate,
            "probe_offset": probe.offset,
        })

    latency_ms = int((time.time() - t0) * 1000)
    logger.info("analyzed n=%d edges=%d in %d ms", instance.n, len(instance.edges), latency_ms)
    return {
        "metrics": metrics,
        "degree_tail": tail.rows,
        "metadata": {
            "bdf": instance.bdf_source,
            "seed": instance.params.seed,
            "latency_ms": latency_ms,
        },
    }
