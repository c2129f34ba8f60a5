"""Boolean Distance Functions over the d-torus.

A BDF is a binary tree whose leaves are single-coordinate torus distances and
whose inner nodes take the max or the min of their two subtrees. Everything in
here is a pure function of immutable inputs.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

import numpy as np

from app.errors import BdfValidationError, InvariantBreach, PreconditionError

logger = logging.getLogger(__name__)


# ---------- TYPES ----------

@dataclass(frozen=True)
class Leaf:
    coord: int


@dataclass(frozen=True)
class Max:
    left: "BdfExpr"
    right: "BdfExpr"


@dataclass(frozen=True)
class Min:
    left: "BdfExpr"
    right: "BdfExpr"


BdfExpr = Union[Leaf, Max, Min]

SINGLE_MAX = "single-max"
MIN_OF_MAXES = "min-of-maxes"


@dataclass(frozen=True)
class BoundWitness:
    s1: FrozenSet[int]
    s2: FrozenSet[int]
    kind: str

    @property
    def depth(self) -> int:
        if self.kind == SINGLE_MAX:
            return len(self.s1)
        return min(len(self.s1), len(self.s2))


# ---------- STRUCTURE ----------

def _fold(expr: BdfExpr, on_leaf: Callable, on_node: Callable,
          is_leaf: Callable = lambda e: isinstance(e, Leaf)):
    """Post-order fold over the tree without recursion."""
    stack = [(expr, False)]
    values: list = []
    while stack:
        node, ready = stack.pop()
        if is_leaf(node):
            values.append(on_leaf(node))
        elif ready:
            right = values.pop()
            left = values.pop()
            values.append(on_node(node, left, right))
        else:
            stack.append((node, True))
            stack.append((node.right, False))
            stack.append((node.left, False))
    return values[0]


def _chain_operands(expr: BdfExpr, kind) -> List[BdfExpr]:
    """Operands of the maximal same-kind chain rooted at expr, left to right."""
    out: List[BdfExpr] = []
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, kind):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


def coordinates(expr: BdfExpr) -> List[int]:
    return [leaf.coord for leaf in _chain_operands(expr, (Max, Min))]


def leaf_count(expr: BdfExpr) -> int:
    return len(coordinates(expr))


def validate_expr(expr: BdfExpr) -> BdfExpr:
    """Check that the leaves cover exactly {1..d}, each coordinate once."""
    coords = coordinates(expr)
    d = len(coords)
    seen = set()
    for k in coords:
        if k < 1 or k > d:
            raise BdfValidationError(f"coordinate x{k} outside 1..{d}")
        if k in seen:
            raise BdfValidationError(f"duplicate coordinate x{k}")
        seen.add(k)
    return expr


def relabel(expr: BdfExpr, mapping: Dict[int, int]) -> BdfExpr:
    return _fold(expr, lambda e: Leaf(mapping[e.coord]), lambda e, left, right: type(e)(left, right))


def random_expr(d: int, rng: np.random.Generator) -> BdfExpr:
    """Uniformly random split shape over a random permutation of 1..d."""
    if d < 1:
        raise PreconditionError("dimension must be >= 1")
    labels = [int(k) for k in rng.permutation(np.arange(1, d + 1))]

    def build(ks: List[int]) -> BdfExpr:
        if len(ks) == 1:
            return Leaf(ks[0])
        cut = int(rng.integers(1, len(ks)))
        node = Max if rng.random() < 0.5 else Min
        return node(build(ks[:cut]), build(ks[cut:]))

    return build(labels)


# ---------- EVALUATION ----------

def torus_distance_1d(a, b):
    diff = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    out = np.minimum(diff, 1.0 - diff)
    return float(out) if out.ndim == 0 else out


def torus_abs(delta) -> np.ndarray:
    """|x|_T for a componentwise difference, taken mod 1."""
    t = np.mod(np.asarray(delta, dtype=float), 1.0)
    return np.minimum(t, 1.0 - t)


def _eval_dist(expr: BdfExpr, dist: np.ndarray) -> np.ndarray:
    return _fold(
        expr,
        lambda e: dist[..., e.coord - 1],
        lambda e, left, right: np.maximum(left, right) if isinstance(e, Max) else np.minimum(left, right),
    )


def evaluate(expr: BdfExpr, delta):
    """kappa(delta); delta has the BDF dimension on its last axis."""
    arr = np.asarray(delta, dtype=float)
    d = leaf_count(expr)
    if arr.ndim == 0 or arr.shape[-1] != d:
        raise PreconditionError(f"point dimension {arr.shape[-1:] or 0} does not match BDF dimension {d}")
    out = _eval_dist(expr, torus_abs(arr))
    return float(out) if np.ndim(out) == 0 else out


def max_norm(delta, coords: Iterable[int]):
    arr = torus_abs(delta)
    idx = sorted(coords)
    if not idx:
        out = np.zeros(arr.shape[:-1])
    else:
        out = arr[..., [k - 1 for k in idx]].max(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


# ---------- DEPTH / SCOM ----------

def depth(expr: BdfExpr) -> int:
    return _fold(
        expr,
        lambda e: 1,
        lambda e, left, right: left + right if isinstance(e, Max) else min(left, right),
    )


def is_scom(expr: BdfExpr) -> Tuple[bool, Optional[int]]:
    """Single-coordinate outer-max test; returns the singled-out coordinate."""
    if isinstance(expr, Leaf):
        return True, expr.coord
    if isinstance(expr, Min):
        return False, None
    leaves = [op.coord for op in _chain_operands(expr, Max) if isinstance(op, Leaf)]
    if not leaves:
        return False, None
    return True, min(leaves)


# ---------- VOLUME ----------

def _check_radius(r) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise PreconditionError(f"radius must be >= 0, got {r}")
    return arr


def _volume(expr: BdfExpr, r: np.ndarray) -> np.ndarray:
    leaf = np.minimum(2.0 * r, 1.0)

    def node(e: BdfExpr, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
        if isinstance(e, Max):
            return v1 * v2
        # 1 - (1 - v1)(1 - v2), expanded to stay exact for tiny radii
        return v1 + v2 - v1 * v2

    return _fold(expr, lambda e: leaf, node)


def volume(expr: BdfExpr, r):
    """Exact measure of {x : kappa(x) <= r}."""
    out = _volume(expr, _check_radius(r))
    return float(out) if np.ndim(out) == 0 else out


def leading_term(expr: BdfExpr) -> Tuple[float, int]:
    """(c, D) such that volume(expr, r) = c * r**D + o(r**D) as r -> 0."""
    def node(e: BdfExpr, t1: Tuple[float, int], t2: Tuple[float, int]) -> Tuple[float, int]:
        (c1, e1), (c2, e2) = t1, t2
        if isinstance(e, Max):
            return c1 * c2, e1 + e2
        if e1 == e2:
            return c1 + c2, e1
        return t1 if e1 < e2 else t2

    return _fold(expr, lambda e: (2.0, 1), node)


def monte_carlo_volume(expr: BdfExpr, r: float, samples: int, rng: np.random.Generator,
                       chunk: int = 1 << 18) -> Tuple[float, float]:
    d = leaf_count(expr)
    hits = 0
    left = samples
    while left > 0:
        size = min(chunk, left)
        pts = rng.random((size, d))
        hits += int(np.count_nonzero(evaluate(expr, pts) <= r))
        left -= size
    p = hits / samples
    return p, float(np.sqrt(p * (1.0 - p) / samples))


def sample_in_ball(expr: BdfExpr, eps: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points of the kappa-ball of radius eps, as offsets in [-1/2, 1/2)."""
    if not 0.0 < eps <= 0.5:
        raise PreconditionError(f"ball radius must lie in (0, 1/2], got {eps}")
    d = leaf_count(expr)
    out = rng.uniform(-0.5, 0.5, (size, d))
    _fill_ball(expr, eps, out, np.arange(size), rng)
    return out


def _fill_ball(expr: BdfExpr, eps: float, out: np.ndarray, rows: np.ndarray,
               rng: np.random.Generator) -> None:
    if rows.size == 0:
        return
    if isinstance(expr, Leaf):
        out[rows, expr.coord - 1] = rng.uniform(-eps, eps, rows.size)
        return
    if isinstance(expr, Max):
        for op in _chain_operands(expr, Max):
            _fill_ball(op, eps, out, rows, rng)
        return

    # Min chain: uniform on the union of the operand cylinders; a point inside m of them is kept w.p. 1/m
    ops = _chain_operands(expr, Min)
    vols = np.array([float(_volume(op, np.asarray(eps, dtype=float))) for op in ops])
    cols = [k - 1 for k in coordinates(expr)]
    pending = rows
    while pending.size:
        arm = rng.choice(len(ops), size=pending.size, p=vols / vols.sum())
        out[np.ix_(pending, cols)] = rng.uniform(-0.5, 0.5, (pending.size, len(cols)))
        for i in np.unique(arm):
            _fill_ball(ops[i], eps, out, pending[arm == i], rng)

        dist = torus_abs(out[pending])
        covered = np.zeros(pending.size, dtype=np.int64)
        for op in ops:
            covered += _eval_dist(op, dist) <= eps
        keep = rng.random(pending.size) * covered < 1.0
        pending = pending[~keep]


# ---------- BOUND CONSTRUCTIONS ----------

def bound_subset(expr: BdfExpr) -> FrozenSet[int]:
    """S with |S| = depth(expr) and kappa(x) <= max_{i in S} |x_i|."""
    def node(e: BdfExpr, a: Tuple[int, FrozenSet[int]], b: Tuple[int, FrozenSet[int]]):
        if isinstance(e, Max):
            return a[0] + b[0], a[1] | b[1]
        return a if a[0] <= b[0] else b

    return _fold(expr, lambda e: (1, frozenset({e.coord})), node)[1]


def _comprising_by_depth(expr: Min) -> Tuple[BdfExpr, BdfExpr]:
    if depth(expr.left) <= depth(expr.right):
        return expr.left, expr.right
    return expr.right, expr.left


def _as_outer_min(expr: BdfExpr) -> Min:
    def leaf(e: BdfExpr) -> Min:
        if isinstance(e, Min):
            return e
        raise PreconditionError("SCOM subtree cannot be bounded by an outer-min BDF")

    def node(e: Max, left: Min, right: Min) -> Min:
        a11, a12 = _comprising_by_depth(left)
        a21, a22 = _comprising_by_depth(right)
        return Min(Max(a11, a21), Max(a12, a22))

    return _fold(expr, leaf, node, is_leaf=lambda e: not isinstance(e, Max))


def outer_min_upper_bound(expr: BdfExpr) -> BdfExpr:
    """Outer-min kappa' of equal depth with kappa <= kappa' pointwise."""
    if not isinstance(expr, Max):
        raise PreconditionError("outer_min_upper_bound needs an outer-max BDF")
    if is_scom(expr)[0]:
        raise PreconditionError("outer_min_upper_bound needs a non-SCOM BDF")
    return _as_outer_min(expr)


def single_max_bound(expr: BdfExpr) -> BoundWitness:
    return BoundWitness(s1=bound_subset(expr), s2=frozenset(), kind=SINGLE_MAX)


def min_of_maxes_bound(expr: BdfExpr) -> BoundWitness:
    if is_scom(expr)[0]:
        raise PreconditionError("min_of_maxes_bound needs a non-SCOM BDF")
    outer = expr if isinstance(expr, Min) else outer_min_upper_bound(expr)
    return BoundWitness(
        s1=bound_subset(outer.left),
        s2=bound_subset(outer.right),
        kind=MIN_OF_MAXES,
    )


def witness_evaluate(witness: BoundWitness, delta):
    a = max_norm(delta, witness.s1)
    if witness.kind == SINGLE_MAX:
        return a
    return np.minimum(a, max_norm(delta, witness.s2))


def witness_volume(witness: BoundWitness, r):
    rr = _check_radius(r)
    v1 = np.minimum(2.0 * rr, 1.0) ** len(witness.s1)
    if witness.kind == SINGLE_MAX:
        out = v1
    else:
        v2 = np.minimum(2.0 * rr, 1.0) ** len(witness.s2)
        out = v1 + v2 - v1 * v2
    return float(out) if np.ndim(out) == 0 else out


def witness_leading_term(witness: BoundWitness) -> Tuple[float, int]:
    e1 = len(witness.s1)
    if witness.kind == SINGLE_MAX:
        return 2.0 ** e1, e1
    e2 = len(witness.s2)
    if e1 == e2:
        return 2.0 ** e1 + 2.0 ** e2, e1
    e = min(e1, e2)
    return 2.0 ** e, e


RATIO_GRID = 2.0 ** -np.arange(1, 41)
RATIO_SAFETY = 1.1


def volume_ratio_constant(expr: BdfExpr, witness: BoundWitness) -> float:
    """K >= sup_r V_kappa(r) / V_kappa'(r) over (0, 1/2]."""
    ratios = np.asarray(volume(expr, RATIO_GRID)) / np.asarray(witness_volume(witness, RATIO_GRID))
    c, e = leading_term(expr)
    cw, ew = witness_leading_term(witness)
    if e != ew:
        raise InvariantBreach(f"volume exponents differ: {e} vs {ew}")
    k = RATIO_SAFETY * max(float(ratios.max()), c / cw)
    logger.debug("volume ratio constant %.6g (grid max %.6g, leading %.6g)", k, ratios.max(), c / cw)
    return k
