"""Seeded random streams.

Every consumer asks for a stream by (seed, tag). Per-pair uniforms are a pure
function of (seed, tag, min(u,v), max(u,v)), so edge decisions do not depend on
the order in which pairs are visited or on how many workers visit them.
"""
import numpy as np

POSITIONS = 1
EDGES = 2
Y1 = 3
Y2 = 4
F_PRIME = 5
PROBE = 6

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / float(1 << 53)


def generator(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(tag)]))


def stream_key(seed: int, tag: int) -> np.uint64:
    state = np.random.SeedSequence([int(seed), int(tag)]).generate_state(1, dtype=np.uint64)
    return np.uint64(state[0])


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def pair_uniforms(key: np.uint64, u, v) -> np.ndarray:
    """Uniform [0, 1) per unordered pair, keyed by (key, min(u,v), max(u,v))."""
    u = np.asarray(u, dtype=np.uint64)
    v = np.asarray(v, dtype=np.uint64)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    with np.errstate(over="ignore"):
        z = _mix64(np.full(lo.shape, key, dtype=np.uint64) ^ (lo * _GOLDEN))
        z = _mix64(z ^ (hi + _GOLDEN))
        z = _mix64(z + _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


def split_from_uniform(u):
    """Inverse of F(c) = 1 - sqrt(1 - c)."""
    u = np.asarray(u, dtype=float)
    out = 1.0 - (1.0 - u) ** 2
    return float(out) if out.ndim == 0 else out
