"""CSV/JSON persistence for sampled instances and experiment tables.

An instance lives in four files sharing one prefix:
    <prefix>_edges.csv       u,v      (0-based, u < v)
    <prefix>_positions.csv   v,x1..xd
    <prefix>_weights.csv     v,w
    <prefix>_params.json     params, seed and BDF source
Every file is written to a temp sibling first and moved into place.
"""
import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from app.bdf_parser import parse
from app.config import make_params
from app.errors import StorageError
from app.girg_sampler import GirgInstance, canonical_edges

logger = logging.getLogger(__name__)

EDGES_SUFFIX = "_edges.csv"
POSITIONS_SUFFIX = "_positions.csv"
WEIGHTS_SUFFIX = "_weights.csv"
SIDECAR_SUFFIX = "_params.json"


def _atomic_write(path: Path, write) -> Path:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with tmp.open("w", encoding="utf-8", newline="") as f:
            write(f)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except OSError as e:
        tmp.unlink(missing_ok=True)
        raise StorageError(f"Cannot write {path}: {e}")
    return path


def _fmt(value: Any) -> str:
    # repr keeps floats exact and rows byte-identical across runs
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    def write(f):
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])

    return _atomic_write(path, write)


def write_metric_rows(path: Path, metrics: Dict[str, Any]) -> Path:
    return write_rows(path, ("metric", "value"), metrics.items())


def write_json(path: Path, payload: Any) -> Path:
    def write(f):
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")

    return _atomic_write(path, write)


def write_resolved_config(path: Path, config: BaseModel) -> Path:
    return _atomic_write(path, lambda f: f.write(config.model_dump_json(indent=2) + "\n"))


def read_rows(path: Path, header: Sequence[str]) -> List[List[str]]:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            found = next(reader, None)
            if found is None or [h.strip() for h in found] != list(header):
                raise StorageError(f"{path}: expected header {','.join(header)}, found {found}")
            return [row for row in reader if row]
    except OSError as e:
        raise StorageError(f"Cannot read {path}: {e}")


# ---------- INSTANCES ----------

def instance_paths(prefix: str) -> Tuple[Path, Path, Path, Path]:
    return (
        Path(prefix + EDGES_SUFFIX),
        Path(prefix + POSITIONS_SUFFIX),
        Path(prefix + WEIGHTS_SUFFIX),
        Path(prefix + SIDECAR_SUFFIX),
    )


def write_instance(instance: GirgInstance, prefix: str) -> List[Path]:
    edges_p, pos_p, w_p, side_p = instance_paths(prefix)
    d = instance.d
    written = [
        write_rows(edges_p, ("u", "v"), instance.edges.tolist()),
        write_rows(pos_p, ["v"] + [f"x{k}" for k in range(1, d + 1)],
                   ([v] + list(row) for v, row in enumerate(instance.positions))),
        write_rows(w_p, ("v", "w"), enumerate(instance.weights)),
        write_json(side_p, {
            "params": instance.params.model_dump(),
            "seed": instance.params.seed,
            "bdf": instance.bdf_source,
            "d": d,
            "edges": int(len(instance.edges)),
        }),
    ]
    logger.info("wrote instance n=%d to %s_*", instance.n, prefix)
    return written


def load_instance(prefix: str) -> GirgInstance:
    edges_p, pos_p, w_p, side_p = instance_paths(prefix)
    try:
        with side_p.open("r", encoding="utf-8") as f:
            sidecar = json.load(f)
    except OSError as e:
        raise StorageError(f"Cannot read {side_p}: {e}")
    except json.JSONDecodeError as e:
        raise StorageError(f"{side_p} is not valid JSON: {e}")

    try:
        bdf = parse(sidecar["bdf"])
        params = make_params(**sidecar["params"])
        d = int(sidecar["d"])
    except (KeyError, TypeError) as e:
        raise StorageError(f"{side_p} is missing field {e}")

    try:
        weights = np.array([float(w) for _, w in read_rows(w_p, ("v", "w"))])
        positions = np.array(
            [[float(x) for x in row[1:]] for row in
             read_rows(pos_p, ["v"] + [f"x{k}" for k in range(1, d + 1)])],
            dtype=float,
        ).reshape(-1, d)
        edges = canonical_edges([[int(u), int(v)] for u, v in read_rows(edges_p, ("u", "v"))])
    except ValueError as e:
        raise StorageError(f"Malformed row in instance {prefix}: {e}")

    n = len(weights)
    if n != params.n or len(positions) != n:
        raise StorageError(f"instance {prefix}: sizes disagree (n={params.n}, "
                           f"weights={n}, positions={len(positions)})")
    if len(edges) and (edges.min() < 0 or edges.max() >= n):
        raise StorageError(f"instance {prefix}: edge endpoint outside 0..{n - 1}")
    return GirgInstance(params=params, bdf=bdf, weights=weights, positions=positions,
                        edges=edges, metadata={"source": prefix})
