import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple

import numpy as np

from app import rng
from app.analysis import analyze, fit_loglog_slope, stochastic_triangle_check
from app.bdf_core import depth, is_scom, leading_term, monte_carlo_volume, volume
from app.bdf_parser import parse
from app.config import ExperimentConfig
from app.errors import PreconditionError, StorageError
from app.girg_sampler import predicted_separator_exponent, sample_girg
from app.storage import (
    load_instance,
    write_instance,
    write_metric_rows,
    write_resolved_config,
    write_rows,
)
from app.storage.instance_files import instance_paths
from app.two_round import cell_spread_probe, run_phases, step_connection_frequency

logger = logging.getLogger(__name__)

ASYMPTOTIC_RADII = 2.0 ** -np.arange(30, 41)


def _out(cfg: ExperimentConfig, name: str) -> Path:
    return Path(cfg.out_dir) / name


def instance_prefix(cfg: ExperimentConfig, n: int, seed: int) -> str:
    return str(_out(cfg, f"girg_n{n}_s{seed}"))


def _claim(paths: List[Path]) -> None:
    """Outputs are append-only: fail before any work if a planned file exists."""
    taken = [str(p) for p in paths if p.exists()]
    if taken:
        more = f" (+{len(taken) - 1} more)" if len(taken) > 1 else ""
        raise StorageError(f"refusing to overwrite existing output {taken[0]}{more}")


# ---------- GENERATE ----------

def run_generate(cfg: ExperimentConfig) -> Dict[str, Any]:
    t0 = time.time()
    bdf = parse(cfg.bdf)
    params = cfg.params()
    prefix = instance_prefix(cfg, params.n, params.seed)
    _claim([*instance_paths(prefix), Path(prefix + "_config.json")])
    instance = sample_girg(params, bdf, workers=cfg.workers)
    files = write_instance(instance, prefix)
    write_resolved_config(Path(prefix + "_config.json"), cfg)

    return {
        "files": [str(p) for p in files],
        "metadata": {
            "bdf": instance.bdf_source,
            "n": params.n,
            "edges": len(instance.edges),
            "latency_ms": int((time.time() - t0) * 1000),
        },
    }


# ---------- VOLUME CHECK ----------

def run_volume_check(cfg: ExperimentConfig) -> Dict[str, Any]:
    t0 = time.time()
    bdf = parse(cfg.bdf)
    _claim([_out(cfg, name) for name in (
        "volume_check.csv", "volume_check_summary.csv", "triangle_check.csv", "volume_check_config.json")])
    gen = rng.generator(cfg.seed, rng.PROBE)

    rows = []
    for r in cfg.radii:
        mc, sigma = monte_carlo_volume(bdf, r, cfg.samples, gen)
        rows.append((float(r), volume(bdf, r), mc, sigma))

    d_kappa = depth(bdf)
    coefficient, _ = leading_term(bdf)
    summary = {
        "depth": d_kappa,
        "leading_coefficient": coefficient,
        "slope": fit_loglog_slope([r[0] for r in rows], [r[1] for r in rows]),
        "asymptotic_slope": fit_loglog_slope(ASYMPTOTIC_RADII, volume(bdf, ASYMPTOTIC_RADII)),
        "max_deviation_sigma": max(
            (abs(e - m) / s for _, e, m, s in rows if s > 0), default=0.0),
    }

    triangle = stochastic_triangle_check(bdf, cfg.epsilons, cfg.samples, seed=cfg.seed)

    write_rows(_out(cfg, "volume_check.csv"), ("r", "exact", "mc_estimate", "sigma"), rows)
    write_metric_rows(_out(cfg, "volume_check_summary.csv"),
                      {k: v for k, v in summary.items() if v is not None})
    write_rows(_out(cfg, "triangle_check.csv"), list(triangle[0]) if triangle else ["epsilon"],
               (list(row.values()) for row in triangle))
    write_resolved_config(_out(cfg, "volume_check_config.json"), cfg)
    logger.info("volume check for %s: depth=%d asymptotic slope=%.9f",
                cfg.bdf, d_kappa, summary["asymptotic_slope"])
    return {"rows": rows, "summary": summary, "triangle": triangle,
            "metadata": {"latency_ms": int((time.time() - t0) * 1000)}}


# ---------- SCALING STUDY ----------

def _scaling_run(cfg: ExperimentConfig, n: int, seed: int) -> List[Tuple[int, int, str, float]]:
    bdf = parse(cfg.bdf)
    instance = sample_girg(cfg.params(n=n, seed=seed), bdf, workers=1)
    report = analyze(instance, delta=cfg.delta, offsets=cfg.offsets)
    return [(n, seed, name, value) for name, value in report["metrics"].items()]


def iter_scaling_study(cfg: ExperimentConfig) -> Iterator[Tuple[int, int, str, float]]:
    """Yields long-format rows (n, seed, metric, value) grid point by grid point."""
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for n in cfg.n_grid:
            for rows in pool.map(lambda s: _scaling_run(cfg, n, s), cfg.seeds):
                yield from rows


def _mean_by_n(rows, metric: str) -> Dict[int, float]:
    acc: Dict[int, List[float]] = {}
    for n, _, name, value in rows:
        if name == metric:
            acc.setdefault(n, []).append(float(value))
    return {n: float(np.mean(v)) for n, v in sorted(acc.items())}


def run_scaling_study(cfg: ExperimentConfig) -> Dict[str, Any]:
    t0 = time.time()
    bdf = parse(cfg.bdf)
    _claim([_out(cfg, name) for name in (
        "scaling_study.csv", "scaling_summary.csv", "scaling_study_config.json")])
    rows = list(iter_scaling_study(cfg))
    write_rows(_out(cfg, "scaling_study.csv"), ("n", "seed", "metric", "value"), rows)

    scom, _ = is_scom(bdf)
    summary: Dict[str, Any] = {"scom": int(scom), "depth": depth(bdf)}
    if scom:
        cross = _mean_by_n(rows, "separator_cross_edges")
        summary["separator_slope"] = fit_loglog_slope(list(cross), list(cross.values()))
        summary["predicted_exponent"] = predicted_separator_exponent(cfg.beta, cfg.alpha, depth(bdf))
        gamma = _mean_by_n(rows, "separator_gamma_sum")
        summary["gamma_sum_slope"] = fit_loglog_slope(list(gamma), list(gamma.values()))
    probe = _mean_by_n(rows, "probe_min_normalized")
    for n, value in probe.items():
        summary[f"probe_min_normalized_n{n}"] = value
    write_metric_rows(_out(cfg, "scaling_summary.csv"),
                      {k: v for k, v in summary.items() if v is not None})
    write_resolved_config(_out(cfg, "scaling_study_config.json"), cfg)

    return {"rows": rows, "summary": summary,
            "metadata": {"latency_ms": int((time.time() - t0) * 1000)}}


# ---------- TWO ROUND ----------

def run_two_round(cfg: ExperimentConfig) -> Dict[str, Any]:
    t0 = time.time()
    bdf = parse(cfg.bdf)
    scom, k = is_scom(bdf)
    if scom:
        raise PreconditionError(
            f"{cfg.bdf} is SCOM (coordinate x{k}): its giant has a sublinear hyperplane "
            "separator, so the two-round robustness experiment is undefined")
    _claim([_out(cfg, f"two_round_s{seed}_phases.csv") for seed in cfg.seeds]
           + [_out(cfg, "two_round_summary.csv"), _out(cfg, "two_round_config.json")])

    summaries = []
    for seed in cfg.seeds:
        trace = run_phases(cfg.params(seed=seed), bdf, delta=cfg.delta, l=cfg.l, workers=cfg.workers)
        spread = cell_spread_probe(trace.relabeled_positions, trace.partition,
                                   cfg.cell_fractions, cfg.delta)
        step = step_connection_frequency(trace, cfg.delta, cfg.steps, seed=seed)
        rows = trace.phase_rows()
        write_rows(_out(cfg, f"two_round_s{seed}_phases.csv"), ("phase", "edges", "giant_size"),
                   ([r["phase"], r["edges"], r["giant_size"]] for r in rows))
        summaries.append({
            "seed": seed,
            "k1": len(trace.k1),
            "k3": len(trace.k3),
            "k4": len(trace.k4),
            "f_prime": len(trace.f_prime),
            "f": len(trace.f),
            "growth_ok": int(trace.growth_ok()),
            "cells": trace.partition.cells,
            "cell_spread_max_mass": max(row["mass"] for row in spread),
            "cell_spread_threshold": spread[0]["threshold"],
            "cell_spread_ok": int(all(row["below"] for row in spread)),
            "step_frequency": step["frequency"],
            "step_set_size": step["set_size"],
            **trace.constants,
            **{f"count_{name}": v for name, v in trace.counts.items()},
        })

    write_rows(_out(cfg, "two_round_summary.csv"), ("seed", "metric", "value"),
               ((s["seed"], name, v) for s in summaries for name, v in s.items() if name != "seed"))
    write_resolved_config(_out(cfg, "two_round_config.json"), cfg)
    ok = sum(s["growth_ok"] for s in summaries)
    spread_ok = sum(s["cell_spread_ok"] for s in summaries)
    logger.info("two-round: growth indicator held on %d/%d seeds, cell spread on %d/%d",
                ok, len(summaries), spread_ok, len(summaries))
    return {"summaries": summaries,
            "metadata": {"latency_ms": int((time.time() - t0) * 1000)}}


# ---------- ANALYZE ----------

def run_analyze(cfg: ExperimentConfig) -> Dict[str, Any]:
    if not cfg.input_prefix:
        raise PreconditionError("analyze needs --input PREFIX of an existing instance")
    name = Path(cfg.input_prefix).name
    _claim([_out(cfg, f"{name}_report.csv"), _out(cfg, f"{name}_degree_tail.csv"),
            _out(cfg, f"{name}_analyze_config.json")])
    instance = load_instance(cfg.input_prefix)
    report = analyze(instance, delta=cfg.delta, offsets=cfg.offsets)
    write_metric_rows(_out(cfg, f"{name}_report.csv"), report["metrics"])
    write_rows(_out(cfg, f"{name}_degree_tail.csv"), ("w", "count"), report["degree_tail"])
    write_resolved_config(_out(cfg, f"{name}_analyze_config.json"), cfg)
    return report
