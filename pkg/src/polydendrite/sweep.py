"""Batch runs over families of deformations with CSV output.

A grid file is JSON of one of these forms::

    {"family": "twisted", "values": [0.0005, 0.001]}
    {"family": "mismatched", "values": [1e-4, 1e-3]}
    {"family": "random", "scale": 1e-5, "count": 20}
    {"specs": ["spec1.json", "spec2.json"]}        # against the base system

Rows keep the grid order whatever the number of workers.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import fixtures

FIELDS = ["key", "family", "parameter", "delta", "delta_max", "within_delta_max",
          "matched", "spread", "verdict", "level", "error"]


@dataclass(frozen=True)
class Job:
    key: int
    family: str
    parameter: float
    seed: Optional[int] = None
    spec_path: Optional[str] = None
    base_path: Optional[str] = None


def jobs_from_grid(grid: dict, seed: int = 0, base_path: Optional[str] = None,
                   grid_dir: Optional[Path] = None) -> list:
    if "specs" in grid:
        root = grid_dir or Path(".")
        return [Job(k, "spec", float("nan"), None, str(root / p), base_path)
                for k, p in enumerate(grid["specs"])]
    family = grid.get("family")
    if family in ("twisted", "mismatched"):
        return [Job(k, family, float(v)) for k, v in enumerate(grid.get("values", []))]
    if family == "random":
        ss = np.random.SeedSequence(seed)
        children = ss.spawn(int(grid.get("count", 0)))
        scale = float(grid.get("scale", 1e-5))
        return [Job(k, family, scale, int(c.generate_state(1)[0])) for k, c in enumerate(children)]
    raise ValueError(f"unknown sweep grid {grid!r}")


def _build(job: Job):
    from .deformation import build_deformed_system
    from .io import load_spec, load_system
    if job.family == "twisted":
        return fixtures.twisted_vicsek(job.parameter)
    if job.family == "mismatched":
        return fixtures.mismatched_vicsek(job.parameter)
    if job.family == "random":
        return fixtures.random_vicsek_deformation(np.random.default_rng(job.seed), job.parameter)
    base = load_system(job.base_path)
    spec = load_spec(job.spec_path)
    return base, spec, build_deformed_system(base, spec)


def run_job(job: Job, depth: int = 4) -> dict:
    from .cyclic import check_parameter_matching
    from .deformation import certify_dendrite, delta_max, normalized_delta
    row = {"key": job.key, "family": job.family, "parameter": job.parameter}
    try:
        base, spec, deformed = _build(job)
        dm = delta_max(base).delta_max
        d = normalized_delta(base, spec)
        m = check_parameter_matching(deformed)
        v = certify_dendrite(base, spec, deformed, depth)
        row.update(delta=d, delta_max=dm, within_delta_max=d < dm, matched=m.matched,
                   spread=m.spread, verdict=v.kind,
                   level=getattr(v, "depth", None) or getattr(v, "level", ""), error="")
    except Exception as exc:  # noqa: BLE001 - rows record their own failures
        row.update(verdict="Errored", error=f"{type(exc).__name__}: {exc}")
    return row


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def run_sweep(jobs: list, depth: int = 4, workers: int = 1) -> list:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(run_job, jobs, [depth] * len(jobs)))
    return [run_job(j, depth) for j in jobs]


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\r\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k)) for k in FIELDS})
    return buf.getvalue()


def summarize(rows: list) -> dict:
    out = {"rows": len(rows), "errored": sum(r["verdict"] == "Errored" for r in rows)}
    for kind in ("CertifiedDendrite", "Inconclusive", "RefutedTree"):
        out[kind] = sum(r["verdict"] == kind for r in rows)
    matched = [r for r in rows if r.get("matched") is True]
    unmatched = [r for r in rows if r.get("matched") is False]
    out["matched_certified"] = sum(r["verdict"] == "CertifiedDendrite" for r in matched)
    out["unmatched_certified"] = sum(r["verdict"] == "CertifiedDendrite" for r in unmatched)
    out["matched"] = len(matched)
    out["unmatched"] = len(unmatched)
    return out
