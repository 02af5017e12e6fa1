"""Experiment harness: single runs, seeded sweeps and figure-shaped reports."""
from __future__ import annotations

import csv
import io
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import baselines, egypt
from .core import CSV_FIELDS, MetricsReport, evaluate
from .ppm import GroundTruth, PlantedConfig, generate, stream
from .streams import EdgeList, Stream

log = logging.getLogger(__name__)

ALGORITHMS = ("egypt", "lwd", "hash")
SUMMARY_FIELDS = ("n", "k", "p", "q", "gap", "B", "algorithm", "repeats", "failures",
                  "lambda_mean", "lambda_var", "rho_mean", "rho_var",
                  "precision_mean", "precision_var", "wall_time_mean")
REPORT_FIELDS = ("figure", "metric", "k", "algorithm", "B", "gap", "mean", "variance", "repeats")


class HarnessError(RuntimeError):
    pass


def derive_seeds(seed: int) -> tuple[int, int, int]:
    """(graph_seed, order_seed, sample_seed) from one user-facing seed."""
    g, o, s = np.random.SeedSequence(seed).generate_state(3)
    return int(g), int(o), int(s)


def cell_seed(base_seed: int, gap_index: int, k: int, repeat: int) -> int:
    return int(np.random.SeedSequence([base_seed, gap_index, k, repeat]).generate_state(1)[0])


def buffer_seed(seed: int, B: int) -> int:
    return int(np.random.SeedSequence([seed, B]).generate_state(1)[0])


def partition(st: Stream, k: int, algorithm: str, params: egypt.EgyptParams | None = None,
              capacity: int | None = None) -> tuple[np.ndarray, dict]:
    """Run one partitioner over a stream; returns (assignment, extras)."""
    if algorithm == "egypt":
        if params is None:
            raise HarnessError("egypt needs EgyptParams")
        res = egypt.run(st, k, params, capacity)
        extras = {"overflow_events": res.overflow_events,
                  "threshold_fallbacks": res.threshold_fallbacks,
                  "unsupported": res.unsupported}
        return res.assignment, extras
    if algorithm == "lwd":
        return baselines.lwd_run(st, k, baselines.LwdParams(capacity)), {}
    if algorithm == "hash":
        return baselines.hash_run(st, k), {}
    raise HarnessError(f"unknown algorithm {algorithm!r}")


def measure(st: Stream, edges: EdgeList, truth, k: int, algorithm: str,
            params: egypt.EgyptParams | None = None, capacity: int | None = None, *,
            run_id: str = "run", p: float = math.nan, q: float = math.nan,
            seed: int = 0) -> MetricsReport:
    """Partition an existing stream and score it.  ``wall_time_s`` covers
    the partitioning pass only."""
    t0 = time.perf_counter()
    assignment, extras = partition(st, k, algorithm, params, capacity)
    wall = time.perf_counter() - t0
    labels = getattr(truth, "psi", truth)
    lam, rho, prec, sizes = evaluate(assignment, edges, labels, k)
    B = params.B if (algorithm == "egypt" and params is not None) else 0
    return MetricsReport(run_id, len(labels), k, p, q, B, algorithm, seed,
                         lam, rho, prec, wall, sizes, extras)


def run_once(n: int, k: int, p: float, q: float, seed: int, algorithm: str = "egypt",
             params: egypt.EgyptParams | None = None, capacity: int | None = None,
             run_id: str = "run") -> MetricsReport:
    """generate -> stream -> partition -> metrics for one seeded instance.

    ``params.sample_seed`` is replaced by the one derived from ``seed``.
    """
    graph_seed, order_seed, sample_seed = derive_seeds(seed)
    cfg = PlantedConfig(n, k, p, q, graph_seed, order_seed)
    edges, truth = generate(cfg)
    st = stream(edges, order_seed)
    if params is not None:
        params = replace(params, sample_seed=sample_seed)
    try:
        return measure(st, edges, truth, k, algorithm, params, capacity,
                       run_id=run_id, p=p, q=q, seed=seed)
    except Exception as exc:
        raise HarnessError(f"{run_id}: {exc}") from exc


def default_gaps() -> list[float]:
    return [round(0.05 * i, 10) for i in range(1, 20)]


def default_bs() -> list[int]:
    return [50, 100] + list(range(200, 1001, 100))


@dataclass
class SweepSpec:
    n: int = 2000
    q: float = 0.05
    gaps: list[float] = field(default_factory=default_gaps)
    ks: list[int] = field(default_factory=lambda: [2, 4, 8, 16])
    Bs: list[int] = field(default_factory=default_bs)
    repeats: int = 5
    base_seed: int = 0
    algorithms: list[str] = field(default_factory=lambda: ["egypt", "lwd"])
    egypt_template: egypt.EgyptParams | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {a!r}")

    def groups(self):
        """(gap_index, gap, k, repeat) for every graph the sweep needs."""
        for gi, gap in enumerate(self.gaps):
            p = round(self.q + gap, 10)
            if p > 1.0:
                log.warning("skipping gap %s: p = %s exceeds 1", gap, p)
                continue
            for k in self.ks:
                for rep in range(self.repeats):
                    yield gi, gap, k, rep


def _fail_row(run_id, n, k, p, q, B, algorithm, seed) -> dict:
    return MetricsReport(run_id, n, k, p, q, B, algorithm, seed,
                         math.nan, math.nan, math.nan, 0.0).as_row()


def _run_group(spec: SweepSpec, gi: int, gap: float, k: int, rep: int) -> list[dict]:
    p = round(spec.q + gap, 10)
    seed = cell_seed(spec.base_seed, gi, k, rep)
    graph_seed, order_seed, _ = derive_seeds(seed)
    rows = []
    try:
        edges, truth = generate(PlantedConfig(spec.n, k, p, spec.q, graph_seed, order_seed))
        st = stream(edges, order_seed)
    except Exception as exc:
        log.error("graph for gap=%s k=%s repeat=%s failed: %s", gap, k, rep, exc)
        for algo in spec.algorithms:
            for B in (spec.Bs if algo == "egypt" else [0]):
                rows.append(_fail_row(f"g{gi}-k{k}-B{B}-r{rep}-{algo}", spec.n, k, p, spec.q, B, algo, seed))
        return rows
    template = spec.egypt_template or egypt.EgyptParams(B=1)
    for algo in spec.algorithms:
        for B in (spec.Bs if algo == "egypt" else [0]):
            run_id = f"g{gi}-k{k}-B{B}-r{rep}-{algo}"
            try:
                params = None
                if algo == "egypt":
                    params = replace(template, B=B, sample_seed=buffer_seed(seed, B))
                rep_ = measure(st, edges, truth, k, algo, params, run_id=run_id,
                               p=p, q=spec.q, seed=seed)
                rows.append(rep_.as_row())
            except Exception as exc:
                log.error("%s failed: %s", run_id, exc)
                rows.append(_fail_row(run_id, spec.n, k, p, spec.q, B, algo, seed))
    return rows


def _run_group_star(args):
    return _run_group(*args)


def sweep(spec: SweepSpec) -> tuple[list[dict], list[dict]]:
    """Run every (gap, k, B, algorithm, repeat) cell; returns (rows, summary).

    All algorithms and buffer sizes of one (gap, k, repeat) share a graph and
    stream.  Rows come back in deterministic cell order whatever ``jobs`` is.
    """
    tasks = [(spec, *g) for g in spec.groups()]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as ex:
            chunks = list(ex.map(_run_group_star, tasks))
    else:
        chunks = [_run_group(*t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    return rows, summarize(rows)


def _num(x: str) -> float:
    return float(x) if x not in ("", None) else math.nan


def summarize(rows: list[dict]) -> list[dict]:
    """Mean and sample variance of each metric per (n, k, p, q, B, algorithm)."""
    cells: dict[tuple, list[dict]] = {}
    for r in rows:
        key = (int(r["n"]), int(r["k"]), _num(r["p"]), _num(r["q"]), int(r["B"]), r["algorithm"])
        cells.setdefault(key, []).append(r)
    out = []
    for (n, k, p, q, B, algo), rs in cells.items():
        ok = [r for r in rs if r["precision"] not in ("", None)]
        rec = {"n": n, "k": k, "p": repr(p), "q": repr(q), "gap": repr(round(p - q, 10)), "B": B,
               "algorithm": algo, "repeats": len(ok), "failures": len(rs) - len(ok)}
        for m in ("lambda", "rho", "precision"):
            vals = [_num(r[m]) for r in ok]
            rec[f"{m}_mean"] = repr(statistics.fmean(vals)) if vals else ""
            rec[f"{m}_var"] = repr(statistics.variance(vals)) if len(vals) > 1 else ("0.0" if vals else "")
        walls = [_num(r["wall_time_s"]) for r in ok]
        rec["wall_time_mean"] = f"{statistics.fmean(walls):.6f}" if walls else ""
        out.append(rec)
    return out


def write_csv(rows: list[dict], fields, out=None) -> str | None:
    """Write rows to ``out`` (path) or return the CSV text when ``out`` is None."""
    buf = io.StringIO() if out is None else open(out, "w", newline="")
    try:
        w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        if out is None:
            return buf.getvalue()
    finally:
        if out is not None:
            buf.close()
    return None


def read_runs(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise HarnessError(f"{path}: empty CSV")
        missing = [f for f in CSV_FIELDS if f not in reader.fieldnames]
        if missing:
            raise HarnessError(f"{path}: schema mismatch, missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise HarnessError(f"{path}: no rows")
    return rows


def report(rows: list[dict]) -> list[dict]:
    """Tidy per-figure tables.

    1a: lambda vs gap and 1b: precision vs gap, one series per (algorithm, B);
    1c: precision vs B and 1d: lambda vs B, one series per (algorithm, gap).
    Every series is split by k.
    """
    if not rows:
        raise HarnessError("no rows to report")
    summary = summarize(rows)
    out = []
    for fig, metric in (("1a", "lambda"), ("1b", "precision"), ("1c", "precision"), ("1d", "lambda")):
        for s in summary:
            if s[f"{metric}_mean"] == "":
                continue
            out.append({"figure": fig, "metric": metric, "k": s["k"], "algorithm": s["algorithm"],
                        "B": s["B"], "gap": s["gap"], "mean": s[f"{metric}_mean"],
                        "variance": s[f"{metric}_var"], "repeats": s["repeats"]})

    def key(r):
        by_gap = r["figure"] in ("1a", "1b")
        series = (r["algorithm"], int(r["B"])) if by_gap else (r["algorithm"], float(r["gap"]))
        x = float(r["gap"]) if by_gap else int(r["B"])
        return (r["figure"], int(r["k"]), series, x)

    out.sort(key=key)
    return out
