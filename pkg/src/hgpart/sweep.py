"""Parameter sweeps over the planted model, written as CSV."""
from __future__ import annotations

import csv
import json
import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .model import SAMPLER_BUDGET, PlantedModelSpec, TwoParam, spec_from_dict
from .pipeline import PartitionOptions, experiment_trial

AXES = ("n", "alpha_m", "p", "q", "k")

ROW_FIELDS = ["axis", "point", "value", "trial", "seed", "err", "err_fraction", "nhcut",
              "separability_ratio", "delta", "d", "bound_raw", "identifiable",
              "deviation", "deviation_bound", "isolated_nodes", "runtime_ms"]
SUMMARY_FIELDS = ["axis", "point", "value", "trials", "median_err_fraction", "mean_err_fraction",
                  "median_err", "mean_err", "median_nhcut", "mean_nhcut",
                  "median_separability_ratio", "delta", "d", "bound_raw",
                  "mean_deviation", "deviation_bound"]


@dataclass(frozen=True)
class SweepConfig:
    spec: PlantedModelSpec
    axis: str
    values: tuple
    trials: int = 1
    seed_base: int = 0
    C: float = 1.0
    m: int | None = None  # edge size for the alpha_m axis

    def __post_init__(self):
        if self.axis not in AXES:
            raise DataError(f"axis must be one of {AXES}")
        if self.trials < 1:
            raise DataError("trials must be >= 1")
        vals = [float(v) for v in self.values]
        if not vals or not all(math.isfinite(v) for v in vals):
            raise DataError("axis values must be finite and non-empty")
        if vals != sorted(vals):
            raise DataError("axis values must be sorted")
        if self.axis == "alpha_m" and self.m is None:
            raise DataError("axis alpha_m needs 'm'")

    @classmethod
    def from_dict(cls, d) -> "SweepConfig":
        try:
            return cls(spec=spec_from_dict(d["spec"]), axis=d["axis"],
                       values=tuple(d["values"]), trials=int(d.get("trials", 1)),
                       seed_base=int(d.get("seed_base", 0)), C=float(d.get("C", 1.0)),
                       m=None if d.get("m") is None else int(d["m"]))
        except KeyError as exc:
            raise DataError(f"sweep config missing field {exc}") from None

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SweepConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise DataError(f"sweep config is not valid JSON: {exc}") from None


def _balanced_sizes(n, k):
    return tuple(n // k + (1 if i < n % k else 0) for i in range(k))


def spec_at(cfg: SweepConfig, value) -> PlantedModelSpec:
    s = cfg.spec
    if cfg.axis in ("n", "k"):
        if not float(value).is_integer():
            raise DataError(f"axis {cfg.axis} needs integer values")
        n = int(value) if cfg.axis == "n" else s.n
        k = int(value) if cfg.axis == "k" else s.k
        return s.replace(n=n, k=k, part_sizes=_balanced_sizes(n, k), M=min(s.M, n))
    if cfg.axis == "alpha_m":
        alpha = dict(s.alpha)
        alpha[cfg.m] = float(value)
        return s.replace(alpha=alpha, M=max(s.M, cfg.m))
    if not isinstance(s.rule, TwoParam):
        raise DataError("axes p and q need a two_param rule")
    p, q = s.rule.p, s.rule.q
    return s.replace(rule=TwoParam(float(value), q) if cfg.axis == "p" else TwoParam(p, float(value)))


def trial_seed(seed_base: int, point: int, trial: int) -> int:
    ss = np.random.SeedSequence([seed_base, point, trial])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return str(x)


def _run_one(cfg, point, value, trial, budget, timings):
    spec = spec_at(cfg, value)
    seed = trial_seed(cfg.seed_base, point, trial)
    t0 = time.perf_counter()
    res = experiment_trial(spec, seed, cfg.C, PartitionOptions(), budget=budget)
    elapsed = (time.perf_counter() - t0) * 1e3
    rep, s = res.report, res.summary
    return {
        "axis": cfg.axis, "point": point, "value": value, "trial": trial, "seed": seed,
        "err": rep.err, "err_fraction": rep.err_fraction, "nhcut": rep.nhcut,
        "separability_ratio": rep.separability_ratio, "delta": s.delta, "d": s.d,
        "bound_raw": s.bound_raw, "identifiable": res.identifiable,
        "deviation": res.deviation, "deviation_bound": res.deviation_bound,
        "isolated_nodes": rep.isolated_nodes,
        "runtime_ms": elapsed if timings else None,
    }


def _summarize(rows):
    out = []
    by_point: dict[int, list] = {}
    for r in rows:
        by_point.setdefault(r["point"], []).append(r)
    for point in sorted(by_point):
        rs = by_point[point]
        ef = [r["err_fraction"] for r in rs]
        err = [r["err"] for r in rs]
        cut = [r["nhcut"] for r in rs]
        sep = [r["separability_ratio"] for r in rs]
        dev = [r["deviation"] for r in rs if r["deviation"] is not None]
        out.append({
            "axis": rs[0]["axis"], "point": point, "value": rs[0]["value"], "trials": len(rs),
            "median_err_fraction": statistics.median(ef), "mean_err_fraction": statistics.fmean(ef),
            "median_err": float(statistics.median(err)), "mean_err": statistics.fmean(err),
            "median_nhcut": statistics.median(cut), "mean_nhcut": statistics.fmean(cut),
            "median_separability_ratio": statistics.median(sep),
            "delta": rs[0]["delta"], "d": rs[0]["d"], "bound_raw": rs[0]["bound_raw"],
            "mean_deviation": statistics.fmean(dev) if dev else None,
            "deviation_bound": rs[0]["deviation_bound"],
        })
    return out


def _write_csv(path, fields, rows, invocation):
    with open(path, "w", newline="") as fh:
        fh.write(f"# invocation: {invocation}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r[f]) for f in fields])


def run_sweep(cfg: SweepConfig, out_csv, summary_csv=None, threads: int = 1,
              invocation: str = "", budget: int = SAMPLER_BUDGET, timings: bool = True):
    """Run every (value, trial) pair and write the per-trial and summary CSVs.

    Rows are sorted by (point, trial) whatever order workers finish in. If
    a trial fails the finished rows are still written, then the first error
    is raised.
    """
    jobs = [(i, v, t) for i, v in enumerate(cfg.values) for t in range(cfg.trials)]
    rows, failure = [], None

    def work(job):
        return _run_one(cfg, *job, budget, timings)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            futures = [pool.submit(work, j) for j in jobs]
            for f in futures:
                try:
                    rows.append(f.result())
                except Exception as exc:  # keep going so finished rows get flushed
                    failure = failure or exc
    else:
        for j in jobs:
            try:
                rows.append(work(j))
            except Exception as exc:
                failure = failure or exc
    rows.sort(key=lambda r: (r["point"], r["trial"]))
    _write_csv(out_csv, ROW_FIELDS, rows, invocation)
    summary = _summarize(rows)
    if summary_csv is not None:
        _write_csv(summary_csv, SUMMARY_FIELDS, summary, invocation)
    if failure is not None:
        raise failure
    return rows, summary
