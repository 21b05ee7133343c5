"""End-to-end spectral partitioning and single-trial experiment harness."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import TooFewNodesError, UnidentifiableError
from .hypergraph import DENSE_THRESHOLD, EXPANSIONS, Hypergraph, degrees, laplacian, nh_cut
from .kmeans import misclassification, orss_kmeans
from .model import (SAMPLER_BUDGET, PlantedModelSpec, PopulationSummary, population_laplacian,
                    population_summary, sample, theoretical_report)
from .spectral import deviation_bound, leading_eigenvectors, separability, spectral_norm_deviation

DEVIATION_LIMIT = 600


@dataclass(frozen=True)
class PartitionOptions:
    restarts: int = 10
    expansion: str = "star"
    eig_method: str = "auto"
    dense_threshold: int = DENSE_THRESHOLD
    threads: int = 1

    def __post_init__(self):
        if self.expansion not in EXPANSIONS:
            raise ValueError(f"expansion must be one of {EXPANSIONS}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class PartitionReport:
    """Outcome of one partitioning run.

    ``psi_prime`` is 0-based with ``-1`` for isolated (unassigned) nodes;
    the JSON form is 1-based with ``0`` for unassigned.
    """

    n: int
    k: int
    seed: int
    psi_prime: np.ndarray
    nhcut: float
    eigenvalues: list
    eigengap: float | None
    degenerate_gap: bool
    separability_ratio: float
    separability_certified: float
    kmeans_objective: float
    kmeans_degenerate: bool
    isolated_nodes: int
    empty_parts: int
    expansion: str
    eig_method: str
    err: int | None = None
    err_fraction: float | None = None
    timings_ms: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            "n": self.n, "k": self.k, "seed": self.seed,
            "psi_prime": [int(v) + 1 for v in self.psi_prime],
            "nhcut": self.nhcut,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "eigengap": self.eigengap,
            "degenerate_gap": self.degenerate_gap,
            "separability_ratio": _finite(self.separability_ratio),
            "separability_certified": _finite(self.separability_certified),
            "kmeans_objective": self.kmeans_objective,
            "kmeans_degenerate": self.kmeans_degenerate,
            "isolated_nodes": self.isolated_nodes,
            "empty_parts": self.empty_parts,
            "expansion": self.expansion,
            "eig_method": self.eig_method,
        }
        if self.err is not None:
            d["err"] = self.err
            d["err_fraction"] = self.err_fraction
        if include_timings:
            d["timings_ms"] = dict(self.timings_ms)
        return d

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), sort_keys=True, indent=2)


def _finite(x):
    return x if math.isfinite(x) else None


def _subseed(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def partition(h: Hypergraph, k: int, seed: int = 0, options: PartitionOptions | None = None,
              truth=None) -> PartitionReport:
    """Spectral partition of ``h`` into ``k`` parts.

    Isolated nodes are left out of the eigenproblem and reported as
    unassigned. ``truth`` (0-based labels) enables ``err``.
    """
    opts = options or PartitionOptions()
    if k < 2:
        raise ValueError("k must be at least 2")
    timings = {}
    eig_ss, km_ss, sep_ss = np.random.SeedSequence(seed).spawn(3)

    t0 = time.perf_counter()
    keep = degrees(h) > 0
    n_active = int(keep.sum())
    if n_active < k:
        raise TooFewNodesError(f"{n_active} non-isolated nodes for k={k}")
    sub = h if n_active == h.n else h.induced(keep)
    L = laplacian(sub, opts.expansion, dense=n_active <= opts.dense_threshold)
    timings["laplacian"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    emb = leading_eigenvectors(L, k, seed=_subseed(eig_ss), method=opts.eig_method)
    timings["eigen"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    km = orss_kmeans(emb.Xbar, k, seed=_subseed(km_ss), restarts=opts.restarts,
                     threads=opts.threads)
    timings["kmeans"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    sep = separability(emb.Xbar, k, seed=_subseed(sep_ss), restarts=opts.restarts,
                       eta_k=km.objective)
    psi = np.full(h.n, -1, dtype=np.int64)
    psi[keep] = km.labels
    cut = nh_cut(h, psi)
    timings["diagnostics"] = (time.perf_counter() - t0) * 1e3

    rep = PartitionReport(
        n=h.n, k=k, seed=int(seed), psi_prime=psi, nhcut=cut,
        eigenvalues=[float(v) for v in emb.eigenvalues], eigengap=emb.eigengap,
        degenerate_gap=emb.degenerate_gap, separability_ratio=sep.ratio,
        separability_certified=sep.ratio_certified, kmeans_objective=km.objective,
        kmeans_degenerate=km.degenerate, isolated_nodes=h.n - n_active,
        empty_parts=int(k - np.unique(km.labels).size), expansion=opts.expansion,
        eig_method=emb.method, timings_ms=timings)
    if truth is not None:
        rep.err = misclassification(truth, psi)
        rep.err_fraction = rep.err / h.n
    return rep


@dataclass
class TrialResult:
    report: PartitionReport
    summary: PopulationSummary
    identifiable: bool
    deviation: float | None = None
    deviation_bound: float | None = None

    def to_dict(self, include_timings: bool = True) -> dict:
        return {"report": self.report.to_dict(include_timings),
                "summary": self.summary.to_dict(),
                "identifiable": self.identifiable,
                "deviation": self.deviation,
                "deviation_bound": self.deviation_bound}


def experiment_trial(spec: PlantedModelSpec, seed: int, C: float = 1.0,
                     options: PartitionOptions | None = None,
                     deviation_limit: int = DEVIATION_LIMIT, sampler: str = "auto",
                     budget: int = SAMPLER_BUDGET) -> TrialResult:
    """Sample from ``spec``, partition with its ``k`` and score against its labels.

    The deviation ``||L - E L||_2`` and its high-probability bound are
    attached when ``n <= deviation_limit`` and the sample has no isolated
    node.
    """
    sample_ss, part_ss = np.random.SeedSequence(seed).spawn(2)
    h = sample(spec, _subseed(sample_ss), method=sampler, budget=budget)
    rep = partition(h, spec.k, seed=_subseed(part_ss), options=options, truth=spec.labels())
    rep.seed = int(seed)
    summ = population_summary(spec)
    try:
        theoretical_report(spec, C, summ)
        ident = True
    except UnidentifiableError:
        ident = False
    res = TrialResult(rep, summ, ident)
    if spec.n <= deviation_limit and rep.isolated_nodes == 0 and summ.d > 0:
        expansion = options.expansion if options else "star"
        if expansion == "star":
            res.deviation = spectral_norm_deviation(laplacian(h, dense=True),
                                                    population_laplacian(spec))
            res.deviation_bound = deviation_bound(spec.n, summ.d)
    return res
