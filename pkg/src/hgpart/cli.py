"""``hgpart`` command line.

Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure. On
failure a JSON object ``{"error": ..., "type": ..., "exit_code": ...}`` is
printed to stdout.
"""
from __future__ import annotations

import argparse
import json
import math
import shlex
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .categorical import DEFAULT_MISSING, ingest_categorical
from .errors import DataError, HypergraphError, NumericalError, UnidentifiableError
from .hypergraph import EXPANSIONS
from .io import read_hgr, read_labels, write_hgr, write_labels
from .model import (SAMPLER_BUDGET, PlantedClique, ThreeUniform, TwoParam, delta_23,
                    delta_3uniform, delta_planted_clique, delta_uniform, identifiable_23,
                    identifiable_3uniform, load_spec, population_summary, sample, spec_to_dict,
                    theoretical_report, two_three_rule, uniform_sparsity_threshold)
from .pipeline import PartitionOptions, partition
from .sweep import SweepConfig, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _emit(obj, out=None):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy % (2 ** 63))
    print(json.dumps({"seed": seed}), file=sys.stderr)
    return seed


# --------------------------------------------------------------------------
# subcommands

def cmd_generate(args):
    spec = load_spec(args.spec)
    seed = _seed(args)
    h = sample(spec, seed, budget=args.budget)
    write_hgr(h, args.out)
    labels_path = args.labels or str(Path(args.out).with_suffix(".labels"))
    write_labels(spec.labels(), labels_path)
    _emit({"hgr": str(args.out), "labels": labels_path, "n": h.n,
           "edges": h.num_edges, "seed": seed})


def _partition_common(args, expansion):
    h = read_hgr(args.hgr)
    truth = None
    if args.truth:
        truth = read_labels(args.truth)
        if truth.shape != (h.n,):
            raise DataError(f"truth file has {truth.size} labels for {h.n} nodes")
        if truth.min() < 0:
            raise DataError("truth labels must be >= 1")
    seed = _seed(args)
    opts = PartitionOptions(restarts=args.restarts, expansion=expansion,
                            eig_method=args.eig_method, threads=args.threads)
    rep = partition(h, args.k, seed=seed, options=opts, truth=truth)
    _emit(rep.to_dict(include_timings=not args.no_timings), args.out)


def cmd_partition(args):
    _partition_common(args, args.expansion)


def cmd_clique_baseline(args):
    _partition_common(args, "clique")


def cmd_ingest_categorical(args):
    missing = tuple(m for m in args.missing if not (args.keep_question and m == "?"))
    res = ingest_categorical(args.csv, label_column=args.label_column, missing=missing,
                             has_header=not args.no_header)
    write_hgr(res.hypergraph, args.out)
    info = {"hgr": str(args.out), "n": res.hypergraph.n, "edges": res.hypergraph.num_edges,
            "attributes": len(res.columns)}
    if res.truth is not None:
        labels_path = args.labels or str(Path(args.out).with_suffix(".labels"))
        write_labels(res.truth, labels_path)
        info["labels"] = labels_path
        info["classes"] = res.class_names
    _emit(info)


def _closed_forms(spec, C):
    """Closed-form cross-checks for the model families that have one."""
    out = {}
    active = spec.active_sizes
    sizes = set(spec.part_sizes)
    balanced = len(sizes) == 1
    if isinstance(spec.rule, TwoParam) and len(active) == 1 and balanced:
        r = active[0]
        if r <= spec.n // spec.k:
            delta, d = delta_uniform(spec.n, spec.k, r, spec.rule.p, spec.rule.q, spec.alpha_of(r))
            out["uniform"] = {"r": r, "delta": delta, "d": d,
                              "alpha_threshold": uniform_sparsity_threshold(spec.n, spec.k, r, C)}
    if isinstance(spec.rule, ThreeUniform) and active == [3] and balanced and spec.k >= 3:
        p1, p2, p3 = spec.rule.p1, spec.rule.p2, spec.rule.p3
        a3 = spec.alpha_of(3)
        ok, margin = identifiable_3uniform(p1, p2, p3, spec.k, spec.n)
        out["three_uniform"] = {"identifiable": ok, "margin": margin,
                                "delta": delta_3uniform(p1, p2, p3, spec.k, spec.n, a3)}
    if (not isinstance(spec.rule, (TwoParam, ThreeUniform, PlantedClique)) and balanced
            and spec.k >= 3 and active == [2, 3] and spec.alpha_of(2) == 1.0):
        try:
            k = spec.k
            p1 = spec.rule.prob(3, (3,) + (0,) * (k - 1))
            p2 = spec.rule.prob(3, (2, 1) + (0,) * (k - 2))
            p3 = spec.rule.prob(3, (1, 1, 1) + (0,) * (k - 3))
            same = two_three_rule(k, p1, p2, p3) == spec.rule
        except HypergraphError:
            same = False
        if same:
            a3 = spec.alpha_of(3)
            ok, margin = identifiable_23(p1, p2, p3, spec.k, spec.n, a3)
            out["pairs_plus_three_uniform"] = {
                "p1": p1, "p2": p2, "p3": p3, "identifiable": ok, "margin": margin,
                "delta": delta_23(p1, p2, p3, spec.k, spec.n, a3)}
    if isinstance(spec.rule, PlantedClique) and len(active) == 1 and spec.alpha_of(active[0]) == 1.0:
        r, s = active[0], spec.part_sizes[0]
        if 2 <= r <= s < spec.n - s:
            out["planted_clique"] = {"r": r, "s": s, "delta": delta_planted_clique(spec.n, s, r)}
    return out


def cmd_model_info(args):
    spec = load_spec(args.spec)
    summ = population_summary(spec)
    try:
        theoretical_report(spec, args.constant_C, summ)
    except UnidentifiableError:
        pass
    _emit({"spec": spec_to_dict(spec), "summary": summ.to_dict(),
           "identifiable": summ.identifiable,
           "closed_forms": _closed_forms(spec, args.constant_C)}, args.out)


def cmd_sweep(args):
    cfg = SweepConfig.load(args.config)
    if args.constant_C_given:
        cfg = SweepConfig(cfg.spec, cfg.axis, cfg.values, cfg.trials, cfg.seed_base,
                          args.constant_C, cfg.m)
    invocation = " ".join(shlex.quote(a) for a in ["hgpart", *args.argv])
    summary_path = args.summary or str(Path(args.out).with_name(Path(args.out).stem + "_summary.csv"))
    rows, _ = run_sweep(cfg, args.out, summary_path, threads=args.threads,
                        invocation=invocation, budget=args.budget, timings=not args.no_timings)
    _emit({"rows": len(rows), "csv": str(args.out), "summary": summary_path})


def cmd_sparsity_diag(args):
    h = read_hgr(args.hgr)
    n = h.n
    scale = n * math.log(n) ** 2 if n > 1 else 0.0
    counts = Counter(int(s) for s in h.sizes)
    per = {str(m): {"edges": counts[m], "theta_hat": counts[m] / scale if scale else None}
           for m in sorted(counts)}
    _emit({"n": n, "edges": h.num_edges, "n_ln2n": scale,
           "edges_over_n_ln2n": h.num_edges / scale if scale else None,
           "by_size": per}, args.out)


# --------------------------------------------------------------------------
# argument parsing

def _add_globals(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d, help="RNG seed (drawn and printed if omitted)")
    p.add_argument("--threads", type=int, default=d if suppress else 1)
    p.add_argument("--budget", type=int, default=d if suppress else SAMPLER_BUDGET,
                   help="candidate-subset cap for the per-subset sampler")
    p.add_argument("--constant-C", dest="constant_C", type=float,
                   default=d if suppress else 1.0)
    p.add_argument("--no-timings", action="store_true",
                   default=d if suppress else False,
                   help="omit wall-clock fields so output is byte-reproducible")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hgpart", description="Spectral hypergraph partitioning.")
    ap.add_argument("--version", action="version", version=__version__)
    _add_globals(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _add_globals(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("generate", cmd_generate, "sample a hypergraph from a model spec")
    p.add_argument("spec")
    p.add_argument("--out", required=True, help=".hgr output path")
    p.add_argument("--labels", help="ground-truth sidecar (default: <out>.labels)")

    for name, func, help_ in (("partition", cmd_partition, "spectral partition of a .hgr file"),
                              ("clique-baseline", cmd_clique_baseline,
                               "same pipeline on the clique expansion")):
        p = add(name, func, help_)
        p.add_argument("hgr")
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--truth", help="ground-truth label file (1-based)")
        p.add_argument("--restarts", type=int, default=10)
        p.add_argument("--eig-method", choices=("auto", "dense", "lanczos"), default="auto")
        p.add_argument("--out")
        if name == "partition":
            p.add_argument("--expansion", choices=EXPANSIONS, default="star")

    p = add("ingest-categorical", cmd_ingest_categorical, "hypergraph from a categorical CSV")
    p.add_argument("csv")
    p.add_argument("--out", required=True)
    p.add_argument("--label-column", help="header name or 0-based index of the class column")
    p.add_argument("--labels", help="ground-truth sidecar (default: <out>.labels)")
    p.add_argument("--no-header", action="store_true", help="the first row is data")
    p.add_argument("--missing", nargs="*", default=list(DEFAULT_MISSING),
                   help="tokens treated as missing (default: '?' and empty)")
    p.add_argument("--keep-question", action="store_true",
                   help="treat '?' as an ordinary value")

    p = add("model-info", cmd_model_info, "population quantities of a model spec")
    p.add_argument("spec")
    p.add_argument("--out")

    p = add("sweep", cmd_sweep, "parameter sweep to CSV")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="summary CSV (default: <out>_summary.csv)")

    p = add("sparsity-diag", cmd_sparsity_diag, "edge-density estimates per edge size")
    p.add_argument("hgr")
    p.add_argument("--out")
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    args.constant_C_given = any(a.startswith("--constant-C") for a in argv)
    try:
        args.func(args)
    except NumericalError as exc:
        return _fail(exc, EXIT_NUMERIC)
    except (DataError, OSError, ValueError) as exc:
        return _fail(exc, EXIT_DATA)
    return EXIT_OK


def _fail(exc, code):
    _emit({"error": str(exc), "type": type(exc).__name__, "exit_code": code})
    return code


if __name__ == "__main__":
    sys.exit(main())
