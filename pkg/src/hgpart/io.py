"""hMETIS-style ``.hgr`` files and ground-truth label sidecars.

``.hgr``: first non-comment line is ``E N``; then one line per edge with
space-separated 1-based node ids. Lines starting with ``%`` are comments.
Label sidecars hold one integer per line, line ``i`` for node ``i``.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import DataError
from .hypergraph import Hypergraph


def format_hgr(h: Hypergraph) -> str:
    lines = [f"{h.num_edges} {h.n}"]
    for e in range(h.num_edges):
        lines.append(" ".join(str(v + 1) for v in h.edge(e)))
    return "\n".join(lines) + "\n"


def write_hgr(h: Hypergraph, path: str | os.PathLike) -> None:
    Path(path).write_text(format_hgr(h))


def parse_hgr(text: str) -> Hypergraph:
    rows = [ln.split() for ln in text.splitlines()
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not rows:
        raise DataError("empty .hgr file")
    header = rows[0]
    if len(header) < 2:
        raise DataError("header must be 'E N'")
    if len(header) > 2 and header[2] != "0":
        raise DataError("weighted .hgr variants are not supported")
    try:
        n_edges, n = int(header[0]), int(header[1])
        edges = [[int(tok) - 1 for tok in r] for r in rows[1:]]
    except ValueError as exc:
        raise DataError(f"non-integer token in .hgr file: {exc}") from None
    if len(edges) != n_edges:
        raise DataError(f"header declares {n_edges} edges, found {len(edges)}")
    return Hypergraph.from_edges(n, edges)


def read_hgr(path: str | os.PathLike) -> Hypergraph:
    return parse_hgr(Path(path).read_text())


def write_labels(labels, path: str | os.PathLike, *, one_based: bool = True) -> None:
    """Write one label per line; 0-based input labels are shifted by one."""
    shift = 1 if one_based else 0
    Path(path).write_text("".join(f"{int(v) + shift}\n" for v in labels))


def read_labels(path: str | os.PathLike) -> np.ndarray:
    """Read a sidecar of 1-based labels and return them 0-based (0 becomes -1)."""
    try:
        vals = [int(ln) for ln in Path(path).read_text().split()]
    except ValueError as exc:
        raise DataError(f"bad label file: {exc}") from None
    return np.asarray(vals, dtype=np.int64) - 1
