"""Hypergraph from a categorical table: one edge per (attribute, value) pair.

Rows become nodes. Every value shared by at least two rows of a column
yields an edge over those rows. Missing values never form an edge.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .hypergraph import Hypergraph

DEFAULT_MISSING = ("?", "")


@dataclass
class CategoricalHypergraph:
    hypergraph: Hypergraph
    truth: np.ndarray | None
    class_names: list
    columns: list
    edge_keys: list  # (column, value) per edge, in edge order


def _resolve_column(header, label_column):
    if label_column is None:
        return None
    if label_column in header:
        return header.index(label_column)
    try:
        idx = int(label_column)
    except (TypeError, ValueError):
        raise DataError(f"label column {label_column!r} not found") from None
    if not 0 <= idx < len(header):
        raise DataError(f"label column index {idx} out of range")
    return idx


def build_categorical(rows, header=None, label_column=None,
                      missing=DEFAULT_MISSING) -> CategoricalHypergraph:
    """Build the hypergraph from an in-memory table (list of string rows).

    ``label_column`` is a header name or a 0-based column index; that column
    is excluded from the edges and returned as 0-based ``truth`` labels in
    order of first appearance.
    """
    rows = [list(r) for r in rows]
    if not rows:
        raise DataError("table has no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(f"row {i + 1} has {len(r)} fields, expected {width}")
    if header is None:
        header = [str(j) for j in range(width)]
    header = list(header)
    if len(header) != width:
        raise DataError(f"header has {len(header)} fields, rows have {width}")
    lab = _resolve_column(header, label_column)
    missing = set(missing)

    edges, keys = [], []
    for j in range(width):
        if j == lab:
            continue
        groups: dict[str, list[int]] = {}
        for i, r in enumerate(rows):
            v = r[j].strip()
            if v in missing:
                continue
            groups.setdefault(v, []).append(i)
        for v in sorted(groups):
            members = groups[v]
            if len(members) >= 2:
                edges.append(members)
                keys.append((header[j], v))
    if not edges:
        raise DataError("no attribute value is shared by two rows; every edge was dropped")

    truth, names = None, []
    if lab is not None:
        codes: dict[str, int] = {}
        truth = np.array([codes.setdefault(r[lab].strip(), len(codes)) for r in rows], dtype=np.int64)
        names = list(codes)
    return CategoricalHypergraph(Hypergraph.from_edges(len(rows), edges), truth, names,
                                 [h for j, h in enumerate(header) if j != lab], keys)


def ingest_categorical(path: str | os.PathLike, label_column=None, missing=DEFAULT_MISSING,
                       has_header: bool = True) -> CategoricalHypergraph:
    """Read a UTF-8 CSV and build the categorical hypergraph."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            table = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except UnicodeDecodeError as exc:
        raise DataError(f"file is not valid UTF-8: {exc}") from None
    except csv.Error as exc:
        raise DataError(f"malformed CSV: {exc}") from None
    header = None
    if has_header:
        if not table:
            raise DataError("empty CSV")
        header, table = [c.strip() for c in table[0]], table[1:]
    return build_categorical(table, header, label_column, missing)
