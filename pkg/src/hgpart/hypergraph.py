"""Hypergraph container, star/clique expansions, Laplacian and NH-cut.

Nodes are 0-based internally. Edges are stored in compressed form
(``indptr``/``indices``, one slice per edge, ids strictly increasing inside
a slice), which doubles as the sparse incidence matrix when needed. The
file formats in :mod:`hgpart.io` are 1-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc
from scipy.sparse.linalg import LinearOperator

from .errors import DataError, IsolatedNodeError, ZeroVolumePartError

DENSE_THRESHOLD = 2048
# cap on the number of (i, j) pair contributions materialised per chunk
_PAIR_CHUNK = 4_000_000

EXPANSIONS = ("star", "clique")


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """Undirected hypergraph on nodes ``0..n-1``.

    Edge ``e`` is ``indices[indptr[e]:indptr[e + 1]]``. Duplicate edges are
    allowed and count additively everywhere.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        if self.n < 0:
            raise DataError("node count must be non-negative")
        if indptr.ndim != 1 or indptr.size == 0 or indptr[0] != 0 or indptr[-1] != indices.size:
            raise DataError("malformed edge pointer array")
        sizes = np.diff(indptr)
        if np.any(sizes < 2):
            e = int(np.flatnonzero(sizes < 2)[0])
            raise DataError(f"edge {e} has fewer than 2 nodes")
        if indices.size:
            if indices.min() < 0 or indices.max() >= self.n:
                raise DataError("edge contains a node id outside [0, n)")
            step = np.diff(indices)
            # positions where a new edge starts are exempt from the ordering check
            starts = indptr[1:-1] - 1
            ok = step > 0
            ok[starts[starts < step.size]] = True
            if not ok.all():
                raise DataError("node ids within an edge must be strictly increasing")
        indptr.flags.writeable = False
        indices.flags.writeable = False

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]]) -> "Hypergraph":
        """Build from an iterable of node-id collections (0-based, any order)."""
        ptr = [0]
        flat: list[int] = []
        for e in edges:
            nodes = sorted(int(v) for v in e)
            if len(set(nodes)) != len(nodes):
                raise DataError(f"edge {nodes} repeats a node")
            flat.extend(nodes)
            ptr.append(len(flat))
        return cls(n, np.asarray(ptr, dtype=np.int64), np.asarray(flat, dtype=np.int64))

    @classmethod
    def from_size_blocks(cls, n: int, blocks: Sequence[np.ndarray]) -> "Hypergraph":
        """Build from 2-D arrays, each holding edges of one size as sorted rows."""
        blocks = [np.asarray(b, dtype=np.int64) for b in blocks if len(b)]
        if not blocks:
            return cls(n, np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64))
        sizes = np.concatenate([np.full(len(b), b.shape[1]) for b in blocks])
        indptr = np.concatenate([[0], np.cumsum(sizes)])
        indices = np.concatenate([b.ravel() for b in blocks])
        return cls(n, indptr, indices)

    @property
    def num_edges(self) -> int:
        return self.indptr.size - 1

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge(self, e: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.indices[self.indptr[e]:self.indptr[e + 1]])

    def edges(self) -> list[tuple[int, ...]]:
        return [self.edge(e) for e in range(self.num_edges)]

    def edge_ids(self) -> np.ndarray:
        """Edge index of every entry of ``indices``."""
        return np.repeat(np.arange(self.num_edges), self.sizes)

    def incidence(self) -> sp.csr_matrix:
        """Sparse ``n x |E|`` incidence matrix (a view of the edge list)."""
        data = np.ones(self.indices.size)
        H = sp.csc_matrix((data, self.indices, self.indptr), shape=(self.n, self.num_edges))
        return H.tocsr()

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __repr__(self):
        return f"Hypergraph(n={self.n}, edges={self.num_edges})"

    def relabel(self, perm: Sequence[int]) -> "Hypergraph":
        """Apply the node map ``v -> perm[v]``; edges keep their order."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise DataError("perm must be a permutation of range(n)")
        return Hypergraph.from_edges(self.n, ([perm[v] for v in e] for e in self.edges()))

    def induced(self, keep: np.ndarray) -> "Hypergraph":
        """Restrict to nodes where ``keep`` is true, renumbering them in order.

        Only valid when every edge lies entirely inside the kept set (the
        intended use is dropping isolated nodes).
        """
        keep = np.asarray(keep, dtype=bool)
        new_id = np.full(self.n, -1, dtype=np.int64)
        new_id[keep] = np.arange(int(keep.sum()))
        mapped = new_id[self.indices]
        if np.any(mapped < 0):
            raise DataError("an edge touches a dropped node")
        return Hypergraph(int(keep.sum()), self.indptr, mapped)


def degrees(h: Hypergraph) -> np.ndarray:
    """Number of edges containing each node."""
    return np.bincount(h.indices, minlength=h.n).astype(np.int64)


def _edge_weights(h: Hypergraph, expansion: str) -> np.ndarray:
    if expansion == "star":
        return 1.0 / h.sizes
    if expansion == "clique":
        return np.ones(h.num_edges)
    raise ValueError(f"unknown expansion {expansion!r}")


def _dense_pair_sum(h: Hypergraph, weights: np.ndarray) -> np.ndarray:
    """Dense ``sum_e w_e * a_e a_e^T``."""
    n = h.n
    out = np.zeros(n * n)
    sizes = h.sizes
    for s in np.unique(sizes):
        sel = np.flatnonzero(sizes == s)
        rows = h.indices[h.indptr[sel][:, None] + np.arange(s)]
        w = weights[sel]
        per_chunk = max(1, _PAIR_CHUNK // int(s * s))
        for lo in range(0, sel.size, per_chunk):
            r = rows[lo:lo + per_chunk]
            flat = (r[:, :, None] * n + r[:, None, :]).reshape(len(r), -1)
            ww = np.repeat(w[lo:lo + per_chunk], s * s)
            out += np.bincount(flat.ravel(), weights=ww, minlength=n * n)
    return out.reshape(n, n)


def adjacency(h: Hypergraph, dense: bool | None = None):
    """Star-expansion adjacency ``A = H diag(1/|e|) H^T``.

    ``A[i, j]`` sums ``1/|e|`` over edges holding both ``i`` and ``j``; the
    diagonal is kept. Dense ``ndarray`` up to :data:`DENSE_THRESHOLD` nodes,
    ``scipy.sparse`` CSR above (or as forced by ``dense``).
    """
    return _expansion_matrix(h, "star", dense)


def clique_adjacency(h: Hypergraph, dense: bool | None = None):
    """Unweighted clique expansion: ``A'[i, j]`` counts edges holding ``i != j``."""
    return _expansion_matrix(h, "clique", dense)


def _expansion_matrix(h, expansion, dense):
    if dense is None:
        dense = h.n <= DENSE_THRESHOLD
    w = _edge_weights(h, expansion)
    if dense:
        A = _dense_pair_sum(h, w)
        if expansion == "clique":
            A[np.diag_indices(h.n)] = 0.0
        return A
    H = h.incidence()
    A = (H @ sp.diags(w) @ H.T).tocsr()
    if expansion == "clique":
        A.setdiag(0.0)
        A.eliminate_zeros()
    return A


def expansion_degrees(h: Hypergraph, expansion: str = "star") -> np.ndarray:
    """Row sums of the expansion adjacency, computed per node from edge sizes."""
    if expansion == "star":
        return degrees(h).astype(float)
    if expansion == "clique":
        per_entry = np.repeat(h.sizes - 1, h.sizes).astype(float)
        return np.bincount(h.indices, weights=per_entry, minlength=h.n)
    raise ValueError(f"unknown expansion {expansion!r}")


def _inv_sqrt_degrees(deg: np.ndarray) -> np.ndarray:
    zero = np.flatnonzero(deg <= 0)
    if zero.size:
        raise IsolatedNodeError(int(zero[0]))
    return 1.0 / np.sqrt(deg)


class LaplacianOperator(LinearOperator):
    """Matrix-free ``L = I - D^{-1/2} A D^{-1/2}`` for a hypergraph expansion.

    ``A x`` is applied as ``H (w * (H^T x)) - c * x`` so that neither the
    expansion adjacency nor any dense ``n x n`` array is formed.
    """

    def __init__(self, h: Hypergraph, expansion: str = "star"):
        self.expansion = expansion
        self._H = h.incidence()
        self._HT = self._H.T.tocsr()
        self._w = _edge_weights(h, expansion)
        self._c = degrees(h).astype(float) if expansion == "clique" else None
        self.degrees = expansion_degrees(h, expansion)
        self._s = _inv_sqrt_degrees(self.degrees)
        super().__init__(dtype=np.float64, shape=(h.n, h.n))

    def _matmat(self, X):
        X = np.asarray(X, dtype=float)
        squeeze = X.ndim == 1
        if squeeze:
            X = X[:, None]
        Y = self._s[:, None] * X
        T = self._H @ (self._w[:, None] * (self._HT @ Y))
        if self._c is not None:
            T -= self._c[:, None] * Y
        out = X - self._s[:, None] * T
        return out[:, 0] if squeeze else out

    def _matvec(self, x):
        return self._matmat(np.asarray(x).reshape(-1))

    def _adjoint(self):
        return self

    def todense(self) -> np.ndarray:
        return self.matmat(np.eye(self.shape[0]))


def laplacian(h: Hypergraph, expansion: str = "star", dense: bool | None = None):
    """Normalized Laplacian ``I - D^{-1/2} A D^{-1/2}`` of an expansion.

    Returns a dense symmetric ``ndarray`` up to :data:`DENSE_THRESHOLD`
    nodes, otherwise a :class:`LaplacianOperator`. Raises
    :class:`IsolatedNodeError` if some node has zero degree.
    """
    if dense is None:
        dense = h.n <= DENSE_THRESHOLD
    if not dense:
        return LaplacianOperator(h, expansion)
    deg = expansion_degrees(h, expansion)
    s = _inv_sqrt_degrees(deg)
    A = _expansion_matrix(h, expansion, True)
    L = np.eye(h.n) - s[:, None] * A * s[None, :]
    return 0.5 * (L + L.T)


def laplacian_from_adjacency(A: np.ndarray, deg: np.ndarray | None = None) -> np.ndarray:
    """``I - D^{-1/2} A D^{-1/2}`` for a dense symmetric ``A`` (``D`` = row sums by default)."""
    A = np.asarray(A, dtype=float)
    if deg is None:
        deg = A.sum(axis=1)
    s = _inv_sqrt_degrees(np.asarray(deg, dtype=float))
    L = np.eye(A.shape[0]) - s[:, None] * A * s[None, :]
    return 0.5 * (L + L.T)


def nh_cut(h: Hypergraph, labels: Sequence[int]) -> float:
    """Normalized hypergraph cut ``sum_j vol(dV_j) / vol(V_j)``.

    ``labels`` are 0-based part indices; ``-1`` marks an unassigned node,
    which is only allowed for nodes that belong to no edge. Empty parts are
    skipped; a nonempty part with zero volume raises
    :class:`ZeroVolumePartError`.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (h.n,):
        raise DataError(f"expected {h.n} labels, got {labels.shape}")
    node_part = labels[h.indices]
    if np.any(node_part < 0):
        raise DataError("an unassigned node lies on an edge")
    K = int(labels.max()) + 1 if labels.size and labels.max() >= 0 else 0
    deg = degrees(h)
    sizes = h.sizes
    counts = np.zeros((h.num_edges, max(K, 1)), dtype=np.int64)
    np.add.at(counts, (h.edge_ids(), node_part), 1)
    total = []
    for j in range(K):
        members = labels == j
        if not members.any():
            continue
        vol = math.fsum(deg[members].tolist())
        if vol == 0:
            raise ZeroVolumePartError(j)
        c = counts[:, j]
        cut_terms = c * (sizes - c) / sizes
        total.append(math.fsum(cut_terms[c > 0].tolist()) / vol)
    return math.fsum(total)


def connected_components(h: Hypergraph) -> tuple[int, np.ndarray]:
    """Number of connected components and a component label per node."""
    H = h.incidence()
    G = (H @ H.T).tocsr()
    return _cc(G, directed=False)
