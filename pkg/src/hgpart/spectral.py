"""Leading eigenvectors of the Laplacian, row normalisation and diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator

from .errors import DataError, NoConvergenceError, ZeroRowError
from .hypergraph import DENSE_THRESHOLD

ZERO_ROW_TOL = 1e-12
DEGENERATE_GAP_TOL = 1e-10


@dataclass
class SpectralEmbedding:
    X: np.ndarray
    Xbar: np.ndarray
    eigenvalues: np.ndarray
    next_eigenvalue: float | None
    method: str

    @property
    def eigengap(self) -> float | None:
        if self.next_eigenvalue is None:
            return None
        return float(self.next_eigenvalue - self.eigenvalues[-1])

    @property
    def degenerate_gap(self) -> bool:
        gap = self.eigengap
        return gap is not None and gap <= DEGENERATE_GAP_TOL


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive, for reproducible output
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _orthonormalize(Z: np.ndarray, V: np.ndarray | None, rng) -> np.ndarray:
    """Orthonormal basis of ``Z`` projected off ``V``; rank-deficient columns are refilled at random."""
    n, p = Z.shape
    for _ in range(2):
        if V is not None and V.shape[1]:
            Z = Z - V @ (V.T @ Z)
    Q, R = np.linalg.qr(Z)
    scale = max(1.0, float(np.abs(np.diag(R)).max(initial=0.0)))
    weak = np.abs(np.diag(R)) <= 1e-10 * scale
    if weak.any():
        basis = Q[:, ~weak]
        fresh = rng.standard_normal((n, int(weak.sum())))
        full = basis if V is None else np.hstack([V, basis])
        for _ in range(2):
            fresh = fresh - full @ (full.T @ fresh)
        Qf, _ = np.linalg.qr(fresh)
        Q = np.hstack([basis, Qf])
    return Q


def lanczos_largest(op, nev: int, seed: int = 0, tol: float = 1e-10,
                    max_dim: int | None = None, block: int | None = None):
    """Largest ``nev`` eigenpairs of a symmetric operator.

    Block Lanczos with full reorthogonalisation: the Krylov basis is kept
    explicitly orthonormal (two Gram-Schmidt passes per block) and the
    Rayleigh-Ritz problem on the basis is solved densely. A block of width
    ``nev`` lets repeated eigenvalues up to that multiplicity be resolved.
    """
    n = op.shape[0]
    nev = min(nev, n)
    p = min(block or nev, n)
    max_dim = min(n, max_dim or max(400, 30 * p))
    rng = np.random.default_rng(seed)
    V = _orthonormalize(rng.standard_normal((n, p)), None, rng)
    W = np.asarray(op.matmat(V) if hasattr(op, "matmat") else op @ V)
    check_every = max(1, 16 // p)
    steps = 0
    while True:
        m = V.shape[1]
        steps += 1
        if m >= max_dim or steps % check_every == 0 or m == n:
            T = V.T @ W
            T = 0.5 * (T + T.T)
            theta, Y = np.linalg.eigh(T)
            theta, Y = theta[::-1][:nev], Y[:, ::-1][:, :nev]
            X = V @ Y
            R = W @ Y - X * theta
            res = np.linalg.norm(R, axis=0)
            scale = max(1.0, float(np.abs(theta).max()))
            if np.all(res <= tol * scale) or m >= n:
                return theta, X, res
            if m >= max_dim:
                raise NoConvergenceError(
                    f"Lanczos stopped at dimension {m} with residual {res.max():.3e}")
        p_next = min(p, n - m)
        Z = _orthonormalize(W[:, -p:][:, :p_next], V, rng)
        V = np.hstack([V, Z])
        W = np.hstack([W, np.asarray(op.matmat(Z) if hasattr(op, "matmat") else op @ Z)])


class _Shifted(LinearOperator):
    """``2 I - L``, whose largest eigenpairs are the smallest of ``L``."""

    def __init__(self, L):
        self._L = L
        super().__init__(dtype=np.float64, shape=L.shape)

    def _matmat(self, X):
        return 2.0 * X - np.asarray(self._L @ X)

    def _adjoint(self):
        return self


def smallest_eigenpairs(L, nev: int, seed: int = 0, method: str = "auto"):
    """``(eigenvalues ascending, eigenvectors, method used)`` for the ``nev`` smallest."""
    n = L.shape[0]
    nev = min(nev, n)
    if method == "auto":
        method = "dense" if isinstance(L, np.ndarray) and n <= DENSE_THRESHOLD else "lanczos"
    if method == "dense":
        M = L if isinstance(L, np.ndarray) else L.matmat(np.eye(n))
        vals, vecs = sla.eigh(M, subset_by_index=[0, nev - 1], driver="evr")
    elif method == "lanczos":
        theta, vecs, _ = lanczos_largest(_Shifted(L), nev, seed=seed)
        vals = 2.0 - theta
    else:
        raise ValueError(f"unknown eigen method {method!r}")
    order = np.argsort(vals, kind="stable")
    return vals[order], _fix_signs(vecs[:, order]), method


def row_normalize(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(norms < ZERO_ROW_TOL)
    if bad.size:
        raise ZeroRowError(int(bad[0]))
    return X / norms[:, None]


def leading_eigenvectors(L, k: int, seed: int = 0, method: str = "auto") -> SpectralEmbedding:
    """Eigenvectors of the ``k`` smallest eigenvalues of ``L`` and their row-normalised form.

    One extra eigenvalue is computed (when ``k < n``) to report the gap.
    """
    n = L.shape[0]
    if not 1 <= k <= n:
        raise DataError(f"need 1 <= k <= n (k={k}, n={n})")
    vals, vecs, used = smallest_eigenpairs(L, min(k + 1, n), seed=seed, method=method)
    X = np.ascontiguousarray(vecs[:, :k])
    nxt = float(vals[k]) if vals.size > k else None
    return SpectralEmbedding(X, row_normalize(X), vals[:k].copy(), nxt, used)


@dataclass
class Separability:
    eta_k: float
    eta_km1: float
    ratio: float
    sigma_k: float
    ratio_certified: float


def _safe_ratio(a, b):
    if a == 0:
        return 0.0
    return a / b if b > 0 else math.inf


def separability(Xbar: np.ndarray, k: int, kmeans_runner: Callable | None = None,
                 seed: int = 0, restarts: int = 10, eta_k: float | None = None) -> Separability:
    """Estimate the clusterability ratio ``eta_k / eta_{k-1}`` of the rows of ``Xbar``.

    ``eta_r`` is the k-means cost (Frobenius form) with ``r`` centres. The
    k-means estimates are upper bounds; ``eta_{k-1}`` is additionally bounded
    below by the ``k``-th singular value of ``Xbar``, which gives the
    certified upper bound ``ratio_certified = eta_k / sigma_k``.
    """
    if k < 2:
        raise DataError("separability needs k >= 2")
    if kmeans_runner is None:
        from .kmeans import orss_kmeans

        def kmeans_runner(points, r):
            return orss_kmeans(points, r, seed=seed, restarts=restarts).objective
    if eta_k is None:
        eta_k = kmeans_runner(Xbar, k)
    if k - 1 == 1:
        est = math.sqrt(float(((Xbar - Xbar.mean(axis=0)) ** 2).sum()))
    else:
        est = kmeans_runner(Xbar, k - 1)
    sv = np.linalg.svd(Xbar, compute_uv=False)
    sigma_k = float(sv[k - 1]) if sv.size >= k else 0.0
    # below the usual numerical-rank cutoff the value is rounding noise
    if sigma_k <= max(Xbar.shape) * np.finfo(float).eps * float(sv[0] if sv.size else 0.0):
        sigma_k = 0.0
    eta_km1 = max(est, sigma_k)
    return Separability(float(eta_k), float(eta_km1), _safe_ratio(eta_k, eta_km1),
                        sigma_k, _safe_ratio(eta_k, sigma_k))


def spectral_norm_deviation(L, Lpop, tol: float = 1e-9, max_iter: int = 200_000,
                            seed: int = 0) -> float:
    """``||L - Lpop||_2`` by power iteration on ``(L - Lpop)^2``.

    Stops once the estimate changes by less than ``tol`` (relative) and the
    eigen-residual of the iterate is below ``1e-6`` of the estimate.
    """
    L = L.matmat(np.eye(L.shape[0])) if isinstance(L, LinearOperator) else np.asarray(L)
    E = L - np.asarray(Lpop)
    if E.shape[0] != E.shape[1]:
        raise DataError("deviation needs square matrices of the same shape")
    if not np.any(E):
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(E.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = E @ (E @ v)
        rho = float(v @ w)
        norm_w = np.linalg.norm(w)
        if norm_w == 0:
            return 0.0
        res = np.linalg.norm(w - rho * v)
        new = math.sqrt(max(rho, 0.0))
        if abs(new - est) <= tol * new and res <= 1e-6 * rho:
            return new
        est = new
        v = w / norm_w
    raise NoConvergenceError(f"power iteration did not converge in {max_iter} steps")


def deviation_bound(n: int, d: float) -> float:
    """High-probability bound ``12 sqrt(ln n / d)`` on the Laplacian deviation."""
    return 12.0 * math.sqrt(math.log(n) / d)
