"""Approximate k-means for the embedding rows, its brute-force oracle, and Err."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError, InfeasibleScaleError, LengthMismatchError, NumericalError

BRUTE_FORCE_BUDGET = 10**6
PERMUTATION_LIMIT = 8


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    objective: float
    restarts_used: int = 1
    history: list = field(default_factory=list)
    degenerate: bool = False
    gamma_certificate: float | None = None

    @property
    def sse(self) -> float:
        return self.objective ** 2


def _sq_dists(X, C):
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _assign(X, C):
    # argmin breaks ties toward the lowest centre index
    D = _sq_dists(X, C)
    lab = np.argmin(D, axis=1)
    return lab, D[np.arange(len(X)), lab]


def _sse(X, C, labels):
    return float(((X - C[labels]) ** 2).sum())


def _orss_seed(X, k, rng):
    """Seeding: first centre drawn with weight ``Delta_1 + n ||x - mean||^2`` (so the
    first pair is drawn proportionally to its squared distance), the rest by
    squared distance to the closest centre already chosen."""
    n = len(X)
    dev = ((X - X.mean(axis=0)) ** 2).sum(axis=1)
    w = dev.sum() + n * dev
    first = rng.choice(n, p=w / w.sum()) if w.sum() > 0 else rng.integers(n)
    idx = [int(first)]
    d2 = ((X - X[first]) ** 2).sum(axis=1)
    for _ in range(1, k):
        tot = d2.sum()
        nxt = int(rng.choice(n, p=d2 / tot)) if tot > 0 else int(rng.integers(n))
        idx.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[idx].copy()


def _ball_step(X, C):
    """Move each centre to the mean of its cell restricted to a ball of radius
    one third of the distance to the nearest other centre."""
    k = len(C)
    if k == 1:
        return X.mean(axis=0, keepdims=True)
    lab, d2 = _assign(X, C)
    cc = np.sqrt(_sq_dists(C, C))
    np.fill_diagonal(cc, np.inf)
    radius = cc.min(axis=1) / 3.0
    out = C.copy()
    for j in range(k):
        sel = (lab == j) & (np.sqrt(d2) <= radius[j])
        if sel.any():
            out[j] = X[sel].mean(axis=0)
    return out


def _lloyd(X, C, max_iter, tol):
    k = len(C)
    labels, d2 = _assign(X, C)
    obj = float(d2.sum())
    history = [obj]
    for _ in range(max_iter):
        newC = C.copy()
        counts = np.bincount(labels, minlength=k)
        for j in range(k):
            if counts[j]:
                newC[j] = X[labels == j].mean(axis=0)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            resid = ((X - newC[labels]) ** 2).sum(axis=1)
            for j in empty:
                far = int(np.argmax(resid))
                newC[j] = X[far]
                resid[far] = -1.0
        new_labels, d2 = _assign(X, newC)
        new_obj = float(d2.sum())
        if new_obj > obj + 1e-12 * max(obj, 1.0):
            raise NumericalError(f"Lloyd step increased the objective ({obj} -> {new_obj})")
        history.append(new_obj)
        done = np.array_equal(new_labels, labels) or obj - new_obj <= tol * max(obj, 1.0)
        C, labels, obj = newC, new_labels, new_obj
        if done:
            break
    return labels, C, obj, history


def _one_restart(X, k, child, max_iter, tol):
    rng = np.random.default_rng(child)
    C = _ball_step(X, _orss_seed(X, k, rng))
    return _lloyd(X, C, max_iter, tol)


def orss_kmeans(points, k: int, seed: int = 0, restarts: int = 10,
                max_iter: int = 100, tol: float = 1e-10, threads: int = 1) -> KMeansResult:
    """Seeded k-means (ORSS seeding, one ball-k-means step, Lloyd polish), best of ``restarts``.

    Each restart uses its own child of ``SeedSequence(seed)``, so running
    restarts on ``threads`` workers gives the same answer as running them in
    order; ties go to the lowest restart index.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = len(X)
    if not 1 <= k <= n:
        raise DataError(f"need 1 <= k <= n (k={k}, n={n})")
    degenerate = len(np.unique(X, axis=0)) < k
    children = np.random.SeedSequence(seed).spawn(max(1, restarts))
    if threads > 1 and len(children) > 1:
        with ThreadPoolExecutor(threads) as pool:
            runs = list(pool.map(lambda c: _one_restart(X, k, c, max_iter, tol), children))
    else:
        runs = [_one_restart(X, k, c, max_iter, tol) for c in children]
    best = runs[0]
    for run in runs[1:]:
        if run[2] < best[2]:
            best = run
    labels, C, _, hist = best
    sse = _sse(X, C, labels)
    return KMeansResult(labels, C, math.sqrt(sse), len(children),
                        [math.sqrt(h) for h in hist], degenerate)


def brute_force_kmeans(points, k: int, budget: int = BRUTE_FORCE_BUDGET) -> KMeansResult:
    """Global k-means optimum by enumerating all ``k**n`` assignments."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = len(X)
    if k < 1 or n < 1:
        raise DataError("need k >= 1 and at least one point")
    if k ** n > budget:
        raise InfeasibleScaleError(f"{k}^{n} assignments exceed budget {budget}")
    sq = (X * X).sum(axis=1)
    best_sse, best_assign = math.inf, None
    chunk = 1 << 16
    total = k ** n
    powers = k ** np.arange(n - 1, -1, -1)
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(total, lo + chunk))
        A = (codes[:, None] // powers[None, :]) % k
        sse = np.zeros(len(codes))
        for j in range(k):
            M = (A == j).astype(float)
            cnt = M.sum(axis=1)
            S = M @ X
            with np.errstate(invalid="ignore", divide="ignore"):
                part = M @ sq - np.where(cnt > 0, (S * S).sum(axis=1) / cnt, 0.0)
            sse += part
        i = int(np.argmin(sse))
        if sse[i] < best_sse - 1e-15:
            best_sse, best_assign = float(sse[i]), A[i]
    labels = best_assign.astype(np.int64)
    C = np.array([X[labels == j].mean(axis=0) if np.any(labels == j) else X[0] for j in range(k)])
    return KMeansResult(labels, C, math.sqrt(_sse(X, C, labels)), 1, [], False, 1.0)


def misclassification(psi, psi_prime, method: str = "auto") -> int:
    """``min`` over label bijections of the number of disagreeing nodes.

    Labels are 0-based; ``-1`` in ``psi_prime`` marks an unassigned node,
    which always counts as an error. Exhaustive over permutations when the
    padded label count is at most 8, Hungarian assignment otherwise.
    """
    psi = np.asarray(psi, dtype=np.int64)
    psi_prime = np.asarray(psi_prime, dtype=np.int64)
    if psi.shape != psi_prime.shape:
        raise LengthMismatchError(f"{psi.shape} vs {psi_prime.shape}")
    n = psi.size
    if n == 0:
        return 0
    if psi.min() < 0:
        raise DataError("ground-truth labels must be non-negative")
    ok = psi_prime >= 0
    if not ok.any():
        return n
    a, b = psi[ok], psi_prime[ok]
    K = int(max(a.max(), b.max())) + 1
    conf = np.zeros((K, K), dtype=np.int64)
    np.add.at(conf, (a, b), 1)
    if method == "auto":
        method = "brute" if K <= PERMUTATION_LIMIT else "hungarian"
    if method == "brute":
        perms = np.array(list(itertools.permutations(range(K))))
        agree = int(conf[np.arange(K), perms].sum(axis=1).max())
    elif method == "hungarian":
        rows, cols = linear_sum_assignment(conf, maximize=True)
        agree = int(conf[rows, cols].sum())
    else:
        raise ValueError(f"unknown method {method!r}")
    return n - agree
