"""Planted partition model for non-uniform random hypergraphs.

Every ``m``-subset of nodes (``2 <= m <= M``) is an edge independently with
probability ``alpha[m] * B_m(labels)``, where ``B_m`` only depends on the
multiset of class labels of the subset. Label multisets are represented by
their *composition*: a length-``k`` tuple counting how many of the ``m``
nodes fall in each class. Symmetry of ``B_m`` is therefore structural.

Class ``j`` (0-based) holds the contiguous node block
``sum(part_sizes[:j]) .. sum(part_sizes[:j+1]) - 1``.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .errors import (DataError, InfeasibleScaleError, IndivisiblePartitionError,
                     UnidentifiableError, ZeroExpectedDegreeError)
from .hypergraph import Hypergraph, _dense_pair_sum, laplacian_from_adjacency

POPULATION_BUDGET = 10**7
SAMPLER_BUDGET = 10**6
COMPOSITION_BUDGET = 10**6
REJECTION_FACTOR = 100
_SNAP = 64 * np.finfo(float).eps


# --------------------------------------------------------------------------
# probability rules

@dataclass(frozen=True)
class TwoParam:
    """``p + q`` when all ``m`` labels agree, ``q`` otherwise."""

    p: float
    q: float
    variant = "two_param"

    def validate(self, k: int, sizes_with_mass) -> None:
        if not (0 <= self.p <= 1 and 0 <= self.q <= 1 and self.p + self.q <= 1):
            raise DataError("two_param requires p, q in [0, 1] and p + q <= 1")

    def prob(self, m: int, comp: tuple[int, ...]) -> float:
        return self.p + self.q if max(comp) == m else self.q


@dataclass(frozen=True)
class ThreeUniform:
    """3-uniform rule keyed on how many labels coincide."""

    p1: float
    p2: float
    p3: float
    variant = "three_uniform"

    def validate(self, k: int, sizes_with_mass) -> None:
        if not all(0 <= v <= 1 for v in (self.p1, self.p2, self.p3)):
            raise DataError("three_uniform probabilities must lie in [0, 1]")
        if set(sizes_with_mass) - {3}:
            raise DataError("three_uniform only defines edges of size 3")

    def prob(self, m: int, comp: tuple[int, ...]) -> float:
        if m != 3:
            raise DataError("three_uniform only defines edges of size 3")
        return {3: self.p1, 2: self.p2, 1: self.p3}[max(comp)]


@dataclass(frozen=True)
class PlantedClique:
    """Two classes; 1 if every node is in class 1 (the clique), else 1/2."""

    variant = "planted_clique"

    def validate(self, k: int, sizes_with_mass) -> None:
        if k != 2:
            raise DataError("planted_clique needs exactly k = 2 classes")

    def prob(self, m: int, comp: tuple[int, ...]) -> float:
        return 1.0 if comp[0] == m else 0.5


@dataclass(frozen=True)
class CustomTable:
    """Explicit table ``(m, sorted 1-based labels) -> probability``."""

    entries: tuple = ()
    variant = "custom"
    _lookup: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if isinstance(self.entries, Mapping):
            object.__setattr__(self, "entries", tuple(self.entries.items()))
        norm = []
        for (m, labels), p in self.entries:
            labels = tuple(sorted(int(v) for v in labels))
            if len(labels) != m:
                raise DataError(f"table key {labels} does not have {m} labels")
            if not 0 <= p <= 1:
                raise DataError(f"table probability {p} outside [0, 1]")
            norm.append(((int(m), labels), float(p)))
        object.__setattr__(self, "entries", tuple(norm))
        object.__setattr__(self, "_lookup", dict(norm))

    def validate(self, k: int, sizes_with_mass) -> None:
        for (_, labels), _ in self.entries:
            if labels and (labels[0] < 1 or labels[-1] > k):
                raise DataError(f"table labels {labels} outside 1..{k}")

    def prob(self, m: int, comp: tuple[int, ...]) -> float:
        labels = tuple(j + 1 for j, c in enumerate(comp) for _ in range(c))
        try:
            return self._lookup[(m, labels)]
        except KeyError:
            raise DataError(f"custom table has no entry for m={m}, labels={labels}") from None


ProbabilityRule = TwoParam | ThreeUniform | PlantedClique | CustomTable


def two_three_rule(k: int, p1: float, p2: float, p3: float) -> CustomTable:
    """Pairwise edges only inside classes (prob. 1) plus a 3-uniform rule."""
    entries = {}
    for comp in compositions(2, k):
        entries[(2, _labels(comp))] = 1.0 if max(comp) == 2 else 0.0
    three = ThreeUniform(p1, p2, p3)
    for comp in compositions(3, k):
        entries[(3, _labels(comp))] = three.prob(3, comp)
    return CustomTable(entries)


def _labels(comp):
    return tuple(j + 1 for j, c in enumerate(comp) for _ in range(c))


# --------------------------------------------------------------------------
# model specification

@dataclass(frozen=True)
class PlantedModelSpec:
    n: int
    k: int
    part_sizes: tuple[int, ...]
    M: int
    alpha: tuple  # ((m, alpha_m), ...) sorted by m; pass a dict to the constructor
    rule: ProbabilityRule

    def __post_init__(self):
        object.__setattr__(self, "part_sizes", tuple(int(s) for s in self.part_sizes))
        alpha = self.alpha.items() if isinstance(self.alpha, Mapping) else self.alpha
        alpha = tuple(sorted((int(m), float(a)) for m, a in alpha))
        object.__setattr__(self, "alpha", alpha)
        if len(self.part_sizes) != self.k or self.k < 1:
            raise DataError("part_sizes must list k >= 1 sizes")
        if sum(self.part_sizes) != self.n or min(self.part_sizes) < 1:
            raise DataError("part sizes must be >= 1 and sum to n")
        if not 2 <= self.M <= self.n:
            raise DataError("M must satisfy 2 <= M <= n")
        for m, a in alpha:
            if not 2 <= m <= self.M:
                raise DataError(f"alpha given for size {m} outside 2..M")
            if not 0 <= a <= 1:
                raise DataError(f"alpha[{m}] = {a} outside [0, 1]")
        self.rule.validate(self.k, [m for m, a in alpha if a > 0])

    @classmethod
    def balanced(cls, n: int, k: int, alpha: Mapping[int, float], rule, M: int | None = None):
        """Near-equal classes (the first ``n % k`` classes get one extra node)."""
        base, extra = divmod(n, k)
        sizes = [base + (j < extra) for j in range(k)]
        if M is None:
            M = max(alpha)
        return cls(n, k, tuple(sizes), M, alpha, rule)

    def alpha_of(self, m: int) -> float:
        return dict(self.alpha).get(m, 0.0)

    @property
    def active_sizes(self) -> list[int]:
        return [m for m, a in self.alpha if a > 0]

    def labels(self) -> np.ndarray:
        """Ground-truth class of every node (0-based)."""
        return np.repeat(np.arange(self.k), self.part_sizes)

    def replace(self, **changes) -> "PlantedModelSpec":
        d = dict(n=self.n, k=self.k, part_sizes=self.part_sizes, M=self.M,
                 alpha=self.alpha, rule=self.rule)
        d.update(changes)
        return PlantedModelSpec(**d)


def rule_to_dict(rule) -> dict:
    if isinstance(rule, TwoParam):
        return {"variant": rule.variant, "p": rule.p, "q": rule.q}
    if isinstance(rule, ThreeUniform):
        return {"variant": rule.variant, "p1": rule.p1, "p2": rule.p2, "p3": rule.p3}
    if isinstance(rule, PlantedClique):
        return {"variant": rule.variant}
    if isinstance(rule, CustomTable):
        return {"variant": rule.variant,
                "table": [{"m": m, "labels": list(lab), "p": p} for (m, lab), p in rule.entries]}
    raise TypeError(f"unknown rule {rule!r}")


def rule_from_dict(d: Mapping) -> ProbabilityRule:
    variant = d.get("variant")
    try:
        if variant == "two_param":
            return TwoParam(float(d["p"]), float(d["q"]))
        if variant == "three_uniform":
            return ThreeUniform(float(d["p1"]), float(d["p2"]), float(d["p3"]))
        if variant == "planted_clique":
            return PlantedClique()
        if variant == "custom":
            return CustomTable(tuple(((int(e["m"]), tuple(e["labels"])), float(e["p"]))
                                     for e in d["table"]))
    except KeyError as exc:
        raise DataError(f"rule {variant!r} is missing field {exc}") from None
    raise DataError(f"unknown rule variant {variant!r}")


def spec_to_dict(spec: PlantedModelSpec) -> dict:
    return {
        "n": spec.n,
        "k": spec.k,
        "part_sizes": list(spec.part_sizes),
        "M": spec.M,
        "alpha": {str(m): a for m, a in spec.alpha},
        "rule": rule_to_dict(spec.rule),
    }


def spec_from_dict(d: Mapping) -> PlantedModelSpec:
    try:
        return PlantedModelSpec(
            n=int(d["n"]), k=int(d["k"]), part_sizes=tuple(d["part_sizes"]),
            M=int(d["M"]), alpha={int(m): float(a) for m, a in d["alpha"].items()},
            rule=rule_from_dict(d["rule"]))
    except KeyError as exc:
        raise DataError(f"model spec is missing field {exc}") from None
    except (TypeError, AttributeError, ValueError) as exc:
        raise DataError(f"malformed model spec: {exc}") from None


def load_spec(path: str | os.PathLike) -> PlantedModelSpec:
    try:
        return spec_from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def save_spec(spec: PlantedModelSpec, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=2) + "\n")


# --------------------------------------------------------------------------
# compositions

def compositions(total: int, k: int, budget: int = COMPOSITION_BUDGET) -> Iterator[tuple[int, ...]]:
    """All length-``k`` non-negative integer tuples summing to ``total``, lexicographically descending."""
    if total < 0:
        return
    count = math.comb(total + k - 1, k - 1)
    if count > budget:
        raise InfeasibleScaleError(
            f"{count} label compositions of size {total} over {k} classes exceed budget {budget}")
    yield from _compositions(total, k)


def _compositions(total, k):
    if k == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


def _ways(avail, comp) -> int:
    w = 1
    for a, c in zip(avail, comp):
        if c:
            w *= math.comb(a, c) if a >= c else 0
            if not w:
                return 0
    return w


def edge_classes(spec: PlantedModelSpec, budget: int = COMPOSITION_BUDGET):
    """``(m, composition, number of subsets, edge probability)`` for every class."""
    out = []
    for m in spec.active_sizes:
        a = spec.alpha_of(m)
        for comp in compositions(m, spec.k, budget):
            size = _ways(spec.part_sizes, comp)
            if size:
                out.append((m, comp, size, a * spec.rule.prob(m, comp)))
    return out


# --------------------------------------------------------------------------
# population quantities

@dataclass
class PopulationSummary:
    """Class-level expectations of the model and derived report values.

    ``G``, ``Jtilde``, ``Dtilde`` follow the decomposition
    ``E[A] = Z G Z^T - J`` with ``J`` diagonal and constant per class;
    ``Atilde`` is the diagonal of ``E[A]`` per class.
    """

    n: int
    k: int
    part_sizes: tuple[int, ...]
    G: np.ndarray
    Jtilde: np.ndarray
    Dtilde: np.ndarray
    Atilde: np.ndarray
    d: float
    delta: float
    lambda_min_G: float
    C: float | None = None
    bound_raw: float | None = None
    degree_condition_lhs: float | None = None
    degree_condition_rhs: float | None = None

    @property
    def identifiable(self) -> bool:
        return bool(self.delta > 0)

    @property
    def degree_condition_holds(self) -> bool | None:
        if self.degree_condition_rhs is None:
            return None
        return bool(self.degree_condition_lhs > self.degree_condition_rhs)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "part_sizes": list(self.part_sizes),
            "G": self.G.tolist(), "Jtilde": self.Jtilde.tolist(),
            "Dtilde": self.Dtilde.tolist(), "Atilde": self.Atilde.tolist(),
            "d": self.d, "delta": _json_float(self.delta),
            "lambda_min_G": self.lambda_min_G, "identifiable": self.identifiable,
            "C": self.C, "bound_raw": self.bound_raw,
            "degree_condition_lhs": self.degree_condition_lhs,
            "degree_condition_rhs": self.degree_condition_rhs,
            "degree_condition_holds": self.degree_condition_holds,
        }


def _json_float(x):
    return x if math.isfinite(x) else None


def population_summary(spec: PlantedModelSpec, budget: int = COMPOSITION_BUDGET) -> PopulationSummary:
    """Exact ``G``, ``J``, ``D`` per class via label-composition sums.

    Cost is polynomial in ``k`` and ``M``: for each size ``m`` only the
    ``C(m - 2 + k - 1, k - 1)`` compositions of the non-anchor nodes are
    visited, never the ``C(n, m)`` subsets.
    """
    k = spec.k
    sizes = np.asarray(spec.part_sizes)
    rule = spec.rule
    g_terms = [[[] for _ in range(k)] for _ in range(k)]
    a_terms = [[] for _ in range(k)]
    d_terms = [[] for _ in range(k)]
    for m in spec.active_sizes:
        am = spec.alpha_of(m)
        rest2 = list(compositions(m - 2, k, budget))
        rest1 = list(compositions(m - 1, k, budget))
        for a in range(k):
            for b in range(a, k):
                anchor = np.zeros(k, dtype=int)
                anchor[a] += 1
                anchor[b] += 1
                # a class of size 1 has no within-class pair; clamping keeps G[a, a] finite
                avail = np.maximum(sizes - anchor, 0)
                for c in rest2:
                    w = _ways(avail, c)
                    if w:
                        full = tuple(int(x) for x in np.add(c, anchor))
                        g_terms[a][b].append(am / m * float(w) * rule.prob(m, full))
            avail = sizes - np.eye(k, dtype=int)[a]
            for c in rest1:
                w = _ways(avail, c)
                if w:
                    full = list(c)
                    full[a] += 1
                    t = am * float(w) * rule.prob(m, tuple(full))
                    d_terms[a].append(t)
                    a_terms[a].append(t / m)
    G = np.zeros((k, k))
    for a in range(k):
        for b in range(a, k):
            G[a, b] = G[b, a] = math.fsum(g_terms[a][b])
    Dt = np.array([math.fsum(t) for t in d_terms])
    At = np.array([math.fsum(t) for t in a_terms])
    Jt = np.diag(G) - At
    lam = float(np.linalg.eigvalsh(G)[0])
    if np.all(Dt > 0):
        ratio = Jt / Dt
        first = lam * float(np.min(sizes / Dt))
        delta = first - float(ratio.max() - ratio.min())
        # eigvalsh of an exactly singular G returns +-ulp noise; report it as 0
        scale = float(np.abs(G).max()) * float(np.min(sizes / Dt)) + float(np.abs(ratio).max())
        if abs(delta) <= _SNAP * scale:
            delta = 0.0
        if abs(lam) <= _SNAP * float(np.abs(G).max()):
            lam = 0.0
    else:
        delta = -math.inf
    return PopulationSummary(spec.n, k, spec.part_sizes, G, Jt, Dt, At,
                             d=float(Dt.min()), delta=float(delta), lambda_min_G=lam)


def theoretical_report(spec: PlantedModelSpec, C: float = 1.0,
                       summary: PopulationSummary | None = None) -> PopulationSummary:
    """Fill the consistency-bound fields; raises :class:`UnidentifiableError` if delta <= 0.

    ``bound_raw = k n_max ln n / (delta^2 d)`` is reported without the
    unknown constant; the degree condition compares ``d`` against
    ``C k n_max (ln n)^2 / (delta^2 n_min)``.
    """
    s = summary if summary is not None else population_summary(spec)
    if not s.delta > 0:
        raise UnidentifiableError(s.delta)
    n, k = spec.n, spec.k
    n_max, n_min = max(spec.part_sizes), min(spec.part_sizes)
    ln = math.log(n)
    s.C = float(C)
    s.bound_raw = k * n_max * ln / (s.delta ** 2 * s.d)
    s.degree_condition_lhs = s.d
    s.degree_condition_rhs = C * k * n_max * ln ** 2 / (s.delta ** 2 * n_min)
    return s


def _subset_blocks(n: int, m: int, chunk: int = 1 << 16):
    it = itertools.combinations(range(n), m)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def _compositions_of_rows(rows: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    lab = labels[rows]
    return np.stack([(lab == j).sum(axis=1) for j in range(k)], axis=1)


def _row_probs(spec, m, rows, labels):
    comps = _compositions_of_rows(rows, labels, spec.k)
    uniq, inv = np.unique(comps, axis=0, return_inverse=True)
    a = spec.alpha_of(m)
    pr = np.array([a * spec.rule.prob(m, tuple(int(x) for x in u)) for u in uniq])
    return pr[inv.reshape(-1)]


def _check_population_budget(spec, budget):
    total = sum(math.comb(spec.n, m) for m in spec.active_sizes)
    if total > budget:
        raise InfeasibleScaleError(f"{total} candidate subsets exceed budget {budget}")


def population_adjacency(spec: PlantedModelSpec, budget: int = POPULATION_BUDGET) -> np.ndarray:
    """``E[A]`` by enumerating every candidate subset (small ``n`` only)."""
    _check_population_budget(spec, budget)
    labels = spec.labels()
    A = np.zeros((spec.n, spec.n))
    for m in spec.active_sizes:
        for rows in _subset_blocks(spec.n, m):
            w = _row_probs(spec, m, rows, labels) / m
            A += _dense_pair_sum(Hypergraph.from_size_blocks(spec.n, [rows]), w)
    return A


def population_degrees(spec: PlantedModelSpec, budget: int = POPULATION_BUDGET) -> np.ndarray:
    """Expected degrees by enumeration."""
    _check_population_budget(spec, budget)
    labels = spec.labels()
    D = np.zeros(spec.n)
    for m in spec.active_sizes:
        for rows in _subset_blocks(spec.n, m):
            p = _row_probs(spec, m, rows, labels)
            D += np.bincount(rows.ravel(), weights=np.repeat(p, m), minlength=spec.n)
    return D


def population_adjacency_from_summary(spec: PlantedModelSpec, summary: PopulationSummary | None = None):
    """``Z G Z^T - J`` assembled from class-level quantities."""
    s = summary if summary is not None else population_summary(spec)
    lab = spec.labels()
    A = s.G[np.ix_(lab, lab)]
    A[np.diag_indices(spec.n)] = s.Atilde[lab]
    return A


def population_laplacian(spec: PlantedModelSpec, method: str = "summary",
                         budget: int = POPULATION_BUDGET) -> np.ndarray:
    """Population Laplacian ``I - D^{-1/2} E[A] D^{-1/2}``.

    ``method="summary"`` builds it from the class-level decomposition (exact
    and cheap at any ``n`` that fits in memory); ``method="enumerate"``
    sums over every candidate subset.
    """
    if method == "enumerate":
        A = population_adjacency(spec, budget)
        D = population_degrees(spec, budget)
    elif method == "summary":
        s = population_summary(spec)
        A = population_adjacency_from_summary(spec, s)
        D = s.Dtilde[spec.labels()]
    else:
        raise ValueError(f"unknown method {method!r}")
    zero = np.flatnonzero(D <= 0)
    if zero.size:
        raise ZeroExpectedDegreeError(int(zero[0]))
    return laplacian_from_adjacency(A, D)


# --------------------------------------------------------------------------
# closed forms for special model families

def _check_divisible(n, k):
    if k < 1 or n % k:
        raise IndivisiblePartitionError(f"k={k} does not divide n={n}")


def delta_uniform(n: int, k: int, r: int, p: float, q: float, alpha: float) -> tuple[float, float]:
    """``(delta, d)`` for the balanced ``r``-uniform two-parameter model."""
    _check_divisible(n, k)
    if not 2 <= r <= n // k:
        raise DataError("need 2 <= r <= n/k")
    nk = n // k
    d = p * alpha * math.comb(nk - 1, r - 1) + q * alpha * math.comb(n - 1, r - 1)
    if p * alpha == 0:
        return 0.0, d
    delta = p * alpha * n / (r * k * d) * math.comb(nk - 2, r - 2)
    return delta, d


def uniform_sparsity_threshold(n: int, k: int, r: int, C: float) -> float:
    """Smallest sparsity factor covered by the balanced uniform consistency result."""
    if n < r:
        raise DataError("need n >= r")
    return C * k ** (2 * r - 1) * n * math.log(n) ** 2 / math.comb(n, r)


def _three_uniform_inner(p1, p2, p3, k, n):
    # written in the differences so that p1 = p2 = p3 gives exactly 0
    u, v = p1 - p2, p2 - p3
    return v + (u - 2 * v) / k - 2 * u / n


def identifiable_3uniform(p1: float, p2: float, p3: float, k: int, n: int) -> tuple[bool, float]:
    if k < 3:
        raise DataError("the 3-uniform identifiability condition needs k >= 3")
    _check_divisible(n, k)
    margin = _three_uniform_inner(p1, p2, p3, k, n)
    return margin > 0, margin


def identifiable_23(p1, p2, p3, k, n, alpha3) -> tuple[bool, float]:
    """Condition for the model with all within-class pairs plus 3-edges."""
    if k < 3:
        raise DataError("the 3-uniform identifiability condition needs k >= 3")
    _check_divisible(n, k)
    margin = 0.5 + n * alpha3 / 3 * _three_uniform_inner(p1, p2, p3, k, n)
    return margin > 0, margin


def _three_uniform_G_D(p1, p2, p3, k, n, alpha3):
    c = n // k
    g_same = alpha3 / 3 * (p1 * (c - 2) + p2 * (n - c))
    g_diff = alpha3 / 3 * (p2 * (2 * c - 2) + p3 * (n - 2 * c))
    D = alpha3 * (p1 * math.comb(c - 1, 2)
                  + p2 * ((c - 1) * (n - c) + (k - 1) * math.comb(c, 2))
                  + p3 * math.comb(k - 1, 2) * c * c)
    return g_same, g_diff, D


def _balanced_delta(g_same, g_diff, D, k, n):
    lam = min(g_same - g_diff, g_same + (k - 1) * g_diff)
    return lam * (n // k) / D


def delta_3uniform(p1, p2, p3, k, n, alpha3=1.0) -> float:
    """Closed-form delta for the balanced 3-uniform model (``k >= 3``)."""
    identifiable_3uniform(p1, p2, p3, k, n)
    g_same, g_diff, D = _three_uniform_G_D(p1, p2, p3, k, n, alpha3)
    return _balanced_delta(g_same, g_diff, D, k, n)


def delta_23(p1, p2, p3, k, n, alpha3) -> float:
    """Closed-form delta for within-class pairs plus the 3-uniform rule."""
    identifiable_23(p1, p2, p3, k, n, alpha3)
    g_same, g_diff, D = _three_uniform_G_D(p1, p2, p3, k, n, alpha3)
    return _balanced_delta(g_same + 0.5, g_diff, D + (n // k - 1), k, n)


def planted_clique_quantities(n: int, s: int, r: int):
    """``(G, Jtilde, Dtilde)`` of the ``r``-uniform planted clique model."""
    if not 2 <= r <= s < n - s:
        raise DataError("need 2 <= r <= s < n - s")
    cb = math.comb
    G = np.array([[(cb(s - 2, r - 2) + cb(n - 2, r - 2)) / (2 * r), cb(n - 2, r - 2) / (2 * r)],
                  [cb(n - 2, r - 2) / (2 * r), cb(n - 2, r - 2) / (2 * r)]])
    D = np.array([(cb(s - 1, r - 1) + cb(n - 1, r - 1)) / 2, cb(n - 1, r - 1) / 2])
    J = np.array([-(cb(s - 2, r - 1) + cb(n - 2, r - 1)) / (2 * r), -cb(n - 2, r - 1) / (2 * r)])
    return G, J, D


def delta_planted_clique(n: int, s: int, r: int) -> float:
    G, J, D = planted_clique_quantities(n, s, r)
    a, b, c = G[0, 0], G[0, 1], G[1, 1]
    lam = (a + c) / 2 - math.hypot((a - c) / 2, b)
    return s * lam / D[0] - abs(J[0] / D[0] - J[1] / D[1])


# --------------------------------------------------------------------------
# sampling

def _class_offsets(spec):
    return np.concatenate([[0], np.cumsum(spec.part_sizes)])


@lru_cache(maxsize=16)
def _naive_tables(spec: PlantedModelSpec):
    labels = spec.labels()
    out = []
    for m in spec.active_sizes:
        for rows in _subset_blocks(spec.n, m):
            out.append((rows, _row_probs(spec, m, rows, labels)))
    return out


def _sample_naive(spec, rng):
    blocks = []
    for rows, probs in _naive_tables(spec):
        keep = rng.random(len(rows)) < probs
        blocks.append(rows[keep])
    return Hypergraph.from_size_blocks(spec.n, blocks)


def _enumerate_class(comp, offsets):
    parts = [itertools.combinations(range(offsets[j], offsets[j + 1]), c)
             for j, c in enumerate(comp) if c]
    rows = [sum(t, ()) for t in itertools.product(*parts)]
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), sum(comp))


def _draw_class(rng, comp, offsets, n, count, size, enum_budget):
    """``count`` distinct subsets drawn uniformly from one composition class."""
    m = sum(comp)
    if count == 0:
        return np.zeros((0, m), dtype=np.int64)
    use_int_keys = n ** m < 2 ** 62
    weights = n ** np.arange(m, dtype=np.int64) if use_int_keys else None
    chosen: list[np.ndarray] = []
    seen_int = np.zeros(0, dtype=np.int64)
    seen_set: set = set()
    need, draws = count, 0
    while need > 0 and count < size:
        batch = need + need // 4 + 16
        if draws + batch > REJECTION_FACTOR * count:
            break
        draws += batch
        cols = [rng.integers(offsets[j], offsets[j + 1], size=(batch, c))
                for j, c in enumerate(comp) if c]
        rows = np.sort(np.concatenate(cols, axis=1), axis=1)
        rows = rows[np.all(np.diff(rows, axis=1) > 0, axis=1)]
        if use_int_keys:
            keys = rows @ weights
            _, first = np.unique(keys, return_index=True)
            first.sort()
            rows, keys = rows[first], keys[first]
            fresh = ~np.isin(keys, seen_int)
            rows, keys = rows[fresh][:need], keys[fresh][:need]
            seen_int = np.concatenate([seen_int, keys])
        else:
            keep = []
            for i, r in enumerate(rows):
                key = r.tobytes()
                if key not in seen_set:
                    seen_set.add(key)
                    keep.append(i)
                    if len(keep) == need:
                        break
            rows = rows[keep]
        chosen.append(rows)
        need -= len(rows)
    if need == 0:
        return np.concatenate(chosen)
    # dense class or rejection budget exhausted: choose directly from the enumeration
    if size > enum_budget:
        raise InfeasibleScaleError(f"class of {size} subsets exceeds enumeration budget {enum_budget}")
    allrows = _enumerate_class(comp, offsets)
    pick = np.sort(rng.choice(size, size=count, replace=False))
    return allrows[pick]


def _sample_grouped(spec, rng, enum_budget):
    offsets = _class_offsets(spec)
    blocks = []
    for m, comp, size, prob in edge_classes(spec):
        if prob <= 0:
            continue
        if size >= 2 ** 62:
            raise InfeasibleScaleError(f"class with {size} subsets is too large to sample")
        count = int(rng.binomial(size, prob))
        blocks.append(_draw_class(rng, comp, offsets, spec.n, count, size, enum_budget))
    return Hypergraph.from_size_blocks(spec.n, blocks)


def sample(spec: PlantedModelSpec, seed: int, *, method: str = "auto",
           budget: int = SAMPLER_BUDGET, enum_budget: int = POPULATION_BUDGET) -> Hypergraph:
    """Draw one hypergraph from the model; deterministic in ``(spec, seed, method)``.

    ``method="naive"`` flips one coin per candidate subset; ``"grouped"``
    draws a binomial edge count per label-composition class and then that
    many distinct subsets uniformly inside the class. ``"auto"`` picks naive
    while the number of candidate subsets stays within ``budget``.
    """
    rng = np.random.default_rng(seed)
    if method == "auto":
        total = sum(math.comb(spec.n, m) for m in spec.active_sizes)
        method = "naive" if total <= budget else "grouped"
    if method == "naive":
        _check_population_budget(spec, max(budget, POPULATION_BUDGET))
        return _sample_naive(spec, rng)
    if method == "grouped":
        return _sample_grouped(spec, rng, enum_budget)
    raise ValueError(f"unknown sampling method {method!r}")


def class_edge_counts(h: Hypergraph, spec: PlantedModelSpec) -> dict:
    """Number of edges of ``h`` in each ``(m, composition)`` class."""
    if h.num_edges == 0:
        return {}
    lab = spec.labels()[h.indices]
    comps = np.zeros((h.num_edges, spec.k), dtype=np.int64)
    np.add.at(comps, (h.edge_ids(), lab), 1)
    keys = np.column_stack([h.sizes, comps])
    uniq, counts = np.unique(keys, axis=0, return_counts=True)
    return {(int(u[0]), tuple(int(x) for x in u[1:])): int(c) for u, c in zip(uniq, counts)}
