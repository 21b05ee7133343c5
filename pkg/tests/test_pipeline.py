import itertools
import json

import numpy as np
import pytest

from hgpart.errors import TooFewNodesError
from hgpart.hypergraph import Hypergraph
from hgpart.model import PlantedModelSpec, TwoParam, sample
from hgpart.pipeline import PartitionOptions, experiment_trial, partition


def two_cliques():
    a = list(itertools.combinations(range(6), 3))
    b = [tuple(v + 6 for v in e) for e in a]
    return Hypergraph.from_edges(12, a + b), np.repeat([0, 1], 6)


def test_two_disjoint_cliques_recovered():
    h, truth = two_cliques()
    rep = partition(h, 2, seed=3, truth=truth)
    assert rep.err == 0 and rep.err_fraction == 0.0
    assert rep.nhcut == 0.0


def test_dense_three_uniform_recovery():
    spec = PlantedModelSpec.balanced(120, 2, {3: 1.0}, TwoParam(0.4, 0.2))
    for seed in range(3):
        assert experiment_trial(spec, seed).report.err == 0


def test_single_edge_two_parts():
    rep = partition(Hypergraph.from_edges(2, [[0, 1]]), 2, seed=0)
    assert sorted(rep.psi_prime.tolist()) == [0, 1]
    assert rep.eigengap is None
    json.loads(rep.to_json())


def test_isolated_nodes_are_unassigned():
    h, truth = two_cliques()
    h = Hypergraph.from_edges(14, h.edges())
    truth = np.concatenate([truth, [0, 1]])
    rep = partition(h, 2, seed=0, truth=truth)
    assert rep.isolated_nodes == 2
    assert rep.psi_prime[-2:].tolist() == [-1, -1]
    assert rep.err == 2
    assert rep.to_dict()["psi_prime"][-2:] == [0, 0]


def test_too_few_nodes():
    with pytest.raises(TooFewNodesError):
        partition(Hypergraph.from_edges(5, [[0, 1]]), 3, seed=0)
    with pytest.raises(ValueError):
        partition(Hypergraph.from_edges(5, [[0, 1]]), 1, seed=0)


def test_report_fields_and_err_presence():
    h, truth = two_cliques()
    d = partition(h, 2, seed=1).to_dict()
    assert "err" not in d and "err_fraction" not in d
    d = partition(h, 2, seed=1, truth=truth).to_dict(include_timings=False)
    assert d["err"] == 0 and "timings_ms" not in d
    assert set(d["psi_prime"]) == {1, 2}


def test_deterministic_serialization():
    spec = PlantedModelSpec.balanced(90, 3, {2: 0.05, 3: 0.004}, TwoParam(0.5, 0.3))
    h = sample(spec, 17)
    runs = [partition(h, 3, seed=42, options=PartitionOptions(threads=t), truth=spec.labels())
            .to_json(include_timings=False) for t in (1, 1, 4)]
    assert runs[0] == runs[1] == runs[2]


def test_err_invariant_under_relabeling():
    spec = PlantedModelSpec.balanced(60, 2, {3: 0.05}, TwoParam(0.3, 0.2))
    rng = np.random.default_rng(0)
    for seed in range(3):
        h = sample(spec, seed)
        truth = spec.labels()
        perm = rng.permutation(h.n)
        moved = np.empty_like(truth)
        moved[perm] = truth
        a = partition(h, 2, seed=1, truth=truth)
        b = partition(h.relabel(perm), 2, seed=1, truth=moved)
        assert a.err == b.err
        assert b.nhcut == pytest.approx(a.nhcut, rel=1e-9)


def test_clique_expansion_option():
    h, truth = two_cliques()
    rep = partition(h, 2, seed=0, options=PartitionOptions(expansion="clique"), truth=truth)
    assert rep.err == 0 and rep.expansion == "clique"
    with pytest.raises(ValueError):
        PartitionOptions(expansion="bogus")


def test_lanczos_path_through_pipeline():
    spec = PlantedModelSpec.balanced(120, 2, {3: 0.2}, TwoParam(0.4, 0.2))
    h = sample(spec, 0)
    dense = partition(h, 2, seed=0, truth=spec.labels())
    sparse = partition(h, 2, seed=0, truth=spec.labels(),
                       options=PartitionOptions(dense_threshold=10))
    assert sparse.eig_method == "lanczos"
    np.testing.assert_allclose(sparse.eigenvalues, dense.eigenvalues, atol=1e-8)
    assert sparse.err == dense.err


def test_trial_deterministic_spec():
    spec = PlantedModelSpec(8, 2, (4, 4), 2, {2: 1.0}, TwoParam(1.0, 0.0))
    for seed in range(5):
        res = experiment_trial(spec, seed)
        assert res.report.err == 0
        assert res.identifiable


def test_trial_unidentifiable_is_chance_level():
    spec = PlantedModelSpec.balanced(60, 2, {3: 0.1}, TwoParam(0.0, 0.3))
    fracs = []
    for seed in range(10):
        res = experiment_trial(spec, seed)
        assert not res.identifiable
        assert res.summary.bound_raw is None
        fracs.append(res.report.err_fraction)
    assert np.mean(fracs) > 0.3
    assert max(fracs) <= 0.5


def test_trial_reference_bound_and_deviation():
    spec = PlantedModelSpec(12, 2, (6, 6), 3, {3: 1.0}, TwoParam(0.5, 0.2))
    res = experiment_trial(spec, 0, C=1.0)
    assert res.summary.bound_raw == pytest.approx(29.82, abs=5e-3)
    assert res.deviation is not None and res.deviation >= 0
    d = res.to_dict(include_timings=False)
    assert d["summary"]["bound_raw"] == res.summary.bound_raw
