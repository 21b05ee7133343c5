import csv
import io
import itertools
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hgpart.categorical import build_categorical, ingest_categorical
from hgpart.cli import main
from hgpart.errors import DataError
from hgpart.hypergraph import Hypergraph
from hgpart.io import read_hgr, read_labels, write_hgr
from hgpart.model import (PlantedModelSpec, ThreeUniform, TwoParam, identifiable_3uniform,
                          save_spec, spec_to_dict)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def spec_file(tmp_path, spec, name="spec.json"):
    path = tmp_path / name
    save_spec(spec, path)
    return path


# ---------------------------------------------------------------- generate

def test_generate_two_components(tmp_path, capsys):
    spec = PlantedModelSpec(4, 2, (2, 2), 2, {2: 1.0}, TwoParam(1.0, 0.0))
    code, out = run(capsys, "generate", spec_file(tmp_path, spec), "--out", tmp_path / "g.hgr",
                    "--seed", 1)
    assert code == 0
    assert (tmp_path / "g.hgr").read_text() == "2 4\n1 2\n3 4\n"
    assert (tmp_path / "g.labels").read_text() == "1\n1\n2\n2\n"
    assert json.loads(out)["edges"] == 2


def test_generate_zero_alpha(tmp_path, capsys):
    spec = PlantedModelSpec(9, 3, (3, 3, 3), 3, {2: 0.0, 3: 0.0}, TwoParam(0.5, 0.1))
    code, _ = run(capsys, "generate", spec_file(tmp_path, spec), "--out", tmp_path / "z.hgr",
                  "--seed", 1)
    assert code == 0
    assert (tmp_path / "z.hgr").read_text() == "0 9\n"


def test_seed_drawn_and_printed_when_omitted(tmp_path, capsys):
    spec = PlantedModelSpec.balanced(10, 2, {2: 0.5}, TwoParam(0.3, 0.2))
    code = main(["generate", str(spec_file(tmp_path, spec)), "--out", str(tmp_path / "r.hgr")])
    cap = capsys.readouterr()
    assert code == 0
    seed = json.loads(cap.err)["seed"]
    assert json.loads(cap.out)["seed"] == seed
    main(["generate", str(spec_file(tmp_path, spec)), "--out", str(tmp_path / "s.hgr"),
          "--seed", str(seed)])
    assert (tmp_path / "r.hgr").read_text() == (tmp_path / "s.hgr").read_text()


def test_global_flags_before_subcommand(tmp_path, capsys):
    spec = PlantedModelSpec.balanced(10, 2, {2: 0.5}, TwoParam(0.3, 0.2))
    run(capsys, "--seed", 7, "generate", spec_file(tmp_path, spec), "--out", tmp_path / "a.hgr")
    run(capsys, "generate", spec_file(tmp_path, spec), "--out", tmp_path / "b.hgr", "--seed", 7)
    assert (tmp_path / "a.hgr").read_text() == (tmp_path / "b.hgr").read_text()


# ---------------------------------------------------------------- partition

@pytest.fixture
def planted(tmp_path, capsys):
    spec = PlantedModelSpec.balanced(60, 2, {3: 0.3}, TwoParam(0.4, 0.2))
    run(capsys, "generate", spec_file(tmp_path, spec), "--out", tmp_path / "p.hgr", "--seed", 2)
    return tmp_path / "p.hgr", tmp_path / "p.labels"


def test_partition_report(planted, capsys):
    hgr, labels = planted
    code, out = run(capsys, "partition", hgr, "--k", 2, "--truth", labels, "--seed", 1)
    assert code == 0
    rep = json.loads(out)
    assert rep["err"] == 0 and len(rep["psi_prime"]) == 60
    assert set(rep["timings_ms"]) == {"laplacian", "eigen", "kmeans", "diagnostics"}


def test_partition_byte_identical_with_threads(planted, capsys, tmp_path):
    hgr, labels = planted
    outs = []
    for threads in (1, 1, 3):
        code, out = run(capsys, "partition", hgr, "--k", 2, "--truth", labels, "--seed", 5,
                        "--threads", threads, "--no-timings")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_partition_missing_file(capsys, tmp_path):
    code, out = run(capsys, "partition", tmp_path / "nope.hgr", "--k", 2, "--seed", 0)
    assert code == 3
    err = json.loads(out)
    assert err["exit_code"] == 3 and "error" in err


def test_partition_bad_truth_length(planted, capsys, tmp_path):
    hgr, _ = planted
    (tmp_path / "short.labels").write_text("1\n2\n")
    code, out = run(capsys, "partition", hgr, "--k", 2, "--truth", tmp_path / "short.labels",
                    "--seed", 0)
    assert code == 3


def test_usage_error_exit_code(capsys):
    assert main(["partition"]) == 2
    assert main(["no-such-command"]) == 2


def test_numerical_failure_exit_code(tmp_path, capsys):
    # three components but k = 2: one component gets an all-zero embedding row
    write_hgr(Hypergraph.from_edges(6, [[0, 1], [2, 3], [4, 5]]), tmp_path / "t.hgr")
    code, out = run(capsys, "partition", tmp_path / "t.hgr", "--k", 2, "--seed", 0)
    assert code == 4
    assert json.loads(out)["type"] == "ZeroRowError"


def test_clique_baseline(planted, capsys):
    hgr, labels = planted
    code, out = run(capsys, "clique-baseline", hgr, "--k", 2, "--truth", labels, "--seed", 1)
    rep = json.loads(out)
    assert code == 0 and rep["expansion"] == "clique" and rep["err"] == 0


def test_clique_baseline_matches_star_on_two_uniform(tmp_path, capsys):
    # on 2-uniform input the two expansions differ only by the diagonal
    rng = np.random.default_rng(0)
    spec = PlantedModelSpec.balanced(40, 2, {2: 0.4}, TwoParam(0.4, 0.1))
    run(capsys, "generate", spec_file(tmp_path, spec), "--out", tmp_path / "g.hgr", "--seed", 3)
    errs = {}
    for cmd in ("partition", "clique-baseline"):
        errs[cmd] = []
        for seed in range(5):
            _, out = run(capsys, cmd, tmp_path / "g.hgr", "--k", 2, "--truth",
                         tmp_path / "g.labels", "--seed", seed)
            errs[cmd].append(json.loads(out)["err"])
    assert errs["partition"] == errs["clique-baseline"]


# ---------------------------------------------------------------- model-info

def test_model_info_reference(tmp_path, capsys):
    spec = PlantedModelSpec(12, 2, (6, 6), 3, {3: 1.0}, TwoParam(0.5, 0.2))
    code, out = run(capsys, "model-info", spec_file(tmp_path, spec), "--constant-C", 1)
    info = json.loads(out)
    assert code == 0 and info["identifiable"]
    assert info["summary"]["delta"] == pytest.approx(0.25, rel=1e-12)
    assert info["summary"]["d"] == pytest.approx(16.0, rel=1e-12)
    assert info["summary"]["bound_raw"] == pytest.approx(29.82, abs=5e-3)
    assert info["closed_forms"]["uniform"]["delta"] == pytest.approx(0.25, rel=1e-12)


def test_model_info_unidentifiable(tmp_path, capsys):
    spec = PlantedModelSpec(12, 2, (6, 6), 3, {3: 1.0}, TwoParam(0.0, 0.3))
    code, out = run(capsys, "model-info", spec_file(tmp_path, spec))
    info = json.loads(out)
    assert code == 0 and info["identifiable"] is False
    assert info["summary"]["bound_raw"] is None


def test_model_info_three_uniform_grid(tmp_path, capsys):
    rng = np.random.default_rng(2)
    for i in range(15):
        p1, p2, p3 = (float(x) for x in rng.uniform(0, 1, 3))
        k = int(rng.integers(3, 5))
        spec = PlantedModelSpec.balanced(4 * k, k, {3: 1.0}, ThreeUniform(p1, p2, p3))
        _, out = run(capsys, "model-info", spec_file(tmp_path, spec, f"s{i}.json"))
        info = json.loads(out)
        cf = info["closed_forms"]["three_uniform"]
        _, margin = identifiable_3uniform(p1, p2, p3, k, 4 * k)
        assert cf["margin"] == margin
        assert np.sign(cf["delta"]) == np.sign(info["summary"]["delta"]) == np.sign(margin)


def test_model_info_bad_json(tmp_path, capsys):
    (tmp_path / "bad.json").write_text("{not json")
    code, out = run(capsys, "model-info", tmp_path / "bad.json")
    assert code == 3
    (tmp_path / "bad2.json").write_text('{"n": 4}')
    code, out = run(capsys, "model-info", tmp_path / "bad2.json")
    assert code == 3


# ---------------------------------------------------------------- ingest

def test_build_categorical_basic():
    res = build_categorical([["a"], ["a"], ["b"]], header=["x"])
    assert res.hypergraph.edges() == [(0, 1)]
    res = build_categorical([["a", "u"], ["b", "u"], ["c", "v"]], header=["x", "y"])
    assert res.hypergraph.edges() == [(0, 1)]
    with pytest.raises(DataError):
        build_categorical([["a"], ["b"], ["c"]], header=["x"])


def test_build_categorical_missing_and_labels():
    rows = [["y", "?", "D"], ["y", "?", "R"], ["n", "", "D"], ["n", "x", "R"]]
    res = build_categorical(rows, header=["v1", "v2", "party"], label_column="party")
    assert res.hypergraph.edges() == [(2, 3), (0, 1)]
    assert res.truth.tolist() == [0, 1, 0, 1] and res.class_names == ["D", "R"]
    kept = build_categorical(rows, header=["v1", "v2", "party"], label_column=2, missing=("",))
    assert (0, 1) in kept.hypergraph.edges() and kept.hypergraph.num_edges == 3


def test_build_categorical_ragged_rows():
    with pytest.raises(DataError):
        build_categorical([["a", "b"], ["a"]])


def test_voting_like_table_edge_count(tmp_path, capsys):
    rng = np.random.default_rng(0)
    rows = [[rng.choice(["republican", "democrat"])] + list(rng.choice(["y", "n", "?"], 16))
            for _ in range(435)]
    path = tmp_path / "votes.data"
    path.write_text("".join(",".join(r) + "\n" for r in rows))
    code, out = run(capsys, "ingest-categorical", path, "--out", tmp_path / "v.hgr",
                    "--no-header", "--label-column", 0, "--keep-question")
    info = json.loads(out)
    distinct = {(j, r[j]) for r in rows for j in range(1, 17)}
    assert code == 0 and info["n"] == 435
    assert info["edges"] == len(distinct) <= 48
    h = read_hgr(tmp_path / "v.hgr")
    assert h.n == 435
    assert len(read_labels(tmp_path / "v.labels")) == 435
    code, out = run(capsys, "ingest-categorical", path, "--out", tmp_path / "w.hgr",
                    "--no-header", "--label-column", 0)
    assert json.loads(out)["edges"] == len({d for d in distinct if d[1] != "?"}) <= 32


def test_ingest_header_csv(tmp_path, capsys):
    (tmp_path / "t.csv").write_text("color,shape,cls\nred,sq,A\nred,ci,B\nblue,ci,A\n")
    code, out = run(capsys, "ingest-categorical", tmp_path / "t.csv", "--out", tmp_path / "t.hgr",
                    "--label-column", "cls")
    assert code == 0
    assert (tmp_path / "t.hgr").read_text() == "2 3\n1 2\n2 3\n"
    assert (tmp_path / "t.labels").read_text() == "1\n2\n1\n"


def test_ingest_all_dropped(tmp_path, capsys):
    (tmp_path / "d.csv").write_text("id\n1\n2\n3\n")
    code, out = run(capsys, "ingest-categorical", tmp_path / "d.csv", "--out", tmp_path / "d.hgr")
    assert code == 3


# ---------------------------------------------------------------- sparsity-diag

def test_sparsity_diag_theta(tmp_path, capsys):
    triples = list(itertools.combinations(range(100), 3))[:424]
    write_hgr(Hypergraph.from_edges(100, triples), tmp_path / "s.hgr")
    code, out = run(capsys, "sparsity-diag", tmp_path / "s.hgr")
    info = json.loads(out)
    assert info["by_size"]["3"]["edges"] == 424
    assert info["by_size"]["3"]["theta_hat"] == pytest.approx(424 / (100 * math.log(100) ** 2))
    assert info["by_size"]["3"]["theta_hat"] == pytest.approx(0.19993, abs=1e-5)


def test_sparsity_diag_edgeless_and_two_uniform(tmp_path, capsys):
    write_hgr(Hypergraph.from_edges(10, []), tmp_path / "e.hgr")
    _, out = run(capsys, "sparsity-diag", tmp_path / "e.hgr")
    info = json.loads(out)
    assert info["edges"] == 0 and all(v["theta_hat"] == 0 for v in info["by_size"].values())
    write_hgr(Hypergraph.from_edges(10, [[0, 1], [2, 3]]), tmp_path / "t.hgr")
    _, out = run(capsys, "sparsity-diag", tmp_path / "t.hgr")
    assert set(json.loads(out)["by_size"]) == {"2"}


# ---------------------------------------------------------------- sweep

def sweep_config(tmp_path, **over):
    cfg = {"spec": spec_to_dict(PlantedModelSpec.balanced(30, 2, {3: 0.2}, TwoParam(0.4, 0.2))),
           "axis": "n", "values": [30], "trials": 1, "seed_base": 3, "C": 1.0}
    cfg.update(over)
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(cfg))
    return path


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# invocation: hgpart sweep")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_sweep_single_row(tmp_path, capsys):
    code, out = run(capsys, "sweep", sweep_config(tmp_path), "--out", tmp_path / "o.csv")
    assert code == 0
    rows = read_csv(tmp_path / "o.csv")
    assert len(rows) == 1
    assert rows[0]["err"] != "" and float(rows[0]["delta"]) > 0
    summ = read_csv(tmp_path / "o_summary.csv")
    assert len(summ) == 1 and summ[0]["trials"] == "1"


def test_sweep_threads_deterministic(tmp_path, capsys):
    cfg = sweep_config(tmp_path, values=[24, 36], trials=3)
    outs = []
    for threads in (1, 4):
        out = tmp_path / f"o{threads}.csv"
        code, _ = run(capsys, "sweep", cfg, "--out", out, "--threads", threads, "--no-timings")
        assert code == 0
        outs.append([ln for ln in out.read_text().splitlines() if not ln.startswith("#")])
    assert outs[0] == outs[1]
    rows = read_csv(tmp_path / "o1.csv")
    assert [(r["point"], r["trial"]) for r in rows] == [(p, t) for p in "01" for t in "012"]


def test_sweep_alpha_axis_degrades_when_sparse(tmp_path, capsys):
    cfg = sweep_config(tmp_path, spec=spec_to_dict(
        PlantedModelSpec.balanced(60, 2, {3: 0.05}, TwoParam(0.4, 0.2))),
        axis="alpha_m", m=3, values=[0.0003, 0.05], trials=5)
    run(capsys, "sweep", cfg, "--out", tmp_path / "a.csv")
    summ = read_csv(tmp_path / "a_summary.csv")
    assert float(summ[0]["median_err_fraction"]) > float(summ[1]["median_err_fraction"])


def test_sweep_partial_flush_on_failure(tmp_path, capsys):
    # the second q value makes p + q > 1 so that point fails
    cfg = sweep_config(tmp_path, axis="q", values=[0.2, 0.9], trials=2)
    code, out = run(capsys, "sweep", cfg, "--out", tmp_path / "f.csv")
    assert code == 3
    rows = read_csv(tmp_path / "f.csv")
    assert len(rows) == 2 and {r["point"] for r in rows} == {"0"}


def test_sweep_bad_config(tmp_path, capsys):
    code, _ = run(capsys, "sweep", sweep_config(tmp_path, values=[60, 30]), "--out",
                  tmp_path / "x.csv")
    assert code == 3
    code, _ = run(capsys, "sweep", sweep_config(tmp_path, trials=0), "--out", tmp_path / "x.csv")
    assert code == 3


def test_module_entry_point(tmp_path):
    spec = PlantedModelSpec(4, 2, (2, 2), 2, {2: 1.0}, TwoParam(1.0, 0.0))
    p = subprocess.run([sys.executable, "-m", "hgpart", "model-info", str(spec_file(tmp_path, spec))],
                       capture_output=True, text=True)
    assert p.returncode == 0
    assert json.loads(p.stdout)["summary"]["d"] == 1.0
