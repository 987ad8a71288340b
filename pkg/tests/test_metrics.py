import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triadgraph.engine import ModelParams, export_graph, new_graph, run
from triadgraph.metrics import (
    GraphFormatError,
    OracleSizeError,
    UndefinedMetricError,
    brute_force_stats,
    c1_average_local,
    c2_global,
    connected_triples,
    degree_hist_csv,
    degree_histogram,
    import_graph,
    joint_degree_histogram,
    joint_hist_csv,
    local_clustering,
    read_graph,
    snapshot_stats,
    stats_csv,
    stats_mismatches,
    triangle_counts,
)

from conftest import make_graph

HEADER = "# alpha=0.5 delta=0.0 mode=edge_choice seed=0 steps=1"


def test_degree_histograms(k3, path3):
    assert degree_histogram(new_graph(ModelParams(0.5, 0.0))) == {1: 2}
    assert degree_histogram(k3) == {2: 3}
    assert degree_histogram(path3) == {1: 2, 2: 1}


def test_local_clustering(k3, star3, k3_pendant):
    assert [local_clustering(k3, v) for v in range(3)] == [1.0, 1.0, 1.0]
    assert local_clustering(star3, 0) == 0.0
    assert local_clustering(star3, 1) == 0.0  # degree 1
    assert [local_clustering(k3_pendant, v) for v in range(4)] == pytest.approx([1 / 3, 1, 1, 0])


def test_triangle_vertex_of_degree_two():
    g = run(ModelParams(1.0, 0.0, seed=1), 1)
    assert local_clustering(g, 2) == 1.0


def test_c1(k3, path3, k3_pendant):
    assert c1_average_local(k3) == 1.0
    assert c1_average_local(path3) == 0.0
    assert c1_average_local(k3_pendant) == pytest.approx(float(Fraction(7, 12)), rel=1e-15)


def test_c2(k3, star3, k3_pendant):
    assert c2_global(k3) == 1.0
    assert c2_global(star3) == 0.0
    assert connected_triples(k3_pendant) == 5
    assert c2_global(k3_pendant) == pytest.approx(0.6, rel=1e-15)


def test_c2_undefined_at_time_zero():
    g = new_graph(ModelParams(0.5, 0.0))
    with pytest.raises(UndefinedMetricError):
        c2_global(g)
    assert math.isnan(snapshot_stats(g).c2)


def test_joint_histograms(k3, path3):
    assert joint_degree_histogram(new_graph(ModelParams(0.5, 0.0))) == {(1, 1): 2}
    assert joint_degree_histogram(k3) == {(2, 2): 6}
    assert joint_degree_histogram(path3) == {(1, 2): 2, (2, 1): 2}


def test_joint_marginal_identity():
    g = run(ModelParams(0.4, 0.5, seed=8), 3000)
    joint = joint_degree_histogram(g)
    hist = degree_histogram(g)
    marg: dict[int, int] = {}
    for (ell, _), c in joint.items():
        marg[ell] = marg.get(ell, 0) + c
    assert marg == {ell: ell * n for ell, n in hist.items()}
    assert all(joint[(m, ell)] == c for (ell, m), c in joint.items())


def test_brute_force_small_cases(k3):
    assert brute_force_stats(k3).triangles == 1
    for seed in range(10):
        assert brute_force_stats(run(ModelParams(0.0, 1.0, seed=seed), 200)).triangles == 0


@pytest.mark.parametrize("alpha,delta", [(0.3, 2.0), (0.5, 0.0), (0.1, -0.9)])
def test_fast_equals_oracle(alpha, delta):
    for seed in range(100):
        g = run(ModelParams(alpha, delta, seed=seed), 200)
        fast, oracle = snapshot_stats(g, joint=True), brute_force_stats(g)
        assert stats_mismatches(fast, oracle) == []
        assert fast.joint_hist == oracle.joint_hist
        assert fast.triangles == oracle.triangles == g.alpha_steps


def test_mismatch_is_reported(k3_pendant):
    fast = snapshot_stats(k3_pendant)
    fast.c1 += 1e-9
    fast.triples += 1
    assert len(stats_mismatches(fast, brute_force_stats(k3_pendant))) == 2


def test_oracle_size_guard():
    g = run(ModelParams(0.5, 0.0), 10_000)
    with pytest.raises(OracleSizeError):
        brute_force_stats(g)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0, 1), delta=st.floats(-0.99, 5), seed=st.integers(0, 2**32), t=st.integers(1, 500))
def test_snapshot_invariants(alpha, delta, seed, t):
    s = snapshot_stats(run(ModelParams(alpha, delta, seed=seed), t), joint=True)
    assert sum(s.degree_hist.values()) == t + 2
    assert sum(ell * n for ell, n in s.degree_hist.items()) == 2 * s.num_edges
    assert s.triples == sum(n * ell * (ell - 1) // 2 for ell, n in s.degree_hist.items())
    assert 0 <= s.c1 <= 1 and 0 <= s.c2 <= 1


def test_triangle_counts_kernel():
    assert triangle_counts(4, [(0, 1), (0, 2), (1, 2), (0, 3)]).tolist() == [1, 1, 1, 0]
    k4 = [(a, b) for a in range(4) for b in range(a + 1, 4)]
    assert triangle_counts(4, k4).tolist() == [3, 3, 3, 3]


@pytest.mark.parametrize("mode", ["edge_choice", "two_stage"])
def test_export_import_round_trip(mode):
    g = run(ModelParams(0.5, 0.0, mode, seed=4), 2000)
    text = export_graph(g)
    h = import_graph(text)
    assert h.params == g.params
    assert (h.edges == g.edges).all()
    assert (h.degrees == g.degrees).all()
    assert (h.tri_count == g.tri_count).all()
    assert h.alpha_steps == g.alpha_steps
    assert export_graph(h) == text
    assert stats_mismatches(snapshot_stats(h), snapshot_stats(g)) == []


def test_imported_graph_keeps_growing():
    p = ModelParams(0.5, 1.0, seed=6)
    h = import_graph(export_graph(run(p, 500)))
    h.advance(100, np.random.default_rng(0))
    assert h.num_steps == 600
    assert stats_mismatches(snapshot_stats(h), brute_force_stats(h)) == []


def test_read_graph(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text(export_graph(run(ModelParams(0.2, 0.3, seed=2), 50)))
    assert read_graph(path).num_steps == 50


@pytest.mark.parametrize("text,lineno", [
    (HEADER + "\n", None),                                  # empty body
    (HEADER + "\n1 2\n1 3\n2 1\n", 4),                      # duplicate edge, reversed
    ("# colour=blue\n1 2\n1 3\n", 1),                       # unknown header
    (HEADER + "\n1 2\n1 4\n", None),                        # ids not 1..3
    (HEADER + "\n1 2\n1 x\n", 3),                           # malformed
    (HEADER + "\n1 2\n0 3\n", 3),                           # zero id
    (HEADER + "\n1 2\n3 3\n", 3),                           # self-loop
    ("1 2\n1 3\n", None),                                   # no header
    (HEADER + "\n" + HEADER + "\n1 2\n1 3\n", 2),           # repeated header
])
def test_import_errors(text, lineno):
    with pytest.raises(GraphFormatError) as info:
        import_graph(text)
    assert info.value.line == lineno
    if lineno is not None:
        assert str(info.value).startswith(f"line {lineno}: ")


def test_csv_rendering(k3_pendant):
    s = snapshot_stats(k3_pendant, joint=True)
    lines = stats_csv([s]).splitlines()
    assert lines[0] == "t,num_edges,triangles,triples,c1,c2"
    assert lines[1].split(",")[:4] == ["2", "4", "1", "5"]
    assert float(lines[1].split(",")[5]) == 0.6
    assert degree_hist_csv(s.degree_hist) == "l,count\n1,1\n2,2\n3,1\n"
    assert joint_hist_csv({(1, 2): 2, (2, 1): 2}) == "l,m,count\n1,2,2\n2,1,2\n"


def test_make_graph_counts_match(k3_pendant):
    assert k3_pendant.alpha_steps == 1
    assert make_graph([(0, 1), (0, 2)]).alpha_steps == 0
