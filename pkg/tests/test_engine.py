import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from triadgraph import metrics
from triadgraph.engine import (
    PA_STEP,
    TRIANGLE_STEP,
    GraphAllocationError,
    GrowthGraph,
    Mode,
    ModelParams,
    ParameterError,
    export_graph,
    new_graph,
    run,
    step,
    step_two_stage,
    write_graph,
)
from triadgraph.sampler import derive_stream
from triadgraph.validation import FIXED_GRAPHS, construction_equivalence, one_step_outcomes

from conftest import K3, make_graph


def test_new_graph_initial_state():
    g = new_graph(ModelParams(0.5, 1.0, Mode.EDGE_CHOICE, 1))
    assert g.degrees.tolist() == [1, 1]
    assert g.edges.tolist() == [[0, 1]]
    assert g.alpha_steps == 0 and g.num_steps == 0 and g.num_edges == 1
    g = new_graph(ModelParams(0.0, 0.0, Mode.TWO_STAGE, 7))
    assert g.degrees.tolist() == [1, 1]


@pytest.mark.parametrize("kwargs", [
    dict(alpha=0.5, delta=1.0, mode="two_stage"),
    dict(alpha=1.5, delta=0.0),
    dict(alpha=-0.1, delta=0.0),
    dict(alpha=0.5, delta=-1.0),
    dict(alpha=0.5, delta=float("nan")),
    dict(alpha=0.5, delta=0.0, seed=-3),
])
def test_invalid_params(kwargs):
    with pytest.raises(ParameterError):
        ModelParams(**kwargs)


@pytest.mark.parametrize("mode", list(Mode))
def test_alpha_one_first_step_is_k3(mode):
    g = new_graph(ModelParams(1.0, 0.0, mode))
    rec = step(g, derive_stream(3))
    assert rec.step_type == TRIANGLE_STEP and sorted(rec.targets) == [0, 1]
    assert g.degrees.tolist() == [2, 2, 2]
    assert g.alpha_steps == 1
    assert g.tri_count.tolist() == [1, 1, 1]


def test_alpha_zero_first_step_fair():
    rng = derive_stream(8)
    hits = 0
    trials = 20_000
    for _ in range(trials):
        rec = step(new_graph(ModelParams(0.0, 2.5)), rng)
        assert rec.step_type == PA_STEP
        hits += rec.targets == (0,)
    assert stats.binomtest(hits, trials, 0.5).pvalue > 1e-3


def test_first_step_law_general_alpha():
    # from G(0): triangle w.p. alpha, else v1 or v2 w.p. (1 - alpha)/2 each
    alpha = 0.3
    g = make_graph([(0, 1)], alpha=alpha, delta=0.7)
    counts = one_step_outcomes(g, derive_stream(21), 200_000)
    n = 2
    observed = [counts[(0 + 1) * (n + 1) + 0], counts[(1 + 1) * (n + 1) + 0], counts[(0 + 1) * (n + 1) + 2]]
    assert sum(observed) == 200_000
    expected = np.array([(1 - alpha) / 2, (1 - alpha) / 2, alpha]) * 200_000
    assert stats.chisquare(observed, expected).pvalue > 1e-3


def test_two_stage_from_k3_uniform_first_target():
    g = make_graph(K3, alpha=0.0, delta=0.0, mode="two_stage")
    counts = one_step_outcomes(g, derive_stream(4), 90_000)
    n = 3
    single = [counts[(u + 1) * (n + 1)] for u in range(3)]
    assert sum(single) == 90_000
    assert stats.chisquare(single).pvalue > 1e-3


def test_step_two_stage_requires_mode():
    with pytest.raises(ParameterError):
        step_two_stage(new_graph(ModelParams(0.5, 0.0)), derive_stream(0))
    rec = step_two_stage(new_graph(ModelParams(1.0, 0.0, "two_stage")), derive_stream(0))
    assert rec.is_triangle


@pytest.mark.parametrize("name", ["path", "triangle_pendant", "six_vertices"])
def test_constructions_equivalent(name):
    assert construction_equivalence(name, FIXED_GRAPHS[name], 0.6, 100_000, 17).passed


def test_run_zero_steps():
    g = run(ModelParams(0.4, 0.0, seed=5), 0)
    assert g.num_vertices == 2 and g.num_edges == 1


@pytest.mark.parametrize("seed", [0, 1, 99])
def test_run_alpha_one(seed):
    g = run(ModelParams(1.0, 2.0, seed=seed), 10)
    assert g.alpha_steps == 10 and g.num_edges == 21


def test_run_triangle_rate():
    g = run(ModelParams(0.5, 1.0, seed=12), 100_000)
    assert 0.49 <= g.alpha_steps / g.num_steps <= 0.51


def test_run_observer_and_log():
    seen = []
    res = run(ModelParams(0.5, -0.5, seed=3), 50, [0, 10, 50], observer=lambda g: seen.append(g.num_steps),
              record_steps=True)
    assert seen == [0, 10, 50]
    log = res.steps
    assert log.shape == (50, 3)
    g = res.graph
    assert (log[:, 0] == TRIANGLE_STEP).sum() == g.alpha_steps
    # logged targets replay to the same degrees
    deg = np.zeros(52, dtype=int)
    deg[[0, 1]] = 1
    for i, (kind, u, w) in enumerate(log):
        new = i + 2
        deg[new] += 1 + (kind == TRIANGLE_STEP)
        deg[u] += 1
        if kind == TRIANGLE_STEP:
            deg[w] += 1
    assert (deg == g.degrees).all()


def test_run_rejects_bad_snapshots():
    with pytest.raises(ValueError):
        run(ModelParams(0.5, 0.0), 10, [11])


def test_determinism():
    p = ModelParams(0.3, -0.4, seed=77)
    a, b = run(p, 5000), run(p, 5000)
    assert (a.endpoints == b.endpoints).all()
    assert (a.tri_count == b.tri_count).all()
    assert export_graph(a) == export_graph(b)
    assert export_graph(run(ModelParams(0.3, -0.4, seed=78), 5000)).split("\n", 1)[1] != export_graph(a).split("\n", 1)[1]


def test_incremental_steps_match_run():
    p = ModelParams(0.5, 1.0, seed=2)
    g = new_graph(p)
    rng = derive_stream(p.seed, 0)
    for _ in range(300):  # crosses several capacity doublings
        step(g, rng)
    assert (g.endpoints == run(p, 300).endpoints).all()


def test_allocation_failure_is_explicit():
    # roughly 10^15 bytes, beyond any address space we run on
    with pytest.raises(GraphAllocationError):
        GrowthGraph(ModelParams(0.5, 0.0), capacity=10**14)
    g = run(ModelParams(0.5, 0.0), 10)
    with pytest.raises(GraphAllocationError):
        g.reserve(10**14)
    assert g.num_steps == 10  # state survives the failed growth
    check_invariants(g)


def test_write_graph_matches_export(tmp_path):
    g = run(ModelParams(0.5, 0.5, seed=1), 1000)
    path = tmp_path / "g.txt"
    write_graph(g, path, chunk=37)
    assert path.read_text() == export_graph(g)
    assert export_graph(g).splitlines()[0] == "# alpha=0.5 delta=0.5 mode=edge_choice seed=1 steps=1000"


def check_invariants(g: GrowthGraph):
    t = g.num_steps
    assert g.num_vertices == t + 2
    assert t + 1 <= g.num_edges <= 2 * t + 1
    assert g.num_edges == 1 + t + g.alpha_steps
    assert g.degrees.sum() == 2 * g.num_edges == len(g.endpoints)
    assert g.tri_count.sum() == 3 * g.alpha_steps
    e = g.edges
    assert (e[:, 0] < e[:, 1]).all()  # older endpoint first, no self-loops
    keys = e[:, 0].astype(np.int64) * g.num_vertices + e[:, 1]
    assert len(np.unique(keys)) == len(keys)
    assert (np.bincount(g.degrees, minlength=len(g.degree_counts)) == g.degree_counts).all()
    assert g.sum_degree_squares == int((g.degrees.astype(np.int64) ** 2).sum())


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(0, 1), delta=st.floats(-0.99, 10), seed=st.integers(0, 2**64 - 1),
       t=st.integers(0, 400))
def test_invariants_property(alpha, delta, seed, t):
    g = run(ModelParams(alpha, delta, seed=seed), t)
    check_invariants(g)
    assert g.alpha_steps == metrics.brute_force_stats(g).triangles


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(0, 1), seed=st.integers(0, 2**32), t=st.integers(0, 300))
def test_two_stage_invariants_property(alpha, seed, t):
    g = run(ModelParams(alpha, 0.0, "two_stage", seed), t)
    check_invariants(g)
    assert g.alpha_steps == metrics.brute_force_stats(g).triangles


@pytest.mark.parametrize("alpha,delta", [(0.3, 2.0), (0.5, 0.0), (0.1, -0.9)])
def test_simple_graphs_many_seeds(alpha, delta):
    for seed in range(100):
        check_invariants(run(ModelParams(alpha, delta, seed=seed), 200))
