import networkx as nx
import numpy as np
import pytest

from app.analysis import (
    CutReport,
    analyze,
    clustering_coefficient,
    components_from_edges,
    connected_components,
    degree_tail_table,
    fit_loglog_slope,
    hyperplane_separator,
    is_delta_eta_cut,
    local_clustering,
    probe_cuts,
    separator_components,
    sparse_cut_probe,
    stochastic_triangle_check,
)
from app.config import make_params
from app.errors import PreconditionError
from app.girg_sampler import sample_girg
from tests.conftest import L1, MCD2, SCOM3, build_instance


def _nx_graph(instance):
    g = nx.Graph()
    g.add_nodes_from(range(instance.n))
    g.add_edges_from(instance.edges.tolist())
    return g


# ---------- COMPONENTS ----------

@pytest.mark.parametrize("n,edges,sizes", [
    (3, [], [1, 1, 1]),
    (3, [(0, 1), (1, 2)], [3]),
    (4, [(0, 1), (2, 3)], [2, 2]),
])
def test_component_examples(n, edges, sizes):
    assert components_from_edges(n, np.array(edges).reshape(-1, 2)).sizes == sizes


def test_largest_component_tie_goes_to_smaller_label():
    comps = components_from_edges(4, np.array([(2, 3), (0, 1)]))
    assert comps.largest().tolist() == [0, 1]
    assert comps.component_of(3).tolist() == [2, 3]


def test_components_match_networkx():
    g = np.random.default_rng(21)
    for _ in range(10):
        n = int(g.integers(1, 200))
        m = int(g.integers(0, 2 * n))
        inst = build_instance(n, g.integers(0, n, (m, 2)))
        expected = sorted((len(c) for c in nx.connected_components(_nx_graph(inst))), reverse=True)
        assert connected_components(inst).sizes == expected


# ---------- DEGREES ----------

def test_degree_tail_star():
    inst = build_instance(4, [(0, 1), (0, 2), (0, 3)])
    tail = degree_tail_table(inst, thresholds=[1, 2, 3])
    assert [c for _, c in tail.rows] == [4, 1, 1]


def test_fit_loglog_slope():
    assert fit_loglog_slope([1, 2, 4], [8, 4, 2]) == pytest.approx(-1.0)
    assert fit_loglog_slope([1], [3]) is None
    assert fit_loglog_slope([], []) is None


# ---------- CLUSTERING ----------

def test_clustering_examples():
    assert clustering_coefficient(build_instance(3, [(0, 1), (1, 2), (0, 2)])) == pytest.approx(1.0)
    assert clustering_coefficient(build_instance(3, [(0, 1), (1, 2)])) == 0.0
    k4_minus = build_instance(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    assert clustering_coefficient(k4_minus) == pytest.approx(5 / 6)


def test_clustering_matches_networkx():
    inst = sample_girg(make_params(n=300, seed=6), MCD2)
    g = _nx_graph(inst)
    assert clustering_coefficient(inst) == pytest.approx(nx.average_clustering(g))
    expected = nx.clustering(g)
    assert local_clustering(inst) == pytest.approx(np.array([expected[v] for v in range(inst.n)]))


# ---------- CUTS ----------

def test_hyperplane_separator_examples():
    same = build_instance(2, [(0, 1)], positions=[[0.1], [0.4]])
    assert hyperplane_separator(same, 1).cross_edges == 0
    assert hyperplane_separator(same, 1).side_sizes == (2, 0)
    split = build_instance(2, [(0, 1)], positions=[[0.1], [0.6]])
    rep = hyperplane_separator(split, 1)
    assert rep.cross_edges == 1
    assert rep.side_sizes == (1, 1)


def test_hyperplane_separator_rejects_bad_coordinate():
    inst = build_instance(2, [(0, 1)])
    with pytest.raises(PreconditionError):
        hyperplane_separator(inst, 2)


def test_separator_removes_crossing_edges():
    inst = build_instance(4, [(0, 1), (1, 2), (2, 3)], positions=[[0.1], [0.2], [0.6], [0.7]])
    rep = hyperplane_separator(inst, 1)
    assert rep.cross_edges == 1
    parts = separator_components(inst, rep, delta=0.1)
    assert parts["lower"] == [2, 0]
    assert parts["upper"] == [2, 0]
    assert not parts["small_side_flag"]
    assert separator_components(inst, rep, delta=0.6)["small_side_flag"]


def test_scom_separator_leaves_no_crossing_component():
    inst = sample_girg(make_params(n=400, seed=2), SCOM3)
    rep = hyperplane_separator(inst, 1)
    side = np.mod(inst.positions[:, 0], 1.0) >= 0.5
    kept = [e for e in inst.edges.tolist() if side[e[0]] == side[e[1]]]
    comps = components_from_edges(inst.n, np.array(kept).reshape(-1, 2))
    for label in np.unique(comps.labels):
        assert len(np.unique(side[comps.members(int(label))])) == 1
    assert rep.cross_edges == len(inst.edges) - len(kept)


def test_is_delta_eta_cut():
    rep = CutReport(side_sizes=(2, 2), cross_edges=1, family="hyperplane", coordinate=1)
    assert is_delta_eta_cut(rep, 4, delta=0.5, eta=0.25)
    assert not is_delta_eta_cut(rep, 4, delta=0.5, eta=0.2)
    assert not is_delta_eta_cut(rep, 4, delta=0.6, eta=0.25)


def test_sparse_cut_probe_finds_path_cut():
    n = 8
    inst = build_instance(n, [(i, i + 1) for i in range(n - 1)])
    assert len(probe_cuts(inst)) == 8
    best = sparse_cut_probe(inst)
    assert best.cross_edges == 1
    assert best.offset == 0.0
    assert best.normalized(n) == pytest.approx(1 / 8)
    assert sparse_cut_probe(inst, delta=0.9) is None


# ---------- TRIANGLE CHECK ----------

def test_triangle_check_on_single_leaf():
    rows = stochastic_triangle_check(L1, [0.1], samples=5_000, seed=3)
    assert rows[0]["pr_estimate"] == 1.0
    assert rows[0]["volume_ratio"] == pytest.approx(0.5)
    assert rows[0]["box_fraction"] == pytest.approx(1.0)


def test_triangle_check_rejects_large_epsilon():
    with pytest.raises(PreconditionError):
        stochastic_triangle_check(MCD2, [0.3], samples=10)


@pytest.mark.slow
def test_triangle_check_mcd_small_epsilon():
    rows = stochastic_triangle_check(MCD2, [1e-3], samples=200_000, seed=1)
    assert rows[0]["pr_estimate"] > 0.2
    assert rows[0]["pr_estimate"] >= rows[0]["pr_lower_bound"]


# ---------- REPORT ----------

def test_analyze_scom_report():
    inst = sample_girg(make_params(n=300, seed=1), SCOM3)
    report = analyze(inst)
    m = report["metrics"]
    assert m["scom"] == 1
    assert m["separator_coordinate"] == 1
    assert m["edges"] == len(inst.edges)
    assert m["largest_component"] >= m["second_component"]
    assert report["metadata"]["bdf"] == "max(x1,min(x2,x3))"
    assert report["metadata"]["seed"] == 1


def test_analyze_non_scom_report_has_no_separator():
    inst = sample_girg(make_params(n=200, seed=1), MCD2)
    m = analyze(inst)["metrics"]
    assert m["scom"] == 0
    assert not any(k.startswith("separator_") for k in m)
    assert m["depth"] == 1
    assert m["bound_subset_size"] == 1


def test_analyze_reports_separator_gamma_sum():
    inst = sample_girg(make_params(n=40, seed=3, alpha=3.0), SCOM3)
    m = analyze(inst)["metrics"]
    # depth 2, alpha capped at 1 + 1/2
    expected = 0.0
    w = inst.weights
    for u in range(40):
        for v in range(u + 1, 40):
            expected += min((w[u] * w[v] / 40) ** 0.5, 0.5) ** 3.0
    assert m["separator_gamma_sum"] == pytest.approx(expected, rel=1e-9)


def test_analyze_non_scom_has_no_gamma_sum():
    m = analyze(sample_girg(make_params(n=60, seed=3), MCD2))["metrics"]
    assert "separator_gamma_sum" not in m
