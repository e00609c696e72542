import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kwgraph.graph import (
    Graph,
    GraphDataError,
    Node,
    WeightScheme,
    apply_weight_scheme,
    graph_from_edges,
    inverse_importance,
    load_graph,
    normalization_constants,
    transform_combined,
    transform_node_importance,
    write_graph,
)


@pytest.mark.parametrize("imp,expected", [(1.0, 1.0), (0.5, 2.0), (0.1, 10.0)])
def test_inverse_importance(imp, expected):
    assert inverse_importance(Node(0, imp, "t", "")) == pytest.approx(expected, rel=1e-15)
    assert inverse_importance(imp) == pytest.approx(expected, rel=1e-15)


def test_logarithmic_weights():
    # 0-1 with both endpoints of degree 1
    g = graph_from_edges(2, [(0, 1, 7.0)])
    assert apply_weight_scheme(g, WeightScheme("logarithmic")).edge_w.tolist() == [1.0]
    # star: centre degree 3, leaves degree 1
    g = graph_from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
    assert apply_weight_scheme(g, WeightScheme("logarithmic")).edge_w.tolist() == [1.5] * 3


def test_equal_and_semantic_weights():
    g = graph_from_edges(3, [(0, 1, 0.7), (1, 2, 0.3)])
    assert apply_weight_scheme(g, WeightScheme("equal", 0.1)).edge_w.tolist() == [0.1, 0.1]
    assert apply_weight_scheme(g, WeightScheme("semantic")).edge_w.tolist() == [0.7, 0.3]


def test_scheme_parsing():
    assert WeightScheme.parse("equal:0.1") == WeightScheme("equal", 0.1)
    assert WeightScheme.parse("log").kind == "logarithmic"
    with pytest.raises(ValueError):
        WeightScheme("equal", 0.0)
    with pytest.raises(ValueError):
        WeightScheme.parse("cosine")


def _pair(imp_u, imp_v, w):
    return Graph([imp_u, imp_v], [0], [1], [w])


def test_transform_combined_examples():
    g = _pair(0.5, 0.25, 0.1)
    assert transform_combined(g, 0.5).edge_w[0] == pytest.approx(3.1, rel=1e-15)
    assert transform_combined(g, 0.0).edge_w[0] == 0.2
    assert transform_combined(g, 1.0).edge_w[0] == 6.0


def test_transform_node_importance_examples():
    assert transform_node_importance(_pair(1.0, 1.0, 0.3)).edge_w[0] == 2.0
    assert transform_node_importance(_pair(0.5, 0.25, 0.3)).edge_w[0] == 6.0


def test_lambda_range():
    with pytest.raises(ValueError):
        transform_combined(_pair(1, 1, 1), 1.5)


graphs = st.integers(2, 12).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n),
    st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.floats(0.0, 5.0)),
             max_size=30),
))


def _make(case):
    n, imp, edges = case
    return Graph(imp, [e[0] for e in edges], [e[1] for e in edges], [e[2] for e in edges])


@settings(max_examples=60, deadline=None)
@given(graphs, st.floats(0.0, 1.0))
def test_transform_properties(case, lam):
    g = _make(case)
    g1 = transform_combined(g, 1.0)
    g2 = transform_node_importance(g)
    assert np.array_equal(g1.edge_w, g2.edge_w)
    assert np.array_equal(transform_combined(g, 0.0).edge_w, 2.0 * g.edge_w)
    gl = transform_combined(g, lam)
    assert np.array_equal(gl.edge_u, g.edge_u) and np.array_equal(gl.indptr, g.indptr)
    if lam > 0:
        assert (gl.edge_w > 0).all()


@settings(max_examples=60, deadline=None)
@given(graphs)
def test_adjacency_symmetric_and_deduped(case):
    g = _make(case)
    seen = {}
    for v in range(g.n):
        nbrs = [u for u, _ in g.neighbors(v)]
        assert v not in nbrs
        assert len(nbrs) == len(set(nbrs))
        for u, w in g.neighbors(v):
            seen[(v, u)] = w
    for (v, u), w in seen.items():
        assert seen[(u, v)] == w
    # duplicates keep the lightest weight
    n, _, edges = case
    best = {}
    for a, b, w in edges:
        if a != b:
            k = (min(a, b), max(a, b))
            best[k] = min(best.get(k, math.inf), w)
    assert {(u, v): w for u, v, w in zip(g.edge_u.tolist(), g.edge_v.tolist(),
                                         g.edge_w.tolist())} == best


@settings(max_examples=30, deadline=None)
@given(graphs)
def test_scheme_idempotence(case):
    g = _make(case)
    for s in (WeightScheme("equal", 0.25), WeightScheme("semantic"), WeightScheme("logarithmic")):
        once = apply_weight_scheme(g, s)
        assert np.array_equal(apply_weight_scheme(once, s).edge_w, once.edge_w)


def test_normalization_constants():
    g = graph_from_edges(3, [(0, 1, 0.1), (1, 2, 0.1)])
    nc = normalization_constants(g)
    assert nc.ew_scale == pytest.approx(10.0)
    assert nc.ni_scale == 1.0
    edgeless = Graph([0.5, 1.0])
    assert normalization_constants(edgeless).ew_scale == 1.0


def test_normalization_mixed_by_direct_averaging(tmp_path, rng):
    n = 40
    imp = rng.uniform(0.05, 1.0, n)
    edges = [(i, (i * 7 + 3) % n, float(rng.uniform(0.1, 2))) for i in range(n)]
    g = Graph(imp, *zip(*[(a, b, w) for a, b, w in edges]))
    write_graph(g, tmp_path / "n.tsv", tmp_path / "e.tsv")
    # independent pass over the written files
    ws = [float(line.split("\t")[2]) for line in open(tmp_path / "e.tsv")]
    ips = [1.0 / float(line.split("\t")[1]) for line in open(tmp_path / "n.tsv")]
    nc = normalization_constants(g)
    assert nc.ew_scale == pytest.approx(len(ws) / sum(ws), rel=1e-12)
    assert nc.ni_scale == pytest.approx(len(ips) / sum(ips), rel=1e-12)


def test_importance_out_of_range():
    for bad in (0.0, -0.1, 1.5, float("nan")):
        with pytest.raises(GraphDataError):
            Graph([1.0, bad])


def test_self_loop_dropped_with_warning(caplog):
    g = graph_from_edges(2, [(0, 0, 1.0), (0, 1, 2.0)])
    assert g.m == 1
    assert "self-loop" in caplog.text


def test_negative_weight_rejected():
    with pytest.raises(GraphDataError):
        graph_from_edges(2, [(0, 1, -1.0)])


def test_tsv_roundtrip(tmp_path, movie):
    write_graph(movie, tmp_path / "n.tsv", tmp_path / "e.tsv")
    g = load_graph(tmp_path / "n.tsv", tmp_path / "e.tsv")
    assert g.texts == movie.texts and g.node_types == movie.node_types
    assert np.array_equal(g.edge_w, movie.edge_w)
    assert np.array_equal(g.importance, movie.importance)


@pytest.mark.parametrize("nodes,edges,line", [
    ("0\t0.5\tt\ta\n1\tx\tt\tb\n", "", 2),
    ("0\t0.5\tt\ta\n2\t0.5\tt\tb\n", "", 2),
    ("0\t0.5\tt\ta\n1\t1.5\tt\tb\n", "", 2),
    ("0\t0.5\tt\ta\n1\t0.5\tt\tb\n", "0\t1\t1\n0\t7\t1\n", 2),
    ("0\t0.5\tt\ta\n1\t0.5\tt\tb\n", "0\t1\n", 1),
])
def test_ingestion_errors_report_line(tmp_path, nodes, edges, line):
    (tmp_path / "n.tsv").write_text(nodes)
    (tmp_path / "e.tsv").write_text(edges)
    with pytest.raises(GraphDataError) as ei:
        load_graph(tmp_path / "n.tsv", tmp_path / "e.tsv")
    assert ei.value.line == line


def test_weight_column_optional_for_equal(tmp_path):
    (tmp_path / "n.tsv").write_text("0\t0.5\tt\ta\n1\t0.5\tt\t\n")
    (tmp_path / "e.tsv").write_text("0\t1\n")
    g = load_graph(tmp_path / "n.tsv", tmp_path / "e.tsv", WeightScheme("equal", 0.1))
    assert g.edge_w.tolist() == [0.1]
    assert g.texts[1] == ""
