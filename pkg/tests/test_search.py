import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kwgraph import hop2
from kwgraph.graph import Graph, NormalizationConstants, graph_from_edges
from kwgraph.search import (
    AnswerTree,
    ExactTooLarge,
    Method,
    NoMatchError,
    Query,
    Scores,
    SearchContext,
    assemble_tree,
    combine,
    exact_exhaustive,
    greedy_replace,
    greedy_unique_root,
    objective_combined,
    objective_ew,
    objective_ni,
    pivot_keyword,
    rank_topk,
    search,
)
from kwgraph.textindex import KeywordPhrase

from instances import keyword_instance, unit_instance
from oracles import all_pairs, best_subtree, is_tree

UNIT = NormalizationConstants(1.0, 1.0)
KW = (KeywordPhrase.parse("x"), KeywordPhrase.parse("y"))


def _tree(root, nodes, edges, content=()):
    return AnswerTree(root, KW[: len(content)], tuple(content), tuple(nodes), tuple(edges),
                      Scores(0, 0, 0, 0))


def _texts_graph(n, edges, texts, importance=None):
    g = graph_from_edges(n, edges, importance=importance)
    return Graph(g.importance, g.edge_u, g.edge_v, g.edge_w, texts=texts)


# -- objectives ------------------------------------------------------------------

def test_objective_examples():
    g = graph_from_edges(3, [(0, 1, 0.1), (1, 2, 0.1)], importance=[1.0, 0.5, 1.0])
    t = _tree(0, (0, 1, 2), ((0, 1), (1, 2)))
    assert objective_ew(t, g) == pytest.approx(0.2, abs=1e-15)
    assert objective_ew(_tree(1, (1,), ()), g) == 0
    assert objective_ni(_tree(0, (0, 1), ((0, 1),)), g) == 3.0


def test_combined_examples():
    assert combine(2.0, 4.0, 0.5, UNIT) == 3.0
    assert combine(2.0, 4.0, 0.0, UNIT) == 2.0
    assert combine(2.0, 4.0, 1.0, UNIT) == 4.0
    assert combine(1.0, 1.0, 0.5, NormalizationConstants(4.0, 2.0)) == 3.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_objectives_match_recount(seed):
    r = np.random.default_rng(seed)
    ctx, kws = keyword_instance(seed, n_range=(10, 40))
    q = Query.of(kws, Method.COMBINED1, lam=float(r.uniform()))
    for t in greedy_unique_root(q, ctx):
        g = ctx.g
        ew = sum(float(w) for u, v, w in zip(g.edge_u, g.edge_v, g.edge_w)
                 if (int(u), int(v)) in set(t.edges))
        ni = sum(1.0 / float(g.importance[v]) for v in t.nodes)
        assert objective_ew(t, g) == pytest.approx(ew, rel=1e-12)
        assert objective_ni(t, g) == pytest.approx(ni, rel=1e-12)
        assert t.scores.c == pytest.approx(objective_combined(t, g, q.lam, ctx.norm), rel=1e-12)
        assert t.scores.c == pytest.approx(
            q.lam * ni * ctx.norm.ni_scale + (1 - q.lam) * ew * ctx.norm.ew_scale, rel=1e-12)


# -- greedy 1 --------------------------------------------------------------------

def test_star_graph():
    g = _texts_graph(3, [(0, 1, 1.0), (0, 2, 1.0)], ["centre", "x", "y"])
    ctx = SearchContext(g)
    res = greedy_unique_root(Query.of(["x", "y"], Method.EDGE, k=3), ctx)
    # every root sees x and y at a summed distance of 2; id breaks the tie
    assert [t.root for t in res] == [0, 1, 2]
    assert [t.scores.search_score for t in res] == [2.0, 2.0, 2.0]
    assert res[0].edges == ((0, 1), (0, 2))
    assert res[0].assignment == {"x": 1, "y": 2}


def test_single_node_holds_all_keywords(backend):
    g = _texts_graph(3, [(0, 1, 1.0), (1, 2, 1.0)], ["a", "x y", "b"])
    ctx = SearchContext(g, backend=backend)
    for m in (Method.EDGE, Method.COMBINED1, Method.COMBINED2, Method.EXACT):
        top = search(Query.of(["x", "y"], m, k=1), ctx)[0]
        assert (top.root, top.nodes, top.edges) == (1, (1,), ())
        assert top.scores.ew == 0
    assert greedy_unique_root(Query.of(["x", "y"], Method.EDGE), ctx)[0].scores.search_score == 0


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("method", [Method.EDGE, Method.NODEIMP, Method.COMBINED1])
def test_unique_root_scores_against_dijkstra(seed, method):
    ctx, kws = keyword_instance(seed, n_range=(40, 120))
    q = Query.of(kws, method, lam=0.3, k=6)
    res = greedy_unique_root(q, ctx)
    kind = {"edge": "edge", "nodeimp": "importance", "combined1": "combined"}[method.value]
    D = all_pairs(ctx.search_graph(kind, q.lam if kind == "combined" else None))
    total = np.zeros(ctx.g.n)
    for s in ctx.content_sets(q.keywords):
        total += D[:, s].min(axis=1)
    expect = np.sort(total)[: q.k]
    assert np.allclose([t.scores.search_score for t in res], expect, rtol=0, atol=1e-9)
    for t in res:
        assert abs(total[t.root] - t.scores.search_score) <= 1e-9


def test_nomatch_names_keyword(movie):
    ctx = SearchContext(movie)
    with pytest.raises(NoMatchError, match="zebra"):
        search(Query.of(["matrix", "zebra"], Method.COMBINED1), ctx)


def test_disconnected_within_dmax_gives_empty():
    g = _texts_graph(3, [(0, 1, 1.0), (1, 2, 1.0)], ["x", "", "y"])
    ctx = SearchContext(g, d_max={("edge", None): 0.5})
    assert greedy_unique_root(Query.of(["x", "y"], Method.EDGE), ctx) == []


def test_edgeless_graph():
    ctx = SearchContext(Graph([1.0, 1.0], texts=["x", "y"]))
    assert search(Query.of(["x", "y"], Method.EDGE), ctx) == []
    assert search(Query.of(["x", "y"], Method.COMBINED2), ctx) == []


def test_query_validation():
    with pytest.raises(ValueError):
        Query.of(["a"], lam=1.5)
    with pytest.raises(ValueError):
        Query.of([])
    with pytest.raises(ValueError):
        Query.of(["a"], k=0)
    assert Query.of(["a"], "EdgeOnly").method is Method.EDGE


# -- greedy 2 --------------------------------------------------------------------

def test_pivot_keyword_ties():
    kws = [KeywordPhrase.parse(x) for x in ("b c", "b", "a")]
    assert pivot_keyword(kws, [[1], [2, 3], [4]]) == 2  # smallest set, then fewer tokens
    assert pivot_keyword(kws, [[1], [2], [3]]) == 2  # "a" < "b" lexicographically
    assert pivot_keyword(kws, [[1, 2], [3, 4], [5, 6, 7]]) == 1


def _replace_fixture():
    """alpha at 0; beta at 1 (adjacent, unimportant) and at 4 (three hops, important).

    Importance graph distances from 0: node 1 -> 1 + 4 = 5, node 4 -> 2 + 2 + 2 = 6,
    so the replace loop starts on node 1 and must swap to node 4 when lambda is
    large enough.
    """
    imp = [1.0, 0.25] + [1.0] * 8
    edges = [(0, 1, 0.1), (0, 2, 0.1), (2, 3, 0.1), (3, 4, 0.1), (4, 5, 0.1),
             (5, 6, 0.1), (6, 7, 0.1), (7, 8, 0.1), (8, 9, 0.1)]
    texts = ["alpha", "beta", "", "", "beta", "", "", "", "", ""]
    return _texts_graph(10, edges, texts, importance=imp)


@pytest.mark.parametrize("lam", [0.0, 0.25, 0.5, 0.9, 1.0])
def test_replace_loop_against_subtree_oracle(lam):
    g = _replace_fixture()
    ctx = SearchContext(g)
    trace = []
    q = Query.of(["alpha", "beta"], Method.COMBINED2, lam=lam)
    top = greedy_replace(q, ctx, trace)[0]
    val, nodes, edges = best_subtree(g, [[0], [1, 4]], lam, ctx.norm)
    assert top.scores.c == pytest.approx(val, rel=1e-12)
    assert top.nodes == nodes and top.edges == edges
    assert trace[0][0] == pytest.approx(combine(0.1, 5.0, lam, ctx.norm))


def test_replace_loop_adopts_important_node():
    ctx = SearchContext(_replace_fixture())
    trace = []
    top = greedy_replace(Query.of(["alpha", "beta"], Method.COMBINED2, lam=0.9), ctx, trace)[0]
    assert top.assignment == {"alpha": 0, "beta": 4}
    assert len(trace[0]) == 2 and trace[0][1] < trace[0][0]
    trace = []
    top = greedy_replace(Query.of(["alpha", "beta"], Method.COMBINED2, lam=0.1), ctx, trace)[0]
    assert top.assignment == {"alpha": 0, "beta": 1}
    assert trace == [[trace[0][0]]]


def test_single_content_nodes_no_rounds():
    g = _texts_graph(5, [(0, 1, 0.3), (1, 2, 0.2), (2, 3, 0.4), (3, 4, 0.1)],
                     ["x", "", "", "y", ""], importance=[0.5, 0.9, 0.2, 1.0, 0.7])
    ctx = SearchContext(g)
    trace = []
    q = Query.of(["x", "y"], Method.COMBINED2, lam=0.5)
    res = greedy_replace(q, ctx, trace)
    assert trace == [[res[0].scores.c]]
    ix = ctx.index("importance")
    direct = assemble_tree(0, q.keywords, [0, 3], ix, ctx.search_graph("importance"), g,
                           0.5, ctx.norm)
    assert (res[0].nodes, res[0].edges) == (direct.nodes, direct.edges)
    # on a tree every path is forced, so the exhaustive optimum coincides
    assert exact_exhaustive(q, ctx)["c"][0].scores.c == pytest.approx(res[0].scores.c)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_replace_monotone(seed, lam):
    ctx, kws = keyword_instance(seed, n_range=(20, 80), per_keyword=(2, 5))
    trace = []
    greedy_replace(Query.of(kws, Method.COMBINED2, lam=lam, delta=0.0, max_iters=8), ctx, trace)
    for hist in trace:
        assert all(b < a for a, b in zip(hist, hist[1:]))


# -- exhaustive --------------------------------------------------------------------

def test_exact_matches_subtree_oracle_on_tree_fixture():
    g = _replace_fixture()
    ctx = SearchContext(g)
    for lam in (0.0, 0.5, 1.0):
        ex = exact_exhaustive(Query.of(["alpha", "beta"], Method.EXACT, lam=lam), ctx)
        assert ex["c"][0].scores.c == pytest.approx(best_subtree(g, [[0], [1, 4]], lam,
                                                                 ctx.norm)[0])
        assert ex["ew"][0].scores.ew == pytest.approx(0.1)
        assert ex["ni"][0].scores.ni == pytest.approx(4.0)


@pytest.mark.parametrize("seed", range(10))
def test_exact_dominance(seed):
    ctx, kws = keyword_instance(seed, n_range=(20, 60))
    for lam in (0.0, 0.5, 1.0):
        base = dict(lam=lam, k=3)
        ex = exact_exhaustive(Query.of(kws, Method.EXACT, **base), ctx)
        for m in (Method.EDGE, Method.NODEIMP, Method.COMBINED1, Method.COMBINED2):
            for t in search(Query.of(kws, m, **base), ctx):
                assert ex["ew"][0].scores.ew <= t.scores.ew + 1e-9
                assert ex["ni"][0].scores.ni <= t.scores.ni + 1e-9
                assert ex["c"][0].scores.c <= t.scores.c + 1e-9


def test_exact_never_beats_true_optimum():
    # small dense graph: every subtree enumerated by brute force
    r = np.random.default_rng(5)
    edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (3, 4), (4, 5), (5, 1)]
    g = _texts_graph(6, [(a, b, float(r.uniform(0.2, 1))) for a, b in edges],
                     ["x", "", "y", "", "x", "y"],
                     importance=list(r.uniform(0.2, 1, 6)))
    ctx = SearchContext(g)
    for lam in (0.0, 0.3, 0.7, 1.0):
        ex = exact_exhaustive(Query.of(["x", "y"], Method.EXACT, lam=lam), ctx)["c"][0]
        opt = best_subtree(g, [[0, 4], [2, 5]], lam, ctx.norm)[0]
        assert ex.scores.c >= opt - 1e-12


def test_exact_refuses_large():
    ctx, kws = keyword_instance(1, n_range=(50, 50))
    with pytest.raises(ExactTooLarge):
        exact_exhaustive(Query.of(kws, Method.EXACT), ctx, limit=10)


# -- assembly and ranking --------------------------------------------------------------

def test_assemble_shared_prefix():
    g = graph_from_edges(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (2, 4, 1.0)])
    ix = hop2.build(g, math.inf)
    t = assemble_tree(0, KW, [3, 4], ix, g, g, 0.5, UNIT)
    assert t.nodes == (0, 1, 2, 3, 4)
    assert t.edges == ((0, 1), (1, 2), (2, 3), (2, 4))
    assert t.scores.ni == 5.0 and t.scores.ew == 4.0
    one = assemble_tree(3, KW[:1], [3], ix, g, g, 0.5, UNIT)
    assert (one.nodes, one.edges) == ((3,), ())


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_trees_valid(seed):
    ctx, kws = keyword_instance(seed, n_range=(10, 60), weights=(0.5, 1.5))
    q_kw = [KeywordPhrase.parse(k) for k in kws]
    sets = ctx.content_sets(q_kw)
    for m in (Method.EDGE, Method.COMBINED1, Method.COMBINED2):
        for t in search(Query.of(kws, m, k=4), ctx):
            assert is_tree(t.nodes, t.edges)
            assert all(c in s for c, s in zip(t.content, sets))
            assert t.root in t.nodes and set(t.content) <= set(t.nodes)
            deg = {v: 0 for v in t.nodes}
            for u, v in t.edges:
                deg[u] += 1
                deg[v] += 1
            leaves = {v for v, d in deg.items() if d <= 1}
            assert leaves <= set(t.content) | {t.root}


def _cands():
    mk = lambda r, s: AnswerTree(r, KW[:1], (r,), (r,), (), Scores(s, s, s, s))
    return [mk(3, 1.0), mk(1, 2.0), mk(3, 0.5), mk(2, 1.0), mk(0, 2.0)]


def test_rank_topk_basic():
    obj = lambda t: t.scores.c
    res = rank_topk(_cands(), 10, obj)
    assert [(t.root, t.scores.c) for t in res] == [(3, 0.5), (2, 1.0), (0, 2.0), (1, 2.0)]
    assert [t.root for t in rank_topk(_cands(), 2, obj)] == [3, 2]


def test_rank_topk_permutation_invariant():
    base = rank_topk(_cands(), 3, lambda t: t.scores.c)
    for s in range(20):
        c = _cands()
        random.Random(s).shuffle(c)
        assert rank_topk(c, 3, lambda t: t.scores.c) == base


# -- properties over the random suite ------------------------------------------------

@pytest.mark.parametrize("seed", range(6))
def test_unit_graph_identity(seed):
    ctx, kws = unit_instance(seed)
    for m in Method:
        if m is Method.EXACT:
            continue
        for t in search(Query.of(kws, m, k=5), ctx):
            assert t.scores.ni == t.scores.ew + 1


@pytest.mark.parametrize("seed", range(8))
def test_lambda_extremes(seed):
    ctx, kws = keyword_instance(seed, n_range=(30, 150))
    roots = lambda m, lam: [(t.root, t.scores.search_score)
                            for t in search(Query.of(kws, m, lam=lam, k=8), ctx)]
    assert roots(Method.COMBINED1, 1.0) == roots(Method.NODEIMP, 0.5)
    c0 = roots(Method.COMBINED1, 0.0)
    e = roots(Method.EDGE, 0.0)
    assert [r for r, _ in c0] == [r for r, _ in e]
    assert [s for _, s in c0] == [2 * s for _, s in e]


def test_deterministic_across_backends_and_reruns():
    ctx, kws = keyword_instance(3, n_range=(120, 120))
    runs = []
    for backend in hop2.available_backends():
        for _ in range(2):
            c = SearchContext(ctx.g, backend=backend)
            runs.append([(t.root, t.content, t.nodes, t.edges, t.scores)
                         for m in (Method.EDGE, Method.COMBINED1, Method.COMBINED2)
                         for t in search(Query.of(kws, m, k=5), c)])
    assert all(r == runs[0] for r in runs)


# -- the 11-node movie fixture --------------------------------------------------------------

TREE_A = ((0, 5), (1, 6), (5, 7), (6, 7))  # via the Birth Date info node
TREE_B = ((0, 2), (1, 3), (2, 4), (3, 4))  # via The Matrix
ACTORS = ["keanu reeves", "laurence fishburne"]


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75, 1.0])
@pytest.mark.parametrize("method", [Method.COMBINED1, Method.COMBINED2])
def test_movie_greedy_prefers_matrix(movie, lam, method):
    ctx = SearchContext(movie)
    res = search(Query.of(ACTORS, method, lam=lam, k=11), ctx)
    assert res[0].edges == TREE_B
    where = [i for i, t in enumerate(res) if t.edges == TREE_A]
    assert all(i > 0 for i in where)
    ranked = sorted(res, key=lambda t: t.scores.c)
    assert ranked[0].edges == TREE_B


def test_movie_edge_only_cannot_tell(movie):
    ctx = SearchContext(movie)
    res = {t.root: t for t in search(Query.of(ACTORS, Method.EDGE, k=11), ctx)}
    a, b = res[7], res[4]
    assert a.edges == TREE_A and b.edges == TREE_B
    assert a.scores.search_score == b.scores.search_score
    assert a.scores.ew == b.scores.ew
    assert a.scores.ni > b.scores.ni
