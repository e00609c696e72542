"""Answer-tree objectives, the two greedy rankers and the exhaustive reference.

Terminology: a *content node* holds a query keyword; the *root* joins the
content nodes through *middle nodes*.  Every search runs over a transformed
graph whose edge weights already fold in node importance:

* ``edge``        the ingested graph as is (edge-weight ranking);
* ``combined``    ``lam * (1/imp(u) + 1/imp(v)) + 2 * (1 - lam) * w(u, v)``;
* ``importance``  ``1/imp(u) + 1/imp(v)`` (the ``combined`` graph at lam = 1).
"""
from __future__ import annotations

import enum
import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import hop2
from .graph import (
    Graph,
    NormalizationConstants,
    normalization_constants,
    transform_combined,
    transform_node_importance,
)
from .textindex import InvertedIndex, KeywordPhrase, build_inverted_index, content_nodes

EXACT_LIMIT = 10**7


class Method(str, enum.Enum):
    EDGE = "edge"
    NODEIMP = "nodeimp"
    COMBINED1 = "combined1"
    COMBINED2 = "combined2"
    EXACT = "exact"

    @classmethod
    def parse(cls, text: str) -> "Method":
        aliases = {"edgeonly": "edge", "edge-only": "edge", "node-imp": "nodeimp"}
        t = text.strip().lower()
        return cls(aliases.get(t, t))


class NoMatchError(LookupError):
    def __init__(self, keyword: str):
        super().__init__(f"no node contains keyword {keyword!r}")
        self.keyword = keyword


class ExactTooLarge(RuntimeError):
    """The exhaustive search would enumerate more than ``EXACT_LIMIT`` combinations."""


@dataclass(frozen=True)
class Query:
    keywords: tuple[KeywordPhrase, ...]
    method: Method = Method.COMBINED1
    lam: float = 0.5
    k: int = 5
    delta: float = 1e-3
    max_iters: int = 5

    def __post_init__(self):
        if not self.keywords:
            raise ValueError("query needs at least one keyword")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lam!r}")
        if self.k < 1 or self.max_iters < 1:
            raise ValueError("k and max_iters must be positive")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")

    @classmethod
    def of(cls, keywords: Iterable[str], method: Method | str = Method.COMBINED1,
           **kw) -> "Query":
        if isinstance(method, str):
            method = Method.parse(method)
        return cls(tuple(KeywordPhrase.parse(k) for k in keywords), method, **kw)


@dataclass(frozen=True)
class Scores:
    ew: float
    ni: float
    c: float
    search_score: float


@dataclass(frozen=True)
class AnswerTree:
    root: int
    keywords: tuple[KeywordPhrase, ...]
    content: tuple[int, ...]  # aligned with ``keywords``
    nodes: tuple[int, ...]  # ascending, deduplicated
    edges: tuple[tuple[int, int], ...]  # (u, v) with u < v, ascending
    scores: Scores = field(compare=False)

    @property
    def assignment(self) -> dict[str, int]:
        return {kw.raw: c for kw, c in zip(self.keywords, self.content)}


# -- objectives ----------------------------------------------------------------

def objective_ew(t: AnswerTree, g: Graph) -> float:
    return math.fsum(g.edge_weight(u, v) for u, v in t.edges)


def objective_ni(t: AnswerTree, g: Graph) -> float:
    ip = g.inverse_importance
    return math.fsum(float(ip[v]) for v in t.nodes)


def combine(ew: float, ni: float, lam: float, norm: NormalizationConstants) -> float:
    return lam * (ni * norm.ni_scale) + (1.0 - lam) * (ew * norm.ew_scale)


def objective_combined(t: AnswerTree, g: Graph, lam: float,
                       norm: NormalizationConstants) -> float:
    return combine(objective_ew(t, g), objective_ni(t, g), lam, norm)


# -- tree assembly -----------------------------------------------------------

def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def _span_tree(root: int, edges: set[tuple[int, int]], weight: Callable[[int, int], float],
               targets: Sequence[int]) -> set[tuple[int, int]]:
    """Shortest-path tree of the ``edges`` subgraph from ``root``, cut to ``targets``."""
    adj: dict[int, list[int]] = {}
    for u, v in sorted(edges):
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    dist = {root: 0.0}
    pred: dict[int, int] = {}
    pq = [(0.0, root)]
    done = set()
    while pq:
        d, x = heapq.heappop(pq)
        if x in done:
            continue
        done.add(x)
        for y in adj.get(x, ()):
            nd = d + weight(x, y)
            if nd < dist.get(y, math.inf):
                dist[y] = nd
                pred[y] = x
                heapq.heappush(pq, (nd, y))
    out = set()
    for c in targets:
        while c != root:
            p = pred[c]
            out.add(_edge(p, c))
            c = p
    return out


def _prune(root: int, content: set[int], nodes: set[int],
           edges: set[tuple[int, int]]) -> None:
    deg: dict[int, int] = dict.fromkeys(nodes, 0)
    nbr: dict[int, list[int]] = {v: [] for v in nodes}
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
        nbr[u].append(v)
        nbr[v].append(u)
    stack = [v for v in nodes if deg[v] <= 1 and v != root and v not in content]
    while stack:
        v = stack.pop()
        if v not in nodes:
            continue
        nodes.discard(v)
        for u in nbr[v]:
            e = _edge(u, v)
            if e in edges:
                edges.discard(e)
                deg[u] -= 1
                if deg[u] <= 1 and u != root and u not in content and u in nodes:
                    stack.append(u)


def tree_from_paths(root: int, content: Sequence[int], paths: Sequence[Sequence[int]],
                    path_graph: Graph) -> tuple[tuple[int, ...], tuple[tuple[int, int], ...]]:
    """Union the root->content paths into a minimal tree (nodes, edges)."""
    nodes = {root}
    edges: set[tuple[int, int]] = set()
    for p in paths:
        nodes.update(p)
        edges.update(_edge(a, b) for a, b in zip(p, p[1:]))
    if len(edges) != len(nodes) - 1:
        # tied shortest paths can close a cycle; re-derive a tree inside the union
        edges = _span_tree(root, edges, path_graph.edge_weight, content)
        nodes = {root}
        for u, v in edges:
            nodes.add(u)
            nodes.add(v)
    _prune(root, set(content), nodes, edges)
    return tuple(sorted(nodes)), tuple(sorted(edges))


def score_tree(nodes: Sequence[int], edges: Sequence[tuple[int, int]], g: Graph, lam: float,
               norm: NormalizationConstants, search_score: float) -> Scores:
    ew = math.fsum(g.edge_weight(u, v) for u, v in edges)
    ip = g.inverse_importance
    ni = math.fsum(float(ip[v]) for v in nodes)
    return Scores(ew, ni, combine(ew, ni, lam, norm), search_score)


def assemble_tree(root: int, keywords: Sequence[KeywordPhrase], content: Sequence[int],
                  index: hop2.TwoHopIndex, path_graph: Graph, g: Graph, lam: float,
                  norm: NormalizationConstants, search_score: float = math.nan) -> AnswerTree:
    """Join ``root`` to each content node along index shortest paths in ``path_graph``.

    Scores are computed on the deduplicated tree against the original graph ``g``.
    """
    paths = []
    for c in content:
        p = index.shortest_path(root, c)
        if p is None:
            raise LookupError(f"content node {c} unreachable from root {root}")
        paths.append(p)
    nodes, edges = tree_from_paths(root, content, paths, path_graph)
    return AnswerTree(root, tuple(keywords), tuple(content), nodes, edges,
                      score_tree(nodes, edges, g, lam, norm, search_score))


def rank_topk(candidates: Iterable[AnswerTree], k: int,
              objective: Callable[[AnswerTree], float]) -> list[AnswerTree]:
    """Best answer per distinct root, ascending by ``(objective, root)``, at most ``k``."""
    ordered = sorted(candidates, key=lambda t: (objective(t), t.root, t.content))
    seen: set[int] = set()
    out = []
    for t in ordered:
        if t.root in seen:
            continue
        seen.add(t.root)
        out.append(t)
        if len(out) == k:
            break
    return out


# -- search context --------------------------------------------------------------

class SearchContext:
    """Graph, text index, normalization and the per-(kind, lambda) index cache."""

    def __init__(self, g: Graph, text_index: InvertedIndex | None = None,
                 norm: NormalizationConstants | None = None, d_max: dict | None = None,
                 backend: str | None = None):
        self.g = g
        self.text_index = text_index if text_index is not None else build_inverted_index(g)
        self.norm = norm if norm is not None else normalization_constants(g)
        self.d_max = dict(d_max or {})  # optional per-(kind, lam) truncation
        self.backend = backend
        self._indexes: dict[tuple[str, float | None], hop2.TwoHopIndex] = {}
        self._graphs: dict[tuple[str, float | None], Graph] = {}

    @staticmethod
    def key(kind: str, lam: float | None = None) -> tuple[str, float | None]:
        if kind not in ("edge", "combined", "importance"):
            raise ValueError(f"unknown search graph kind {kind!r}")
        return (kind, float(lam) if kind == "combined" else None)

    def search_graph(self, kind: str, lam: float | None = None) -> Graph:
        key = self.key(kind, lam)
        if key not in self._graphs:
            if kind == "edge":
                self._graphs[key] = self.g
            elif kind == "combined":
                self._graphs[key] = transform_combined(self.g, key[1])
            else:
                self._graphs[key] = transform_node_importance(self.g)
        return self._graphs[key]

    def add_index(self, kind: str, lam: float | None, index: hop2.TwoHopIndex) -> None:
        self._indexes[self.key(kind, lam)] = index

    def has_index(self, kind: str, lam: float | None = None) -> bool:
        return self.key(kind, lam) in self._indexes

    def index(self, kind: str, lam: float | None = None) -> hop2.TwoHopIndex:
        key = self.key(kind, lam)
        if key not in self._indexes:
            gs = self.search_graph(kind, lam)
            self._indexes[key] = hop2.build(gs, self.d_max.get(key), backend=self.backend)
        return self._indexes[key]

    def content_sets(self, keywords: Sequence[KeywordPhrase]) -> list[list[int]]:
        sets = []
        for kw in keywords:
            s = content_nodes(self.text_index, self.g, kw)
            if not s:
                raise NoMatchError(kw.raw)
            sets.append(s)
        return sets


def graph_kind(method: Method, lam: float) -> tuple[str, float | None]:
    """Which transformed graph a method searches over."""
    if method is Method.EDGE:
        return ("edge", None)
    if method is Method.NODEIMP:
        return ("importance", None)
    if method is Method.COMBINED1:
        return ("combined", lam)
    if method is Method.COMBINED2:
        return ("importance", None)
    raise ValueError(f"{method} has no search graph")


# -- greedy 1: unique root over the transformed graph ---------------------------

def greedy_unique_root(q: Query, ctx: SearchContext) -> list[AnswerTree]:
    """Every node is a candidate root; each keyword takes its nearest content node.

    Roots are ranked by the summed transformed-graph distance to their assigned
    content nodes, and the ``q.k`` best are assembled into trees.
    """
    kind, lam = graph_kind(q.method, q.lam)
    sets = ctx.content_sets(q.keywords)
    index = ctx.index(kind, lam)
    path_graph = ctx.search_graph(kind, lam)
    cols = sorted(set(itertools.chain.from_iterable(sets)))
    where = {c: j for j, c in enumerate(cols)}
    n = ctx.g.n
    D = index.distance_matrix(np.arange(n, dtype=np.int32), np.asarray(cols, dtype=np.int32))
    total = np.zeros(n)
    chosen = []
    for s in sets:
        sub = D[:, [where[c] for c in s]]
        arg = sub.argmin(axis=1)  # first minimum -> smallest node id on ties
        total += sub[np.arange(n), arg]
        chosen.append(np.asarray(s)[arg])
    roots = np.flatnonzero(np.isfinite(total))
    if roots.size == 0:
        return []
    order = roots[np.lexsort((roots, total[roots]))][: q.k]
    trees = [
        assemble_tree(int(r), q.keywords, [int(c[r]) for c in chosen], index, path_graph,
                      ctx.g, q.lam, ctx.norm, search_score=float(total[r]))
        for r in order
    ]
    return rank_topk(trees, q.k, lambda t: t.scores.search_score)


# -- greedy 2: smallest content set + replace loop --------------------------------

def pivot_keyword(keywords: Sequence[KeywordPhrase], sets: Sequence[Sequence[int]]) -> int:
    """Keyword with the fewest content nodes; ties by token count, then text."""
    return min(range(len(keywords)),
               key=lambda i: (len(sets[i]), len(keywords[i].tokens), keywords[i].tokens, i))


def greedy_replace(q: Query, ctx: SearchContext,
                   trace: list | None = None) -> list[AnswerTree]:
    """Root at each content node of the rarest keyword, then improve by swapping.

    Uses the lambda-independent importance graph for distances and paths; the
    combined objective decides swaps and the final ranking.  When ``trace`` is
    a list, the accepted objective values of every root's working tree are
    appended to it (one list per root).
    """
    sets = ctx.content_sets(q.keywords)
    index = ctx.index("importance")
    path_graph = ctx.search_graph("importance")
    pivot = pivot_keyword(q.keywords, sets)
    others = [j for j in range(len(q.keywords)) if j != pivot]
    found = []
    for root in sets[pivot]:
        cands: dict[int, list[tuple[float, int]]] = {}
        for j in others:
            d = index.distance_matrix(np.array([root], dtype=np.int32),
                                      np.asarray(sets[j], dtype=np.int32))[0]
            cands[j] = sorted((float(x), c) for x, c in zip(d, sets[j]) if math.isfinite(x))
        if any(not cands[j] for j in others):
            continue
        content = [0] * len(q.keywords)
        content[pivot] = root
        cursor = dict.fromkeys(others, 0)
        for j in others:
            content[j] = cands[j][0][1]

        def build(assign: list[int]) -> AnswerTree:
            ss = math.fsum(index.distance(root, c) for c in assign)
            return assemble_tree(root, q.keywords, assign, index, path_graph, ctx.g, q.lam,
                                 ctx.norm, search_score=ss)

        best = build(content)
        history = [best.scores.c]
        for _ in range(q.max_iters):
            start = best.scores.c
            advanced = False
            for j in others:
                if cursor[j] + 1 >= len(cands[j]):
                    continue
                cursor[j] += 1
                advanced = True
                trial = list(best.content)
                trial[j] = cands[j][cursor[j]][1]
                t = build(trial)
                if t.scores.c < best.scores.c:
                    best = t
                    history.append(best.scores.c)
            if not advanced or start - best.scores.c <= q.delta:
                break
        if trace is not None:
            trace.append(history)
        found.append(best)
    return rank_topk(found, q.k, lambda t: t.scores.c)


# -- exhaustive reference ---------------------------------------------------------

def _sssp(g: Graph, src: int) -> tuple[list[float], list[int]]:
    """Plain Dijkstra: distances and predecessors toward ``src``."""
    indptr, indices, weights = g.indptr.tolist(), g.indices.tolist(), g.weights.tolist()
    dist = [math.inf] * g.n
    pred = [-1] * g.n
    dist[src] = 0.0
    pq = [(0.0, src)]
    while pq:
        d, v = heapq.heappop(pq)
        if d > dist[v]:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            nd = d + weights[e]
            if nd < dist[u]:
                dist[u] = nd
                pred[u] = v
                heapq.heappush(pq, (nd, u))
    return dist, pred


def _path_toward(pred: list[int], src: int, r: int) -> list[int]:
    p = [r]
    while r != src:
        r = pred[r]
        p.append(r)
    return p


def exact_exhaustive(q: Query, ctx: SearchContext, limit: int = EXACT_LIMIT,
                     path_graphs: Sequence[Graph] | None = None) -> dict[str, list[AnswerTree]]:
    """Enumerate every root and content-node combination.

    Each combination is joined along true shortest paths (plain Dijkstra,
    no index) in each of the original, combined and importance graphs, and
    every resulting tree is scored.  Returns, per objective ``"ew"``,
    ``"ni"`` and ``"c"``, the best tree of every root ranked ascending; the
    first element is the optimum.
    """
    sets = ctx.content_sets(q.keywords)
    n = ctx.g.n
    combos = n * math.prod(len(s) for s in sets)
    if combos > limit:
        raise ExactTooLarge(f"{combos} root/content combinations exceed the limit of {limit}")
    if path_graphs is None:
        path_graphs = [ctx.g, ctx.search_graph("combined", q.lam), ctx.search_graph("importance")]
    content_all = sorted(set(itertools.chain.from_iterable(sets)))
    best: dict[str, dict[int, tuple]] = {"ew": {}, "ni": {}, "c": {}}
    for pg in path_graphs:
        trees = {c: _sssp(pg, c) for c in content_all}
        for r in range(n):
            options = [[c for c in s if math.isfinite(trees[c][0][r])] for s in sets]
            if any(not o for o in options):
                continue
            for combo in itertools.product(*options):
                paths = [_path_toward(trees[c][1], c, r) for c in combo]
                nodes, edges = tree_from_paths(r, combo, paths, pg)
                sc = score_tree(nodes, edges, ctx.g, q.lam, ctx.norm,
                                math.fsum(trees[c][0][r] for c in combo))
                for obj, val in (("ew", sc.ew), ("ni", sc.ni), ("c", sc.c)):
                    cur = best[obj].get(r)
                    if cur is None or (val, combo) < (cur[0], cur[1]):
                        best[obj][r] = (val, combo, nodes, edges, sc)
    out = {}
    for obj, per_root in best.items():
        ranked = sorted(per_root.items(), key=lambda kv: (kv[1][0], kv[0]))
        out[obj] = [AnswerTree(r, q.keywords, tuple(combo), nodes, edges, sc)
                    for r, (_, combo, nodes, edges, sc) in ranked]
    return out


def search(q: Query, ctx: SearchContext) -> list[AnswerTree]:
    """Dispatch on ``q.method``; returns at most ``q.k`` answers, best first."""
    if q.method in (Method.EDGE, Method.NODEIMP, Method.COMBINED1):
        return greedy_unique_root(q, ctx)
    if q.method is Method.COMBINED2:
        return greedy_replace(q, ctx)
    return exact_exhaustive(q, ctx)["c"][: q.k]
