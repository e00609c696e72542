"""Graph data model, edge-weight schemes and importance transforms.

A :class:`Graph` is an immutable, undirected, node-labeled graph.  Each node
carries an importance in ``(0, 1]``, a short type tag and free text; each edge
carries a non-negative weight read as semantic distance.  Adjacency is kept in
CSR form (``indptr``/``indices``/``weights``) so that the labeling kernels can
consume it without copying.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)


class GraphDataError(ValueError):
    """Malformed or out-of-range graph input."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


@dataclass(frozen=True)
class Node:
    id: int
    importance: float
    node_type: str
    text: str


@dataclass(frozen=True)
class WeightScheme:
    """One of ``equal`` (with positive ``w0``), ``logarithmic`` or ``semantic``."""

    kind: str
    w0: float | None = None

    def __post_init__(self):
        if self.kind not in ("equal", "logarithmic", "semantic"):
            raise ValueError(f"unknown weight scheme {self.kind!r}")
        if self.kind == "equal":
            if self.w0 is None or not self.w0 > 0 or not math.isfinite(self.w0):
                raise ValueError("equal weight scheme needs a finite w0 > 0")

    @classmethod
    def parse(cls, text: str) -> "WeightScheme":
        """Parse ``equal:0.1``, ``equal`` (w0=1), ``logarithmic`` or ``semantic``."""
        kind, _, arg = text.strip().lower().partition(":")
        if kind in ("log", "logarithmic"):
            return cls("logarithmic")
        if kind == "equal":
            return cls("equal", float(arg) if arg else 1.0)
        return cls(kind)

    def __str__(self):
        return f"equal:{self.w0!r}" if self.kind == "equal" else self.kind


@dataclass(frozen=True)
class NormalizationConstants:
    ew_scale: float
    ni_scale: float

    def __post_init__(self):
        for name in ("ew_scale", "ni_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v!r}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Graph:
    """Immutable undirected weighted graph with per-node importance and text.

    Edges are given as parallel arrays.  Self-loops are dropped (with a
    warning) and duplicate edges collapse to their minimum weight.
    """

    def __init__(
        self,
        importance: Sequence[float] | np.ndarray,
        edges_u: Sequence[int] | np.ndarray = (),
        edges_v: Sequence[int] | np.ndarray = (),
        edges_w: Sequence[float] | np.ndarray = (),
        node_types: Sequence[str] | None = None,
        texts: Sequence[str] | None = None,
        scheme: WeightScheme | None = None,
    ):
        imp = np.array(importance, dtype=np.float64).reshape(-1)
        n = imp.shape[0]
        bad = ~((imp > 0) & (imp <= 1))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise GraphDataError(f"node {i}: importance {imp[i]!r} outside (0, 1]")
        self.importance = _readonly(imp)
        self.node_types = tuple(node_types) if node_types is not None else ("",) * n
        self.texts = tuple(texts) if texts is not None else ("",) * n
        if len(self.node_types) != n or len(self.texts) != n:
            raise GraphDataError("node_types/texts length differs from node count")
        self.scheme = scheme or WeightScheme("semantic")

        u = np.asarray(edges_u, dtype=np.int64).reshape(-1)
        v = np.asarray(edges_v, dtype=np.int64).reshape(-1)
        w = np.asarray(edges_w, dtype=np.float64).reshape(-1)
        if not (u.shape == v.shape == w.shape):
            raise GraphDataError("edge arrays have different lengths")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise GraphDataError("edge endpoint out of range")
        if np.isnan(w).any() or (w < 0).any():
            raise GraphDataError("edge weights must be non-negative")
        loops = u == v
        if loops.any():
            log.warning("dropping %d self-loop(s)", int(loops.sum()))
            u, v, w = u[~loops], v[~loops], w[~loops]
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        # sort by (lo, hi, w) so the first of each duplicate run is the lightest
        order = np.lexsort((w, hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        keep = np.ones(lo.shape[0], dtype=bool)
        keep[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
        self.edge_u = _readonly(lo[keep].astype(np.int32))
        self.edge_v = _readonly(hi[keep].astype(np.int32))
        self.edge_w = _readonly(w[keep].copy())
        self._build_csr(n)

    def _build_csr(self, n: int) -> None:
        src = np.concatenate([self.edge_u, self.edge_v])
        dst = np.concatenate([self.edge_v, self.edge_u])
        wt = np.concatenate([self.edge_w, self.edge_w])
        order = np.lexsort((dst, src))
        counts = np.bincount(src, minlength=n) if src.size else np.zeros(n, np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        self.indptr = _readonly(indptr)
        self.indices = _readonly(dst[order].astype(np.int32))
        self.weights = _readonly(wt[order].astype(np.float64))

    # -- basic accessors -------------------------------------------------
    @property
    def n(self) -> int:
        return self.importance.shape[0]

    @property
    def m(self) -> int:
        return self.edge_u.shape[0]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, scheme={self.scheme})"

    @cached_property
    def degree(self) -> np.ndarray:
        return _readonly(np.diff(self.indptr))

    @cached_property
    def inverse_importance(self) -> np.ndarray:
        return _readonly(1.0 / self.importance)

    def node(self, i: int) -> Node:
        return Node(int(i), float(self.importance[i]), self.node_types[i], self.texts[i])

    def neighbors(self, v: int) -> list[tuple[int, float]]:
        a, b = self.indptr[v], self.indptr[v + 1]
        return list(zip(self.indices[a:b].tolist(), self.weights[a:b].tolist()))

    @cached_property
    def _weight_map(self) -> dict[tuple[int, int], float]:
        return {
            (u, v): w
            for u, v, w in zip(self.edge_u.tolist(), self.edge_v.tolist(), self.edge_w.tolist())
        }

    def edge_weight(self, u: int, v: int) -> float:
        """Weight of edge ``{u, v}``; ``KeyError`` if absent."""
        return self._weight_map[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._weight_map

    def with_edge_weights(self, weights: np.ndarray, scheme: WeightScheme | None = None) -> "Graph":
        """Same nodes and topology, new per-edge weights (aligned with ``edge_w``)."""
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != self.edge_w.shape:
            raise ValueError("weight array does not match edge count")
        g = object.__new__(Graph)
        g.importance = self.importance
        g.node_types = self.node_types
        g.texts = self.texts
        g.scheme = scheme or self.scheme
        g.edge_u = self.edge_u
        g.edge_v = self.edge_v
        g.edge_w = _readonly(weights.copy())
        g._build_csr(self.n)
        return g

    def mean_edge_weight(self) -> float:
        return float(self.edge_w.mean()) if self.m else 0.0


def inverse_importance(node: Node | float) -> float:
    imp = node.importance if isinstance(node, Node) else float(node)
    return 1.0 / imp


def apply_weight_scheme(g: Graph, scheme: WeightScheme) -> Graph:
    if scheme.kind == "semantic":
        return g.with_edge_weights(g.edge_w, scheme)
    if scheme.kind == "equal":
        return g.with_edge_weights(np.full(g.m, scheme.w0), scheme)
    deg = g.degree.astype(np.float64)
    lg = np.log2(1.0 + deg)
    return g.with_edge_weights((lg[g.edge_u] + lg[g.edge_v]) / 2.0, scheme)


def transform_combined(g: Graph, lam: float) -> Graph:
    """Move importance onto edges, blended with the edge weight by ``lam``.

    ``w'(u, v) = lam * (1/imp(u) + 1/imp(v)) + 2 * (1 - lam) * w(u, v)``
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam!r}")
    ip = g.inverse_importance
    w = lam * (ip[g.edge_u] + ip[g.edge_v]) + 2.0 * (1.0 - lam) * g.edge_w
    return g.with_edge_weights(w)


def transform_node_importance(g: Graph) -> Graph:
    """Edge weight becomes ``1/imp(u) + 1/imp(v)``; independent of any tradeoff."""
    ip = g.inverse_importance
    return g.with_edge_weights(ip[g.edge_u] + ip[g.edge_v])


def normalization_constants(g: Graph) -> NormalizationConstants:
    if g.n == 0:
        raise ValueError("normalization needs a non-empty graph")
    mean_w = g.mean_edge_weight()
    ew_scale = 1.0 / mean_w if g.m and mean_w > 0 else 1.0
    ni_scale = 1.0 / float(g.inverse_importance.mean())
    return NormalizationConstants(ew_scale, ni_scale)


# -- TSV ingestion -----------------------------------------------------------

def read_nodes_tsv(path: str | Path) -> tuple[list[float], list[str], list[str]]:
    """Parse ``id<TAB>importance<TAB>node_type<TAB>text`` lines; ids must run 0..N-1."""
    importance, types, texts = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t", 3)
            if len(parts) < 3:
                raise GraphDataError("expected id, importance, node_type, text", str(path), lineno)
            try:
                nid = int(parts[0])
                imp = float(parts[1])
            except ValueError:
                raise GraphDataError("non-numeric id or importance", str(path), lineno) from None
            if nid != len(importance):
                raise GraphDataError(f"node id {nid} out of order (expected {len(importance)})",
                                     str(path), lineno)
            if not (0.0 < imp <= 1.0):
                raise GraphDataError(f"importance {imp!r} outside (0, 1]", str(path), lineno)
            importance.append(imp)
            types.append(parts[2])
            texts.append(parts[3] if len(parts) > 3 else "")
    return importance, types, texts


def read_edges_tsv(path: str | Path, n: int, need_weight: bool) -> tuple[list[int], list[int], list[float]]:
    us, vs, ws = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise GraphDataError("expected src, dst[, weight]", str(path), lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else None
            except ValueError:
                raise GraphDataError("non-numeric field", str(path), lineno) from None
            if w is None:
                if need_weight:
                    raise GraphDataError("weight column required for semantic scheme",
                                         str(path), lineno)
                w = 1.0
            for x in (u, v):
                if not 0 <= x < n:
                    raise GraphDataError(f"edge endpoint {x} is not a known node id",
                                         str(path), lineno)
            if not (w >= 0.0) or math.isinf(w):
                raise GraphDataError(f"edge weight {w!r} must be finite and >= 0",
                                     str(path), lineno)
            us.append(u)
            vs.append(v)
            ws.append(w)
    return us, vs, ws


def load_graph(nodes_path: str | Path, edges_path: str | Path,
               scheme: WeightScheme | None = None) -> Graph:
    """Read the two TSV files and apply ``scheme`` (default: semantic, weights as given)."""
    scheme = scheme or WeightScheme("semantic")
    imp, types, texts = read_nodes_tsv(nodes_path)
    us, vs, ws = read_edges_tsv(edges_path, len(imp), need_weight=scheme.kind == "semantic")
    g = Graph(imp, us, vs, ws, node_types=types, texts=texts, scheme=WeightScheme("semantic"))
    return apply_weight_scheme(g, scheme)


def _clean(s: str) -> str:
    return s.replace("\t", " ").replace("\n", " ").replace("\r", " ")


def write_graph(g: Graph, nodes_path: str | Path, edges_path: str | Path) -> None:
    with open(nodes_path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(g.n):
            fh.write(f"{i}\t{float(g.importance[i])!r}\t{_clean(g.node_types[i])}\t{_clean(g.texts[i])}\n")
    with open(edges_path, "w", encoding="utf-8", newline="\n") as fh:
        for u, v, w in zip(g.edge_u.tolist(), g.edge_v.tolist(), g.edge_w.tolist()):
            fh.write(f"{u}\t{v}\t{w!r}\n")


def graph_from_edges(n: int, edges: Iterable[tuple[int, int, float]],
                     importance: Sequence[float] | None = None,
                     texts: Sequence[str] | None = None,
                     node_types: Sequence[str] | None = None) -> Graph:
    """Convenience constructor from ``(u, v, w)`` triples."""
    edges = list(edges)
    us = [e[0] for e in edges]
    vs = [e[1] for e in edges]
    ws = [e[2] for e in edges]
    imp = importance if importance is not None else [1.0] * n
    return Graph(imp, us, vs, ws, node_types=node_types, texts=texts)
