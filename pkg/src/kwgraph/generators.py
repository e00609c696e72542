"""Seeded random graphs for tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .graph import Graph


def random_connected(n: int, mean_degree: float, rng: np.random.Generator,
                     w_low: float = 0.01, w_high: float = 1.0,
                     importance: tuple[float, float] | None = None) -> Graph:
    """Random spanning tree plus uniform extra edges up to ``mean_degree``."""
    us = [int(rng.integers(0, i)) for i in range(1, n)]
    vs = list(range(1, n))
    target = max(n - 1, int(round(n * mean_degree / 2)))
    seen = {(min(a, b), max(a, b)) for a, b in zip(us, vs)}
    while len(seen) < min(target, n * (n - 1) // 2):
        a, b = (int(x) for x in rng.integers(0, n, 2))
        if a == b:
            continue
        e = (min(a, b), max(a, b))
        if e in seen:
            continue
        seen.add(e)
        us.append(a)
        vs.append(b)
    w = rng.uniform(w_low, w_high, len(us))
    imp = np.ones(n) if importance is None else rng.uniform(*importance, n)
    return Graph(imp, us, vs, w)


def preferential_attachment(n: int, m: int, rng: np.random.Generator,
                            w_low: float = 0.01, w_high: float = 1.0) -> Graph:
    """Barabasi-Albert style growth: each new node links to ``m`` degree-biased targets."""
    targets = list(range(m))
    repeated: list[int] = []
    us: list[int] = []
    vs: list[int] = []
    for v in range(m, n):
        for t in set(targets):
            us.append(v)
            vs.append(t)
        repeated.extend(targets)
        repeated.extend([v] * m)
        picks: set[int] = set()
        while len(picks) < m:
            picks.add(repeated[int(rng.integers(0, len(repeated)))])
        targets = sorted(picks)
    w = rng.uniform(w_low, w_high, len(us))
    return Graph(np.ones(n), us, vs, w)


def with_keywords(g: Graph, keywords: list[str], per_keyword: tuple[int, int],
                  rng: np.random.Generator) -> Graph:
    """Copy of ``g`` whose texts plant each keyword on a few random nodes."""
    texts = [f"node{i}" for i in range(g.n)]
    for kw in keywords:
        k = int(rng.integers(per_keyword[0], per_keyword[1] + 1))
        for v in rng.choice(g.n, size=min(k, g.n), replace=False):
            texts[int(v)] += " " + kw
    h = Graph(g.importance, g.edge_u, g.edge_v, g.edge_w, node_types=["t"] * g.n, texts=texts,
              scheme=g.scheme)
    return h
