"""Pure-Python labeling kernels; same contract and results as the compiled core."""
from __future__ import annotations

import heapq
from bisect import bisect_left
from math import inf

import numpy as np

# path sums accumulate in different orders from each end; allow ulp-level slack
PRUNE_SLACK = 1.0 + 1e-12


def build_labels(indptr, indices, weights, order, d_max):
    n = len(indptr) - 1
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    weights = np.asarray(weights).tolist()
    order = np.asarray(order).tolist()
    lh: list[list[int]] = [[] for _ in range(n)]
    ld: list[list[float]] = [[] for _ in range(n)]
    lp: list[list[int]] = [[] for _ in range(n)]
    T = [inf] * n
    D = [inf] * n
    par = [-1] * n
    done = [False] * n

    for r, s in enumerate(order):
        for h, d in zip(lh[s], ld[s]):
            T[h] = d
        D[s] = 0.0
        par[s] = s
        touched = [s]
        pq = [(0.0, s)]
        while pq:
            d, v = heapq.heappop(pq)
            if done[v] or d > D[v]:
                continue
            done[v] = True
            if d > d_max:
                break
            if v != s:
                q = inf
                for h, dh in zip(lh[v], ld[v]):
                    t = T[h] + dh
                    if t < q:
                        q = t
                if q <= d * PRUNE_SLACK:
                    continue
            lh[v].append(r)
            ld[v].append(d)
            lp[v].append(par[v])
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                nd = d + weights[e]
                if nd <= d_max and nd < D[u]:
                    if D[u] == inf:
                        touched.append(u)
                    D[u] = nd
                    par[u] = v
                    heapq.heappush(pq, (nd, u))
        for x in touched:
            D[x] = inf
            par[x] = -1
            done[x] = False
        for h in lh[s]:
            T[h] = inf

    sizes = np.fromiter((len(x) for x in lh), dtype=np.int64, count=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    flat = lambda rows, dt: np.fromiter((x for row in rows for x in row), dtype=dt,
                                        count=int(offsets[-1]))
    return offsets, flat(lh, np.int32), flat(ld, np.float64), flat(lp, np.int32)


class LabelStore:
    """Read-only label arrays (hubs by node id, ascending) with query kernels."""

    def __init__(self, offsets, hubs, dists, parents, d_max):
        self.offsets = offsets
        self.hubs = hubs
        self.dists = dists
        self.parents = parents
        self.d_max = float(d_max)
        self.n = offsets.shape[0] - 1
        off = offsets.tolist()
        h, d, p = hubs.tolist(), dists.tolist(), parents.tolist()
        self._hub = [h[off[v]:off[v + 1]] for v in range(self.n)]
        self._dist = [d[off[v]:off[v + 1]] for v in range(self.n)]
        self._par = [p[off[v]:off[v + 1]] for v in range(self.n)]

    def meet(self, s, t):
        hs, ds = self._hub[s], self._dist[s]
        ht, dt = self._hub[t], self._dist[t]
        i = j = 0
        ie, je = len(hs), len(ht)
        best, bh = inf, -1
        while i < ie and j < je:
            a, b = hs[i], ht[j]
            if a == b:
                x = ds[i] + dt[j]
                if x < best:
                    best, bh = x, a
                i += 1
                j += 1
            elif a < b:
                i += 1
            else:
                j += 1
        if best > self.d_max:
            return inf, -1
        return best, bh

    def distance(self, s, t):
        return self.meet(s, t)[0]

    def lookup(self, v, h):
        row = self._hub[v]
        k = bisect_left(row, h)
        if k < len(row) and row[k] == h:
            return int(self.offsets[v]) + k
        return -1

    def _walk(self, v, h):
        out = [v]
        steps = 0
        while v != h:
            row = self._hub[v]
            k = bisect_left(row, h)
            if k == len(row) or row[k] != h or steps > self.n:
                raise RuntimeError(f"broken parent chain from {out[0]} to hub {h}")
            v = self._par[v][k]
            out.append(v)
            steps += 1
        return out

    def path_to_hub(self, v, h):
        return self._walk(v, h)

    def shortest_path(self, s, t):
        _, h = self.meet(s, t)
        if h < 0:
            return None
        walk = self._walk(s, h) + self._walk(t, h)[-2::-1]
        out: list[int] = []
        pos: dict[int, int] = {}
        for x in walk:
            if x in pos:
                for y in out[pos[x] + 1:]:
                    del pos[y]
                del out[pos[x] + 1:]
            else:
                pos[x] = len(out)
                out.append(x)
        return out

    def distance_pairs(self, src, dst):
        return np.array([self.meet(s, t)[0] for s, t in zip(np.asarray(src).tolist(),
                                                             np.asarray(dst).tolist())],
                        dtype=np.float64)

    def distance_matrix(self, rows, cols):
        rows = np.asarray(rows).tolist()
        cols = np.asarray(cols).tolist()
        res = np.empty((len(rows), len(cols)), dtype=np.float64)
        for i, s in enumerate(rows):
            for j, t in enumerate(cols):
                res[i, j] = self.meet(s, t)[0]
        return res

    def path_batch(self, src, dst):
        flat: list[int] = []
        offsets = [0]
        for s, t in zip(np.asarray(src).tolist(), np.asarray(dst).tolist()):
            p = self.shortest_path(s, t)
            if p is not None:
                flat.extend(p)
            offsets.append(len(flat))
        return np.array(flat, dtype=np.int32), np.array(offsets, dtype=np.int64)
