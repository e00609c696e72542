# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled labeling kernels.

Mirrors ``_pycore`` operation for operation: same relaxation order, same
heap tie-breaking on ``(distance, node)``, so both produce identical labels.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY
from libcpp.pair cimport pair
from libcpp.queue cimport priority_queue
from libcpp.vector cimport vector

cnp.import_array()

ctypedef long long i64
ctypedef pair[double, int] QItem

# path sums accumulate in different orders from each end; allow ulp-level slack
cdef double PRUNE_SLACK = 1.0 + 1e-12


def build_labels(const i64[::1] indptr, const int[::1] indices,
                 const double[::1] weights, const int[::1] order, double d_max):
    """Pruned Dijkstra from every node in ``order``; labels come back in rank space.

    Returns ``(offsets, hub_rank, dist, parent)`` where node ``v``'s entries
    are ``offsets[v]:offsets[v+1]`` ascending by hub rank.
    """
    cdef int n = indptr.shape[0] - 1
    cdef vector[vector[int]] lh = vector[vector[int]](n)
    cdef vector[vector[double]] ld = vector[vector[double]](n)
    cdef vector[vector[int]] lp = vector[vector[int]](n)
    cdef vector[double] T = vector[double](n, INFINITY)
    cdef vector[double] D = vector[double](n, INFINITY)
    cdef vector[int] par = vector[int](n, -1)
    cdef vector[char] done = vector[char](n, 0)
    cdef vector[int] touched
    cdef priority_queue[QItem] pq
    cdef QItem top
    cdef int r, s, v, u, x
    cdef size_t j, k
    cdef i64 e
    cdef double d, q, t, nd

    with nogil:
        for r in range(n):
            s = order[r]
            for j in range(lh[s].size()):
                T[lh[s][j]] = ld[s][j]
            D[s] = 0.0
            par[s] = s
            touched.push_back(s)
            pq.push(QItem(-0.0, -s))
            while not pq.empty():
                top = pq.top()
                pq.pop()
                d = -top.first
                v = -top.second
                if done[v] or d > D[v]:
                    continue
                done[v] = 1
                if d > d_max:
                    break
                if v != s:
                    q = INFINITY
                    for j in range(lh[v].size()):
                        t = T[lh[v][j]] + ld[v][j]
                        if t < q:
                            q = t
                    if q <= d * PRUNE_SLACK:
                        continue
                lh[v].push_back(r)
                ld[v].push_back(d)
                lp[v].push_back(par[v])
                for e in range(indptr[v], indptr[v + 1]):
                    u = indices[e]
                    nd = d + weights[e]
                    if nd <= d_max and nd < D[u]:
                        if D[u] == INFINITY:
                            touched.push_back(u)
                        D[u] = nd
                        par[u] = v
                        pq.push(QItem(-nd, -u))
            while not pq.empty():
                pq.pop()
            for k in range(touched.size()):
                x = touched[k]
                D[x] = INFINITY
                par[x] = -1
                done[x] = 0
            touched.clear()
            for j in range(lh[s].size()):
                T[lh[s][j]] = INFINITY

    offsets = np.zeros(n + 1, dtype=np.int64)
    cdef i64[::1] off = offsets
    for v in range(n):
        off[v + 1] = off[v] + <i64>lh[v].size()
    cdef i64 total = off[n]
    hub = np.empty(total, dtype=np.int32)
    dist = np.empty(total, dtype=np.float64)
    parent = np.empty(total, dtype=np.int32)
    cdef int[::1] hv = hub
    cdef double[::1] dv = dist
    cdef int[::1] pv = parent
    cdef i64 p
    for v in range(n):
        p = off[v]
        for j in range(lh[v].size()):
            hv[p + j] = lh[v][j]
            dv[p + j] = ld[v][j]
            pv[p + j] = lp[v][j]
        vector[int]().swap(lh[v])
        vector[double]().swap(ld[v])
        vector[int]().swap(lp[v])
    return offsets, hub, dist, parent


cdef class LabelStore:
    """Read-only label arrays (hubs by node id, ascending) with query kernels."""

    cdef readonly object offsets, hubs, dists, parents
    cdef readonly double d_max
    cdef readonly int n
    cdef const i64[::1] _off
    cdef const int[::1] _hub
    cdef const double[::1] _dist
    cdef const int[::1] _par

    def __init__(self, offsets, hubs, dists, parents, double d_max):
        self.offsets = offsets
        self.hubs = hubs
        self.dists = dists
        self.parents = parents
        self._off = offsets
        self._hub = hubs
        self._dist = dists
        self._par = parents
        self.d_max = d_max
        self.n = offsets.shape[0] - 1

    cdef inline double _meet(self, int s, int t, int* hub_out) noexcept nogil:
        cdef i64 i = self._off[s]
        cdef i64 ie = self._off[s + 1]
        cdef i64 j = self._off[t]
        cdef i64 je = self._off[t + 1]
        cdef double best = INFINITY
        cdef double x
        cdef int bh = -1
        cdef int hi, hj
        while i < ie and j < je:
            hi = self._hub[i]
            hj = self._hub[j]
            if hi == hj:
                x = self._dist[i] + self._dist[j]
                if x < best:
                    best = x
                    bh = hi
                i += 1
                j += 1
            elif hi < hj:
                i += 1
            else:
                j += 1
        if best > self.d_max:
            best = INFINITY
            bh = -1
        hub_out[0] = bh
        return best

    cdef inline i64 _lookup(self, int v, int h) noexcept nogil:
        cdef i64 lo = self._off[v]
        cdef i64 hi = self._off[v + 1]
        cdef i64 mid
        while lo < hi:
            mid = (lo + hi) >> 1
            if self._hub[mid] < h:
                lo = mid + 1
            else:
                hi = mid
        if lo < self._off[v + 1] and self._hub[lo] == h:
            return lo
        return -1

    def distance(self, int s, int t):
        cdef int h
        return self._meet(s, t, &h)

    def meet(self, int s, int t):
        """``(distance, hub)``; hub is -1 when disconnected."""
        cdef int h
        cdef double d = self._meet(s, t, &h)
        return d, h

    def lookup(self, int v, int h):
        """Position of hub ``h`` in ``v``'s label, or -1."""
        return self._lookup(v, h)

    cdef int _walk(self, int v, int h, vector[int]& out) noexcept nogil:
        cdef i64 k
        cdef int steps = 0
        out.push_back(v)
        while v != h:
            k = self._lookup(v, h)
            if k < 0 or steps > self.n:
                return -1
            v = self._par[k]
            out.push_back(v)
            steps += 1
        return 0

    cdef int _path(self, int s, int t, vector[int]& out) noexcept nogil:
        cdef int h, i, j, found
        cdef vector[int] left, right
        cdef double d = self._meet(s, t, &h)
        if h < 0:
            return -1
        if self._walk(s, h, left) < 0 or self._walk(t, h, right) < 0:
            return -2
        for i in range(<int>right.size() - 2, -1, -1):
            left.push_back(right[i])
        # splice out any revisit (only possible with zero-weight edges)
        for i in range(<int>left.size()):
            found = -1
            for j in range(<int>out.size()):
                if out[j] == left[i]:
                    found = j
                    break
            if found >= 0:
                out.resize(found + 1)
            else:
                out.push_back(left[i])
        return 0

    def path_to_hub(self, int v, int h):
        cdef vector[int] out
        if self._walk(v, h, out) < 0:
            raise RuntimeError(f"broken parent chain from {v} to hub {h}")
        return [x for x in out]

    def shortest_path(self, int s, int t):
        """Node list ``s..t`` or ``None`` when disconnected."""
        cdef vector[int] out
        cdef int rc = self._path(s, t, out)
        if rc == -1:
            return None
        if rc == -2:
            raise RuntimeError(f"broken parent chain between {s} and {t}")
        return [x for x in out]

    def distance_pairs(self, const int[::1] src, const int[::1] dst):
        cdef Py_ssize_t m = src.shape[0]
        res = np.empty(m, dtype=np.float64)
        cdef double[::1] rv = res
        cdef Py_ssize_t i
        cdef int h
        with nogil:
            for i in range(m):
                rv[i] = self._meet(src[i], dst[i], &h)
        return res

    def distance_matrix(self, const int[::1] rows, const int[::1] cols):
        cdef Py_ssize_t a = rows.shape[0], b = cols.shape[0]
        res = np.empty((a, b), dtype=np.float64)
        cdef double[:, ::1] rv = res
        cdef Py_ssize_t i, j
        cdef int h
        with nogil:
            for i in range(a):
                for j in range(b):
                    rv[i, j] = self._meet(rows[i], cols[j], &h)
        return res

    def path_batch(self, const int[::1] src, const int[::1] dst):
        """Concatenated paths plus ``offsets``; disconnected pairs give empty runs."""
        cdef Py_ssize_t m = src.shape[0]
        cdef vector[int] flat, one
        offsets = np.zeros(m + 1, dtype=np.int64)
        cdef i64[::1] ov = offsets
        cdef Py_ssize_t i, j
        cdef int rc
        with nogil:
            for i in range(m):
                one.clear()
                rc = self._path(src[i], dst[i], one)
                if rc == -2:
                    with gil:
                        raise RuntimeError(f"broken parent chain between {src[i]} and {dst[i]}")
                if rc == 0:
                    for j in range(<Py_ssize_t>one.size()):
                        flat.push_back(one[j])
                ov[i + 1] = <i64>flat.size()
        out = np.empty(flat.size(), dtype=np.int32)
        cdef int[::1] fv = out
        for i in range(<Py_ssize_t>flat.size()):
            fv[i] = flat[i]
        return out, offsets
