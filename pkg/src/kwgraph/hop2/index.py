from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..graph import Graph

DISCONNECTED = math.inf

MAGIC = b"GKS2"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIId")
_COUNT = struct.Struct("<I")
_ENTRY = np.dtype([("hub", "<u4"), ("dist", "<f8"), ("parent", "<u4")])
assert _ENTRY.itemsize == 16


class IndexFormatError(ValueError):
    pass


class LabelEntry(NamedTuple):
    hub: int
    dist: float
    parent: int


def rank_order(g: Graph) -> np.ndarray:
    """Node ids by descending degree, ties by ascending id."""
    ids = np.arange(g.n, dtype=np.int64)
    return np.lexsort((ids, -g.degree.astype(np.int64))).astype(np.int32)


def default_d_max(g: Graph) -> float:
    """Ten times the mean edge weight; unbounded for edgeless or all-zero graphs."""
    mean = g.mean_edge_weight()
    return 10.0 * mean if mean > 0 else math.inf


@dataclass(frozen=True)
class IndexStats:
    entries: int
    mean_label: float
    bytes: int


def _backend(name: str | None):
    from . import available_backends, core

    if name is None:
        return core
    backends = available_backends()
    if name not in backends:
        raise ValueError(f"backend {name!r} not available (have {sorted(backends)})")
    return backends[name]


class TwoHopIndex:
    """Per-node label lists of ``(hub, dist, parent)``, ascending by hub id.

    ``distance`` is an exact shortest distance for every pair at most
    ``d_max`` apart and ``DISCONNECTED`` (``inf``) otherwise.
    """

    def __init__(self, offsets, hubs, dists, parents, d_max: float,
                 rank: np.ndarray | None = None, backend: str | None = None):
        self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        self.hubs = np.ascontiguousarray(hubs, dtype=np.int32)
        self.dists = np.ascontiguousarray(dists, dtype=np.float64)
        self.parents = np.ascontiguousarray(parents, dtype=np.int32)
        for a in (self.offsets, self.hubs, self.dists, self.parents):
            a.setflags(write=False)
        self.d_max = float(d_max)
        self.rank = rank
        self._core = _backend(backend)
        self.store = self._core.LabelStore(self.offsets, self.hubs, self.dists,
                                           self.parents, self.d_max)

    @property
    def n(self) -> int:
        return self.offsets.shape[0] - 1

    @property
    def backend(self) -> str:
        from . import _pycore
        return "python" if self._core is _pycore else "compiled"

    def label(self, v: int) -> list[LabelEntry]:
        a, b = int(self.offsets[v]), int(self.offsets[v + 1])
        return [LabelEntry(int(h), float(d), int(p))
                for h, d, p in zip(self.hubs[a:b], self.dists[a:b], self.parents[a:b])]

    def distance(self, s: int, t: int) -> float:
        return self.store.distance(s, t)

    def shortest_path(self, s: int, t: int) -> list[int] | None:
        """Nodes ``s..t`` along a shortest path, ``None`` when disconnected."""
        return self.store.shortest_path(s, t)

    def distance_matrix(self, rows, cols) -> np.ndarray:
        return self.store.distance_matrix(np.ascontiguousarray(rows, dtype=np.int32),
                                          np.ascontiguousarray(cols, dtype=np.int32))

    def distance_pairs(self, src, dst) -> np.ndarray:
        return self.store.distance_pairs(np.ascontiguousarray(src, dtype=np.int32),
                                         np.ascontiguousarray(dst, dtype=np.int32))

    def path_batch(self, src, dst) -> tuple[np.ndarray, np.ndarray]:
        return self.store.path_batch(np.ascontiguousarray(src, dtype=np.int32),
                                     np.ascontiguousarray(dst, dtype=np.int32))

    # -- stats & persistence -------------------------------------------------
    def stats(self) -> IndexStats:
        entries = int(self.hubs.shape[0])
        return IndexStats(entries, entries / self.n if self.n else 0.0,
                          _HEADER.size + 4 * self.n + _ENTRY.itemsize * entries)

    def to_bytes(self) -> bytes:
        rec = np.empty(self.hubs.shape[0], dtype=_ENTRY)
        rec["hub"] = self.hubs
        rec["dist"] = self.dists
        rec["parent"] = self.parents
        raw = rec.tobytes()
        off = self.offsets.tolist()
        parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, self.n, self.d_max)]
        for v in range(self.n):
            parts.append(_COUNT.pack(off[v + 1] - off[v]))
            parts.append(raw[16 * off[v]:16 * off[v + 1]])
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes, rank: np.ndarray | None = None,
                   backend: str | None = None) -> "TwoHopIndex":
        if len(data) < _HEADER.size:
            raise IndexFormatError("truncated index header")
        magic, version, n, d_max = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise IndexFormatError(f"bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise IndexFormatError(f"unsupported index format version {version}")
        pos = _HEADER.size
        counts = np.empty(n, dtype=np.int64)
        starts = np.empty(n, dtype=np.int64)
        size = len(data)
        for v in range(n):
            if pos + 4 > size:
                raise IndexFormatError(f"truncated index at node {v}")
            (c,) = _COUNT.unpack_from(data, pos)
            pos += 4
            counts[v] = c
            starts[v] = pos
            pos += 16 * c
            if pos > size:
                raise IndexFormatError(f"truncated index at node {v}")
        if pos != size:
            raise IndexFormatError(f"{size - pos} trailing bytes after index")
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        buf = np.frombuffer(data, dtype=np.uint8)
        if offsets[-1]:
            st, ct = starts.tolist(), counts.tolist()
            rec = np.concatenate([buf[a:a + 16 * c] for a, c in zip(st, ct)]).view(_ENTRY)
        else:
            rec = np.empty(0, dtype=_ENTRY)
        hubs = rec["hub"].astype(np.int32)
        parents = rec["parent"].astype(np.int32)
        dists = rec["dist"].astype(np.float64)
        if hubs.size and (int(rec["hub"].max()) >= n or int(rec["parent"].max()) >= n):
            raise IndexFormatError("hub or parent id out of range")
        return cls(offsets, hubs, dists, parents, d_max, rank=rank, backend=backend)

    def save(self, path: str | Path) -> int:
        data = self.to_bytes()
        Path(path).write_bytes(data)
        return len(data)

    @classmethod
    def load(cls, path: str | Path, rank: np.ndarray | None = None,
             backend: str | None = None) -> "TwoHopIndex":
        return cls.from_bytes(Path(path).read_bytes(), rank=rank, backend=backend)


def build(g: Graph, d_max: float | None = None, backend: str | None = None) -> TwoHopIndex:
    """Degree-ordered pruned Dijkstra labeling of ``g`` truncated at ``d_max``."""
    if d_max is None:
        d_max = default_d_max(g)
    d_max = float(d_max)
    if not d_max > 0:
        raise ValueError(f"d_max must be positive, got {d_max!r}")
    if g.m and (g.edge_w < 0).any():
        raise ValueError("negative edge weight")
    core = _backend(backend)
    order = rank_order(g)
    offsets, hub_rank, dists, parents = core.build_labels(
        g.indptr, g.indices, g.weights, order, d_max)
    hubs = order[hub_rank]
    sizes = np.diff(offsets)
    owner = np.repeat(np.arange(g.n, dtype=np.int32), sizes)
    perm = np.lexsort((hubs, owner))
    name = backend
    return TwoHopIndex(offsets, hubs[perm], dists[perm], parents[perm], d_max,
                       rank=order, backend=name)
