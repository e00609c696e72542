"""On-disk workspace: ingested graph, text index, built 2-hop indexes, manifest."""
from __future__ import annotations

import json
import math
from pathlib import Path

from . import hop2
from .graph import (
    Graph,
    NormalizationConstants,
    WeightScheme,
    load_graph,
    normalization_constants,
    write_graph,
)
from .textindex import InvertedIndex, build_inverted_index

MANIFEST = "manifest.json"
WORKSPACE_VERSION = 1


class MissingIndex(LookupError):
    def __init__(self, message: str, hint: str):
        super().__init__(message)
        self.hint = hint


def _num(x: float):
    """JSON-safe float (infinity as the string ``"inf"``)."""
    return "inf" if math.isinf(x) else x


def _unnum(x) -> float:
    return math.inf if x == "inf" else float(x)


class Workspace:
    def __init__(self, root: str | Path, manifest: dict):
        self.root = Path(root)
        self.manifest = manifest
        self._graph: Graph | None = None

    # -- creation / loading ------------------------------------------------------
    @classmethod
    def ingest(cls, nodes_path, edges_path, scheme: WeightScheme, out_dir,
               norm_override: dict | None = None) -> "Workspace":
        g = load_graph(nodes_path, edges_path, scheme)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "idx").mkdir(exist_ok=True)
        write_graph(g, out / "nodes.tsv", out / "edges.tsv")
        build_inverted_index(g).save(out / "text.idx")
        norm = normalization_constants(g)
        if norm_override:
            norm = NormalizationConstants(norm_override.get("ew_scale") or norm.ew_scale,
                                          norm_override.get("ni_scale") or norm.ni_scale)
        manifest = {
            "format": "kwgraph-workspace",
            "version": WORKSPACE_VERSION,
            "nodes": "nodes.tsv",
            "edges": "edges.tsv",
            "text_index": "text.idx",
            "scheme": str(scheme),
            "n": g.n,
            "m": g.m,
            "mean_edge_weight": g.mean_edge_weight(),
            "normalization": {"ew_scale": norm.ew_scale, "ni_scale": norm.ni_scale},
            "indexes": [],
        }
        ws = cls(out, manifest)
        ws._graph = g
        ws.save()
        return ws

    @classmethod
    def open(cls, root) -> "Workspace":
        root = Path(root)
        path = root / MANIFEST
        if not path.exists():
            raise FileNotFoundError(f"{root} is not a workspace (no {MANIFEST}); run ingest first")
        manifest = json.loads(path.read_text(encoding="utf-8"))
        if manifest.get("version") != WORKSPACE_VERSION:
            raise ValueError(f"unsupported workspace version {manifest.get('version')!r}")
        for key in ("nodes", "edges", "text_index"):
            if not (root / manifest[key]).exists():
                raise FileNotFoundError(f"workspace file {manifest[key]} is missing")
        return cls(root, manifest)

    def save(self) -> None:
        text = json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"
        (self.root / MANIFEST).write_text(text, encoding="utf-8")

    # -- content ---------------------------------------------------------------
    @property
    def graph(self) -> Graph:
        if self._graph is None:
            g = load_graph(self.root / self.manifest["nodes"], self.root / self.manifest["edges"])
            self._graph = g.with_edge_weights(g.edge_w, WeightScheme.parse(self.manifest["scheme"]))
        return self._graph

    def text_index(self) -> InvertedIndex:
        return InvertedIndex.load(self.root / self.manifest["text_index"])

    def norm(self) -> NormalizationConstants:
        nc = self.manifest["normalization"]
        return NormalizationConstants(nc["ew_scale"], nc["ni_scale"])

    # -- indexes -----------------------------------------------------------------
    @staticmethod
    def index_name(kind: str, lam: float | None, d_max: float) -> str:
        parts = [kind]
        if lam is not None:
            parts.append(f"l{lam!r}")
        parts.append("dinf" if math.isinf(d_max) else f"d{d_max!r}")
        return "-".join(parts) + ".gks2"

    def record_index(self, method: str, kind: str, lam: float | None, ix: hop2.TwoHopIndex) -> dict:
        name = self.index_name(kind, lam, ix.d_max)
        nbytes = ix.save(self.root / "idx" / name)
        st = ix.stats()
        entry = {
            "method": method,
            "graph": kind,
            "lambda": lam,
            "d_max": _num(ix.d_max),
            "path": f"idx/{name}",
            "format_version": hop2.index.FORMAT_VERSION,
            "entries": st.entries,
            "bytes": nbytes,
        }
        idx = [e for e in self.manifest["indexes"]
               if not (e["graph"] == kind and e["lambda"] == lam
                       and _unnum(e["d_max"]) == ix.d_max)]
        idx.append(entry)
        self.manifest["indexes"] = idx
        self.save()
        return entry

    def find_index(self, kind: str, lam: float | None, d_max: float | None = None) -> dict | None:
        hits = [e for e in self.manifest["indexes"]
                if e["graph"] == kind and e["lambda"] == lam
                and (d_max is None or _unnum(e["d_max"]) == d_max)]
        return hits[-1] if hits else None

    def load_index(self, entry: dict) -> hop2.TwoHopIndex:
        if entry.get("format_version") != hop2.index.FORMAT_VERSION:
            raise hop2.IndexFormatError(f"{entry['path']}: format version mismatch")
        return hop2.TwoHopIndex.load(self.root / entry["path"])
