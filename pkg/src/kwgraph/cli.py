"""Command-line driver.

Exit codes: 0 ok, 2 usage, 3 data error, 4 missing index, 5 exact search refused.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import shlex
import sys
import time
from pathlib import Path

import numpy as np

from . import hop2
from .graph import GraphDataError, NormalizationConstants, WeightScheme
from .render import RENDERERS
from .search import (
    ExactTooLarge,
    Method,
    NoMatchError,
    Query,
    SearchContext,
    exact_exhaustive,
    graph_kind,
    greedy_replace,
    greedy_unique_root,
    search,
)
from .workspace import MissingIndex, Workspace

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NO_INDEX, EXIT_REFUSED = 0, 2, 3, 4, 5

log = logging.getLogger("kwgraph")


class UsageError(ValueError):
    pass


def parse_dmax(text: str, mean_w: float) -> float:
    """``inf``, an absolute value, or a multiple of the mean edge weight like ``10x``."""
    t = text.strip().lower()
    if t in ("inf", "infinity", "none"):
        return math.inf
    if t.endswith("x"):
        return float(t[:-1]) * mean_w
    return float(t)


def _method_kind(method: Method, lam: float) -> tuple[str, float | None]:
    if method is Method.EXACT:
        raise UsageError("exact search uses no index")
    return graph_kind(method, lam)


# -- commands ------------------------------------------------------------------------

def cmd_ingest(nodes_path, edges_path, scheme: str, out_dir, ew_scale=None, ni_scale=None) -> dict:
    ws = Workspace.ingest(nodes_path, edges_path, WeightScheme.parse(scheme), out_dir,
                          {"ew_scale": ew_scale, "ni_scale": ni_scale})
    return ws.manifest


def cmd_build_index(workspace, method: str, lam: float = 0.5, dmax: str | None = None,
                    out=None) -> dict:
    m = Method.parse(method)
    if not 0.0 <= lam <= 1.0:
        raise UsageError(f"--lambda must be in [0, 1], got {lam}")
    ws = Workspace.open(workspace)
    kind, klam = _method_kind(m, lam)
    ctx = SearchContext(ws.graph, ws.text_index(), ws.norm())
    gs = ctx.search_graph(kind, klam)
    d_max = parse_dmax(dmax, gs.mean_edge_weight()) if dmax else hop2.default_d_max(gs)
    t0 = time.perf_counter()
    ix = hop2.build(gs, d_max)
    secs = time.perf_counter() - t0
    entry = ws.record_index(m.value, kind, klam, ix)
    print(f"built {entry['path']}: graph={kind} lambda={klam} d_max={ix.d_max!r} "
          f"entries={entry['entries']} mean_label={ix.stats().mean_label:.3f} "
          f"bytes={entry['bytes']} build_seconds={secs:.3f} backend={ix.backend}", file=out or sys.stdout)
    return ws.manifest


def _context(ws: Workspace, ew_scale=None, ni_scale=None) -> SearchContext:
    norm = ws.norm()
    if ew_scale or ni_scale:
        norm = NormalizationConstants(ew_scale or norm.ew_scale, ni_scale or norm.ni_scale)
    return SearchContext(ws.graph, ws.text_index(), norm)


def _attach_index(ws: Workspace, ctx: SearchContext, method: Method, lam: float,
                  d_max: float | None = None, required: bool = True) -> None:
    kind, klam = _method_kind(method, lam)
    entry = ws.find_index(kind, klam, d_max)
    if entry is None:
        if not required:
            return
        hint = f"kwgraph build-index {ws.root} --method {method.value}"
        if method is Method.COMBINED1:
            hint += f" --lambda {lam!r}"
        raise MissingIndex(f"no {kind} index for method {method.value}"
                           + (f" (lambda={klam!r})" if klam is not None else ""), hint)
    ctx.add_index(kind, klam, ws.load_index(entry))


def cmd_query(workspace, keywords, method="combined1", lam=0.5, k=5, delta=1e-3,
              max_iters=5, fmt="text", dmax=None, ew_scale=None, ni_scale=None) -> str:
    ws = Workspace.open(workspace)
    q = Query.of(keywords, method, lam=lam, k=k, delta=delta, max_iters=max_iters)
    ctx = _context(ws, ew_scale, ni_scale)
    if q.method is not Method.EXACT:
        kind, klam = _method_kind(q.method, lam)
        d = parse_dmax(dmax, ctx.search_graph(kind, klam).mean_edge_weight()) if dmax else None
        _attach_index(ws, ctx, q.method, lam, d)
    answers = search(q, ctx)
    return RENDERERS[fmt](q, answers, ctx.g)


def read_query_file(path) -> list[list[str]]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(shlex.split(line))
    return out


def compare_exact(ctx: SearchContext, keywords, lam: float = 0.5, delta: float = 1e-3,
                  max_iters: int = 5) -> dict:
    """Top-1 objective values of each ranker next to the exhaustive optimum."""
    base = dict(lam=lam, k=1, delta=delta, max_iters=max_iters)
    exact = exact_exhaustive(Query.of(keywords, Method.EXACT, **base), ctx)
    best = {obj: (exact[obj][0].scores if exact[obj] else None) for obj in ("ew", "ni", "c")}
    rows = {}
    for m in (Method.EDGE, Method.NODEIMP, Method.COMBINED1, Method.COMBINED2):
        q = Query.of(keywords, m, **base)
        res = greedy_replace(q, ctx) if m is Method.COMBINED2 else greedy_unique_root(q, ctx)
        rows[m.value] = res[0].scores if res else None
    for obj in ("ew", "ni", "c"):
        rows[f"exact-{obj}"] = best[obj]

    def ratio(s, obj):
        ref = best[obj]
        if s is None or ref is None:
            return None
        a, b = getattr(s, obj), getattr(ref, obj)
        return a / b if b > 0 else (1.0 if a == b else math.inf)

    table = []
    for name, s in rows.items():
        table.append({
            "method": name,
            "ew": None if s is None else s.ew,
            "ni": None if s is None else s.ni,
            "c": None if s is None else s.c,
            "ratio_ew": ratio(s, "ew"),
            "ratio_ni": ratio(s, "ni"),
            "ratio_c": ratio(s, "c"),
        })
    return {"query": list(keywords), "lambda": lam, "rows": table}


def _fmt(x, spec=".6g"):
    return "-" if x is None else format(x, spec)


def cmd_compare_exact(workspace, query_file, lam=0.5, delta=1e-3, max_iters=5,
                      fmt="text") -> str:
    ws = Workspace.open(workspace)
    ctx = _context(ws)
    for m in (Method.EDGE, Method.NODEIMP, Method.COMBINED1):
        _attach_index(ws, ctx, m, lam, required=False)
    reports = [compare_exact(ctx, kws, lam, delta, max_iters) for kws in read_query_file(query_file)]
    if fmt == "json":
        return json.dumps(reports, indent=2) + "\n"
    lines = []
    for rep in reports:
        lines.append(f"query: {' | '.join(rep['query'])}  lambda={rep['lambda']!r}")
        lines.append(f"  {'method':<10} {'EW':>12} {'NI':>12} {'C':>12} "
                     f"{'EW/exact':>9} {'NI/exact':>9} {'C/exact':>9}")
        for r in rep["rows"]:
            lines.append(f"  {r['method']:<10} {_fmt(r['ew']):>12} {_fmt(r['ni']):>12} "
                         f"{_fmt(r['c']):>12} {_fmt(r['ratio_ew'], '.4f'):>9} "
                         f"{_fmt(r['ratio_ni'], '.4f'):>9} {_fmt(r['ratio_c'], '.4f'):>9}")
    return "\n".join(lines) + "\n"


def bench_rows(g, dmax_values, pairs: int, seed: int = 42, timing: bool = True) -> list[dict]:
    rng = np.random.default_rng(seed)
    src = rng.integers(0, g.n, pairs).astype(np.int32) if g.n else np.zeros(0, np.int32)
    dst = rng.integers(0, g.n, pairs).astype(np.int32) if g.n else np.zeros(0, np.int32)
    rows = []
    for d in dmax_values:
        t0 = time.perf_counter()
        ix = hop2.build(g, d)
        build_s = time.perf_counter() - t0
        st = ix.stats()
        dist = ix.store.distance
        s_list, t_list = src.tolist(), dst.tolist()
        t0 = time.perf_counter()
        reached = 0
        for s, t in zip(s_list, t_list):
            if dist(s, t) != math.inf:
                reached += 1
        q_s = time.perf_counter() - t0
        row = {"d_max": d, "entries": st.entries, "mean_label": st.mean_label,
               "bytes": st.bytes, "reachable_pairs": reached}
        if timing:
            row["build_s"] = build_s
            row["query_us"] = 1e6 * q_s / pairs if pairs else 0.0
        rows.append(row)
    return rows


def machine_info() -> str:
    return (f"{platform.platform()} | {platform.processor() or platform.machine()} | "
            f"python {platform.python_version()} | backend {hop2.BACKEND}")


def cmd_bench_index(workspace, dmax_list="2x,5x,10x,inf", pairs=100000, seed=42,
                    method="edge", lam=0.5) -> str:
    ws = Workspace.open(workspace)
    m = Method.parse(method)
    kind, klam = _method_kind(m, lam)
    ctx = _context(ws)
    g = ctx.search_graph(kind, klam)
    mean_w = g.mean_edge_weight()
    values = [parse_dmax(x, mean_w) for x in dmax_list.split(",") if x.strip()]
    rows = bench_rows(g, values, pairs, seed)
    lines = [f"# {machine_info()}",
             f"# graph={kind} lambda={klam} n={g.n} m={g.m} mean_w={mean_w!r} pairs={pairs} seed={seed}",
             f"{'d_max':>14} {'entries':>12} {'mean_label':>11} {'bytes':>12} "
             f"{'reachable':>10} {'build_s':>9} {'query_us':>9}"]
    for r in rows:
        lines.append(f"{r['d_max']:>14.6g} {r['entries']:>12d} {r['mean_label']:>11.3f} "
                     f"{r['bytes']:>12d} {r['reachable_pairs']:>10d} {r['build_s']:>9.3f} "
                     f"{r['query_us']:>9.3f}")
    return "\n".join(lines) + "\n"


# -- argument parsing --------------------------------------------------------------

def _scheme(text: str) -> str:
    try:
        return str(WeightScheme.parse(text))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kwgraph",
                                description="Keyword search over node-labeled weighted graphs.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="validate TSV input and create a workspace")
    s.add_argument("nodes")
    s.add_argument("edges")
    s.add_argument("--scheme", default="semantic", type=_scheme,
                   help="semantic | logarithmic | equal[:w0] (default semantic)")
    s.add_argument("--out", required=True, help="workspace directory")
    s.add_argument("--ew-scale", type=float)
    s.add_argument("--ni-scale", type=float)

    methods = [m.value for m in Method if m is not Method.EXACT]
    s = sub.add_parser("build-index", help="build and persist a 2-hop index")
    s.add_argument("workspace")
    s.add_argument("--method", required=True, choices=methods)
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.add_argument("--dmax", help="absolute value, 'inf', or multiple of mean weight like '10x'")

    s = sub.add_parser("query", help="rank answer trees for keyword phrases")
    s.add_argument("workspace")
    s.add_argument("--keywords", nargs="+", required=True)
    s.add_argument("--method", default="combined1", choices=[m.value for m in Method])
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.add_argument("--k", type=int, default=5)
    s.add_argument("--delta", type=float, default=1e-3)
    s.add_argument("--max-iters", type=int, default=5)
    s.add_argument("--format", dest="fmt", default="text", choices=sorted(RENDERERS))
    s.add_argument("--dmax", help="pick a specific built index by d_max")
    s.add_argument("--ew-scale", type=float)
    s.add_argument("--ni-scale", type=float)

    s = sub.add_parser("compare-exact", help="greedy rankers against exhaustive search")
    s.add_argument("workspace")
    s.add_argument("query_file", help="one query per line, phrases shell-quoted")
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=1e-3)
    s.add_argument("--max-iters", type=int, default=5)
    s.add_argument("--format", dest="fmt", default="text", choices=["text", "json"])

    s = sub.add_parser("bench-index", help="index size and query latency across d_max values")
    s.add_argument("workspace")
    s.add_argument("--dmax-list", default="2x,5x,10x,inf")
    s.add_argument("--pairs", type=int, default=100000)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--method", default="edge", choices=methods)
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    return p


def run(args: argparse.Namespace) -> str:
    c = args.command
    if c == "ingest":
        man = cmd_ingest(args.nodes, args.edges, args.scheme, args.out,
                         args.ew_scale, args.ni_scale)
        return (f"ingested n={man['n']} m={man['m']} scheme={man['scheme']} "
                f"ew_scale={man['normalization']['ew_scale']!r} "
                f"ni_scale={man['normalization']['ni_scale']!r} -> {args.out}\n")
    if c == "build-index":
        cmd_build_index(args.workspace, args.method, args.lam, args.dmax)
        return ""
    if c == "query":
        return cmd_query(args.workspace, args.keywords, args.method, args.lam, args.k,
                         args.delta, args.max_iters, args.fmt, args.dmax,
                         args.ew_scale, args.ni_scale)
    if c == "compare-exact":
        return cmd_compare_exact(args.workspace, args.query_file, args.lam, args.delta,
                                 args.max_iters, args.fmt)
    if c == "bench-index":
        return cmd_bench_index(args.workspace, args.dmax_list, args.pairs, args.seed,
                               args.method, args.lam)
    raise UsageError(f"unknown command {c}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        lam = getattr(args, "lam", None)
        if lam is not None and not 0.0 <= lam <= 1.0:
            raise UsageError(f"--lambda must be in [0, 1], got {lam}")
        out = run(args)
    except UsageError as e:
        print(f"kwgraph: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MissingIndex as e:
        print(f"kwgraph: {e}; build it with: {e.hint}", file=sys.stderr)
        return EXIT_NO_INDEX
    except ExactTooLarge as e:
        print(f"kwgraph: refused: {e}", file=sys.stderr)
        return EXIT_REFUSED
    except (GraphDataError, NoMatchError, hop2.IndexFormatError, FileNotFoundError,
            ValueError) as e:
        print(f"kwgraph: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
