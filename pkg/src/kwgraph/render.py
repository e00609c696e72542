"""Text, JSON and Graphviz DOT renderings of ranked answers."""
from __future__ import annotations

import json
from typing import Sequence

from .graph import Graph
from .search import AnswerTree, Query, Scores
from .textindex import KeywordPhrase


def answer_to_dict(t: AnswerTree, g: Graph) -> dict:
    return {
        "root": t.root,
        "assignment": t.assignment,
        "nodes": [
            {"id": v, "type": g.node_types[v], "importance": float(g.importance[v]),
             "text": g.texts[v]}
            for v in t.nodes
        ],
        "edges": [{"u": u, "v": v, "w": g.edge_weight(u, v)} for u, v in t.edges],
        "scores": {"ew": t.scores.ew, "ni": t.scores.ni, "c": t.scores.c,
                   "search_score": t.scores.search_score},
    }


def to_json(q: Query, answers: Sequence[AnswerTree], g: Graph) -> str:
    doc = {
        "query": [kw.raw for kw in q.keywords],
        "method": q.method.value,
        "lambda": q.lam,
        "params": {"k": q.k, "delta": q.delta, "max_iters": q.max_iters},
        "answers": [answer_to_dict(t, g) for t in answers],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=True) + "\n"


def answers_from_json(text: str) -> list[AnswerTree]:
    """Rebuild answer trees from :func:`to_json` output."""
    doc = json.loads(text)
    keywords = tuple(KeywordPhrase.parse(k) for k in doc["query"])
    out = []
    for a in doc["answers"]:
        s = a["scores"]
        out.append(AnswerTree(
            root=a["root"],
            keywords=keywords,
            content=tuple(a["assignment"][kw.raw] for kw in keywords),
            nodes=tuple(n["id"] for n in a["nodes"]),
            edges=tuple((e["u"], e["v"]) for e in a["edges"]),
            scores=Scores(s["ew"], s["ni"], s["c"], s["search_score"]),
        ))
    return out


def to_text(q: Query, answers: Sequence[AnswerTree], g: Graph) -> str:
    lines = [f"query: {' | '.join(kw.raw for kw in q.keywords)}  "
             f"method={q.method.value} lambda={q.lam!r}"]
    if not answers:
        lines.append("no answers")
    for rank, t in enumerate(answers, 1):
        s = t.scores
        lines.append(f"#{rank} root={t.root} [{g.node_types[t.root]}] {g.texts[t.root]!r}  "
                     f"ew={s.ew:.6g} ni={s.ni:.6g} c={s.c:.6g} search={s.search_score:.6g}")
        for kw, c in zip(t.keywords, t.content):
            lines.append(f"    {kw.raw!r} -> {c} [{g.node_types[c]}] {g.texts[c]!r}")
        for u, v in t.edges:
            lines.append(f"    {u} -- {v}  w={g.edge_weight(u, v):.6g}")
    return "\n".join(lines) + "\n"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def to_dot(q: Query, answers: Sequence[AnswerTree], g: Graph) -> str:
    """One cluster per answer; content nodes dotted, root double-bordered."""
    out = ["graph answers {", "  node [shape=box];"]
    for rank, t in enumerate(answers, 1):
        content = set(t.content)
        out.append(f"  subgraph cluster_{rank} {{")
        out.append(f"    label={_quote(f'#{rank} c={t.scores.c:.6g}')};")
        for v in t.nodes:
            attrs = [f"label={_quote(f'{g.texts[v]} ({g.node_types[v]})')}"]
            if v in content:
                attrs.append("style=dotted")
            if v == t.root:
                attrs.append("peripheries=2")
            out.append(f"    a{rank}_{v} [{', '.join(attrs)}];")
        for u, v in t.edges:
            out.append(f"    a{rank}_{u} -- a{rank}_{v} [label={_quote(f'{g.edge_weight(u, v):.6g}')}];")
        out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"


RENDERERS = {"text": to_text, "json": to_json, "dot": to_dot}
