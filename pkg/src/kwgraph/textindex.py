"""Keyword -> content node lookup.

Node text is tokenized into lowercase alphanumeric runs.  A query keyword is
a phrase; a node matches when the phrase's tokens occur contiguously in the
node's token sequence.
"""
from __future__ import annotations

import re
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path

from .graph import Graph

_TOKEN = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class KeywordPhrase:
    raw: str
    tokens: tuple[str, ...]

    @classmethod
    def parse(cls, raw: str) -> "KeywordPhrase":
        toks = tuple(tokenize(raw))
        if not toks:
            raise ValueError(f"keyword {raw!r} has no searchable tokens")
        return cls(raw, toks)

    def __str__(self):
        return " ".join(self.tokens)


def _contains_run(haystack: list[str], needle: tuple[str, ...]) -> bool:
    k = len(needle)
    first = needle[0]
    for i in range(len(haystack) - k + 1):
        if haystack[i] == first and tuple(haystack[i:i + k]) == needle:
            return True
    return False


class InvertedIndex:
    """Token -> ascending, duplicate-free list of node ids."""

    def __init__(self, postings: dict[str, list[int]]):
        self.postings = postings

    def __len__(self):
        return len(self.postings)

    def __eq__(self, other):
        return isinstance(other, InvertedIndex) and self.postings == other.postings

    def get(self, token: str) -> list[int]:
        return self.postings.get(token, [])

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for tok in sorted(self.postings):
                fh.write(tok + "\t" + ",".join(map(str, self.postings[tok])) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "InvertedIndex":
        postings: dict[str, list[int]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                tok, sep, ids = line.partition("\t")
                if not sep or not ids:
                    raise ValueError(f"{path}:{lineno}: malformed postings line")
                postings[tok] = [int(x) for x in ids.split(",")]
        return cls(postings)


def build_inverted_index(g: Graph) -> InvertedIndex:
    postings: dict[str, list[int]] = {}
    for i, text in enumerate(g.texts):
        for tok in set(tokenize(text)):
            postings.setdefault(tok, []).append(i)
    # ids were appended in ascending order already
    return InvertedIndex(postings)


def _intersect(a: list[int], b: list[int]) -> list[int]:
    if len(a) > len(b):
        a, b = b, a
    out = []
    for x in a:
        j = bisect_left(b, x)
        if j < len(b) and b[j] == x:
            out.append(x)
    return out


def content_nodes(idx: InvertedIndex, g: Graph, phrase: KeywordPhrase | str) -> list[int]:
    """Ascending ids of nodes whose text contains ``phrase`` as a contiguous token run."""
    if isinstance(phrase, str):
        phrase = KeywordPhrase.parse(phrase)
    lists = [idx.get(t) for t in dict.fromkeys(phrase.tokens)]
    if any(not p for p in lists):
        return []
    lists.sort(key=len)
    cand = lists[0]
    for p in lists[1:]:
        cand = _intersect(cand, p)
        if not cand:
            return []
    if len(phrase.tokens) == 1:
        return list(cand)
    return [i for i in cand if _contains_run(tokenize(g.texts[i]), phrase.tokens)]
