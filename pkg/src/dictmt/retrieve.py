"""Exemplar retrieval over the parallel corpus.

Three strategies return a ranked ExemplarSet for a query sentence:

* Okapi BM25 over an inverted index of one corpus side (the workhorse);
* POS-sequence similarity: token-level Levenshtein distance between POS tag
  sequences derived from the dictionary;
* seeded uniform random (the control).

BM25 uses idf = ln((N - df + 0.5) / (df + 0.5) + 1), k1/b defaults 1.5/0.75,
and repeated query terms contribute once per occurrence.  Documents scoring
zero never appear in results, and a document whose indexed side equals the
query string is excluded so a query drawn from the corpus cannot retrieve
itself.  Indexes serialize to JSON; a loaded index tokenizes unsegmented-
language queries by maximum matching against its own term vocabulary, which
is score-equivalent to dictionary segmentation because out-of-vocabulary
terms cannot score.
"""

from __future__ import annotations

import json
import math
import random
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import segment
from .store import BilingualDictionary, DataError, ParallelCorpus, SentencePair


@dataclass
class ExemplarSet:
    """Ranked (pair, score) list; score semantics depend on the strategy
    (BM25 score, POS edit distance, 0.0 for random)."""

    items: list[tuple[SentencePair, float]]
    strategy: str

    def pairs(self) -> list[SentencePair]:
        return [p for p, _ in self.items]

    def ids(self) -> list[int]:
        return [p.id for p, _ in self.items]

    def __len__(self) -> int:
        return len(self.items)

    def reversed_copy(self) -> "ExemplarSet":
        return ExemplarSet(items=list(reversed(self.items)), strategy=self.strategy)


def _side_text(pair: SentencePair, side: str) -> str:
    if side == "src":
        return pair.src
    if side == "tgt":
        return pair.tgt
    raise ValueError(f"side must be 'src' or 'tgt', got {side!r}")


class _VocabView:
    """Set of index terms exposed with the dictionary lookup surface so
    segment.tokenize can max-match queries against it."""

    def __init__(self, terms: Iterable[str]) -> None:
        self._terms = set(terms)
        self.max_headword_len = max((len(t) for t in self._terms), default=0)

    def __contains__(self, term: str) -> bool:
        return term in self._terms

    def __len__(self) -> int:
        return len(self._terms)


def _doc_tokens(
    text: str, lang: str, d: BilingualDictionary | None
) -> list[str]:
    return [t.casefold() for t in segment.word_tokens(segment.tokenize(text, lang, d))]


class Bm25Index:
    """Inverted index over one side of a parallel corpus."""

    def __init__(
        self,
        side: str,
        lang: str,
        k1: float,
        b: float,
        pairs: list[SentencePair],
        doc_tokens: list[list[str]],
    ) -> None:
        if len(pairs) == 0:
            raise DataError("cannot index an empty corpus")
        if k1 < 0 or not (0.0 <= b <= 1.0):
            raise ValueError(f"bad BM25 parameters k1={k1} b={b}")
        self.side = side
        self.lang = lang
        self.k1 = k1
        self.b = b
        self.pairs = pairs
        self.doc_len = [len(toks) for toks in doc_tokens]
        self.avgdl = sum(self.doc_len) / len(self.doc_len)
        self.postings: dict[str, list[tuple[int, int]]] = {}
        for i, toks in enumerate(doc_tokens):
            for term, tf in sorted(Counter(toks).items()):
                self.postings.setdefault(term, []).append((i, tf))
        self._texts = [
            unicodedata.normalize("NFC", _side_text(p, side)) for p in pairs
        ]
        self._vocab = _VocabView(self.postings.keys())

    def __len__(self) -> int:
        return len(self.pairs)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        n = len(self.pairs)
        return math.log((n - df + 0.5) / (df + 0.5) + 1.0)

    def tokenize_query(self, query: str) -> list[str]:
        if self.lang in segment.SPACELESS_LANGS:
            spans = segment.tokenize(query, self.lang, self._vocab)  # type: ignore[arg-type]
        else:
            spans = segment.tokenize(query, self.lang)
        return [t.casefold() for t in segment.word_tokens(spans)]

    def score(self, query_tokens: Sequence[str], doc_index: int) -> float:
        total = 0.0
        dl = self.doc_len[doc_index]
        norm = self.k1 * (1.0 - self.b + self.b * dl / self.avgdl)
        for term in query_tokens:
            tf = 0
            for i, f in self.postings.get(term, ()):
                if i == doc_index:
                    tf = f
                    break
            if tf == 0:
                continue
            w = self.idf(term) * (self.k1 + 1.0)
            total += w * tf / (tf + norm)
        return total

    def to_dict(self) -> dict:
        return {
            "format": "dictmt-bm25-index",
            "side": self.side,
            "lang": self.lang,
            "k1": self.k1,
            "b": self.b,
            "pairs": [
                {"id": p.id, "src": p.src, "tgt": p.tgt, "tag": p.tag}
                for p in self.pairs
            ],
            "doc_tokens": self._doc_tokens_back(),
        }

    def _doc_tokens_back(self) -> list[list[str]]:
        toks: list[list[str]] = [[] for _ in self.pairs]
        for term, row in self.postings.items():
            for i, tf in row:
                toks[i].extend([term] * tf)
        return [sorted(t) for t in toks]

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False)

    @classmethod
    def load(cls, path: str | Path) -> "Bm25Index":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if raw.get("format") != "dictmt-bm25-index":
            raise DataError(f"{path}: not a BM25 index file")
        pairs = [
            SentencePair(id=r["id"], src=r["src"], tgt=r["tgt"], tag=r.get("tag"))
            for r in raw["pairs"]
        ]
        return cls(
            side=raw["side"],
            lang=raw["lang"],
            k1=raw["k1"],
            b=raw["b"],
            pairs=pairs,
            doc_tokens=raw["doc_tokens"],
        )


def build_bm25(
    corpus: ParallelCorpus,
    side: str = "src",
    lang: str = "",
    d: BilingualDictionary | None = None,
    k1: float = 1.5,
    b: float = 0.75,
) -> Bm25Index:
    pairs = list(corpus)
    doc_tokens = [_doc_tokens(_side_text(p, side), lang, d) for p in pairs]
    return Bm25Index(side=side, lang=lang, k1=k1, b=b, pairs=pairs, doc_tokens=doc_tokens)


def bm25_topk(
    index: Bm25Index,
    query: str,
    k: int,
    exclude_ids: Iterable[int] = (),
) -> ExemplarSet:
    """Top-k docs by BM25 score, ties broken by ascending corpus id."""
    if k < 0:
        raise ValueError("k must be >= 0")
    banned = set(exclude_ids)
    q_tokens = index.tokenize_query(query)
    q_text = unicodedata.normalize("NFC", query)
    # accumulate per doc by walking postings; per-doc terms are added in
    # query-token order, the same grouping Bm25Index.score uses
    acc: dict[int, float] = {}
    norms = [
        index.k1 * (1.0 - index.b + index.b * dl / index.avgdl)
        for dl in index.doc_len
    ]
    for term in q_tokens:
        row = index.postings.get(term)
        if not row:
            continue
        w = index.idf(term) * (index.k1 + 1.0)
        for i, tf in row:
            acc[i] = acc.get(i, 0.0) + w * tf / (tf + norms[i])
    scored: list[tuple[float, int, int]] = []
    for i, s in acc.items():
        pair = index.pairs[i]
        if pair.id in banned or index._texts[i] == q_text:
            continue
        if s > 0.0:
            scored.append((-s, pair.id, i))
    scored.sort()
    items = [(index.pairs[i], -neg) for neg, _, i in scored[:k]]
    return ExemplarSet(items=items, strategy="bm25")


def levenshtein(a: Sequence[str], b: Sequence[str]) -> int:
    """Token-level edit distance (insert/delete/substitute, unit costs)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def pos_sequence(sentence: str, d: BilingualDictionary) -> list[str]:
    """POS tag per word/number token: the tag aligned to the first sense of
    the exact-match entry, "X" when the word or its tags are unknown."""
    lang = d.direction[0]
    tags: list[str] = []
    for span in segment.tokenize(sentence, lang, d):
        if span.kind == segment.TOKEN_PUNCT:
            continue
        entry = d.lookup(span.text) or d.lookup(span.text.casefold())
        if entry is not None and entry.pos:
            tags.append(entry.pos[0])
        else:
            tags.append("X")
    return tags


@dataclass
class PosIndex:
    """POS tag sequences for corpus docs that have at least one known tag."""

    side: str
    entries: list[tuple[SentencePair, list[str]]]

    def __len__(self) -> int:
        return len(self.entries)


def build_pos_index(
    corpus: ParallelCorpus, side: str, d: BilingualDictionary
) -> PosIndex:
    entries = []
    for pair in corpus:
        tags = pos_sequence(_side_text(pair, side), d)
        if any(t != "X" for t in tags):
            entries.append((pair, tags))
    return PosIndex(side=side, entries=entries)


def pos_topk(
    index: PosIndex,
    query_tags: Sequence[str],
    k: int,
    exclude_ids: Iterable[int] = (),
) -> ExemplarSet:
    """k nearest docs by POS-sequence edit distance (score = distance),
    ties broken by ascending corpus id."""
    if k < 0:
        raise ValueError("k must be >= 0")
    banned = set(exclude_ids)
    scored = [
        (levenshtein(query_tags, tags), pair.id, pair)
        for pair, tags in index.entries
        if pair.id not in banned
    ]
    scored.sort(key=lambda t: (t[0], t[1]))
    items = [(pair, float(dist)) for dist, _, pair in scored[:k]]
    return ExemplarSet(items=items, strategy="pos")


def random_topk(
    corpus: ParallelCorpus,
    k: int,
    seed: int,
    exclude_ids: Iterable[int] = (),
    exclude_text: str | None = None,
    side: str = "src",
) -> ExemplarSet:
    """Seeded uniform sample without replacement (deterministic per seed)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    banned = set(exclude_ids)
    q_text = unicodedata.normalize("NFC", exclude_text) if exclude_text else None
    candidates = [
        p
        for p in corpus
        if p.id not in banned
        and (q_text is None or unicodedata.normalize("NFC", _side_text(p, side)) != q_text)
    ]
    rng = random.Random(seed)
    take = min(k, len(candidates))
    items = [(p, 0.0) for p in rng.sample(candidates, take)]
    return ExemplarSet(items=items, strategy="random")
