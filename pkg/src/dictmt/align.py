"""Bilingual lexicon induction via IBM Model 1 expectation-maximization.

Trains word-translation probabilities t(target | source) from a tokenized
parallel corpus, optionally with a NULL source word that absorbs target
words with no lexical counterpart.  High-confidence pairs above a threshold
become an induced lexicon, symmetrized over both training directions, and
can be merged into a bilingual dictionary as new senses with provenance
"induced".

Training is exact EM: per iteration, expected counts are collected with the
standard per-target-token normalization and the table is re-normalized per
source word.  The per-iteration corpus log-likelihood (up to the constant
alignment-count terms, which do not change across iterations) is recorded
and is non-decreasing.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import segment
from .store import (
    BilingualDictionary,
    DataError,
    DictEntry,
    ParallelCorpus,
    Sense,
)

logger = logging.getLogger(__name__)

NULL_TOKEN = "<NULL>"

TokenizedPair = tuple[list[str], list[str]]


def _fold_token(tok: str) -> str:
    # Latin-script tokens are case-folded so "Mbanj"/"mbanj" share counts;
    # scripts without case are unchanged by casefold.
    return tok.casefold()


def tokenized_pairs(
    corpus: ParallelCorpus,
    src_lang: str,
    tgt_lang: str,
    src_dict: BilingualDictionary | None = None,
    tgt_dict: BilingualDictionary | None = None,
) -> list[TokenizedPair]:
    """Tokenize both corpus sides for training (word/number tokens, folded).

    Pairs where either side tokenizes to nothing (e.g. punctuation-only)
    are skipped with a warning.
    """
    out: list[TokenizedPair] = []
    skipped = 0
    for pair in corpus:
        src = [_fold_token(t) for t in segment.word_tokens(segment.tokenize(pair.src, src_lang, src_dict))]
        tgt = [_fold_token(t) for t in segment.word_tokens(segment.tokenize(pair.tgt, tgt_lang, tgt_dict))]
        if not src or not tgt:
            skipped += 1
            continue
        out.append((src, tgt))
    if skipped:
        logger.warning("skipped %d pairs with an empty tokenized side", skipped)
    return out


@dataclass
class AlignmentTable:
    """Trained t(target | source) table plus training trace."""

    t: dict[tuple[str, str], float]
    source_vocab: frozenset[str]
    target_vocab: frozenset[str]
    iterations: int
    log_likelihoods: list[float] = field(default_factory=list)
    null_word: bool = True

    def prob(self, source: str, target: str) -> float:
        return self.t.get((source, target), 0.0)


def train_model1(
    pairs: Sequence[TokenizedPair],
    iters: int = 10,
    null_word: bool = True,
) -> AlignmentTable:
    """Run Model 1 EM over tokenized sentence pairs.

    The table is initialized uniformly over each source word's co-occurring
    target words, so probabilities stay normalized per source word from the
    first iteration on.  With ``null_word`` a NULL token joins every source
    sentence.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    pairs = [p for p in pairs if p[0] and p[1]]
    if not pairs:
        raise DataError("no usable sentence pairs for alignment training")

    cooc: dict[str, set[str]] = defaultdict(set)
    src_vocab: set[str] = set()
    tgt_vocab: set[str] = set()
    for src, tgt in pairs:
        row = set(src)
        if null_word:
            row.add(NULL_TOKEN)
        for s in row:
            cooc[s].update(tgt)
        src_vocab.update(src)
        tgt_vocab.update(tgt)

    t: dict[tuple[str, str], float] = {}
    for s, targets in cooc.items():
        u = 1.0 / len(targets)
        for w in targets:
            t[(s, w)] = u

    lls: list[float] = []
    for _ in range(iters):
        count: dict[tuple[str, str], float] = defaultdict(float)
        total: dict[str, float] = defaultdict(float)
        ll = 0.0
        for src, tgt in pairs:
            row = list(src) + ([NULL_TOKEN] if null_word else [])
            for w in tgt:
                denom = 0.0
                for s in row:
                    denom += t[(s, w)]
                ll += math.log(denom)
                for s in row:
                    frac = t[(s, w)] / denom
                    count[(s, w)] += frac
                    total[s] += frac
        for (s, w) in count:
            t[(s, w)] = count[(s, w)] / total[s]
        lls.append(ll)

    return AlignmentTable(
        t=t,
        source_vocab=frozenset(src_vocab),
        target_vocab=frozenset(tgt_vocab),
        iterations=iters,
        log_likelihoods=lls,
        null_word=null_word,
    )


@dataclass(frozen=True)
class LexiconItem:
    source: str
    target: str
    score: float


@dataclass
class InducedLexicon:
    """Thresholded translation pairs, sorted by score desc, then words."""

    items: list[LexiconItem]
    threshold: float

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


def extract_lexicon(
    table: AlignmentTable,
    threshold: float = 0.6,
    d: BilingualDictionary | None = None,
) -> InducedLexicon:
    """Keep (source, target) pairs with t >= threshold.

    NULL never appears; when a dictionary is supplied, pairs already present
    as a base sense of the source headword are dropped (they carry no new
    information).
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold {threshold} outside (0, 1]")
    items: list[LexiconItem] = []
    for (s, w), p in table.t.items():
        if s == NULL_TOKEN or p < threshold:
            continue
        if d is not None:
            entry = d.lookup(s)
            if entry and any(
                x.provenance == "base" and x.text == w for x in entry.senses
            ):
                continue
        # EM rounding can leave p a hair above 1.0
        items.append(LexiconItem(s, w, min(p, 1.0)))
    items.sort(key=lambda it: (-it.score, it.source, it.target))
    return InducedLexicon(items=items, threshold=threshold)


def symmetrized_lexicon(
    fwd: AlignmentTable,
    bwd: AlignmentTable,
    threshold: float = 0.6,
    d: BilingualDictionary | None = None,
) -> InducedLexicon:
    """Union the two training directions: keep a pair when either direction
    clears the threshold, scored by the larger probability.

    ``fwd`` holds t(target | source), ``bwd`` t(source | target); the result
    is oriented source -> target.
    """
    best: dict[tuple[str, str], float] = {}
    for (s, w), p in fwd.t.items():
        if s != NULL_TOKEN and p >= threshold:
            best[(s, w)] = p
    for (w, s), p in bwd.t.items():
        if w != NULL_TOKEN and p >= threshold:
            key = (s, w)
            if p > best.get(key, 0.0):
                best[key] = p
    items = []
    for (s, w), p in best.items():
        if d is not None:
            entry = d.lookup(s)
            if entry and any(
                x.provenance == "base" and x.text == w for x in entry.senses
            ):
                continue
        items.append(LexiconItem(s, w, min(p, 1.0)))
    items.sort(key=lambda it: (-it.score, it.source, it.target))
    return InducedLexicon(items=items, threshold=threshold)


def merge_into_dictionary(
    lex: InducedLexicon, d: BilingualDictionary
) -> BilingualDictionary:
    """Append induced senses to a copy of the dictionary.

    Existing entries gain induced senses after their current ones; unseen
    source words become new entries.  A pair whose (headword, text) already
    exists under any provenance is skipped, preserving the no-duplicate
    invariant.
    """
    out = BilingualDictionary(d.direction)
    additions: dict[str, list[Sense]] = defaultdict(list)
    new_entries = 0
    new_senses = 0
    for it in lex:
        additions[it.source].append(Sense(it.target, "induced", it.score))
    for e in d.entries():
        senses = list(e.senses)
        have = {s.text for s in senses}
        for s in additions.pop(e.headword, []):
            if s.text in have:
                continue
            senses.append(s)
            have.add(s.text)
            new_senses += 1
        out.add(DictEntry(e.headword, senses, list(e.pos) if e.pos else None))
    for headword, senses in additions.items():
        uniq: list[Sense] = []
        have = set()
        for s in senses:
            if s.text not in have:
                uniq.append(s)
                have.add(s.text)
        out.add(DictEntry(headword, uniq))
        new_entries += 1
        new_senses += len(uniq)
    logger.info(
        "merged induced lexicon: %d new senses, %d new entries", new_senses, new_entries
    )
    return out


def save_lexicon(lex: InducedLexicon, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for it in lex:
            fh.write(f"{it.source}\t{it.target}\t{it.score:.6f}\n")


def load_lexicon(path: str | Path, threshold: float = 0.0) -> InducedLexicon:
    items: list[LexiconItem] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if len(cells) != 3:
                raise DataError(f"{path}:{lineno}: expected source<TAB>target<TAB>score")
            try:
                items.append(LexiconItem(cells[0], cells[1], float(cells[2])))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad score {cells[2]!r}") from exc
    items.sort(key=lambda it: (-it.score, it.source, it.target))
    return InducedLexicon(items=items, threshold=threshold)
