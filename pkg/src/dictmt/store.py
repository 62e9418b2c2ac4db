"""Bilingual dictionary, parallel corpus, and synonym-list storage.

Everything downstream (segmentation, lexicon induction, retrieval, prompt
construction) reads through the types in this module.  File formats are
line-oriented so that diffs stay reviewable and partial corruption is
reported with a line number:

* dictionary: JSONL, one entry per line with ``headword``, ``senses``
  (each ``{"text", "provenance", "score"?}``) and optional ``pos`` tags
  aligned to the senses;
* corpus: JSONL with ``id``, ``src``, ``tgt`` and an optional ``tag``;
* synonyms: TSV, ``word<TAB>syn1<TAB>syn2...``;
* monolingual text: plain UTF-8, one sentence per line.

All text is NFC-normalized on load.  Entry and pair order is preserved
everywhere; functions that derive a new dictionary (reversal, synonym
expansion, lexicon merge in :mod:`dictmt.align`) never mutate their input.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator


PROVENANCES = ("base", "induced", "synonym")


class DataError(Exception):
    """Raised for malformed or inconsistent input data files."""


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class Sense:
    """One target-language reading of a headword.

    ``score`` is the induction confidence and is present exactly when
    ``provenance`` is ``"induced"``.
    """

    text: str
    provenance: str = "base"
    score: float | None = None

    def __post_init__(self) -> None:
        if not self.text:
            raise DataError("sense text must be non-empty")
        if self.provenance not in PROVENANCES:
            raise DataError(f"unknown sense provenance {self.provenance!r}")
        if (self.score is not None) != (self.provenance == "induced"):
            raise DataError("sense score is present iff provenance is 'induced'")
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise DataError(f"sense score {self.score} outside [0, 1]")


@dataclass
class DictEntry:
    """A headword with its ordered senses and optional POS tags.

    ``pos``, when present, is aligned index-wise to ``senses`` (it may be
    shorter; missing positions are untagged).
    """

    headword: str
    senses: list[Sense]
    pos: list[str] | None = None

    def __post_init__(self) -> None:
        if not self.headword:
            raise DataError("entry headword must be non-empty")
        if not self.senses:
            raise DataError(f"entry {self.headword!r} has no senses")
        seen: set[str] = set()
        for s in self.senses:
            if s.text in seen:
                raise DataError(
                    f"entry {self.headword!r} repeats sense text {s.text!r}"
                )
            seen.add(s.text)

    def sense_texts(self) -> list[str]:
        return [s.text for s in self.senses]


class BilingualDictionary:
    """Ordered headword -> entry map for one translation direction.

    ``direction`` is a ``(source_lang, target_lang)`` code pair; headwords
    are in the source language, sense texts in the target language.
    Lookup is exact-match on the headword string (NFC).
    """

    def __init__(
        self,
        direction: tuple[str, str],
        entries: Iterable[DictEntry] = (),
    ) -> None:
        self.direction = (direction[0], direction[1])
        self._entries: dict[str, DictEntry] = {}
        self.max_headword_len = 0
        for e in entries:
            self.add(e)

    def add(self, entry: DictEntry) -> None:
        if entry.headword in self._entries:
            raise DataError(f"duplicate headword {entry.headword!r}")
        self._entries[entry.headword] = entry
        if len(entry.headword) > self.max_headword_len:
            self.max_headword_len = len(entry.headword)

    def lookup(self, headword: str) -> DictEntry | None:
        return self._entries.get(headword)

    def __contains__(self, headword: str) -> bool:
        return headword in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> Iterator[DictEntry]:
        return iter(self._entries.values())

    def headwords(self) -> Iterator[str]:
        return iter(self._entries.keys())

    def stats(self) -> dict[str, float]:
        n = len(self._entries)
        senses = sum(len(e.senses) for e in self._entries.values())
        return {
            "entries": n,
            "senses": senses,
            "senses_per_entry": senses / n if n else 0.0,
        }


@dataclass(frozen=True)
class SentencePair:
    """One aligned sentence pair; ``tag`` is free-form (difficulty, source)."""

    id: int
    src: str
    tgt: str
    tag: str | None = None


class ParallelCorpus:
    """Ordered collection of sentence pairs with unique integer ids."""

    def __init__(self, pairs: Iterable[SentencePair] = ()) -> None:
        self.pairs: list[SentencePair] = []
        self._by_id: dict[int, SentencePair] = {}
        for p in pairs:
            self.add(p)

    def add(self, pair: SentencePair) -> None:
        if pair.id in self._by_id:
            raise DataError(f"duplicate corpus id {pair.id}")
        if not pair.src or not pair.tgt:
            raise DataError(f"corpus pair {pair.id} has an empty side")
        self.pairs.append(pair)
        self._by_id[pair.id] = pair

    def by_id(self, pair_id: int) -> SentencePair | None:
        return self._by_id.get(pair_id)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)


@dataclass
class SynonymList:
    """Per-word synonym relation, symmetric closure of the TSV lines."""

    related: dict[str, list[str]] = field(default_factory=dict)

    def of(self, word: str) -> list[str]:
        return self.related.get(word, [])

    def _link(self, a: str, b: str) -> None:
        if a == b:
            return
        row = self.related.setdefault(a, [])
        if b not in row:
            row.append(b)


def load_dictionary(path: str | Path, direction: tuple[str, str]) -> BilingualDictionary:
    """Load a JSONL dictionary; raises DataError with the offending line number."""
    d = BilingualDictionary(direction)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: bad JSON ({exc.msg})") from exc
            try:
                entry = _entry_from_raw(raw)
                d.add(entry)
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return d


def _entry_from_raw(raw: dict) -> DictEntry:
    if not isinstance(raw, dict) or "headword" not in raw or "senses" not in raw:
        raise DataError("entry needs 'headword' and 'senses'")
    senses = []
    for s in raw["senses"]:
        if isinstance(s, str):  # tolerate the compact form used by hand-built fixtures
            senses.append(Sense(_nfc(s)))
            continue
        senses.append(
            Sense(
                text=_nfc(s["text"]),
                provenance=s.get("provenance", "base"),
                score=s.get("score"),
            )
        )
    pos = raw.get("pos")
    if pos is not None:
        pos = [_nfc(p) for p in pos]
    return DictEntry(headword=_nfc(raw["headword"]), senses=senses, pos=pos)


def save_dictionary(d: BilingualDictionary, path: str | Path) -> None:
    """Write JSONL that load_dictionary reads back identically (round-trip)."""
    with open(path, "w", encoding="utf-8") as fh:
        for e in d.entries():
            senses = []
            for s in e.senses:
                obj: dict = {"text": s.text, "provenance": s.provenance}
                if s.score is not None:
                    obj["score"] = s.score
                senses.append(obj)
            row: dict = {"headword": e.headword, "senses": senses}
            if e.pos is not None:
                row["pos"] = e.pos
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def load_corpus(path: str | Path) -> ParallelCorpus:
    corpus = ParallelCorpus()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: bad JSON ({exc.msg})") from exc
            try:
                pair = SentencePair(
                    id=int(raw["id"]),
                    src=_nfc(raw["src"]),
                    tgt=_nfc(raw["tgt"]),
                    tag=_nfc(raw["tag"]) if raw.get("tag") else None,
                )
                corpus.add(pair)
            except (KeyError, TypeError, ValueError, DataError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return corpus


def load_synonyms(path: str | Path) -> SynonymList:
    syn = SynonymList()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cells = [_nfc(c.strip()) for c in line.split("\t")]
            cells = [c for c in cells if c]
            if len(cells) < 2:
                raise DataError(f"{path}:{lineno}: need a word and at least one synonym")
            head, rest = cells[0], cells[1:]
            for w in rest:
                syn._link(head, w)
                syn._link(w, head)
    return syn


def load_monolingual(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [_nfc(line.strip()) for line in fh if line.strip()]


def reverse_dictionary(d: BilingualDictionary) -> BilingualDictionary:
    """Swap the direction: every base (headword, sense) pair becomes
    (sense text, headword).

    Only base senses are reversed; induced and synonym senses are derived
    data and would double-count.  Reversed senses carry provenance "base".
    Entry order and per-entry sense order follow first appearance during a
    file-order scan of the (entry, base-sense) pairs.
    """
    rev_senses: dict[str, list[str]] = {}
    for e in d.entries():
        for s in e.senses:
            if s.provenance != "base":
                continue
            row = rev_senses.setdefault(s.text, [])
            if e.headword not in row:
                row.append(e.headword)
    out = BilingualDictionary((d.direction[1], d.direction[0]))
    for head, texts in rev_senses.items():
        out.add(DictEntry(headword=head, senses=[Sense(t) for t in texts]))
    return out


def expand_with_synonyms(
    d: BilingualDictionary, syn: SynonymList
) -> BilingualDictionary:
    """Add entries for synonym-related words missing from the dictionary.

    For each word W related (symmetrically) to some in-dictionary headword
    and absent from ``d``, create an entry whose senses are the base/induced
    senses of W's related in-dictionary headwords, deduplicated by text, in
    entry order; the copied senses carry provenance "synonym".  Existing
    entries are never modified, so running the expansion twice is a no-op:
    entries added by a first pass hold only synonym-provenance senses, which
    are never copied further.
    """
    out = BilingualDictionary(d.direction)
    for e in d.entries():
        out.add(DictEntry(e.headword, list(e.senses), list(e.pos) if e.pos else None))

    # candidate words in first-mention order over d's entries
    candidates: list[str] = []
    seen: set[str] = set()
    for e in d.entries():
        for w in syn.of(e.headword):
            if w not in seen:
                seen.add(w)
                candidates.append(w)

    for w in candidates:
        if w in out:
            continue
        texts: list[str] = []
        for related in syn.of(w):
            entry = d.lookup(related)
            if entry is None:
                continue
            for s in entry.senses:
                if s.provenance == "synonym":
                    continue
                if s.text not in texts:
                    texts.append(s.text)
        if not texts:
            continue
        out.add(DictEntry(headword=w, senses=[Sense(t, "synonym") for t in texts]))
    return out
