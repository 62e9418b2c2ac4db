"""Tokenization and dictionary-based maximum-matching segmentation.

Two regimes share one scanner:

* whitespace-delimited languages: split on whitespace, then peel
  punctuation/symbol characters into single-char tokens and keep digit runs
  whole;
* unsegmented languages (no word spaces, e.g. Chinese): greedy forward
  maximum matching against dictionary headwords, single characters as the
  fallback, digit runs and punctuation handled as above.

Token spans exactly tile the non-whitespace characters of the input, in
order; the concatenation of span texts equals the input minus whitespace.

``max_match``/``fuzzy_lookup`` implement the out-of-vocabulary path: a word
missing from the dictionary is decomposed into known headwords from both
scan directions and the longest matches are surfaced as related words.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

from .store import BilingualDictionary

# languages written without spaces between words
SPACELESS_LANGS = frozenset({"zh", "yue", "ja", "th", "lzh"})

TOKEN_WORD = "word"
TOKEN_PUNCT = "punct"
TOKEN_NUMBER = "number"


@dataclass(frozen=True)
class TokenSpan:
    """A token with its [start, end) character offsets in the input."""

    text: str
    start: int
    end: int
    kind: str


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def _is_digit(ch: str) -> bool:
    return unicodedata.category(ch) == "Nd"


def tokenize(
    sentence: str,
    lang: str,
    d: BilingualDictionary | None = None,
) -> list[TokenSpan]:
    """Split a sentence into word / punct / number spans.

    For spaceless languages a dictionary drives maximum matching; without
    one, every non-digit non-punct character becomes its own span (ASCII
    letter runs stay whole either way).  The empty string yields [].
    """
    spans: list[TokenSpan] = []
    spaceless = lang in SPACELESS_LANGS
    n = len(sentence)
    i = 0
    while i < n:
        ch = sentence[i]
        if ch.isspace():
            i += 1
            continue
        if _is_digit(ch):
            j = i + 1
            while j < n and _is_digit(sentence[j]):
                j += 1
            spans.append(TokenSpan(sentence[i:j], i, j, TOKEN_NUMBER))
            i = j
            continue
        if _is_punct(ch):
            spans.append(TokenSpan(ch, i, i + 1, TOKEN_PUNCT))
            i += 1
            continue
        if spaceless:
            match_len = 0
            if d is not None and len(d) > 0:
                limit = min(d.max_headword_len, n - i)
                for length in range(limit, 0, -1):
                    cand = sentence[i : i + length]
                    if any(c.isspace() for c in cand):
                        continue
                    if cand in d:
                        match_len = length
                        break
            if match_len:
                spans.append(TokenSpan(sentence[i : i + match_len], i, i + match_len, TOKEN_WORD))
                i += match_len
            elif ch.isascii() and ch.isalpha():
                j = i + 1
                while j < n and sentence[j].isascii() and sentence[j].isalpha():
                    j += 1
                spans.append(TokenSpan(sentence[i:j], i, j, TOKEN_WORD))
                i = j
            else:
                spans.append(TokenSpan(ch, i, i + 1, TOKEN_WORD))
                i += 1
        else:
            j = i
            while (
                j < n
                and not sentence[j].isspace()
                and not _is_punct(sentence[j])
                and not _is_digit(sentence[j])
            ):
                j += 1
            spans.append(TokenSpan(sentence[i:j], i, j, TOKEN_WORD))
            i = j
    return spans


def word_tokens(spans: list[TokenSpan]) -> list[str]:
    """Texts of the word and number spans (what alignment/retrieval index)."""
    return [t.text for t in spans if t.kind != TOKEN_PUNCT]


def max_match(
    word: str,
    d: BilingualDictionary,
    direction: str = "forward",
) -> list[str]:
    """Greedy longest-headword decomposition of an out-of-vocabulary word.

    Forward scans left to right, backward right to left; characters covered
    by no headword are skipped.  The result lists matched headwords in
    surface order for both directions.  ``word`` must not itself be a
    headword (exact lookup owns that case).
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown scan direction {direction!r}")
    if word in d:
        raise ValueError(f"{word!r} is an exact headword; use lookup, not max_match")
    out: list[str] = []
    n = len(word)
    cap = d.max_headword_len or 1
    if direction == "forward":
        i = 0
        while i < n:
            length = 0
            for size in range(min(cap, n - i), 0, -1):
                if word[i : i + size] in d:
                    length = size
                    break
            if length:
                out.append(word[i : i + length])
                i += length
            else:
                i += 1
    else:
        j = n
        while j > 0:
            length = 0
            for size in range(min(cap, j), 0, -1):
                if word[j - size : j] in d:
                    length = size
                    break
            if length:
                out.append(word[j - length : j])
                j -= length
            else:
                j -= 1
        out.reverse()
    return out


@dataclass(frozen=True)
class FuzzyMatch:
    headword: str
    direction: str
    length: int


@dataclass(frozen=True)
class FuzzyHit:
    query: str
    matches: tuple[FuzzyMatch, ...]


def fuzzy_lookup(word: str, d: BilingualDictionary, limit: int = 2) -> FuzzyHit:
    """Related in-dictionary words for an out-of-vocabulary word.

    Pools forward and backward maximum matching, deduplicates (the forward
    occurrence wins), ranks by match length descending, then forward before
    backward, then headword lexicographically, and keeps the top ``limit``.
    """
    pooled: dict[str, FuzzyMatch] = {}
    for direction in ("forward", "backward"):
        for hw in max_match(word, d, direction):
            if hw not in pooled:
                pooled[hw] = FuzzyMatch(hw, direction, len(hw))
    ranked = sorted(
        pooled.values(),
        key=lambda m: (-m.length, 0 if m.direction == "forward" else 1, m.headword),
    )
    return FuzzyHit(query=word, matches=tuple(ranked[:limit]))
