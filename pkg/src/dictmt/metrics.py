"""Corpus BLEU and chrF scoring with standard reference-tool semantics.

BLEU: 4-gram, corpus-pooled clipped counts, geometric mean of precisions,
brevity penalty exp(1 - ref_len/hyp_len) when the hypothesis is shorter,
and no smoothing — an order with zero matches (including zero total
n-grams) zeroes the corpus score.  Scores are reported on a 0-100 scale.
Identical corpora score exactly 100.0; corpora sharing no n-grams score 0.0.

chrF: character n-grams of order 1..6, beta=2, whitespace removed before
counting, statistics pooled over the corpus per order, averaged over the
orders observed in both hypothesis and reference (effective order).

Two tokenizers: "intl" detaches symbol characters unconditionally and
punctuation away from adjoining non-number characters (so "3.5" stays one
token), via sequential pair-rewrite passes with reference-tool semantics;
"han-aware" additionally makes every CJK character its own token so scores
on Chinese-side output do not depend on word segmentation.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence
from unicodedata import category

BLEU_ORDER = 4
CHRF_ORDER = 6
CHRF_BETA = 2.0

TOKENIZATIONS = ("intl", "han-aware")

# Code point ranges treated as CJK: ideographs, radicals, kana-adjacent
# punctuation/compat blocks, and fullwidth forms.
_CJK_RANGES = (
    (0x2E80, 0x2EFF),
    (0x2F00, 0x2FDF),
    (0x2FF0, 0x2FFF),
    (0x3000, 0x303F),
    (0x3100, 0x312F),
    (0x31A0, 0x31BF),
    (0x31C0, 0x31EF),
    (0x3200, 0x32FF),
    (0x3300, 0x33FF),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0xFE10, 0xFE1F),
    (0xFE30, 0xFE4F),
    (0xFF00, 0xFFEF),
    (0x20000, 0x2A6DF),
    (0x2F800, 0x2FA1F),
)


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    for lo, hi in _CJK_RANGES:
        if lo <= cp <= hi:
            return True
    return False


def _sub_pairs(s: str, match, repl) -> str:
    """One left-to-right pass rewriting character pairs, non-overlapping:
    a match consumes both characters, the way sequential regex substitution
    with a two-character pattern does.  That consumption matters — in a
    punctuation run like "???5" only alternating characters can match, so
    the reference tool really does emit "?5" as one token."""
    out: list[str] = []
    i = 0
    n = len(s)
    while i < n:
        if i + 1 < n and match(s[i], s[i + 1]):
            out.append(repl(s[i], s[i + 1]))
            i += 2
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


def _tokenize(text: str, han_aware: bool) -> list[str]:
    """Two pair-rewrite passes (punctuation after / before a non-number
    character), then unconditional symbol isolation, then whitespace split.
    han-aware mode first pads every CJK character with spaces so each comes
    out as its own token."""
    if han_aware:
        text = "".join(f" {c} " if _is_cjk(c) else c for c in text)
    s = _sub_pairs(
        text,
        lambda a, b: category(a)[0] != "N" and category(b)[0] == "P",
        lambda a, b: f"{a} {b} ",
    )
    s = _sub_pairs(
        s,
        lambda a, b: category(a)[0] == "P" and category(b)[0] != "N",
        lambda a, b: f" {a} {b}",
    )
    s = "".join(f" {c} " if category(c)[0] == "S" else c for c in s)
    return s.split()


def tokenize_intl(text: str) -> list[str]:
    return _tokenize(text, han_aware=False)


def tokenize_han_aware(text: str) -> list[str]:
    return _tokenize(text, han_aware=True)


def _tokenizer(name: str):
    if name == "intl":
        return tokenize_intl
    if name == "han-aware":
        return tokenize_han_aware
    raise ValueError(f"unknown tokenization {name!r}; expected one of {TOKENIZATIONS}")


def _ngram_counts(tokens: Sequence[str], max_order: int) -> Counter:
    counts: Counter = Counter()
    for order in range(1, max_order + 1):
        for i in range(len(tokens) - order + 1):
            counts[tuple(tokens[i : i + order])] += 1
    return counts


@dataclass
class _BleuStats:
    correct: list[int] = field(default_factory=lambda: [0] * BLEU_ORDER)
    total: list[int] = field(default_factory=lambda: [0] * BLEU_ORDER)
    hyp_len: int = 0
    ref_len: int = 0

    def update(self, hyp_tokens: Sequence[str], ref_tokens: Sequence[str]) -> None:
        self.hyp_len += len(hyp_tokens)
        self.ref_len += len(ref_tokens)
        hyp_counts = _ngram_counts(hyp_tokens, BLEU_ORDER)
        ref_counts = _ngram_counts(ref_tokens, BLEU_ORDER)
        for ngram, cnt in hyp_counts.items():
            order = len(ngram)
            self.total[order - 1] += cnt
            if ngram in ref_counts:
                self.correct[order - 1] += min(cnt, ref_counts[ngram])

    def score(self) -> float:
        log_sum = 0.0
        for order in range(BLEU_ORDER):
            if self.total[order] == 0 or self.correct[order] == 0:
                return 0.0
            log_sum += math.log(self.correct[order] / self.total[order])
        if self.hyp_len == 0:
            return 0.0
        bp = 1.0
        if self.hyp_len < self.ref_len:
            bp = math.exp(1.0 - self.ref_len / self.hyp_len)
        return bp * math.exp(log_sum / BLEU_ORDER) * 100.0


def bleu(hyps: Sequence[str], refs: Sequence[str], tokenization: str = "intl") -> float:
    """Corpus BLEU over parallel hypothesis/reference lists, 0-100."""
    if len(hyps) != len(refs):
        raise ValueError(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if not hyps:
        raise ValueError("cannot score an empty corpus")
    tok = _tokenizer(tokenization)
    stats = _BleuStats()
    for h, r in zip(hyps, refs):
        stats.update(tok(h), tok(r))
    return stats.score()


_WS_RE = re.compile(r"\s+")


@dataclass
class _ChrfStats:
    # per order: [hyp ngram total, ref ngram total, matches]
    rows: list[list[int]] = field(
        default_factory=lambda: [[0, 0, 0] for _ in range(CHRF_ORDER)]
    )

    def update(self, hyp: str, ref: str) -> None:
        h = _WS_RE.sub("", hyp)
        r = _WS_RE.sub("", ref)
        for order in range(1, CHRF_ORDER + 1):
            hyp_counts = Counter(h[i : i + order] for i in range(len(h) - order + 1))
            ref_counts = Counter(r[i : i + order] for i in range(len(r) - order + 1))
            row = self.rows[order - 1]
            row[0] += sum(hyp_counts.values())
            row[1] += sum(ref_counts.values())
            row[2] += sum(min(cnt, ref_counts[g]) for g, cnt in hyp_counts.items())

    def score(self) -> float:
        avg_precision = 0.0
        avg_recall = 0.0
        effective_order = 0
        for hyp_total, ref_total, matched in self.rows:
            if hyp_total > 0 and ref_total > 0:
                avg_precision += matched / hyp_total
                avg_recall += matched / ref_total
                effective_order += 1
        if effective_order == 0:
            return 0.0
        avg_precision /= effective_order
        avg_recall /= effective_order
        if avg_precision + avg_recall == 0.0:
            return 0.0
        beta_sq = CHRF_BETA * CHRF_BETA
        f = (1 + beta_sq) * avg_precision * avg_recall / (
            beta_sq * avg_precision + avg_recall
        )
        return f * 100.0


def chrf(hyps: Sequence[str], refs: Sequence[str]) -> float:
    """Corpus chrF (beta=2, order 6, whitespace removed), 0-100."""
    if len(hyps) != len(refs):
        raise ValueError(f"{len(hyps)} hypotheses vs {len(refs)} references")
    if not hyps:
        raise ValueError("cannot score an empty corpus")
    stats = _ChrfStats()
    for h, r in zip(hyps, refs):
        stats.update(h, r)
    return stats.score()


@dataclass
class GroupScores:
    bleu: float
    chrf: float
    count: int

    def to_dict(self) -> dict:
        return {"bleu": self.bleu, "chrf": self.chrf, "count": self.count}


@dataclass
class EvalReport:
    """Corpus scores plus a per-tag breakdown.

    ``per_tag`` partitions the instances: recognized tags form their own
    groups; missing or unrecognized tags pool under "untagged".
    """

    overall: GroupScores
    per_tag: dict[str, GroupScores]
    tokenization: str
    per_sentence: list[tuple[float, float]] | None = None

    def to_dict(self) -> dict:
        out: dict = {
            "overall": self.overall.to_dict(),
            "per_tag": {k: v.to_dict() for k, v in self.per_tag.items()},
            "tokenization": self.tokenization,
        }
        if self.per_sentence is not None:
            out["per_sentence"] = [list(s) for s in self.per_sentence]
        return out


DEFAULT_TAGS = ("easy", "medium", "hard")


def evaluate(
    pairs: Sequence[tuple[str, str, str | None]],
    tokenization: str = "intl",
    tags: Sequence[str] = DEFAULT_TAGS,
    per_sentence: bool = False,
) -> EvalReport:
    """Score (hypothesis, reference, tag) triples, pooled and per tag."""
    if not pairs:
        raise ValueError("cannot score an empty corpus")
    _tokenizer(tokenization)  # validate early
    hyps = [p[0] for p in pairs]
    refs = [p[1] for p in pairs]
    overall = GroupScores(
        bleu=bleu(hyps, refs, tokenization), chrf=chrf(hyps, refs), count=len(pairs)
    )
    groups: dict[str, list[tuple[str, str]]] = {}
    recognized = set(tags)
    for h, r, tag in pairs:
        key = tag if tag in recognized else "untagged"
        groups.setdefault(key, []).append((h, r))
    per_tag = {}
    order = [t for t in tags if t in groups] + (["untagged"] if "untagged" in groups else [])
    for key in order:
        gh = [h for h, _ in groups[key]]
        gr = [r for _, r in groups[key]]
        per_tag[key] = GroupScores(
            bleu=bleu(gh, gr, tokenization), chrf=chrf(gh, gr), count=len(gh)
        )
    sent_scores = None
    if per_sentence:
        sent_scores = [
            (bleu([h], [r], tokenization), chrf([h], [r])) for h, r, _ in pairs
        ]
    return EvalReport(
        overall=overall,
        per_tag=per_tag,
        tokenization=tokenization,
        per_sentence=sent_scores,
    )
