"""Brute-force reference implementations used to check the package.

Everything here is written for clarity over speed and independently of the
library code: tokenization is done by emulating sequential pair-rewrite
passes instead of a scanner, scores are computed doc-by-doc with no index,
EM uses plain nested dicts.  Tests compare library output against these.
"""

import math
import unicodedata
from collections import Counter, defaultdict

# ---------------------------------------------------------------- tokenizers

# data, not logic: the CJK code point blocks the han-aware mode detaches
CJK_BLOCKS = (
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


def _is_cjk(ch):
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in CJK_BLOCKS)


def _is_num(ch):
    return unicodedata.category(ch)[0] == "N"


def _is_punct(ch):
    return unicodedata.category(ch)[0] == "P"


def _is_symbol(ch):
    return unicodedata.category(ch)[0] == "S"


def _rewrite_pairs(s, match, repl):
    """One left-to-right non-overlapping pass over character pairs, the way
    a sequential regex substitution with a two-character pattern behaves."""
    out = []
    i = 0
    while i < len(s):
        if i + 1 < len(s) and match(s[i], s[i + 1]):
            out.append(repl(s[i], s[i + 1]))
            i += 2
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


try:  # the real pattern engine when present; pair-walk twin otherwise
    import regex as _rx
except ImportError:  # pragma: no cover
    _rx = None


def tokenize_intl(line):
    """Three rewrite passes: punct after a non-number, punct before a
    non-number, symbols; then whitespace split."""
    if _rx is not None:
        s = _rx.sub(r"(\P{N})(\p{P})", r"\1 \2 ", line)
        s = _rx.sub(r"(\p{P})(\P{N})", r" \1 \2", s)
        s = _rx.sub(r"(\p{S})", r" \1 ", s)
        return s.split()
    s = _rewrite_pairs(
        line, lambda a, b: not _is_num(a) and _is_punct(b), lambda a, b: f"{a} {b} "
    )
    s = _rewrite_pairs(
        s, lambda a, b: _is_punct(a) and not _is_num(b), lambda a, b: f" {a} {b}"
    )
    s = "".join(f" {c} " if _is_symbol(c) else c for c in s)
    return s.split()


def tokenize_han(line):
    spaced = "".join(f" {c} " if _is_cjk(c) else c for c in line)
    return tokenize_intl(spaced)


# ------------------------------------------------------------------- metrics


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(hyps, refs, tokenize):
    correct = [0] * 4
    total = [0] * 4
    hyp_len = 0
    ref_len = 0
    for h, r in zip(hyps, refs):
        ht, rt = tokenize(h), tokenize(r)
        hyp_len += len(ht)
        ref_len += len(rt)
        for n in range(1, 5):
            hc, rc = _ngrams(ht, n), _ngrams(rt, n)
            total[n - 1] += sum(hc.values())
            correct[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
    if hyp_len == 0 or any(c == 0 for c in correct) or any(t == 0 for t in total):
        return 0.0
    log_p = sum(math.log(c / t) for c, t in zip(correct, total)) / 4
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_p)


def chrf(hyps, refs, beta=2.0, max_order=6):
    hyp_tot = [0] * max_order
    ref_tot = [0] * max_order
    match = [0] * max_order
    for h, r in zip(hyps, refs):
        hs = "".join(h.split())
        rs = "".join(r.split())
        for n in range(1, max_order + 1):
            hc = Counter(hs[i : i + n] for i in range(len(hs) - n + 1))
            rc = Counter(rs[i : i + n] for i in range(len(rs) - n + 1))
            hyp_tot[n - 1] += sum(hc.values())
            ref_tot[n - 1] += sum(rc.values())
            match[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
    precisions = []
    recalls = []
    for n in range(max_order):
        if hyp_tot[n] > 0 and ref_tot[n] > 0:
            precisions.append(match[n] / hyp_tot[n])
            recalls.append(match[n] / ref_tot[n])
    if not precisions:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    if p + r == 0.0:
        return 0.0
    b2 = beta * beta
    return 100.0 * (1 + b2) * p * r / (b2 * p + r)


# --------------------------------------------------------------------- BM25


def bm25_scores(doc_tokens, query_tokens, k1=1.5, b=0.75):
    """Score every document against the query, one doc at a time."""
    n_docs = len(doc_tokens)
    avgdl = sum(len(d) for d in doc_tokens) / n_docs
    df = Counter()
    for toks in doc_tokens:
        for term in set(toks):
            df[term] += 1
    scores = []
    for toks in doc_tokens:
        tf = Counter(toks)
        norm = k1 * (1 - b + b * len(toks) / avgdl)
        s = 0.0
        for q in query_tokens:  # repeated query terms count every time
            if tf[q] == 0:
                continue
            idf = math.log((n_docs - df[q] + 0.5) / (df[q] + 0.5) + 1.0)
            s += idf * (k1 + 1.0) * tf[q] / (tf[q] + norm)
        scores.append(s)
    return scores


def bm25_rank(ids, texts, doc_tokens, query_text, query_tokens, k, k1=1.5, b=0.75):
    """Full contract: drop zero scores and docs equal to the query text,
    sort by score then id, truncate."""
    scores = bm25_scores(doc_tokens, query_tokens, k1, b)
    rows = [
        (-s, i, s)
        for i, s, text in zip(ids, scores, texts)
        if s > 0.0 and text != query_text
    ]
    rows.sort()
    return [(i, s) for _, i, s in rows[:k]]


# ----------------------------------------------------------------- alignment


def model1(pairs, iters, null_token=None):
    """Plain nested-dict IBM Model 1.

    pairs: (src_tokens, tgt_tokens) lists.  Returns (t, lls) where
    t[(src, tgt)] is the translation probability and lls the per-iteration
    log-likelihood (sum over target tokens of log sum_s t(tgt|s), constant
    alignment-prior terms dropped).
    """
    prepared = []
    for src, tgt in pairs:
        row = list(src)
        if null_token is not None:
            row = [null_token] + row
        prepared.append((row, list(tgt)))

    cooc = defaultdict(set)
    for src, tgt in prepared:
        for s in src:
            for w in tgt:
                cooc[s].add(w)
    t = {}
    for s, targets in cooc.items():
        u = 1.0 / len(targets)
        for w in targets:
            t[(s, w)] = u

    lls = []
    for _ in range(iters):
        counts = defaultdict(float)
        totals = defaultdict(float)
        ll = 0.0
        for src, tgt in prepared:
            for w in tgt:
                z = sum(t.get((s, w), 0.0) for s in src)
                ll += math.log(z)
                for s in src:
                    p = t.get((s, w), 0.0)
                    if p > 0.0:
                        counts[(s, w)] += p / z
                        totals[s] += p / z
        for (s, w) in t:
            t[(s, w)] = counts[(s, w)] / totals[s] if totals[s] > 0 else 0.0
        lls.append(ll)
    return t, lls


# ------------------------------------------------------- synthetic alignment


def permutation_corpus(seed=202, vocab=50, sentences=500):
    """Word-for-word mapped corpus with a known true lexicon.

    Each sentence samples 3-8 distinct source words; the target side is the
    same sequence through a fixed bijection.  Returns (tokenized pairs,
    mapping) so recovery can be scored by exact comparison.
    """
    import random

    rng = random.Random(seed)
    src_vocab = [f"sw{i:02d}" for i in range(vocab)]
    mapping = {s: f"tw{i:02d}" for i, s in enumerate(src_vocab)}
    pairs = []
    for _ in range(sentences):
        words = rng.sample(src_vocab, rng.randint(3, 8))
        pairs.append((words, [mapping[w] for w in words]))
    return pairs, mapping


# ------------------------------------------------------------- edit distance


def levenshtein(a, b):
    """Memoized recursive definition, unit costs."""
    memo = {}

    def go(i, j):
        if (i, j) in memo:
            return memo[(i, j)]
        if i == len(a):
            v = len(b) - j
        elif j == len(b):
            v = len(a) - i
        else:
            v = min(
                go(i + 1, j) + 1,
                go(i, j + 1) + 1,
                go(i + 1, j + 1) + (a[i] != b[j]),
            )
        memo[(i, j)] = v
        return v

    return go(0, 0)
