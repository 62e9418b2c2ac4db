"""Prompt construction: word glossing, exemplar blocks, template rendering.

A prompt page is assembled from a sectioned template file:

    @page
    {{instruction}}
    ...
    @query_intro
    ## ...{{sentence}}

Lines starting with ``@`` open a named section whose content runs verbatim
(including leading/trailing spaces) until the next marker; ``@lang_name xx``
sections map language codes to display names.  Placeholders use
``{{name}}``; each section's permitted placeholders are validated at load
time.  Two templates ship with the package ("zh" and "en"); any other
template name is treated as a file path.

Three prompt modes share the skeleton instruction + exemplar blocks + query
block:

* ``dipmt``: per covered word, a line ``in this context, the word "X"
  means "Y"`` (first gloss only);
* ``dipmt++``: a native gloss line offering up to ``senses_per_word``
  meanings per covered word, plus optional monolingual text before the
  exemplars;
* ``cot-syntax``: dipmt++ glossing plus a syntax rule in the query intro
  and/or modifier-head hint lines after a step-by-step cue; the query block
  ends after the hints so the model writes the reasoning.

Rendering is pure: the same inputs produce byte-identical text.  When
``cfg.embed_trace`` is set, the first prompt line is a machine-readable
comment carrying the query's gloss assignments, which the mock backend
replays; real backends ignore comment lines.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import segment
from .retrieve import ExemplarSet
from .store import BilingualDictionary

PROMPT_MODES = ("dipmt", "dipmt++", "cot-syntax")
EXEMPLAR_ORDERS = ("relevant-last", "relevant-first")

TRACE_PREFIX = "<!--gloss-trace:"
TRACE_RE = re.compile(r"<!--gloss-trace:(.*?)-->")

GLOSS_ORIGINS = ("exact", "induced", "synonym", "fuzzy")


@dataclass(frozen=True)
class PromptConfig:
    """Knobs for glossing and prompt rendering."""

    mode: str = "dipmt++"
    k: int = 3
    senses_per_word: int = 2
    fuzzy: bool = True
    bli: bool = True
    synonym: bool = True
    monolingual_budget: int = 0
    direction: tuple[str, str] = ("za", "zh")
    template: str = "zh"
    exemplar_order: str = "relevant-last"
    syntax_rule: str | None = None
    modifier_hints: tuple[tuple[str, str], ...] = ()
    embed_trace: bool = True

    def __post_init__(self) -> None:
        if self.mode not in PROMPT_MODES:
            raise ValueError(f"unknown prompt mode {self.mode!r}")
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if self.senses_per_word < 1:
            raise ValueError("senses_per_word must be >= 1")
        if self.monolingual_budget < 0:
            raise ValueError("monolingual_budget must be >= 0")
        if self.exemplar_order not in EXEMPLAR_ORDERS:
            raise ValueError(f"unknown exemplar order {self.exemplar_order!r}")
        if len(self.direction) != 2 or not all(self.direction):
            raise ValueError("direction must be a (src_lang, tgt_lang) pair")


@dataclass(frozen=True)
class WordGloss:
    """Gloss assignment for one token.

    ``glosses`` holds (target text, origin) pairs, origin one of
    GLOSS_ORIGINS.  Punctuation and number tokens carry no glosses and do
    not count toward coverage.
    """

    surface: str
    kind: str
    glosses: tuple[tuple[str, str], ...] = ()

    @property
    def covered(self) -> bool:
        return bool(self.glosses)


def _allowed(provenance: str, cfg: PromptConfig) -> bool:
    if provenance == "base":
        return True
    if provenance == "induced":
        return cfg.bli
    return cfg.synonym


_ORIGIN = {"base": "exact", "induced": "induced", "synonym": "synonym"}


def gloss_sentence(
    sentence: str, d: BilingualDictionary, cfg: PromptConfig
) -> list[WordGloss]:
    """Assign up to cfg.senses_per_word glosses to each word token.

    Exact headword lookup first (with a casefold retry for cased scripts);
    ablation flags filter which sense provenances are visible.  Words with
    no usable entry fall back, when cfg.fuzzy is set, to the senses of the
    top related words found by maximum matching.
    """
    out: list[WordGloss] = []
    for span in segment.tokenize(sentence, cfg.direction[0], d):
        if span.kind != segment.TOKEN_WORD:
            out.append(WordGloss(span.text, span.kind))
            continue
        entry = d.lookup(span.text)
        if entry is None and span.text.casefold() != span.text:
            entry = d.lookup(span.text.casefold())
        glosses: list[tuple[str, str]] = []
        if entry is not None:
            for s in entry.senses:
                if not _allowed(s.provenance, cfg):
                    continue
                glosses.append((s.text, _ORIGIN[s.provenance]))
                if len(glosses) >= cfg.senses_per_word:
                    break
        elif cfg.fuzzy:
            folded = span.text.casefold()
            hit = segment.fuzzy_lookup(folded, d)
            for m in hit.matches:
                rel = d.lookup(m.headword)
                if rel is None:
                    continue
                text = None
                for s in rel.senses:
                    if _allowed(s.provenance, cfg):
                        text = s.text
                        break
                if text is None or any(text == g[0] for g in glosses):
                    continue
                glosses.append((text, "fuzzy"))
                if len(glosses) >= cfg.senses_per_word:
                    break
        out.append(WordGloss(span.text, span.kind, tuple(glosses)))
    return out


def coverage(glosses: list[WordGloss]) -> float:
    """Fraction of word tokens with at least one gloss; 0.0 when there are
    no word tokens."""
    words = [g for g in glosses if g.kind == segment.TOKEN_WORD]
    if not words:
        return 0.0
    return sum(1 for g in words if g.covered) / len(words)


def inject_monolingual(sentences: list[str], budget: int) -> str:
    """Longest sentence prefix whose cumulative whitespace-token count stays
    within the budget, newline-joined; empty for budget 0."""
    if budget <= 0:
        return ""
    picked: list[str] = []
    used = 0
    for s in sentences:
        n = len(s.split())
        if used + n > budget:
            break
        picked.append(s)
        used += n
    return "\n".join(picked)


# per-section placeholder whitelist, validated at template load time
_SECTION_PLACEHOLDERS: dict[str, frozenset[str]] = {
    "page": frozenset({"instruction", "monolingual", "exemplars", "query"}),
    "instruction": frozenset({"src_lang", "tgt_lang"}),
    "query_intro": frozenset({"src_lang", "tgt_lang", "sentence"}),
    "query_intro_rule": frozenset({"src_lang", "tgt_lang", "sentence", "rule"}),
    "gloss_intro": frozenset({"src_lang", "tgt_lang"}),
    "gloss_item": frozenset({"src_lang", "tgt_lang", "surface", "glosses"}),
    "gloss_quote_open": frozenset(),
    "gloss_quote_close": frozenset(),
    "gloss_or": frozenset(),
    "gloss_sep": frozenset(),
    "gloss_end": frozenset(),
    "answer_cue": frozenset({"src_lang", "tgt_lang"}),
    "dipmt_line": frozenset({"surface", "gloss"}),
    "cot_cue": frozenset({"src_lang", "tgt_lang"}),
    "cot_hint": frozenset({"modifier", "head"}),
    "monolingual_intro": frozenset({"src_lang", "tgt_lang"}),
}

_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    sections: dict[str, str]
    lang_names: dict[str, str] = field(default_factory=dict)

    def lang_name(self, code: str) -> str:
        return self.lang_names.get(code, code)

    def fill(self, section: str, **values: str) -> str:
        text = self.sections[section]
        return _PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], text)


def parse_template(text: str, name: str = "<inline>") -> PromptTemplate:
    sections: dict[str, str] = {}
    lang_names: dict[str, str] = {}
    current: str | None = None
    buf: list[str] = []

    def flush() -> None:
        if current is None:
            return
        content = "\n".join(buf)
        if current.startswith("lang_name "):
            lang_names[current.split(None, 1)[1]] = content
        else:
            sections[current] = content

    for line in text.split("\n"):
        if line.startswith("@"):
            flush()
            current = line[1:].strip()
            buf = []
        else:
            buf.append(line)
    flush()

    missing = [s for s in _SECTION_PLACEHOLDERS if s not in sections]
    if missing:
        raise ValueError(f"template {name}: missing sections {missing}")
    for sec, allowed in _SECTION_PLACEHOLDERS.items():
        used = set(_PLACEHOLDER_RE.findall(sections[sec]))
        bad = used - allowed
        if bad:
            raise ValueError(f"template {name}: section {sec} uses unknown placeholders {sorted(bad)}")
    page_used = set(_PLACEHOLDER_RE.findall(sections["page"]))
    need = _SECTION_PLACEHOLDERS["page"] - page_used
    if need:
        raise ValueError(f"template {name}: page is missing placeholders {sorted(need)}")
    if "sentence" not in _PLACEHOLDER_RE.findall(sections["query_intro"]):
        raise ValueError(f"template {name}: query_intro must use {{{{sentence}}}}")
    return PromptTemplate(name=name, sections=sections, lang_names=lang_names)


def load_template(name_or_path: str) -> PromptTemplate:
    builtin = resources.files("dictmt").joinpath(f"templates/{name_or_path}.tmpl")
    if builtin.is_file():
        return parse_template(builtin.read_text(encoding="utf-8"), name_or_path)
    path = Path(name_or_path)
    if not path.is_file():
        raise ValueError(f"no such template: {name_or_path!r}")
    return parse_template(path.read_text(encoding="utf-8"), str(path))


@dataclass
class PromptSpec:
    """A rendered prompt plus everything needed to trace it."""

    text: str
    mode: str
    sentence: str
    glosses: list[WordGloss]
    coverage: float
    exemplars: ExemplarSet | None = None
    monolingual_excerpt: str = ""

    def sha_payload(self) -> str:
        return self.text


def trace_marker(sentence: str, glosses: list[WordGloss], tgt_lang: str) -> str:
    """Machine-readable comment the mock backend replays: token surfaces
    with their first gloss (null = copy through) and the join convention."""
    join = "" if tgt_lang in segment.SPACELESS_LANGS else " "
    tokens = [
        [g.surface, g.glosses[0][0] if g.covered else None] for g in glosses
    ]
    payload = {"join": join, "src": sentence, "tokens": tokens}
    return (
        TRACE_PREFIX
        + json.dumps(payload, ensure_ascii=False, separators=(",", ":"), sort_keys=True)
        + "-->"
    )


def _gloss_line(
    glosses: list[WordGloss], tpl: PromptTemplate, src_name: str, tgt_name: str
) -> str | None:
    qo = tpl.sections["gloss_quote_open"]
    qc = tpl.sections["gloss_quote_close"]
    or_word = tpl.sections["gloss_or"]
    items: list[str] = []
    for g in glosses:
        if not g.covered:
            continue
        joined = or_word.join(f"{qo}{t}{qc}" for t, _ in g.glosses)
        items.append(
            tpl.fill(
                "gloss_item",
                src_lang=src_name,
                tgt_lang=tgt_name,
                surface=g.surface,
                glosses=joined,
            )
        )
    if not items:
        return None
    return (
        tpl.fill("gloss_intro", src_lang=src_name, tgt_lang=tgt_name)
        + tpl.sections["gloss_sep"].join(items)
        + tpl.sections["gloss_end"]
    )


def _dipmt_lines(glosses: list[WordGloss], tpl: PromptTemplate) -> str | None:
    lines = [
        tpl.fill("dipmt_line", surface=g.surface, gloss=g.glosses[0][0])
        for g in glosses
        if g.covered
    ]
    return "\n".join(lines) if lines else None


def build_prompt(
    sentence: str,
    glosses: list[WordGloss],
    cfg: PromptConfig,
    exemplars: ExemplarSet | None = None,
    exemplar_glosses: list[list[WordGloss]] | None = None,
    monolingual: list[str] | None = None,
    template: PromptTemplate | None = None,
    exemplar_side: str = "src",
) -> PromptSpec:
    """Render a full prompt page.

    Exemplar blocks appear in the order of ``exemplars`` (callers decide
    relevance ordering before this point); ``exemplar_side`` names the
    SentencePair field holding the prompt-source text.  Rendering is pure.
    """
    tpl = template or load_template(cfg.template)
    src_name = tpl.lang_name(cfg.direction[0])
    tgt_name = tpl.lang_name(cfg.direction[1])
    if exemplar_side not in ("src", "tgt"):
        raise ValueError(f"exemplar_side must be 'src' or 'tgt', got {exemplar_side!r}")
    if cfg.mode == "cot-syntax" and not cfg.syntax_rule and not cfg.modifier_hints:
        raise ValueError("cot-syntax needs a syntax_rule or modifier_hints")

    ex_items = exemplars.items if exemplars is not None else []
    if exemplar_glosses is None:
        exemplar_glosses = [[] for _ in ex_items]
    if len(exemplar_glosses) != len(ex_items):
        raise ValueError(
            f"{len(ex_items)} exemplars but {len(exemplar_glosses)} gloss lists"
        )

    def gloss_section(g: list[WordGloss]) -> str:
        if cfg.mode == "dipmt":
            line = _dipmt_lines(g, tpl)
        else:
            line = _gloss_line(g, tpl, src_name, tgt_name)
        return line + "\n" if line else ""

    blocks: list[str] = []
    for (pair, _), g in zip(ex_items, exemplar_glosses):
        shown_src = pair.src if exemplar_side == "src" else pair.tgt
        shown_tgt = pair.tgt if exemplar_side == "src" else pair.src
        block = (
            tpl.fill("query_intro", src_lang=src_name, tgt_lang=tgt_name, sentence=shown_src)
            + "\n"
            + gloss_section(g)
            + tpl.fill("answer_cue", src_lang=src_name, tgt_lang=tgt_name)
            + shown_tgt
            + "\n\n"
        )
        blocks.append(block)

    if cfg.mode == "cot-syntax" and cfg.syntax_rule:
        intro = tpl.fill(
            "query_intro_rule",
            src_lang=src_name,
            tgt_lang=tgt_name,
            sentence=sentence,
            rule=cfg.syntax_rule,
        )
    else:
        intro = tpl.fill(
            "query_intro", src_lang=src_name, tgt_lang=tgt_name, sentence=sentence
        )
    query = intro + "\n" + gloss_section(glosses)
    if cfg.mode == "cot-syntax":
        query += tpl.fill("cot_cue", src_lang=src_name, tgt_lang=tgt_name)
        for modifier, head in cfg.modifier_hints:
            query += "\n" + tpl.fill("cot_hint", modifier=modifier, head=head)
    else:
        query += tpl.fill("answer_cue", src_lang=src_name, tgt_lang=tgt_name)

    excerpt = inject_monolingual(monolingual or [], cfg.monolingual_budget)
    mono_block = ""
    if excerpt:
        mono_block = (
            tpl.fill("monolingual_intro", src_lang=src_name, tgt_lang=tgt_name)
            + "\n"
            + excerpt
            + "\n\n"
        )

    page = tpl.fill(
        "page",
        instruction=tpl.fill("instruction", src_lang=src_name, tgt_lang=tgt_name),
        monolingual=mono_block,
        exemplars="".join(blocks),
        query=query,
    )
    if cfg.embed_trace:
        page = trace_marker(sentence, glosses, cfg.direction[1]) + "\n" + page

    return PromptSpec(
        text=page,
        mode=cfg.mode,
        sentence=sentence,
        glosses=glosses,
        coverage=coverage(glosses),
        exemplars=exemplars,
        monolingual_excerpt=excerpt,
    )
