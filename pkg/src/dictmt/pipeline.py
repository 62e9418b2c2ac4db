"""End-to-end orchestration: config parsing, resource preparation,
batch translation, evaluation, and ablations.

A run is described by an INI file (sections [data], [run], [prompt],
[retrieval], [bli], [backend]); paths resolve relative to the config file.
``prepare`` loads the dictionary and corpus, optionally induces and merges
a bilingual lexicon and expands synonyms, and builds the retrieval index;
expensive induction results are cached under the output directory keyed by
content hashes, so ablation variants sharing inputs reuse them.

``translate_set`` renders one prompt per test instance, dispatches them in
parallel (results kept in instance order), and writes a RunManifest JSON
containing config snapshot, input hashes, one record per instance, and the
evaluation report.  The manifest contains no wall-clock values or absolute
paths, so a rerun with the mock backend (or a warm response cache) is byte
identical.  A run fails only when more than half the instances error;
failed instances score as empty hypotheses.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import logging
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from . import align, metrics, prompting, retrieve, segment, store
from .llm import (
    LlmClient,
    LlmError,
    LlmRequest,
    LlmResponse,
    MockGlossBackend,
    OpenAiChatBackend,
)
from .prompting import PromptConfig, PromptSpec, PromptTemplate, load_template
from .retrieve import Bm25Index, ExemplarSet, PosIndex
from .store import BilingualDictionary, DataError, ParallelCorpus

logger = logging.getLogger(__name__)

STRATEGIES = ("bm25", "random", "pos")
ABLATION_AXES = ("fuzzy", "bli", "synonym", "strategy", "monolingual")
MONOLINGUAL_BUDGETS = (0, 1000, 2000, 5000)


class ConfigError(Exception):
    """Bad or missing run configuration."""


class RunFailedError(Exception):
    """More than half the instances failed to translate."""


def _parse_direction(text: str) -> tuple[str, str]:
    if "2" not in text:
        raise ConfigError(f"direction must look like 'za2zh', got {text!r}")
    a, _, b = text.partition("2")
    if not a or not b:
        raise ConfigError(f"direction must look like 'za2zh', got {text!r}")
    return (a, b)


def _parse_lang_pair(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise ConfigError(f"expected 'lang,lang', got {text!r}")
    return (parts[0], parts[1])


@dataclass
class RunConfig:
    """Fully resolved run description."""

    dictionary: Path
    corpus: Path
    test: Path | None
    synonyms: Path | None
    monolingual: Path | None
    direction: tuple[str, str]
    corpus_langs: tuple[str, str]
    seed: int
    output_dir: Path
    prompt: PromptConfig
    strategy: str
    k1: float
    b: float
    bli_iters: int
    bli_threshold: float
    bli_null: bool
    bli_symmetrize: bool
    backend_kind: str
    endpoint: str
    model: str
    api_key_env: str
    max_tokens: int
    parallelism: int
    cache_dir: Path | None
    # shared across ablation variants so induction runs once per input set
    artifact_cache: Path | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"no such config file: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        base = path.parent

        def _path(section: str, key: str, required: bool = False) -> Path | None:
            raw = parser.get(section, key, fallback="").strip()
            if not raw:
                if required:
                    raise ConfigError(f"{path}: [{section}] {key} is required")
                return None
            return (base / raw).resolve()

        def _get(section: str, key: str, fallback: str) -> str:
            return parser.get(section, key, fallback=fallback).strip()

        def _bool(section: str, key: str, fallback: bool) -> bool:
            try:
                return parser.getboolean(section, key, fallback=fallback)
            except ValueError as exc:
                raise ConfigError(f"{path}: [{section}] {key}: {exc}") from exc

        def _int(section: str, key: str, fallback: int) -> int:
            try:
                return parser.getint(section, key, fallback=fallback)
            except ValueError as exc:
                raise ConfigError(f"{path}: [{section}] {key}: {exc}") from exc

        def _float(section: str, key: str, fallback: float) -> float:
            try:
                return parser.getfloat(section, key, fallback=fallback)
            except ValueError as exc:
                raise ConfigError(f"{path}: [{section}] {key}: {exc}") from exc

        direction = _parse_direction(_get("run", "direction", ""))
        corpus_langs = _parse_lang_pair(
            _get("run", "corpus_langs", f"{direction[0]},{direction[1]}")
        )
        if direction[0] not in corpus_langs:
            raise ConfigError(
                f"{path}: direction source {direction[0]!r} not in corpus_langs {corpus_langs}"
            )

        strategy = _get("retrieval", "strategy", "bm25")
        if strategy not in STRATEGIES:
            raise ConfigError(f"{path}: unknown retrieval strategy {strategy!r}")
        backend_kind = _get("backend", "kind", "mock")
        if backend_kind not in ("mock", "openai"):
            raise ConfigError(f"{path}: unknown backend kind {backend_kind!r}")

        tpl_name = _get("prompt", "template", "zh")
        if tpl_name not in ("zh", "en"):
            cand = base / tpl_name
            if cand.is_file():
                tpl_name = str(cand.resolve())

        hints_raw = _get("prompt", "modifier_hints", "")
        hints: list[tuple[str, str]] = []
        for chunk in hints_raw.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "|" not in chunk:
                raise ConfigError(
                    f"{path}: modifier_hints entries look like 'modifier|head', got {chunk!r}"
                )
            m, _, h = chunk.partition("|")
            hints.append((m.strip(), h.strip()))

        try:
            prompt = PromptConfig(
                mode=_get("prompt", "mode", "dipmt++"),
                k=_int("prompt", "k", 3),
                senses_per_word=_int("prompt", "senses_per_word", 2),
                fuzzy=_bool("prompt", "fuzzy", True),
                bli=_bool("prompt", "bli", True),
                synonym=_bool("prompt", "synonym", True),
                monolingual_budget=_int("prompt", "monolingual_budget", 0),
                direction=direction,
                template=tpl_name,
                exemplar_order=_get("prompt", "exemplar_order", "relevant-last"),
                syntax_rule=_get("prompt", "syntax_rule", "") or None,
                modifier_hints=tuple(hints),
                embed_trace=_bool("prompt", "embed_trace", True),
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

        output_dir = _path("run", "output_dir") or (base / "runs" / "-".join(direction))
        cache_dir = _path("backend", "cache_dir")
        cfg = cls(
            dictionary=_path("data", "dictionary", required=True),
            corpus=_path("data", "corpus", required=True),
            test=_path("data", "test"),
            synonyms=_path("data", "synonyms"),
            monolingual=_path("data", "monolingual"),
            direction=direction,
            corpus_langs=corpus_langs,
            seed=_int("run", "seed", 13),
            output_dir=output_dir,
            prompt=prompt,
            strategy=strategy,
            k1=_float("retrieval", "k1", 1.5),
            b=_float("retrieval", "b", 0.75),
            bli_iters=_int("bli", "iters", 10),
            bli_threshold=_float("bli", "threshold", 0.6),
            bli_null=_bool("bli", "null_word", True),
            bli_symmetrize=_bool("bli", "symmetrize", True),
            backend_kind=backend_kind,
            endpoint=_get("backend", "endpoint", ""),
            model=_get("backend", "model", "mock-gloss"),
            api_key_env=_get("backend", "api_key_env", "DICTMT_API_KEY"),
            max_tokens=_int("backend", "max_tokens", 512),
            parallelism=_int("backend", "parallelism", 4),
            cache_dir=cache_dir,
            artifact_cache=output_dir / "cache",
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.bli_iters < 1:
            raise ConfigError("bli iters must be >= 1")
        if not (0.0 < self.bli_threshold <= 1.0):
            raise ConfigError("bli threshold must be in (0, 1]")
        if self.parallelism < 1:
            raise ConfigError("backend parallelism must be >= 1")
        if self.backend_kind == "openai" and not self.endpoint:
            raise ConfigError("backend kind 'openai' needs an endpoint")
        for name, p in (
            ("dictionary", self.dictionary),
            ("corpus", self.corpus),
            ("test", self.test),
            ("synonyms", self.synonyms),
            ("monolingual", self.monolingual),
        ):
            if p is not None and not Path(p).is_file():
                raise DataError(f"{name} file not found: {p}")

    def query_side(self) -> str:
        return "src" if self.direction[0] == self.corpus_langs[0] else "tgt"

    def ref_side(self) -> str:
        return "tgt" if self.query_side() == "src" else "src"


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _side_text(pair: store.SentencePair, side: str) -> str:
    return pair.src if side == "src" else pair.tgt


@dataclass
class Resources:
    """Everything translate_set needs, produced by prepare()."""

    cfg: RunConfig
    base_dictionary: BilingualDictionary
    dictionary: BilingualDictionary
    corpus: ParallelCorpus
    test: ParallelCorpus | None
    monolingual: list[str]
    bm25: Bm25Index
    pos: PosIndex | None
    lexicon: align.InducedLexicon | None
    hashes: dict[str, str]
    coverage_report: dict | None
    template: PromptTemplate


def _tok_dict_for(
    lang: str, run_dict: BilingualDictionary, reverse_cache: dict
) -> BilingualDictionary | None:
    """Dictionary to drive segmentation of text in ``lang``, if needed."""
    if lang not in segment.SPACELESS_LANGS:
        return None
    if lang == run_dict.direction[0]:
        return run_dict
    if "rev" not in reverse_cache:
        reverse_cache["rev"] = store.reverse_dictionary(run_dict)
    return reverse_cache["rev"]


def induce_lexicon(
    corpus: ParallelCorpus,
    src_lang: str,
    tgt_lang: str,
    base_dict: BilingualDictionary | None = None,
    iters: int = 10,
    threshold: float = 0.6,
    null_word: bool = True,
    symmetrize: bool = True,
) -> align.InducedLexicon:
    """Train Model 1 over the corpus (oriented src_lang -> tgt_lang, which
    may be either corpus side order) and extract a thresholded lexicon."""
    rev_cache: dict = {}
    src_dict = None
    tgt_dict = None
    if base_dict is not None:
        src_dict = _tok_dict_for(src_lang, base_dict, rev_cache)
        tgt_dict = _tok_dict_for(tgt_lang, base_dict, rev_cache)
    pairs = align.tokenized_pairs(corpus, src_lang, tgt_lang, src_dict, tgt_dict)
    fwd = align.train_model1(pairs, iters=iters, null_word=null_word)
    if not symmetrize:
        return align.extract_lexicon(fwd, threshold, base_dict)
    bwd = align.train_model1([(t, s) for s, t in pairs], iters=iters, null_word=null_word)
    return align.symmetrized_lexicon(fwd, bwd, threshold, base_dict)


def prepare(cfg: RunConfig) -> Resources:
    """Load inputs, grow the dictionary, and build retrieval indexes."""
    cfg.validate()
    hashes = {"dictionary": _sha256_file(cfg.dictionary), "corpus": _sha256_file(cfg.corpus)}
    for name in ("test", "synonyms", "monolingual"):
        p = getattr(cfg, name)
        if p is not None:
            hashes[name] = _sha256_file(p)

    base_d = store.load_dictionary(cfg.dictionary, cfg.direction)
    corpus = store.load_corpus(cfg.corpus)
    test = store.load_corpus(cfg.test) if cfg.test else None
    monolingual = store.load_monolingual(cfg.monolingual) if cfg.monolingual else []

    query_side = cfg.query_side()
    d = base_d
    lexicon = None
    if cfg.prompt.bli:
        lexicon = _cached_lexicon(cfg, corpus, base_d, hashes, query_side)
        d = align.merge_into_dictionary(lexicon, d)
    if cfg.prompt.synonym and cfg.synonyms:
        syn = store.load_synonyms(cfg.synonyms)
        before = len(d)
        d = store.expand_with_synonyms(d, syn)
        logger.info("synonym expansion added %d entries", len(d) - before)

    src_lang = cfg.direction[0]
    bm25 = retrieve.build_bm25(
        corpus,
        side=query_side,
        lang=src_lang,
        d=d if src_lang in segment.SPACELESS_LANGS else None,
        k1=cfg.k1,
        b=cfg.b,
    )
    pos = None
    if cfg.strategy == "pos":
        pos = retrieve.build_pos_index(corpus, query_side, d)

    template = load_template(cfg.prompt.template)

    coverage_report = None
    if test is not None:
        base_cfg = dataclasses.replace(cfg.prompt, bli=False, synonym=False)
        base_cov = [
            prompting.coverage(prompting.gloss_sentence(_side_text(p, query_side), base_d, base_cfg))
            for p in test
        ]
        full_cov = [
            prompting.coverage(prompting.gloss_sentence(_side_text(p, query_side), d, cfg.prompt))
            for p in test
        ]
        coverage_report = {
            "base_mean": sum(base_cov) / len(base_cov) if base_cov else 0.0,
            "prepared_mean": sum(full_cov) / len(full_cov) if full_cov else 0.0,
        }

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    store.save_dictionary(d, cfg.output_dir / "prepared-dictionary.jsonl")
    prep_report = {
        "hashes": hashes,
        "base_entries": len(base_d),
        "prepared_entries": len(d),
        "induced_pairs": len(lexicon) if lexicon else 0,
        "coverage": coverage_report,
    }
    with open(cfg.output_dir / "prepare-report.json", "w", encoding="utf-8") as fh:
        json.dump(prep_report, fh, ensure_ascii=False, sort_keys=True, indent=2)

    return Resources(
        cfg=cfg,
        base_dictionary=base_d,
        dictionary=d,
        corpus=corpus,
        test=test,
        monolingual=monolingual,
        bm25=bm25,
        pos=pos,
        lexicon=lexicon,
        hashes=hashes,
        coverage_report=coverage_report,
        template=template,
    )


def _cached_lexicon(
    cfg: RunConfig,
    corpus: ParallelCorpus,
    base_d: BilingualDictionary,
    hashes: dict[str, str],
    query_side: str,
) -> align.InducedLexicon:
    key_src = "|".join(
        [
            hashes["corpus"],
            hashes["dictionary"],
            f"{cfg.bli_iters}",
            f"{cfg.bli_threshold}",
            f"{cfg.bli_null}",
            f"{cfg.bli_symmetrize}",
            f"{cfg.direction[0]}-{cfg.direction[1]}",
            query_side,
        ]
    )
    key = hashlib.sha256(key_src.encode("utf-8")).hexdigest()[:16]
    cache_dir = cfg.artifact_cache or (cfg.output_dir / "cache")
    cache_dir.mkdir(parents=True, exist_ok=True)
    cache_file = cache_dir / f"lexicon-{key}.tsv"
    if cache_file.is_file():
        logger.info("reusing cached lexicon %s", cache_file.name)
        return align.load_lexicon(cache_file, cfg.bli_threshold)
    src_lang, tgt_lang = cfg.direction
    oriented = corpus
    if query_side == "tgt":
        oriented = ParallelCorpus(
            store.SentencePair(p.id, p.tgt, p.src, p.tag) for p in corpus
        )
    lex = induce_lexicon(
        oriented,
        src_lang,
        tgt_lang,
        base_dict=base_d,
        iters=cfg.bli_iters,
        threshold=cfg.bli_threshold,
        null_word=cfg.bli_null,
        symmetrize=cfg.bli_symmetrize,
    )
    align.save_lexicon(lex, cache_file)
    return lex


def make_client(cfg: RunConfig) -> LlmClient:
    if cfg.backend_kind == "mock":
        backend = MockGlossBackend()
    else:
        backend = OpenAiChatBackend(cfg.endpoint, api_key_env=cfg.api_key_env)
    cache_dir = cfg.cache_dir or (cfg.output_dir / "cache" / "responses")
    return LlmClient(backend, cache_dir=cache_dir, parallelism=cfg.parallelism)


def retrieve_exemplars(res: Resources, query: str, instance_id: int) -> ExemplarSet:
    """Strategy dispatch with self-exclusion (by id and by identical text)."""
    cfg = res.cfg
    k = cfg.prompt.k
    side = cfg.query_side()
    if cfg.strategy == "bm25":
        return retrieve.bm25_topk(res.bm25, query, k, exclude_ids={instance_id})
    q_text = unicodedata.normalize("NFC", query)
    text_equal = {
        p.id
        for p in res.corpus
        if unicodedata.normalize("NFC", _side_text(p, side)) == q_text
    }
    banned = text_equal | {instance_id}
    if cfg.strategy == "random":
        seed = cfg.seed * 1000003 + instance_id
        return retrieve.random_topk(res.corpus, k, seed, exclude_ids=banned)
    tags = retrieve.pos_sequence(query, res.dictionary)
    assert res.pos is not None
    return retrieve.pos_topk(res.pos, tags, k, exclude_ids=banned)


def build_instance_prompt(res: Resources, query: str, instance_id: int) -> PromptSpec:
    """Gloss, retrieve, order, and render the prompt for one sentence."""
    cfg = res.cfg
    side = cfg.query_side()
    exemplars = retrieve_exemplars(res, query, instance_id)
    if cfg.prompt.exemplar_order == "relevant-last":
        exemplars = exemplars.reversed_copy()
    ex_glosses = [
        prompting.gloss_sentence(_side_text(p, side), res.dictionary, cfg.prompt)
        for p, _ in exemplars.items
    ]
    glosses = prompting.gloss_sentence(query, res.dictionary, cfg.prompt)
    return prompting.build_prompt(
        query,
        glosses,
        cfg.prompt,
        exemplars=exemplars,
        exemplar_glosses=ex_glosses,
        monolingual=res.monolingual,
        template=res.template,
        exemplar_side=side,
    )


@dataclass
class RunResult:
    manifest: dict
    path: Path
    report: metrics.EvalReport
    failed: bool


def translate_set(res: Resources, client: LlmClient | None = None) -> RunResult:
    """Translate every test instance and write the run manifest.

    Raises RunFailedError when more than half the instances error; the
    manifest (with failed=true) is still written first.
    """
    cfg = res.cfg
    if res.test is None:
        raise DataError("config names no test set")
    if client is None:
        client = make_client(cfg)
    side = cfg.query_side()
    ref_side = cfg.ref_side()

    specs: list[PromptSpec] = []
    queries: list[tuple[store.SentencePair, str, str]] = []
    for inst in res.test:
        query = _side_text(inst, side)
        ref = _side_text(inst, ref_side)
        queries.append((inst, query, ref))
        specs.append(build_instance_prompt(res, query, inst.id))

    reqs = [
        LlmRequest(prompt=s.text, model=cfg.model, max_tokens=cfg.max_tokens)
        for s in specs
    ]
    results = client.complete_many(reqs)

    records = []
    pairs_for_eval: list[tuple[str, str, str | None]] = []
    failures = 0
    for (inst, query, ref), spec, result in zip(queries, specs, results):
        record = {
            "id": inst.id,
            "source": query,
            "reference": ref,
            "tag": inst.tag,
            "prompt_sha256": hashlib.sha256(spec.text.encode("utf-8")).hexdigest(),
            "exemplar_ids": spec.exemplars.ids() if spec.exemplars else [],
            "coverage": spec.coverage,
        }
        if isinstance(result, LlmResponse):
            record.update(
                {
                    "output": result.text,
                    "error": None,
                    "latency_ms": result.latency_ms,
                    "retries": result.retries,
                }
            )
            pairs_for_eval.append((result.text, ref, inst.tag))
        else:
            failures += 1
            record.update(
                {
                    "output": "",
                    "error": f"{type(result).__name__}: {result}",
                    "latency_ms": 0.0,
                    "retries": 0,
                }
            )
            pairs_for_eval.append(("", ref, inst.tag))
        records.append(record)

    tokenization = "han-aware" if cfg.direction[1] in segment.SPACELESS_LANGS else "intl"
    report = metrics.evaluate(pairs_for_eval, tokenization=tokenization)
    failed = failures * 2 > len(records)

    manifest = {
        "format": "dictmt-run-manifest",
        "config": _config_snapshot(cfg),
        "resources": {
            "hashes": res.hashes,
            "files": {
                "dictionary": cfg.dictionary.name,
                "corpus": cfg.corpus.name,
                "test": cfg.test.name if cfg.test else None,
                "synonyms": cfg.synonyms.name if cfg.synonyms else None,
                "monolingual": cfg.monolingual.name if cfg.monolingual else None,
            },
            "prepared_entries": len(res.dictionary),
            "induced_pairs": len(res.lexicon) if res.lexicon else 0,
            "coverage": res.coverage_report,
        },
        "instances": records,
        "report": report.to_dict(),
        "failures": failures,
        "failed": failed,
    }
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.output_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=2) + "\n")

    if failed:
        raise RunFailedError(
            f"{failures}/{len(records)} instances failed; manifest at {path}"
        )
    return RunResult(manifest=manifest, path=path, report=report, failed=failed)


def _config_snapshot(cfg: RunConfig) -> dict:
    prompt = dataclasses.asdict(cfg.prompt)
    prompt["direction"] = list(cfg.prompt.direction)
    prompt["modifier_hints"] = [list(h) for h in cfg.prompt.modifier_hints]
    return {
        "direction": list(cfg.direction),
        "corpus_langs": list(cfg.corpus_langs),
        "seed": cfg.seed,
        "strategy": cfg.strategy,
        "k1": cfg.k1,
        "b": cfg.b,
        "bli": {
            "iters": cfg.bli_iters,
            "threshold": cfg.bli_threshold,
            "null_word": cfg.bli_null,
            "symmetrize": cfg.bli_symmetrize,
        },
        "backend": {
            "kind": cfg.backend_kind,
            "model": cfg.model,
            "max_tokens": cfg.max_tokens,
        },
        "prompt": prompt,
    }


def _variant_cfg(cfg: RunConfig, name: str, **changes) -> RunConfig:
    """Copy of cfg with prompt/strategy tweaks, writing under its own subdir."""
    prompt_changes = {
        k: v for k, v in changes.items() if k in {f.name for f in dataclasses.fields(PromptConfig)}
    }
    other = {k: v for k, v in changes.items() if k not in prompt_changes}
    new_prompt = dataclasses.replace(cfg.prompt, **prompt_changes)
    slug = name.replace("/", "-").replace(" ", "-").replace("=", "-")
    return dataclasses.replace(
        cfg,
        prompt=new_prompt,
        output_dir=cfg.output_dir / "ablate" / slug,
        **other,
    )


def ablate(cfg: RunConfig, axes: list[str]) -> dict:
    """Run the full config plus one variant per ablation row.

    Boolean axes disable one coverage strategy; "strategy" swaps the
    retrieval strategy; "monolingual" sweeps the context budget.  Rows
    report BLEU, chrF, and mean query coverage.
    """
    for axis in axes:
        if axis not in ABLATION_AXES:
            raise ConfigError(f"unknown ablation axis {axis!r}")
    variants: list[tuple[str, RunConfig]] = [("full", _variant_cfg(cfg, "full"))]
    for axis in axes:
        if axis == "fuzzy":
            variants.append(("w/o fuzzy", _variant_cfg(cfg, "no-fuzzy", fuzzy=False)))
        elif axis == "bli":
            variants.append(("w/o bli", _variant_cfg(cfg, "no-bli", bli=False)))
        elif axis == "synonym":
            variants.append(("w/o synonym", _variant_cfg(cfg, "no-synonym", synonym=False)))
        elif axis == "strategy":
            for s in STRATEGIES:
                if s != cfg.strategy:
                    variants.append((f"strategy={s}", _variant_cfg(cfg, f"strategy-{s}", strategy=s)))
        elif axis == "monolingual":
            for budget in MONOLINGUAL_BUDGETS:
                if budget != cfg.prompt.monolingual_budget:
                    variants.append(
                        (f"mono={budget}", _variant_cfg(cfg, f"mono-{budget}", monolingual_budget=budget))
                    )

    rows = []
    for name, vcfg in variants:
        res = prepare(vcfg)
        result = translate_set(res)
        cov = [r["coverage"] for r in result.manifest["instances"]]
        rows.append(
            {
                "variant": name,
                "bleu": result.report.overall.bleu,
                "chrf": result.report.overall.chrf,
                "coverage": sum(cov) / len(cov) if cov else 0.0,
                "n": result.report.overall.count,
            }
        )

    table = {"axes": axes, "rows": rows}
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    with open(cfg.output_dir / "ablation.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(table, ensure_ascii=False, sort_keys=True, indent=2) + "\n")
    with open(cfg.output_dir / "ablation.txt", "w", encoding="utf-8") as fh:
        fh.write(render_ablation(table))
    return table


def render_ablation(table: dict) -> str:
    width = max(len(r["variant"]) for r in table["rows"]) + 2
    lines = [f"{'variant':<{width}}{'BLEU':>8}{'chrF':>8}{'cover':>8}{'n':>6}"]
    for r in table["rows"]:
        lines.append(
            f"{r['variant']:<{width}}{r['bleu']:>8.2f}{r['chrf']:>8.2f}{r['coverage']:>8.3f}{r['n']:>6}"
        )
    return "\n".join(lines) + "\n"
