"""Command-line entry point.

Subcommands cover the pipeline stages (prepare, translate, evaluate,
ablate), the standalone tools (induce, index, search, prompt), and the
study service (serve).  Exit codes: 0 success, 2 configuration error,
3 data error, 4 run-failure threshold exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import align, metrics, pipeline, retrieve, store
from .pipeline import ConfigError, RunConfig, RunFailedError
from .store import DataError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUN_FAILED = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dictmt",
        description="Dictionary-assisted prompting toolkit for low-resource translation",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="load inputs, induce lexicon, build indexes")
    p.add_argument("--config", required=True)

    p = sub.add_parser("translate", help="translate the test set and write a manifest")
    p.add_argument("--config", required=True)

    p = sub.add_parser("evaluate", help="score hypothesis/reference files")
    p.add_argument("--hyps", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--tags", help="optional per-line tag file")
    p.add_argument("--tokenization", choices=metrics.TOKENIZATIONS, default="intl")
    p.add_argument("--json-out", help="write the full report as JSON")

    p = sub.add_parser("ablate", help="run ablation variants and tabulate scores")
    p.add_argument("--config", required=True)
    p.add_argument(
        "--axis",
        action="append",
        required=True,
        choices=pipeline.ABLATION_AXES,
        help="repeatable: which knob to ablate",
    )

    p = sub.add_parser("induce", help="induce a bilingual lexicon from the corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.6)
    p.add_argument("--out", required=True)
    p.add_argument("--direction", default="za2zh", help="source2target language codes")
    p.add_argument("--corpus-langs", default="", help="langs of the corpus src,tgt fields")
    p.add_argument("--dict", dest="dictionary", help="dictionary for segmentation and duplicate filtering")
    p.add_argument("--no-null", action="store_true", help="train without the NULL source word")
    p.add_argument("--no-symmetrize", action="store_true", help="forward direction only")

    p = sub.add_parser("index", help="build a BM25 index over one corpus side")
    p.add_argument("--corpus", required=True)
    p.add_argument("--side", choices=("src", "tgt"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lang", default="", help="language code of the indexed side")
    p.add_argument("--dict", dest="dictionary", help="dictionary for unsegmented-language tokenization")
    p.add_argument("--k1", type=float, default=1.5)
    p.add_argument("--b", type=float, default=0.75)

    p = sub.add_parser("search", help="query a saved BM25 index")
    p.add_argument("--index", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--k", type=int, default=5)

    p = sub.add_parser("prompt", help="render the prompt for one sentence")
    p.add_argument("--sentence", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--dump-trace", help="write glosses/exemplars/coverage as JSON")

    p = sub.add_parser("serve", help="run the study workbench service")
    p.add_argument("--config", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--data-dir", help="session storage (default: <output_dir>/sessions)")

    return parser


def _read_lines(path: str) -> list[str]:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such file: {path}")
    with open(p, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def _cmd_prepare(args: argparse.Namespace) -> int:
    cfg = RunConfig.from_file(args.config)
    res = pipeline.prepare(cfg)
    stats = res.dictionary.stats()
    print(f"dictionary: {len(res.base_dictionary)} base entries -> {len(res.dictionary)} prepared")
    print(f"senses per entry: {stats['senses_per_entry']:.2f}")
    if res.lexicon is not None:
        print(f"induced pairs: {len(res.lexicon)} (threshold {res.lexicon.threshold})")
    print(f"corpus: {len(res.corpus)} pairs; bm25 side={res.bm25.side}")
    if res.coverage_report:
        print(
            "test coverage: base {base_mean:.3f} -> prepared {prepared_mean:.3f}".format(
                **res.coverage_report
            )
        )
    print(f"artifacts in {cfg.output_dir}")
    return EXIT_OK


def _cmd_translate(args: argparse.Namespace) -> int:
    cfg = RunConfig.from_file(args.config)
    res = pipeline.prepare(cfg)
    result = pipeline.translate_set(res)
    overall = result.report.overall
    print(f"instances: {overall.count}  BLEU {overall.bleu:.2f}  chrF {overall.chrf:.2f}")
    for tag, g in result.report.per_tag.items():
        print(f"  {tag}: n={g.count}  BLEU {g.bleu:.2f}  chrF {g.chrf:.2f}")
    print(f"manifest: {result.path}")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    hyps = _read_lines(args.hyps)
    refs = _read_lines(args.refs)
    if len(hyps) != len(refs):
        raise DataError(f"{len(hyps)} hypotheses vs {len(refs)} references")
    tags: list[str | None]
    if args.tags:
        tags = [t or None for t in _read_lines(args.tags)]
        if len(tags) != len(hyps):
            raise DataError(f"{len(tags)} tags vs {len(hyps)} hypotheses")
    else:
        tags = [None] * len(hyps)
    report = metrics.evaluate(
        list(zip(hyps, refs, tags)), tokenization=args.tokenization
    )
    print(
        f"n={report.overall.count}  BLEU {report.overall.bleu:.2f}  chrF {report.overall.chrf:.2f}"
    )
    for tag, g in report.per_tag.items():
        print(f"  {tag}: n={g.count}  BLEU {g.bleu:.2f}  chrF {g.chrf:.2f}")
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, ensure_ascii=False, sort_keys=True, indent=2)
        print(f"report written to {args.json_out}")
    return EXIT_OK


def _cmd_ablate(args: argparse.Namespace) -> int:
    cfg = RunConfig.from_file(args.config)
    table = pipeline.ablate(cfg, args.axis)
    print(pipeline.render_ablation(table), end="")
    print(f"table written to {cfg.output_dir / 'ablation.json'}")
    return EXIT_OK


def _cmd_induce(args: argparse.Namespace) -> int:
    corpus = store.load_corpus(args.corpus)
    src_lang, tgt_lang = pipeline._parse_direction(args.direction)
    corpus_langs = (
        pipeline._parse_lang_pair(args.corpus_langs)
        if args.corpus_langs
        else (src_lang, tgt_lang)
    )
    if src_lang not in corpus_langs:
        raise ConfigError(f"direction source {src_lang!r} not in corpus langs {corpus_langs}")
    if corpus_langs[0] != src_lang:
        corpus = store.ParallelCorpus(
            store.SentencePair(p.id, p.tgt, p.src, p.tag) for p in corpus
        )
    base = (
        store.load_dictionary(args.dictionary, (src_lang, tgt_lang))
        if args.dictionary
        else None
    )
    lex = pipeline.induce_lexicon(
        corpus,
        src_lang,
        tgt_lang,
        base_dict=base,
        iters=args.iters,
        threshold=args.threshold,
        null_word=not args.no_null,
        symmetrize=not args.no_symmetrize,
    )
    align.save_lexicon(lex, args.out)
    print(f"{len(lex)} pairs at threshold {args.threshold} -> {args.out}")
    return EXIT_OK


def _cmd_index(args: argparse.Namespace) -> int:
    corpus = store.load_corpus(args.corpus)
    d = None
    if args.dictionary:
        d = store.load_dictionary(args.dictionary, (args.lang or "und", "und"))
    index = retrieve.build_bm25(
        corpus, side=args.side, lang=args.lang, d=d, k1=args.k1, b=args.b
    )
    index.save(args.out)
    print(f"indexed {len(index)} docs ({args.side} side) -> {args.out}")
    return EXIT_OK


def _cmd_search(args: argparse.Namespace) -> int:
    index = retrieve.Bm25Index.load(args.index)
    hits = retrieve.bm25_topk(index, args.query, args.k)
    for pair, score in hits.items:
        print(f"{pair.id}\t{score:.4f}\t{pair.src}\t{pair.tgt}")
    if not hits.items:
        print("no matches", file=sys.stderr)
    return EXIT_OK


def _cmd_prompt(args: argparse.Namespace) -> int:
    cfg = RunConfig.from_file(args.config)
    res = pipeline.prepare(cfg)
    spec = pipeline.build_instance_prompt(res, args.sentence, instance_id=-1)
    print(spec.text)
    if args.dump_trace:
        trace = {
            "sentence": spec.sentence,
            "mode": spec.mode,
            "coverage": spec.coverage,
            "prompt_sha256": hashlib.sha256(spec.text.encode("utf-8")).hexdigest(),
            "exemplar_ids": spec.exemplars.ids() if spec.exemplars else [],
            "glosses": [
                {
                    "surface": g.surface,
                    "kind": g.kind,
                    "glosses": [{"text": t, "origin": o} for t, o in g.glosses],
                }
                for g in spec.glosses
            ],
            "monolingual_excerpt": spec.monolingual_excerpt,
        }
        with open(args.dump_trace, "w", encoding="utf-8") as fh:
            json.dump(trace, fh, ensure_ascii=False, sort_keys=True, indent=2)
        print(f"trace written to {args.dump_trace}", file=sys.stderr)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import StudyEngine, create_app

    cfg = RunConfig.from_file(args.config)
    res = pipeline.prepare(cfg)
    data_dir = Path(args.data_dir) if args.data_dir else cfg.output_dir / "sessions"
    engine = StudyEngine(res, data_dir)
    app = create_app(engine)
    print(f"serving on http://{args.host}:{args.port} (sessions in {data_dir})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


_COMMANDS = {
    "prepare": _cmd_prepare,
    "translate": _cmd_translate,
    "evaluate": _cmd_evaluate,
    "ablate": _cmd_ablate,
    "induce": _cmd_induce,
    "index": _cmd_index,
    "search": _cmd_search,
    "prompt": _cmd_prompt,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RunFailedError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED


if __name__ == "__main__":
    sys.exit(main())
