from pathlib import Path

import pytest

from dictmt import store

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

BASE_CONFIG = {
    "data": {
        "dictionary": str(FIXTURES / "dict.jsonl"),
        "corpus": str(FIXTURES / "corpus.jsonl"),
        "test": str(FIXTURES / "test-bleu100.jsonl"),
        "synonyms": str(FIXTURES / "syn.tsv"),
        "monolingual": str(FIXTURES / "mono.txt"),
    },
    "run": {"direction": "za2zh", "corpus_langs": "za,zh", "seed": "13"},
    "prompt": {"mode": "dipmt++", "k": "2"},
    "backend": {"kind": "mock"},
}


def make_config(tmp_path: Path, name: str = "run.ini", **overrides) -> Path:
    """Write BASE_CONFIG merged with per-section overrides as an INI file;
    a None value drops the key.  output_dir defaults to tmp_path/out."""
    merged = {sec: dict(keys) for sec, keys in BASE_CONFIG.items()}
    merged.setdefault("run", {})["output_dir"] = str(tmp_path / "out")
    for sec, keys in overrides.items():
        merged.setdefault(sec, {})
        for key, value in keys.items():
            if value is None:
                merged[sec].pop(key, None)
            else:
                merged[sec][key] = str(value)
    lines = []
    for sec, keys in merged.items():
        lines.append(f"[{sec}]")
        lines.extend(f"{k} = {v}" for k, v in keys.items())
        lines.append("")
    path = tmp_path / name
    path.write_text("\n".join(lines), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def toy_dict():
    return store.load_dictionary(FIXTURES / "dict.jsonl", ("za", "zh"))


@pytest.fixture(scope="session")
def toy_corpus():
    return store.load_corpus(FIXTURES / "corpus.jsonl")


@pytest.fixture(scope="session")
def toy_synonyms():
    return store.load_synonyms(FIXTURES / "syn.tsv")
