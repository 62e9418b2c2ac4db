import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dictmt import store
from dictmt.store import (
    BilingualDictionary,
    DataError,
    DictEntry,
    ParallelCorpus,
    Sense,
    SentencePair,
    SynonymList,
)


def test_sense_validation():
    with pytest.raises(DataError):
        Sense("")
    with pytest.raises(DataError):
        Sense("x", provenance="guessed")
    with pytest.raises(DataError):
        Sense("x", provenance="base", score=0.5)  # score only on induced
    with pytest.raises(DataError):
        Sense("x", provenance="induced")  # induced needs a score
    with pytest.raises(DataError):
        Sense("x", provenance="induced", score=1.5)
    Sense("x", provenance="induced", score=1.0)  # boundary ok


def test_entry_validation():
    with pytest.raises(DataError):
        DictEntry("", [Sense("a")])
    with pytest.raises(DataError):
        DictEntry("w", [])
    with pytest.raises(DataError):
        DictEntry("w", [Sense("a"), Sense("a", "synonym")])  # dup text


def test_dictionary_rejects_duplicate_headwords():
    d = BilingualDictionary(("za", "zh"))
    d.add(DictEntry("w", [Sense("a")]))
    with pytest.raises(DataError):
        d.add(DictEntry("w", [Sense("b")]))


def test_dictionary_order_and_stats(toy_dict):
    heads = list(toy_dict.headwords())
    assert heads[0] == "mbanj"  # file order preserved
    assert toy_dict.max_headword_len == len("mwngz")
    s = toy_dict.stats()
    assert s["entries"] == 16
    assert s["senses"] == 17  # bya has two
    assert s["senses_per_entry"] == pytest.approx(17 / 16)


def test_corpus_constraints():
    c = ParallelCorpus()
    c.add(SentencePair(1, "a", "b"))
    with pytest.raises(DataError):
        c.add(SentencePair(1, "c", "d"))
    with pytest.raises(DataError):
        c.add(SentencePair(2, "", "d"))
    assert c.by_id(1).src == "a"
    assert c.by_id(99) is None


def test_dictionary_roundtrip(tmp_path, toy_dict):
    path = tmp_path / "d.jsonl"
    store.save_dictionary(toy_dict, path)
    back = store.load_dictionary(path, toy_dict.direction)
    assert list(back.headwords()) == list(toy_dict.headwords())
    for e in toy_dict.entries():
        b = back.lookup(e.headword)
        assert b.senses == e.senses
        assert b.pos == e.pos


def test_load_dictionary_reports_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"headword": "a", "senses": ["x"]}\nnot json\n', encoding="utf-8")
    with pytest.raises(DataError, match=r":2"):
        store.load_dictionary(path, ("za", "zh"))


def test_load_corpus_reports_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": 1, "src": "a", "tgt": "b"}\n{"id": 1, "src": "c", "tgt": "d"}\n', encoding="utf-8")
    with pytest.raises(DataError, match=r":2"):
        store.load_corpus(path)


def test_load_synonyms_symmetric(tmp_path):
    path = tmp_path / "syn.tsv"
    path.write_text("a\tb\tc\n", encoding="utf-8")
    syn = store.load_synonyms(path)
    assert syn.of("a") == ["b", "c"]
    assert syn.of("b") == ["a"]
    assert syn.of("c") == ["a"]
    assert syn.of("zzz") == []


def test_load_synonyms_rejects_single_cell(tmp_path):
    path = tmp_path / "syn.tsv"
    path.write_text("lonely\n", encoding="utf-8")
    with pytest.raises(DataError):
        store.load_synonyms(path)


def test_nfc_normalization_on_load(tmp_path):
    # é as e + combining acute must collapse to the precomposed form
    decomposed = "é"
    path = tmp_path / "d.jsonl"
    path.write_text(
        json.dumps({"headword": decomposed, "senses": ["x"]}) + "\n", encoding="utf-8"
    )
    d = store.load_dictionary(path, ("fr", "en"))
    assert "é" in d


def test_reverse_dictionary_basics(toy_dict):
    rev = store.reverse_dictionary(toy_dict)
    assert rev.direction == ("zh", "za")
    assert rev.lookup("村").sense_texts() == ["mbanj"]
    assert rev.lookup("鱼").sense_texts() == ["bya"]
    assert rev.lookup("山").sense_texts() == ["bya"]
    # reversing twice recovers the base mapping as a set of pairs
    back = store.reverse_dictionary(rev)
    orig_pairs = {
        (e.headword, s.text) for e in toy_dict.entries() for s in e.senses
    }
    back_pairs = {(e.headword, s.text) for e in back.entries() for s in e.senses}
    assert back_pairs == orig_pairs


def test_reverse_skips_derived_senses():
    d = BilingualDictionary(("za", "zh"))
    d.add(
        DictEntry(
            "w",
            [Sense("a"), Sense("b", "induced", 0.9), Sense("c", "synonym")],
        )
    )
    rev = store.reverse_dictionary(d)
    assert "a" in rev and "b" not in rev and "c" not in rev


def test_expand_with_synonyms_adds_entry(toy_dict, toy_synonyms):
    out = store.expand_with_synonyms(toy_dict, toy_synonyms)
    assert "ranz" in out
    assert out.lookup("ranz").sense_texts() == ["村"]
    assert all(s.provenance == "synonym" for s in out.lookup("ranz").senses)
    # naz links to both dah and raemx, senses in entry order
    assert out.lookup("naz").sense_texts() == ["河", "水"]
    # input untouched
    assert "ranz" not in toy_dict


def test_expand_with_synonyms_idempotent(toy_dict, toy_synonyms):
    once = store.expand_with_synonyms(toy_dict, toy_synonyms)
    twice = store.expand_with_synonyms(once, toy_synonyms)
    assert list(twice.headwords()) == list(once.headwords())
    for e in once.entries():
        assert twice.lookup(e.headword).senses == e.senses


def test_expand_never_overwrites_existing_entries(toy_dict):
    syn = SynonymList()
    syn._link("mbanj", "dah")
    syn._link("dah", "mbanj")
    out = store.expand_with_synonyms(toy_dict, syn)
    # both words already have entries: nothing changes
    assert out.lookup("mbanj").sense_texts() == ["村"]
    assert out.lookup("dah").sense_texts() == ["河"]


_WORDS = st.text(alphabet=st.sampled_from("abcdef"), min_size=1, max_size=4)


@given(
    st.dictionaries(_WORDS, st.lists(_WORDS, min_size=1, max_size=3, unique=True), max_size=8),
    st.lists(st.tuples(_WORDS, _WORDS), max_size=8),
)
@settings(max_examples=200)
def test_expansion_idempotence_property(entries, links):
    d = BilingualDictionary(("za", "zh"))
    for hw, texts in entries.items():
        d.add(DictEntry(hw, [Sense(t) for t in texts]))
    syn = SynonymList()
    for a, b in links:
        syn._link(a, b)
        syn._link(b, a)
    once = store.expand_with_synonyms(d, syn)
    twice = store.expand_with_synonyms(once, syn)
    assert list(twice.headwords()) == list(once.headwords())
    for e in once.entries():
        assert twice.lookup(e.headword).senses == e.senses
    # original entries survive verbatim
    for e in d.entries():
        assert once.lookup(e.headword).senses == e.senses
