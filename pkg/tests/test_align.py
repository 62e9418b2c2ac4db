import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dictmt import align, store
from dictmt.align import NULL_TOKEN
from dictmt.store import BilingualDictionary, DictEntry, Sense

import oracles


def test_single_pair_converges_immediately():
    table = align.train_model1([(["a"], ["x"])], iters=1, null_word=False)
    assert table.prob("a", "x") == 1.0


def test_two_iteration_hand_values():
    # corpus {("a b", "x y"), ("a", "x")}, no NULL.  Running the updates by
    # hand: after iteration 2, t(x|a) = 24/29 and t(y|b) = 5/8.
    pairs = [(["a", "b"], ["x", "y"]), (["a"], ["x"])]
    table = align.train_model1(pairs, iters=2, null_word=False)
    assert table.prob("a", "x") == pytest.approx(24 / 29, abs=1e-12)
    assert table.prob("a", "y") == pytest.approx(5 / 29, abs=1e-12)
    assert table.prob("b", "y") == pytest.approx(5 / 8, abs=1e-12)
    assert table.prob("b", "x") == pytest.approx(3 / 8, abs=1e-12)
    # the shared pair disambiguates
    assert table.prob("a", "x") > table.prob("a", "y")
    assert table.prob("b", "y") > table.prob("b", "x")


@pytest.mark.parametrize("null_word", [False, True])
def test_em_matches_nested_dict_oracle(null_word):
    pairs = [
        (["dou", "miz", "dah"], ["我们", "有", "河"]),
        (["mbanj", "ndei"], ["村", "好"]),
        (["dou", "ndei"], ["我们", "好"]),
        (["dah", "hung"], ["河", "大"]),
    ]
    table = align.train_model1(pairs, iters=6, null_word=null_word)
    t_oracle, lls_oracle = oracles.model1(
        pairs, iters=6, null_token=NULL_TOKEN if null_word else None
    )
    assert set(table.t) == set(t_oracle)
    for key, p in t_oracle.items():
        assert table.t[key] == pytest.approx(p, abs=1e-9), key
    for a, b in zip(table.log_likelihoods, lls_oracle):
        assert a == pytest.approx(b, abs=1e-9)


_TOK = st.sampled_from("a b c d e f g".split())
_PAIRS = st.lists(
    st.tuples(
        st.lists(_TOK, min_size=1, max_size=4),
        st.lists(_TOK, min_size=1, max_size=4),
    ),
    min_size=1,
    max_size=6,
)


@given(_PAIRS, st.booleans())
@settings(max_examples=150, deadline=None)
def test_em_oracle_parity_property(pairs, null_word):
    table = align.train_model1(pairs, iters=4, null_word=null_word)
    t_oracle, lls_oracle = oracles.model1(
        pairs, iters=4, null_token=NULL_TOKEN if null_word else None
    )
    for key, p in t_oracle.items():
        assert table.t[key] == pytest.approx(p, abs=1e-9)
    for a, b in zip(table.log_likelihoods, lls_oracle):
        assert a == pytest.approx(b, abs=1e-9)


@given(_PAIRS, st.booleans())
@settings(max_examples=150, deadline=None)
def test_log_likelihood_monotone_property(pairs, null_word):
    table = align.train_model1(pairs, iters=6, null_word=null_word)
    lls = table.log_likelihoods
    assert len(lls) == 6
    for a, b in zip(lls, lls[1:]):
        assert b >= a - 1e-9


def test_permutation_corpus_recovery():
    pairs, mapping = oracles.permutation_corpus()
    table = align.train_model1(pairs, iters=10)
    lex = align.extract_lexicon(table, threshold=0.6)
    truth = set(mapping.items())
    got = {(it.source, it.target) for it in lex}
    tp = len(got & truth)
    assert tp / len(got) >= 0.95  # precision
    assert tp / len(truth) >= 0.80  # recall
    lls = table.log_likelihoods
    assert all(b >= a - 1e-9 for a, b in zip(lls, lls[1:]))


def test_extract_threshold_monotone():
    pairs, _ = oracles.permutation_corpus(seed=7, vocab=10, sentences=60)
    table = align.train_model1(pairs, iters=5)
    low = {(i.source, i.target) for i in align.extract_lexicon(table, 0.3)}
    high = {(i.source, i.target) for i in align.extract_lexicon(table, 0.8)}
    assert high <= low


def test_extract_never_emits_null():
    pairs = [(["a"], ["x", "y"]), (["b"], ["y"])]
    table = align.train_model1(pairs, iters=5, null_word=True)
    lex = align.extract_lexicon(table, threshold=0.01)
    assert all(it.source != NULL_TOKEN for it in lex)


def test_extract_validates_threshold():
    table = align.train_model1([(["a"], ["x"])], iters=1)
    with pytest.raises(ValueError):
        align.extract_lexicon(table, 0.0)
    with pytest.raises(ValueError):
        align.extract_lexicon(table, 1.5)


def test_extract_drops_known_base_senses():
    d = BilingualDictionary(("za", "zh"))
    d.add(DictEntry("a", [Sense("x")]))
    table = align.train_model1([(["a"], ["x"])], iters=2, null_word=False)
    assert len(align.extract_lexicon(table, 0.5, d=None)) == 1
    assert len(align.extract_lexicon(table, 0.5, d=d)) == 0


def test_symmetrized_union_takes_max():
    fwd = align.AlignmentTable(
        t={("s", "w"): 0.7, ("u", "v"): 0.2},
        source_vocab=frozenset({"s", "u"}),
        target_vocab=frozenset({"w", "v"}),
        iterations=1,
    )
    bwd = align.AlignmentTable(
        t={("w", "s"): 0.9, ("v", "u"): 0.65},
        source_vocab=frozenset({"w", "v"}),
        target_vocab=frozenset({"s", "u"}),
        iterations=1,
    )
    lex = align.symmetrized_lexicon(fwd, bwd, threshold=0.6)
    got = {(i.source, i.target): i.score for i in lex}
    # (s, w) clears in both directions: max wins; (u, v) only backward
    assert got == {("s", "w"): 0.9, ("u", "v"): 0.65}


def test_merge_appends_after_existing(toy_dict):
    lex = align.InducedLexicon(
        items=[
            align.LexiconItem("vunz", "人", 0.99),
            align.LexiconItem("mbanj", "村庄", 0.8),
            align.LexiconItem("mbanj", "村", 0.7),  # dup of base sense: skipped
        ],
        threshold=0.6,
    )
    merged = align.merge_into_dictionary(lex, toy_dict)
    e = merged.lookup("mbanj")
    assert e.sense_texts() == ["村", "村庄"]
    assert e.senses[1].provenance == "induced"
    v = merged.lookup("vunz")
    assert v.sense_texts() == ["人"]
    assert v.senses[0].score == 0.99
    # source dictionary untouched
    assert toy_dict.lookup("mbanj").sense_texts() == ["村"]
    assert "vunz" not in toy_dict


def test_lexicon_save_load_roundtrip(tmp_path):
    lex = align.InducedLexicon(
        items=[
            align.LexiconItem("vunz", "人", 0.998877),
            align.LexiconItem("naz", "田", 0.75),
        ],
        threshold=0.6,
    )
    path = tmp_path / "lex.tsv"
    align.save_lexicon(lex, path)
    back = align.load_lexicon(path, threshold=0.6)
    assert [(i.source, i.target) for i in back] == [("vunz", "人"), ("naz", "田")]
    assert back.items[0].score == pytest.approx(0.998877, abs=1e-6)


def test_load_lexicon_rejects_bad_rows(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("only two\tcells\n", encoding="utf-8")
    with pytest.raises(store.DataError):
        align.load_lexicon(path)


def test_tokenized_pairs_skips_empty_sides(toy_dict):
    corpus = store.ParallelCorpus(
        [
            store.SentencePair(1, "dou miz dah", "我们有河"),
            store.SentencePair(2, "...", "省略"),
        ]
    )
    rev = store.reverse_dictionary(toy_dict)
    pairs = align.tokenized_pairs(corpus, "za", "zh", toy_dict, rev)
    assert len(pairs) == 1
    assert pairs[0] == (["dou", "miz", "dah"], ["我们", "有", "河"])


def test_train_rejects_empty_input():
    with pytest.raises(store.DataError):
        align.train_model1([])
    with pytest.raises(ValueError):
        align.train_model1([(["a"], ["x"])], iters=0)
