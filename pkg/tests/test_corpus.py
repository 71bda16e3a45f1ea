import logging

import pytest
from hypothesis import given, strategies as st

from zsner.corpus import (
    Sentence,
    Token,
    collapse_bio,
    make_corpus,
    parse_conll,
    sample_few_shot,
    serialize_conll,
    vocabulary,
)
from zsner.errors import FormatError


class TestParse:
    def test_direct_parse(self):
        corpus = parse_conll("Obama B-person\nspoke O\n\nParis B-location", "news")
        assert len(corpus.sentences) == 2
        assert corpus.label_set == ("location", "person")
        assert corpus.sentences[0].surfaces() == ["Obama", "spoke"]
        assert corpus.sentences[1].gold_tags() == ["B-location"]

    def test_empty_text(self):
        corpus = parse_conll("", "empty")
        assert corpus.sentences == ()
        assert corpus.label_set == ()

    def test_empty_type_name_rejected(self):
        with pytest.raises(FormatError, match="line 1"):
            parse_conll("word B-", "x")

    def test_wrong_field_count_names_line(self):
        with pytest.raises(FormatError, match="line 2"):
            parse_conll("ok O\na b c", "x")

    def test_unknown_prefix_rejected(self):
        with pytest.raises(FormatError):
            parse_conll("word X-thing", "x")

    def test_origin_recorded(self):
        corpus = parse_conll("Paris B-location", "travel")
        assert corpus.sentences[0].origin == "travel"

    def test_dangling_i_tag_repaired(self, caplog):
        with caplog.at_level(logging.WARNING):
            corpus = parse_conll("Obama I-person", "x")
        assert corpus.sentences[0].gold_tags() == ["B-person"]
        assert "repairing" in caplog.text

    def test_i_tag_after_other_type_repaired(self):
        corpus = parse_conll("a B-person\nb I-location", "x")
        assert corpus.sentences[0].gold_tags() == ["B-person", "B-location"]

    def test_i_tag_continuation_kept(self):
        corpus = parse_conll("New B-location\nYork I-location", "x")
        assert corpus.sentences[0].gold_tags() == ["B-location", "I-location"]

    def test_strict_mode_rejects_dangling_i(self):
        with pytest.raises(FormatError, match="I-person"):
            parse_conll("Obama I-person", "x", strict=True)

    def test_label_set_excludes_o_and_is_sorted(self):
        corpus = parse_conll("a B-z\nb O\nc B-a", "x")
        assert corpus.label_set == ("a", "z")


class TestCollapse:
    @pytest.mark.parametrize("tag,expected", [("B-person", "person"), ("I-person", "person"), ("O", "O")])
    def test_examples(self, tag, expected):
        assert collapse_bio(tag) == expected

    @given(st.sampled_from(["O"] + [p + t for p in ("B-", "I-") for t in ("person", "loc", "misc")]))
    def test_idempotent_on_outputs(self, tag):
        collapsed = collapse_bio(tag)
        assert collapse_bio(collapsed) == collapsed


@st.composite
def corpora(draw):
    types = ["person", "location", "music"]
    n_sents = draw(st.integers(1, 5))
    sentences = []
    for _ in range(n_sents):
        n_tok = draw(st.integers(1, 6))
        tokens = []
        prev = None
        for _ in range(n_tok):
            kind = draw(st.integers(0, 2))
            if kind == 0 or (kind == 2 and prev is None):
                tokens.append(("w", "O"))
                prev = None
            elif kind == 1:
                t = draw(st.sampled_from(types))
                tokens.append(("w", f"B-{t}"))
                prev = t
            else:
                tokens.append(("w", f"I-{prev}"))
        sentences.append(tokens)
    return sentences


class TestRoundTrip:
    @given(corpora())
    def test_parse_serialize_round_trip(self, sentences):
        text = "\n\n".join("\n".join(f"{s} {t}" for s, t in sent) for sent in sentences)
        corpus = parse_conll(text, "rt", strict=True)
        assert serialize_conll(corpus).strip() == text.strip()
        again = parse_conll(serialize_conll(corpus), "rt", strict=True)
        assert [s.tokens for s in again.sentences] == [s.tokens for s in corpus.sentences]


def three_label_corpus():
    text = (
        "a B-x\n\n"
        "b B-y\n\n"
        "c B-z\n\n"
        "d O"
    )
    return parse_conll(text, "demo")


class TestFewShot:
    def test_zero_returns_empty(self):
        corpus = three_label_corpus()
        out = sample_few_shot(corpus, 0, seed=1)
        assert out.sentences == ()
        assert out.label_set == ()

    def test_one_per_disjoint_label(self):
        out = sample_few_shot(three_label_corpus(), 1, seed=5)
        assert len(out.sentences) == 3
        assert out.label_set == ("x", "y", "z")

    def test_deterministic(self):
        corpus = parse_conll(
            "\n\n".join(f"w{i} B-x" for i in range(30)), "big"
        )
        a = sample_few_shot(corpus, 3, seed=9)
        b = sample_few_shot(corpus, 3, seed=9)
        assert a.sentences == b.sentences

    def test_subset_of_corpus(self):
        corpus = parse_conll("\n\n".join(f"w{i} B-x" for i in range(10)), "big")
        out = sample_few_shot(corpus, 4, seed=2)
        assert set(out.sentences) <= set(corpus.sentences)
        assert len(out.sentences) == 4

    def test_exhaustive_n_returns_all_entity_sentences(self):
        text = "a B-x\n\nb B-x\n\nc O"
        corpus = parse_conll(text, "x")
        out = sample_few_shot(corpus, 100, seed=0)
        assert len(out.sentences) == 2  # the O-only sentence has no label
        assert out.meta["undersupplied"] == {"x": 2}

    def test_negative_n_rejected(self):
        with pytest.raises(ValueError):
            sample_few_shot(three_label_corpus(), -1, seed=0)

    def test_order_is_corpus_order(self):
        corpus = parse_conll("\n\n".join(f"w{i} B-x" for i in range(20)), "x")
        out = sample_few_shot(corpus, 5, seed=3)
        indices = [corpus.sentences.index(s) for s in out.sentences]
        assert indices == sorted(indices)


class TestVocabulary:
    def test_hand_count(self):
        corpus = make_corpus(
            "v",
            (Sentence(tokens=(Token("The", "O"), Token("the", "O"), Token("dog.", "O"))),),
        )
        assert vocabulary(corpus) == {"the": 2, "dog": 1}

    def test_empty(self):
        assert vocabulary(make_corpus("v", ())) == {}

    def test_internal_punctuation_kept(self):
        corpus = make_corpus("v", (Sentence(tokens=(Token("U.S.", "O"),)),))
        assert vocabulary(corpus) == {"u.s": 1}

    def test_pure_punctuation_dropped(self):
        corpus = make_corpus("v", (Sentence(tokens=(Token(".", "O"), Token("!!", "O"))),))
        assert vocabulary(corpus) == {}

    def test_counts_accumulate_across_sentences(self):
        corpus = parse_conll("dog O\n\nDog O", "v")
        assert vocabulary(corpus) == {"dog": 2}
