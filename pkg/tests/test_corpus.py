import pytest
from hypothesis import given
from hypothesis import strategies as st

from wasserstein_retrieval.corpus import (
    MAX_TOKENS,
    Document,
    RawDocument,
    Rejected,
    build_corpus,
    preprocess,
    read_corpus,
    read_stopwords,
    tokenize,
    write_rejections,
)
from wasserstein_retrieval.exceptions import DataError


class TestTokenize:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("The cat sits.", ["The", "cat", "sits"]),
            ("", []),
            ("le chat,  est", ["le", "chat", "est"]),
            ("« bonjour » -- !!", ["bonjour"]),
            ("l'homme\tdit\n(oui)", ["l'homme", "dit", "oui"]),
        ],
    )
    def test_examples(self, text, expected):
        assert tokenize(text) == expected


class TestPreprocess:
    def test_three_content_words_is_too_short(self):
        out = preprocess(RawDocument("d", "The cat sits on the mat"), {"the", "on"})
        assert isinstance(out, Rejected)
        assert out.reason.startswith("too-short")

    def test_truncates_to_500(self):
        text = " ".join(f"w{chr(97 + i % 26)}x" for i in range(600)).replace("w", "v")
        doc = preprocess(RawDocument("d", text), frozenset())
        assert isinstance(doc, Document)
        assert len(doc.tokens) == MAX_TOKENS

    def test_truncation_happens_after_filtering(self):
        words = ["the"] * 400 + ["alpha"] * 300
        doc = preprocess(RawDocument("d", " ".join(words)), {"the"})
        assert doc.tokens == ("alpha",) * 300

    def test_digits_and_case(self):
        out = preprocess(RawDocument("d", "Dog42 DOG dog"), frozenset())
        assert isinstance(out, Rejected)

    def test_filters(self):
        out = preprocess(RawDocument("d", "The Cat, 1999 sat -- on a MAT in 2nd place today"), {"the", "on", "a", "in"})
        assert isinstance(out, Rejected)
        doc = preprocess(RawDocument("d", "The Cat, 1999 sat -- on a MAT in 2nd place today ok"), {"the", "on", "a", "in"})
        assert doc.tokens == ("cat", "sat", "mat", "place", "today", "ok")
        assert doc.counts == {"cat": 1, "sat": 1, "mat": 1, "place": 1, "today": 1, "ok": 1}

    def test_exactly_six_tokens_survive(self):
        assert isinstance(preprocess(RawDocument("d", "a b c d e f"), frozenset()), Document)
        assert isinstance(preprocess(RawDocument("d", "a b c d e"), frozenset()), Rejected)

    @given(st.lists(st.text(alphabet="abcxyzé,.!?' 0123", min_size=1, max_size=8), min_size=6, max_size=40))
    def test_idempotent(self, words):
        out = preprocess(RawDocument("d", " ".join(words)), {"abc"})
        if isinstance(out, Rejected):
            return
        again = preprocess(RawDocument("d", " ".join(out.tokens)), {"abc"})
        assert again.tokens == out.tokens
        assert sum(out.counts.values()) == len(out.tokens) <= MAX_TOKENS
        for t in out.tokens:
            assert t == t.lower() and not any(c.isdigit() for c in t) and t != "abc"


class TestBuildCorpus:
    def test_document_frequency(self):
        raws = [
            RawDocument("1", "cat cat cat cat cat dog"),
            RawDocument("2", "cat bird fish lion bear wolf"),
            RawDocument("3", "eagle bird fish lion bear wolf"),
        ]
        c = build_corpus(raws)
        assert c.size == 3
        assert c.doc_freq["cat"] == 2
        assert c.doc_freq["dog"] == 1
        assert c.doc_freq["bird"] == 2

    def test_all_rejected(self):
        with pytest.raises(DataError):
            build_corpus([RawDocument("1", "too short"), RawDocument("2", "")])

    def test_rejections_are_kept(self, tmp_path):
        c = build_corpus([RawDocument("1", "a b c d e f"), RawDocument("2", "a b")])
        assert [r.id for r in c.rejected] == ["2"]
        write_rejections(c.rejected, tmp_path / "rej.tsv")
        assert (tmp_path / "rej.tsv").read_text().startswith("2\ttoo-short")

    def test_duplicate_ids(self):
        with pytest.raises(DataError):
            build_corpus([RawDocument("1", "a b c d e f"), RawDocument("1", "a b c d e f")])

    @given(st.lists(st.lists(st.sampled_from("abcdefgh"), min_size=6, max_size=20), min_size=1, max_size=8))
    def test_df_bounds(self, docs):
        c = build_corpus([RawDocument(str(i), " ".join(d)) for i, d in enumerate(docs)])
        for w, df in c.doc_freq.items():
            assert 1 <= df <= c.size
            assert df == sum(w in d.counts for d in c.documents)


class TestFiles:
    def test_read_corpus(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("a\tThe first text\nb\tsecond one\n\n", encoding="utf-8")
        raws = read_corpus(p, "en")
        assert [(r.id, r.text, r.language) for r in raws] == [("a", "The first text", "en"), ("b", "second one", "en")]

    def test_read_corpus_errors(self, tmp_path):
        p = tmp_path / "c.tsv"
        p.write_text("no tab here\n", encoding="utf-8")
        with pytest.raises(DataError, match=":1:"):
            read_corpus(p)
        p.write_text("a\tx\na\ty\n", encoding="utf-8")
        with pytest.raises(DataError, match="duplicate"):
            read_corpus(p)

    def test_stopwords(self, tmp_path):
        p = tmp_path / "s.txt"
        p.write_text("The\non\n\nle\n", encoding="utf-8")
        assert read_stopwords(p) == {"the", "on", "le"}
