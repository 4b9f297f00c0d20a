import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wasserstein_retrieval.corpus import Corpus, Document, RawDocument, build_corpus
from wasserstein_retrieval.exceptions import DataError
from wasserstein_retrieval.weighting import (
    DiscreteDistribution,
    TermWeighter,
    idf_weights,
    smoothed_idf,
    tf_weights,
)


def _corpus_with(n, df):
    """Corpus of ``n`` documents where word 'w' occurs in ``df`` of them."""
    docs = tuple(Document(str(i), "", ["w"] if i < df else ["x"]) for i in range(n))
    freq = {"w": df}
    if df < n:
        freq["x"] = n - df
    return Corpus(docs, freq)


class TestTf:
    def test_stopword_filtered_sentence(self):
        d = tf_weights(Document("d", "en", ["cat", "sits", "mat"]))
        assert d.words == ("cat", "sits", "mat")
        np.testing.assert_allclose(d.weights, [1 / 3] * 3, rtol=0, atol=1e-15)

    def test_single_word(self):
        d = tf_weights(Document("d", "", ["a"] * 7))
        assert d.as_dict() == {"a": 1.0}

    def test_symmetric(self):
        d = tf_weights(Document("d", "", ["a", "b", "a", "b"]))
        assert d.as_dict() == {"a": 0.5, "b": 0.5}

    def test_empty(self):
        with pytest.raises(DataError):
            tf_weights(Document("d", "", []))

    @given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=30), st.randoms())
    def test_order_invariant(self, tokens, rnd):
        shuffled = list(tokens)
        rnd.shuffle(shuffled)
        a = tf_weights(Document("d", "", tokens)).as_dict()
        b = tf_weights(Document("d", "", shuffled)).as_dict()
        assert a.keys() == b.keys()
        for k in a:
            assert a[k] == pytest.approx(b[k], abs=1e-15)


class TestIdf:
    def test_ubiquitous_word(self):
        assert smoothed_idf(_corpus_with(10, 10))["w"] == 0.0

    def test_formula(self):
        # ln((10 + 1) / (4 + 1)), evaluated directly
        assert smoothed_idf(_corpus_with(10, 4))["w"] == pytest.approx(0.7884573603642703, abs=1e-12)
        assert math.log(11 / 5) == pytest.approx(0.7884573603642703, abs=1e-15)

    def test_single_document(self):
        assert smoothed_idf(_corpus_with(1, 1))["w"] == 0.0

    def test_equal_idf_is_tf(self):
        d = idf_weights(Document("d", "", ["a", "b"]), {"a": math.log(2), "b": math.log(2)})
        assert d.as_dict() == {"a": 0.5, "b": 0.5}

    def test_zero_idf_dropped(self):
        d = idf_weights(Document("d", "", ["a", "b"]), {"a": 0.0, "b": math.log(2)})
        assert d.as_dict() == {"b": 1.0}

    def test_weighted(self):
        d = idf_weights(Document("d", "", ["a", "a", "b"]), {"a": 1.0, "b": 2.0})
        np.testing.assert_allclose([d.as_dict()["a"], d.as_dict()["b"]], [0.5, 0.5], atol=1e-15)

    def test_all_zero(self):
        with pytest.raises(DataError):
            idf_weights(Document("d", "", ["a", "b"]), {"a": 0.0, "b": 0.0})

    def test_missing_word(self):
        with pytest.raises(DataError, match="no idf"):
            idf_weights(Document("d", "", ["a", "z"]), {"a": 1.0})


@st.composite
def corpora(draw):
    n = draw(st.integers(2, 6))
    docs = [draw(st.lists(st.sampled_from("abcdefghij"), min_size=6, max_size=15)) for _ in range(n)]
    return build_corpus([RawDocument(str(i), " ".join(d)) for i, d in enumerate(docs)])


class TestProperties:
    @given(corpora())
    def test_distribution_invariants(self, corpus):
        idf = smoothed_idf(corpus)
        assert all(v >= 0 for v in idf.values())
        for doc in corpus:
            for dist in (tf_weights(doc),):
                assert abs(dist.weights.sum() - 1) <= 1e-12
                assert (dist.weights > 0).all()
            try:
                dist = idf_weights(doc, idf)
            except DataError:
                assert all(idf[w] == 0 for w in doc.counts)
                continue
            assert abs(dist.weights.sum() - 1) <= 1e-12
            assert (dist.weights > 0).all()

    @given(corpora())
    def test_log_base_cancels(self, corpus):
        docs = [d for d in corpus if any(corpus.doc_freq[w] < corpus.size for w in d.counts)]
        nat = TermWeighter("idf").fit(corpus).transform(docs)
        two = TermWeighter("idf", log_base=2).fit(corpus).transform(docs)
        for a, b in zip(nat, two):
            assert a.words == b.words
            np.testing.assert_allclose(a.weights, b.weights, rtol=1e-12)

    @given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=20), st.floats(0.1, 10))
    def test_constant_idf_equals_tf(self, tokens, c):
        doc = Document("d", "", tokens)
        a = idf_weights(doc, {w: c for w in doc.counts})
        b = tf_weights(doc)
        assert a.words == b.words
        np.testing.assert_allclose(a.weights, b.weights, rtol=1e-12)


class TestDistribution:
    def test_invariants_enforced(self):
        with pytest.raises(DataError):
            DiscreteDistribution(("a", "a"), [0.5, 0.5])
        with pytest.raises(DataError):
            DiscreteDistribution(("a", "b"), [1.0, 0.0])
        with pytest.raises(DataError):
            DiscreteDistribution(("a", "b"), [0.5, 0.6])

    def test_transformer_api(self):
        corpus = build_corpus([RawDocument("1", "a b c d e f"), RawDocument("2", "a b c x y z")])
        w = TermWeighter()
        assert w.get_params() == {"weighting": "idf", "log_base": None}
        out = w.fit_transform(corpus)
        assert [d.source_doc for d in out] == ["1", "2"]
        assert "a" not in out[0].words  # df == N gives zero idf
        assert TermWeighter("tf").fit(corpus).transform(corpus)[0].as_dict()["a"] == pytest.approx(1 / 6)
        with pytest.raises(ValueError):
            TermWeighter("bm25").fit(corpus)
