import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import recursive_levenshtein
from wasserstein_retrieval.embeddings import (
    EmbeddingTable,
    OovPolicy,
    collapse_cross_lingual,
    embed_distribution,
    levenshtein,
    load_embeddings,
    resolve,
    resolve_word,
    save_embeddings,
    within_distance,
)
from wasserstein_retrieval.exceptions import DataError
from wasserstein_retrieval.weighting import DiscreteDistribution

LEX = OovPolicy(tie_break="lexicographic")
OFF = OovPolicy(mode="off")


def _table(words, dim=3, language="", seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingTable(words, rng.standard_normal((len(words), dim)), language)


class TestLoad:
    def test_format(self, tmp_path):
        p = tmp_path / "e.vec"
        p.write_text("2 3\ncat 0.1 0.2 0.3\nchat -1 0 1e-3\n", encoding="utf-8")
        t = load_embeddings(p, "en")
        assert (t.size, t.dim, t.language) == (2, 3, "en")
        np.testing.assert_array_equal(t["chat"], [-1.0, 0.0, 1e-3])

    def test_short_line(self, tmp_path):
        p = tmp_path / "e.vec"
        p.write_text("2 3\ncat 0.1 0.2 0.3\ndog 0.1 0.2\n", encoding="utf-8")
        with pytest.raises(DataError, match=":3:"):
            load_embeddings(p)

    def test_duplicate_first_wins(self, tmp_path):
        p = tmp_path / "e.vec"
        p.write_text("3 2\ncat 1 1\ndog 2 2\ncat 3 3\n", encoding="utf-8")
        t = load_embeddings(p)
        assert t.size == 2
        np.testing.assert_array_equal(t["cat"], [1, 1])

    @pytest.mark.parametrize("content, where", [("x\n", ":1:"), ("1 2 3\n", ":1:"), ("1 2\ncat a 1\n", ":2:")])
    def test_malformed(self, tmp_path, content, where):
        p = tmp_path / "e.vec"
        p.write_text(content, encoding="utf-8")
        with pytest.raises(DataError, match=where):
            load_embeddings(p)

    def test_count_mismatch(self, tmp_path):
        p = tmp_path / "e.vec"
        p.write_text("3 1\na 1\n", encoding="utf-8")
        with pytest.raises(DataError, match="announces"):
            load_embeddings(p)

    def test_round_trip(self, tmp_path):
        t = _table(["über", "ça", "x"], dim=5)
        save_embeddings(t, tmp_path / "t.vec")
        u = load_embeddings(tmp_path / "t.vec")
        assert u.words == t.words
        np.testing.assert_array_equal(u.vectors, t.vectors)


class TestLevenshtein:
    @pytest.mark.parametrize(
        "a, b, d",
        [("tree", "trees", 1), ("chien", "chien", 0), ("kitten", "sitting", 3), ("", "abc", 3), ("été", "ete", 2)],
    )
    def test_examples(self, a, b, d):
        assert levenshtein(a, b) == d
        assert recursive_levenshtein(a, b) == d

    @given(st.text("abcé", max_size=7), st.text("abcé", max_size=7))
    def test_matches_recursive_definition(self, a, b):
        assert levenshtein(a, b) == recursive_levenshtein(a, b)

    @given(st.text("abc", max_size=6), st.text("abc", max_size=6), st.text("abc", max_size=6))
    def test_metric(self, a, b, c):
        assert levenshtein(a, b) == levenshtein(b, a)
        assert (levenshtein(a, b) == 0) == (a == b)
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)

    @given(st.text("abc", max_size=7), st.text("abc", max_size=7), st.integers(0, 4))
    def test_bounded(self, a, b, t):
        assert within_distance(a, b, t) == (levenshtein(a, b) <= t)


class TestResolve:
    def test_in_vocabulary(self):
        t = _table(["tree", "trees"])
        for policy in (LEX, OFF, OovPolicy(threshold=5)):
            np.testing.assert_array_equal(resolve("trees", t, policy), t["trees"])

    def test_plural(self):
        t = _table(["tree", "house", "car"])
        np.testing.assert_array_equal(resolve("trees", t, OovPolicy(threshold=1)), t["tree"])

    def test_threshold_excludes(self):
        t = _table(["abcd", "tree"])
        assert resolve("zzzz", t, OovPolicy(threshold=1)) is None
        assert resolve("trees", t, OFF) is None

    def test_zero_threshold_never_fixes(self):
        t = _table(["tree"])
        assert resolve("trees", t, OovPolicy(threshold=0)) is None

    def test_tie_breaks(self):
        t = _table(["cat", "bat", "hat", "mat"])
        assert resolve_word("eat", t, LEX) == "bat"
        picks = {resolve_word("eat", t, OovPolicy(seed=s)) for s in range(40)}
        assert picks <= {"cat", "bat", "hat", "mat"}
        assert len(picks) > 1
        # seeded choice is reproducible and independent of cache state
        a = resolve_word("eat", t, OovPolicy(seed=3))
        t._oov_cache.clear()
        assert resolve_word("eat", t, OovPolicy(seed=3)) == a

    @given(st.text("abct", min_size=1, max_size=5), st.integers(0, 2))
    @settings(max_examples=60)
    def test_never_invents_vectors(self, word, threshold):
        t = _table(["tree", "cat", "act", "tact", "a"])
        v = resolve(word, t, OovPolicy(threshold=threshold))
        if v is not None:
            assert any(np.array_equal(v, row) for row in t.vectors)


class TestCollapse:
    def test_transition(self):
        en = _table(["transition", "tree", "house", "car"], language="en", seed=1)
        fr = _table(["transition", "arbre"], language="fr", seed=2)
        en2, fr2 = collapse_cross_lingual(en, fr)
        np.testing.assert_array_equal(fr2["transition"], en["transition"])
        np.testing.assert_array_equal(fr2["arbre"], fr["arbre"])
        assert en2 is en
        assert (en2.size, fr2.size) == (4, 2)
        # argument order does not change which side donates
        fr3, en3 = collapse_cross_lingual(fr, en)
        np.testing.assert_array_equal(fr3["transition"], en["transition"])

    def test_disjoint_alphabets(self):
        en = _table(["tree", "house"], seed=1)
        gr = _table(["δέντρο", "σπίτι"], seed=2)
        a, b = collapse_cross_lingual(en, gr)
        assert a is en and b is gr

    def test_idempotent(self):
        en = _table(["a", "b", "c"], seed=1)
        fr = _table(["a", "d"], seed=2)
        once = collapse_cross_lingual(en, fr)
        twice = collapse_cross_lingual(*once)
        for x, y in zip(once, twice):
            np.testing.assert_array_equal(x.vectors, y.vectors)

    def test_dimension_mismatch(self):
        with pytest.raises(DataError):
            collapse_cross_lingual(_table(["a"], dim=2), _table(["a"], dim=3))


class TestEmbedDistribution:
    def test_all_known(self):
        t = _table(["a", "b"])
        d = DiscreteDistribution(("a", "b"), [0.25, 0.75])
        X, d2 = embed_distribution(d, t, OFF)
        assert d2 is d
        np.testing.assert_array_equal(X, t.vectors)

    def test_drop_and_renormalize(self):
        t = _table(["a"])
        X, d2 = embed_distribution(DiscreteDistribution(("a", "zz"), [0.5, 0.5]), t, OFF)
        assert d2.as_dict() == {"a": 1.0}
        assert X.shape == (1, 3)

    def test_all_oov(self):
        with pytest.raises(DataError):
            embed_distribution(DiscreteDistribution(("x", "y"), [0.5, 0.5]), _table(["a"]), OFF)

    def test_oov_rows(self):
        t = _table(["tree", "house"])
        X, d2 = embed_distribution(DiscreteDistribution(("trees", "house", "qqqqq"), [0.2, 0.3, 0.5]), t, LEX)
        assert d2.words == ("trees", "house")
        np.testing.assert_allclose(d2.weights, [0.4, 0.6])
        np.testing.assert_array_equal(X, t.vectors[[0, 1]])
