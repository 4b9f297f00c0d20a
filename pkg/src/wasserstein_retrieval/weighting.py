"""Turn documents into normalized word histograms (tf or smoothed idf)."""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Corpus, Document, document_frequencies
from .exceptions import DataError

WEIGHTINGS = ("tf", "idf")


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Positive weights over a support of distinct words, summing to one."""

    words: tuple
    weights: np.ndarray
    source_doc: str = ""

    def __post_init__(self):
        words = tuple(self.words)
        weights = np.asarray(self.weights, dtype=np.float64)
        if len(words) != weights.shape[0] or weights.ndim != 1:
            raise DataError("words and weights must be parallel 1-d sequences")
        if len(set(words)) != len(words):
            raise DataError(f"distribution of {self.source_doc!r} has repeated words")
        if len(words) == 0:
            raise DataError(f"distribution of {self.source_doc!r} is empty")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise DataError(f"distribution of {self.source_doc!r} has non-positive weights")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise DataError(f"weights of {self.source_doc!r} sum to {weights.sum()!r}")
        weights.setflags(write=False)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.words)

    def as_dict(self):
        return dict(zip(self.words, self.weights.tolist()))


def normalized(words, mass, source_doc=""):
    """Drop zero-mass words and L1-normalize the rest."""
    mass = np.asarray(mass, dtype=np.float64)
    keep = mass > 0
    if not keep.any():
        raise DataError(f"document {source_doc!r} has no word with positive weight")
    words = [w for w, k in zip(words, keep) if k]
    mass = mass[keep]
    weights = mass / mass.sum()
    # one correction pass keeps the sum within the 1e-12 invariant for long supports
    weights /= weights.sum()
    return DiscreteDistribution(tuple(words), weights, source_doc)


def tf_weights(doc: Document):
    if len(doc.tokens) == 0:
        raise DataError(f"document {doc.id!r} is empty")
    words = list(doc.counts)
    return normalized(words, [doc.counts[w] for w in words], doc.id)


def smoothed_idf(corpus: Corpus, log=math.log):
    """``log((N + 1) / (df + 1))`` for every word of the corpus."""
    n = corpus.size
    if n == 0:
        raise DataError("cannot compute idf on an empty corpus")
    return {w: log((n + 1) / (df + 1)) for w, df in corpus.doc_freq.items()}


def idf_weights(doc: Document, idf):
    if len(doc.tokens) == 0:
        raise DataError(f"document {doc.id!r} is empty")
    words = list(doc.counts)
    try:
        mass = [doc.counts[w] * idf[w] for w in words]
    except KeyError as exc:
        raise DataError(f"document {doc.id!r}: no idf value for word {exc.args[0]!r}") from None
    return normalized(words, mass, doc.id)


def weigh(doc, weighting, idf=None):
    if weighting == "tf":
        return tf_weights(doc)
    if weighting == "idf":
        if idf is None:
            raise ValueError("idf weighting requires an idf table")
        return idf_weights(doc, idf)
    raise ValueError(f"unknown weighting {weighting!r}; expected one of {WEIGHTINGS}")


class TermWeighter(TransformerMixin, BaseEstimator):
    """Transform documents into :class:`DiscreteDistribution` histograms.

    ``fit`` learns the smoothed idf table from a collection (a
    :class:`~wasserstein_retrieval.corpus.Corpus` or a list of documents);
    with ``weighting="tf"`` fitting only records the collection size.

    Parameters
    ----------
    weighting : {"tf", "idf"}
    log_base : float or None
        Base of the idf logarithm, natural log when None. The normalized
        histograms do not depend on it.
    """

    def __init__(self, weighting="idf", log_base=None):
        self.weighting = weighting
        self.log_base = log_base

    def fit(self, X, y=None):
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"unknown weighting {self.weighting!r}; expected one of {WEIGHTINGS}")
        corpus = X if isinstance(X, Corpus) else _as_corpus(X)
        if self.log_base is None:
            log = math.log
        else:
            base = float(self.log_base)
            log = lambda x: math.log(x, base)  # noqa: E731
        self.idf_ = smoothed_idf(corpus, log)
        self.n_documents_ = corpus.size
        return self

    def transform(self, X):
        check_is_fitted(self, "idf_")
        return [weigh(doc, self.weighting, self.idf_) for doc in X]


def _as_corpus(docs):
    docs = tuple(docs)
    if not docs:
        raise DataError("cannot fit on an empty collection")
    return Corpus(docs, document_frequencies(docs))
