"""Cross-lingual document retrieval with exact and entropy-regularized
Wasserstein distances between weighted word-embedding histograms."""

__version__ = "0.1.0"

from .corpus import Corpus, Document, RawDocument, Rejected, build_corpus, load_corpus, preprocess, tokenize
from .embeddings import (
    EmbeddingTable,
    OovPolicy,
    collapse_cross_lingual,
    embed_distribution,
    levenshtein,
    load_embeddings,
    resolve,
)
from .exceptions import DataError, NumericalError, RetrievalError
from .retrieval import EvaluationReport, RankedList, WassersteinRetriever, evaluate, mrr, nbow_embed, rank
from .transport import (
    SinkhornConfig,
    TransportResult,
    cost_matrix,
    export_plan,
    sinkhorn_distance,
    solve_exact,
    solve_sinkhorn,
    wasserstein_distance,
)
from .weighting import DiscreteDistribution, TermWeighter, idf_weights, smoothed_idf, tf_weights

__all__ = [
    "Corpus",
    "DataError",
    "DiscreteDistribution",
    "Document",
    "EmbeddingTable",
    "EvaluationReport",
    "NumericalError",
    "OovPolicy",
    "RankedList",
    "RawDocument",
    "Rejected",
    "RetrievalError",
    "SinkhornConfig",
    "TermWeighter",
    "TransportResult",
    "WassersteinRetriever",
    "build_corpus",
    "collapse_cross_lingual",
    "cost_matrix",
    "embed_distribution",
    "evaluate",
    "export_plan",
    "idf_weights",
    "levenshtein",
    "load_corpus",
    "load_embeddings",
    "mrr",
    "nbow_embed",
    "preprocess",
    "rank",
    "resolve",
    "sinkhorn_distance",
    "smoothed_idf",
    "solve_exact",
    "solve_sinkhorn",
    "tf_weights",
    "tokenize",
    "wasserstein_distance",
]
