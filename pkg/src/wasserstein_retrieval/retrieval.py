"""Cross-lingual ranking with transport distances, nBOW baseline and MRR."""

import json
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .corpus import Corpus, Document, document_frequencies
from .embeddings import OovPolicy, collapse_cross_lingual, embed_distribution, unresolved_words
from .exceptions import DataError
from .transport import SinkhornConfig, cost_matrix, solve_exact, solve_sinkhorn
from .weighting import TermWeighter

logger = logging.getLogger(__name__)

METHODS = ("wass", "entro_wass", "nbow")
DISTANCE_VALUES = ("transport", "regularized")


@dataclass(frozen=True)
class RankedList:
    query_id: str
    entries: tuple  # (doc_id, distance) pairs, ascending

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((str(d), float(x)) for d, x in self.entries))

    @property
    def doc_ids(self):
        return [d for d, _ in self.entries]

    def rank_of(self, doc_id):
        """1-based position of ``doc_id``."""
        for pos, (d, _) in enumerate(self.entries, 1):
            if d == doc_id:
                return pos
        raise KeyError(doc_id)

    def top(self, k):
        return RankedList(self.query_id, self.entries[:k])


def sort_entries(doc_ids, distances):
    """Ascending by distance, ties by doc id; NaN counts as +inf."""
    keyed = [(math.inf if math.isnan(x) else float(x), d) for d, x in zip(doc_ids, distances)]
    keyed.sort()
    return tuple((d, x) for x, d in keyed)


def read_golden(path):
    golden = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataError(f"{path}:{lineno}: expected 'query_id<TAB>target_id'")
            if parts[0] in golden:
                raise DataError(f"{path}:{lineno}: query {parts[0]!r} listed twice")
            golden[parts[0]] = parts[1]
    return golden


def mrr(lists, golden):
    """Mean over queries of ``1 / rank`` of the correct document."""
    if not lists:
        raise DataError("no ranked lists to evaluate")
    total = 0.0
    for rl in lists:
        if rl.query_id not in golden:
            raise DataError(f"no golden link for query {rl.query_id!r}")
        try:
            total += 1.0 / rl.rank_of(golden[rl.query_id])
        except KeyError:
            raise DataError(
                f"correct document {golden[rl.query_id]!r} missing from the ranking of {rl.query_id!r}"
            ) from None
    return total / len(lists)


def nbow_embed(dist, table, policy):
    """Weighted average of the embedded support vectors."""
    X, d = embed_distribution(dist, table, policy)
    return d.weights @ X


def _as_corpus(X):
    if isinstance(X, Corpus):
        return X
    docs = tuple(X)
    if not docs or not all(isinstance(d, Document) for d in docs):
        raise DataError("expected a Corpus or a non-empty sequence of Document")
    return Corpus(docs, document_frequencies(docs), docs[0].language)


class WassersteinRetriever(BaseEstimator):
    """Rank target-language documents by their distance to a query.

    ``fit`` takes the target collection: it learns the target-side idf
    table, collapses identically spelled words across the two embedding
    tables and embeds every target histogram once. ``rank`` then takes a
    query collection, whose own document frequencies weight the queries.

    Parameters
    ----------
    query_embeddings, target_embeddings : EmbeddingTable
        Dictionaries of the query and target languages in a shared space.
    method : {"wass", "entro_wass", "nbow"}
        Exact transport, entropy-regularized transport, or Euclidean
        distance between weighted mean embeddings.
    weighting : {"tf", "idf"}
    epsilon, max_iter, tol, stabilized, epsilon_scaling :
        Sinkhorn settings, used by ``entro_wass`` only.
    distance : {"transport", "regularized"}
        Whether ``entro_wass`` ranks by ``<A, P>`` or by the regularized
        objective ``<A, P> - epsilon * H(P)``.
    oov, oov_threshold, collapse, tie_break, seed :
        Out-of-vocabulary handling, see :class:`OovPolicy`.
    n_jobs : int
        Workers for distance computations within one query.
    """

    def __init__(
        self,
        query_embeddings=None,
        target_embeddings=None,
        method="entro_wass",
        weighting="idf",
        epsilon=0.1,
        max_iter=50,
        tol=1e-9,
        stabilized=True,
        epsilon_scaling=False,
        distance="transport",
        oov="levenshtein",
        oov_threshold=1,
        collapse=True,
        tie_break="seeded-random",
        seed=0,
        n_jobs=1,
    ):
        self.query_embeddings = query_embeddings
        self.target_embeddings = target_embeddings
        self.method = method
        self.weighting = weighting
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.tol = tol
        self.stabilized = stabilized
        self.epsilon_scaling = epsilon_scaling
        self.distance = distance
        self.oov = oov
        self.oov_threshold = oov_threshold
        self.collapse = collapse
        self.tie_break = tie_break
        self.seed = seed
        self.n_jobs = n_jobs

    # -- configuration -------------------------------------------------

    @property
    def policy(self):
        return OovPolicy(
            mode=self.oov,
            threshold=self.oov_threshold,
            collapse=self.collapse,
            tie_break=self.tie_break,
            seed=self.seed,
        )

    @property
    def sinkhorn_config(self):
        return SinkhornConfig(
            epsilon=self.epsilon, max_iter=self.max_iter, tolerance=self.tol, stabilized=self.stabilized,
            epsilon_scaling=self.epsilon_scaling,
        )

    def _validate_params(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.distance not in DISTANCE_VALUES:
            raise ValueError(f"unknown distance {self.distance!r}; expected one of {DISTANCE_VALUES}")
        if self.query_embeddings is None or self.target_embeddings is None:
            raise ValueError("query_embeddings and target_embeddings are required")
        if self.n_jobs is not None and self.n_jobs == 0:
            raise ValueError("n_jobs must be non-zero")
        # constructing these validates the OOV and solver settings
        _ = self.policy
        if self.method == "entro_wass":
            _ = self.sinkhorn_config

    def config(self):
        """JSON-friendly view of the parameters, without the tables."""
        params = self.get_params()
        params.pop("query_embeddings")
        params.pop("target_embeddings")
        params.pop("n_jobs")
        return params

    # -- fitting -------------------------------------------------------

    def fit(self, X, y=None):
        """Learn target statistics from the target collection ``X``."""
        self._validate_params()
        corpus = _as_corpus(X)
        q_table, t_table = self.query_embeddings, self.target_embeddings
        if self.collapse:
            q_table, t_table = collapse_cross_lingual(q_table, t_table)
        self.query_table_, self.target_table_ = q_table, t_table
        self.target_weighter_ = TermWeighter(self.weighting).fit(corpus)
        self.target_ids_ = corpus.ids
        policy = self.policy
        self.targets_ = []
        self.target_unresolved_ = 0
        for dist in self.target_weighter_.transform(corpus):
            self.target_unresolved_ += len(unresolved_words(dist.words, t_table, policy))
            try:
                X_t, d_t = embed_distribution(dist, t_table, policy)
            except DataError as exc:
                logger.warning("target %s cannot be embedded and will rank last: %s", dist.source_doc, exc)
                self.targets_.append(None)
                continue
            if self.method == "nbow":
                self.targets_.append((d_t.weights @ X_t, None))
            else:
                self.targets_.append((X_t, d_t.weights))
        return self

    # -- ranking -------------------------------------------------------

    def _distance(self, query, target):
        if target is None:
            return math.inf
        if self.method == "nbow":
            return float(np.linalg.norm(query[0] - target[0]))
        X_q, w_q = query
        X_t, w_t = target
        A = cost_matrix(X_q, X_t)
        if self.method == "wass":
            return solve_exact(w_q, w_t, A).transport_cost
        res = solve_sinkhorn(w_q, w_t, A, self.sinkhorn_config)
        return res.transport_cost if self.distance == "transport" else res.objective

    def _embed_query(self, dist):
        X_q, d_q = embed_distribution(dist, self.query_table_, self.policy)
        if self.method == "nbow":
            return (d_q.weights @ X_q, None)
        return (X_q, d_q.weights)

    def rank_distribution(self, dist):
        """Rank all fitted targets against one weighted query histogram."""
        check_is_fitted(self, "targets_")
        try:
            query = self._embed_query(dist)
        except DataError as exc:
            logger.warning("query %s cannot be embedded, every target ranks at +inf: %s", dist.source_doc, exc)
            distances = [math.inf] * len(self.targets_)
        else:
            if self.n_jobs in (None, 1) or len(self.targets_) < 2:
                distances = [self._distance(query, t) for t in self.targets_]
            else:
                distances = Parallel(n_jobs=self.n_jobs, prefer="threads")(
                    delayed(self._distance)(query, t) for t in self.targets_
                )
        return RankedList(dist.source_doc, sort_entries(self.target_ids_, distances))

    def query_distributions(self, queries):
        corpus = _as_corpus(queries)
        weighter = TermWeighter(self.weighting).fit(corpus)
        return weighter.transform(corpus)

    def rank(self, queries):
        """Ranked lists for every document of the query collection."""
        return [self.rank_distribution(d) for d in self.query_distributions(queries)]

    def predict(self, queries):
        """Best-matching target id for each query."""
        return np.array([rl.entries[0][0] for rl in self.rank(queries)], dtype=object)

    def score(self, queries, golden):
        return mrr(self.rank(queries), golden)

    def query_unresolved(self, queries):
        """Number of query support words left unresolved (summed over documents)."""
        check_is_fitted(self, "targets_")
        return sum(
            len(unresolved_words(d.words, self.query_table_, self.policy))
            for d in self.query_distributions(queries)
        )


def rank(query, targets, method="entro_wass", weighting="idf", tables=None, policy=OovPolicy(),
         cfg=SinkhornConfig(), query_corpus=None):
    """Rank every document of ``targets`` against a single query document.

    ``tables`` is ``(query_table, target_table)``; ``query_corpus`` supplies
    the query-side document frequencies (default: the query alone).
    """
    q_table, t_table = tables
    retriever = WassersteinRetriever(
        q_table, t_table, method=method, weighting=weighting,
        epsilon=cfg.epsilon, max_iter=cfg.max_iter, tol=cfg.tolerance, stabilized=cfg.stabilized,
        epsilon_scaling=cfg.epsilon_scaling,
        oov=policy.mode, oov_threshold=policy.threshold, collapse=policy.collapse,
        tie_break=policy.tie_break, seed=policy.seed,
    ).fit(targets)
    qc = _as_corpus(query_corpus if query_corpus is not None else [query])
    weighter = TermWeighter(weighting).fit(qc)
    return retriever.rank_distribution(weighter.transform([query])[0])


@dataclass
class EvaluationReport:
    config: dict
    mrr: float
    per_query: list
    unresolved: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def to_dict(self, include_timing=False):
        out = {
            "config": self.config,
            "mrr": self.mrr,
            "per_query": self.per_query,
            "unresolved": self.unresolved,
        }
        if include_timing:
            out["timing"] = self.timing
        return out

    def to_json(self, include_timing=False):
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(
            config=data["config"],
            mrr=data["mrr"],
            per_query=data["per_query"],
            unresolved=data.get("unresolved", {}),
            timing=data.get("timing", {}),
        )

    def ranks(self):
        return [r["correct_rank"] for r in self.per_query]


def evaluate(queries, targets, golden, retriever=None, top_k=10, **params):
    """Rank every query against ``targets`` and compute the MRR.

    Pass a configured (unfitted) :class:`WassersteinRetriever`, or its
    parameters as keyword arguments.
    """
    if retriever is None:
        retriever = WassersteinRetriever(**params)
    elif params:
        retriever = retriever.set_params(**params)
    t0 = time.perf_counter()
    retriever.fit(targets)
    t_fit = time.perf_counter() - t0
    lists, per_query, seconds = [], [], []
    for dist in retriever.query_distributions(queries):
        t1 = time.perf_counter()
        rl = retriever.rank_distribution(dist)
        seconds.append(time.perf_counter() - t1)
        lists.append(rl)
    score = mrr(lists, golden)
    for rl in lists:
        per_query.append(
            {
                "query_id": rl.query_id,
                "correct_id": golden[rl.query_id],
                "correct_rank": rl.rank_of(golden[rl.query_id]),
                "top_k": [[d, x] for d, x in rl.entries[:top_k]],
            }
        )
    unresolved = {
        "query_words": retriever.query_unresolved(queries),
        "target_words": retriever.target_unresolved_,
    }
    timing = {
        "fit_seconds": t_fit,
        "total_seconds": time.perf_counter() - t0,
        "mean_query_seconds": float(np.mean(seconds)),
        "max_query_seconds": float(np.max(seconds)),
    }
    return EvaluationReport(retriever.config(), score, per_query, unresolved, timing)


def summary_table(reports):
    """Plain-text grid of MRR scores: one row per system, one column per label.

    ``reports`` maps ``(system, label)`` to an :class:`EvaluationReport`.
    """
    systems = sorted({s for s, _ in reports})
    labels = sorted({lab for _, lab in reports})
    width = max([len(s) for s in systems] + [6])
    lines = [" " * width + " " + " ".join(f"{lab:>8}" for lab in labels)]
    for s in systems:
        cells = []
        for lab in labels:
            rep = reports.get((s, lab))
            cells.append(f"{rep.mrr:>8.3f}" if rep is not None else f"{'-':>8}")
        lines.append(f"{s:<{width}} " + " ".join(cells))
    return "\n".join(lines) + "\n"
