"""Synthetic bilingual corpora with known answers.

Every word is the surface form of a *concept*. Concept centres are
orthonormal directions scaled so that distinct concepts lie at distance 1;
the words of the two languages sit within ``noise`` of their concept's
centre. A query and its translation therefore have identical concept
histograms and a transport cost of at most ``2 * noise``, while any other
pair must move mass between concepts.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Document, RawDocument, write_corpus
from .embeddings import EmbeddingTable, levenshtein, save_embeddings

_CONSONANTS = "bcdfghjklmnpqrtvwxz"
_VOWELS = "aeiou"


@dataclass
class BilingualDataset:
    queries: list
    targets: list
    golden: dict
    query_table: EmbeddingTable
    target_table: EmbeddingTable
    concepts: list
    plural_words: set = field(default_factory=set)

    def reversed_golden(self):
        return {t: q for q, t in self.golden.items()}

    def write(self, directory):
        """Write corpora, embeddings and golden links as files; returns their paths."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = {
            "queries": d / "queries.tsv",
            "targets": d / "targets.tsv",
            "query_embeddings": d / "query.vec",
            "target_embeddings": d / "target.vec",
            "golden": d / "golden.tsv",
            "golden_reversed": d / "golden_reversed.tsv",
        }
        write_corpus(self.queries, paths["queries"])
        write_corpus(self.targets, paths["targets"])
        save_embeddings(self.query_table, paths["query_embeddings"])
        save_embeddings(self.target_table, paths["target_embeddings"])
        for key, links in (("golden", self.golden), ("golden_reversed", self.reversed_golden())):
            with open(paths[key], "w", encoding="utf-8") as fh:
                for q, t in links.items():
                    fh.write(f"{q}\t{t}\n")
        return paths


def _pseudo_words(rng, count, taken):
    """Distinct lowercase pseudo-words, pairwise at edit distance >= 3, not ending in 's'."""
    words = []
    while len(words) < count:
        length = int(rng.integers(3, 5))
        w = "".join(rng.choice(list(_CONSONANTS)) + rng.choice(list(_VOWELS)) for _ in range(length))
        if w in taken or any(levenshtein(w, o) < 3 for o in taken):
            continue
        taken.append(w)
        words.append(w)
    return words


def _centres(n_concepts, rng):
    q, _ = np.linalg.qr(rng.standard_normal((n_concepts, n_concepts)))
    return q / np.sqrt(2.0)


def _jitter(rng, dim, noise):
    d = rng.standard_normal(dim)
    return d / np.linalg.norm(d) * noise * rng.uniform(0.5, 1.0)


def make_bilingual_corpus(
    n_pairs=20,
    n_private=3,
    n_shared=20,
    shared_per_doc=(4, 8),
    n_extra=40,
    noise=0.02,
    plural_rate=0.0,
    query_language="en",
    target_language="fr",
    seed=0,
):
    """Generate comparable document pairs plus two embedding tables.

    Each pair owns ``n_private`` concepts and draws distractors from a pool of
    ``n_shared`` concepts used across documents. With ``plural_rate > 0`` that
    fraction of query-side concept words occurs in the query documents with
    an appended ``s`` while the query table keeps only the singular form.
    """
    rng = np.random.default_rng(seed)
    n_concepts = n_pairs * n_private + n_shared
    taken = []
    src_words = _pseudo_words(rng, n_concepts + n_extra, taken)
    tgt_words = _pseudo_words(rng, n_concepts + n_extra, taken)
    centres = _centres(n_concepts + n_extra, rng)
    dim = centres.shape[1]
    src_vecs = np.array([centres[k] + _jitter(rng, dim, noise) for k in range(len(src_words))])
    tgt_vecs = np.array([centres[k] + _jitter(rng, dim, noise) for k in range(len(tgt_words))])
    query_table = EmbeddingTable(src_words, src_vecs, query_language)
    target_table = EmbeddingTable(tgt_words, tgt_vecs, target_language)

    n_plural = int(round(plural_rate * n_concepts))
    plural = set(rng.choice(n_concepts, size=n_plural, replace=False).tolist()) if n_plural else set()
    surface = [w + "s" if k in plural else w for k, w in enumerate(src_words[:n_concepts])]

    queries, targets, golden, concept_docs = [], [], {}, []
    shared_ids = np.arange(n_pairs * n_private, n_concepts)
    lo, hi = shared_per_doc
    for i in range(n_pairs):
        own = list(range(i * n_private, (i + 1) * n_private))
        k = int(rng.integers(lo, hi + 1))
        distractors = rng.choice(shared_ids, size=min(k, len(shared_ids)), replace=False).tolist()
        bag = []
        for c in own + distractors:
            bag.extend([c] * int(rng.integers(1, 3)))
        bag = [bag[j] for j in rng.permutation(len(bag))]
        qid, tid = f"{query_language}-{i:03d}", f"{target_language}-{i:03d}"
        queries.append(RawDocument(qid, " ".join(surface[c] for c in bag), query_language))
        targets.append(RawDocument(tid, " ".join(tgt_words[c] for c in bag), target_language))
        golden[qid] = tid
        concept_docs.append(bag)
    return BilingualDataset(
        queries=queries,
        targets=targets,
        golden=golden,
        query_table=query_table,
        target_table=target_table,
        concepts=concept_docs,
        plural_words={src_words[k] for k in plural},
    )


# "the cat sits on the mat" / "le chat est assis sur le tapis" after stopword removal
TRIPLET_SOURCE = ("cat", "sits", "mat")
TRIPLET_TARGET = ("chat", "assis", "tapis")
TRIPLET_OFFSETS = (0.02, 0.03, 0.04)


def translation_triplet():
    """Two three-word documents whose words are nearest their translations.

    Concept ``k`` is centred at ``e_k / sqrt(2)`` in four dimensions; the
    source word sits ``+offset`` and the target word ``-offset`` along the
    fourth axis, so translation pairs are ``2 * offset`` apart and all other
    pairs about 1 apart.
    """
    dim = 4
    src, tgt = [], []
    for k, off in enumerate(TRIPLET_OFFSETS):
        centre = np.zeros(dim)
        centre[k] = 1 / np.sqrt(2.0)
        shift = np.zeros(dim)
        shift[3] = off
        src.append(centre + shift)
        tgt.append(centre - shift)
    table_s = EmbeddingTable(TRIPLET_SOURCE, np.array(src), "en")
    table_t = EmbeddingTable(TRIPLET_TARGET, np.array(tgt), "fr")
    doc_s = Document("en-cat", "en", TRIPLET_SOURCE)
    doc_t = Document("fr-chat", "fr", TRIPLET_TARGET)
    return doc_s, doc_t, table_s, table_t


__all__ = [
    "BilingualDataset",
    "make_bilingual_corpus",
    "translation_triplet",
    "TRIPLET_SOURCE",
    "TRIPLET_TARGET",
    "TRIPLET_OFFSETS",
]
