"""Embedding dictionaries and out-of-vocabulary handling.

Words missing from a dictionary can be mapped onto an in-vocabulary word
within a small Levenshtein distance, and words spelled identically in two
languages can share the vector of the larger dictionary.
"""

import logging
import random
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from ._validation import check_vectors
from .exceptions import DataError
from .weighting import DiscreteDistribution, normalized

logger = logging.getLogger(__name__)

OOV_MODES = ("off", "levenshtein")
TIE_BREAKS = ("lexicographic", "seeded-random")


class EmbeddingTable:
    """Word to vector mapping in a space shared across languages.

    Vectors are stored row-wise in ``vectors``; ``index`` maps a word to
    its row. Tables are treated as immutable once built.
    """

    def __init__(self, words, vectors, language=""):
        vectors = check_vectors(vectors, "embedding vectors")
        words = list(words)
        if len(words) != vectors.shape[0]:
            raise DataError(f"{len(words)} words for {vectors.shape[0]} vectors")
        index = {}
        for i, w in enumerate(words):
            if w in index:
                raise DataError(f"duplicate word {w!r} in embedding table")
            index[w] = i
        vectors = vectors.copy()
        vectors.setflags(write=False)
        self.language = language
        self.words = tuple(words)
        self.vectors = vectors
        self.index = index
        self._by_length = None
        self._oov_cache = {}

    @property
    def dim(self):
        return self.vectors.shape[1]

    @property
    def size(self):
        return len(self.words)

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __getitem__(self, word):
        return self.vectors[self.index[word]]

    def __repr__(self):
        return f"EmbeddingTable(language={self.language!r}, size={self.size}, dim={self.dim})"

    def words_of_length(self, lo, hi):
        """In-vocabulary words whose length lies in ``[lo, hi]``."""
        if self._by_length is None:
            buckets = defaultdict(list)
            for w in self.words:
                buckets[len(w)].append(w)
            self._by_length = dict(buckets)
        for length in range(max(lo, 0), hi + 1):
            yield from self._by_length.get(length, ())

    def replace(self, overrides):
        """Copy of the table with some vectors replaced; size is unchanged."""
        vectors = np.array(self.vectors)
        for word, vec in overrides.items():
            vectors[self.index[word]] = vec
        return EmbeddingTable(self.words, vectors, self.language)


@dataclass(frozen=True)
class OovPolicy:
    """How out-of-vocabulary words are resolved.

    ``threshold`` is inclusive: with the default ``threshold=1`` a plural
    formed by one appended letter resolves to its singular.
    """

    mode: str = "levenshtein"
    threshold: int = 1
    collapse: bool = True
    tie_break: str = "seeded-random"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in OOV_MODES:
            raise ValueError(f"unknown OOV mode {self.mode!r}; expected one of {OOV_MODES}")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie break {self.tie_break!r}; expected one of {TIE_BREAKS}")
        if int(self.threshold) != self.threshold or self.threshold < 0:
            raise ValueError(f"threshold must be a non-negative integer, got {self.threshold!r}")


OFF = OovPolicy(mode="off", collapse=False)


def load_embeddings(path, language=""):
    """Parse a text embedding file (``count dim`` header, then ``word v1 .. vD``).

    Duplicate words keep their first occurrence.
    """
    words, rows, seen = [], [], set()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        try:
            if len(parts) != 2:
                raise ValueError
            count, dim = int(parts[0]), int(parts[1])
            if count < 0 or dim <= 0:
                raise ValueError
        except ValueError:
            raise DataError(f"{path}:1: malformed header {header.strip()!r}, expected 'count dim'") from None
        n_lines = 0
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\r\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            n_lines += 1
            if len(parts) != dim + 1:
                raise DataError(f"{path}:{lineno}: expected {dim} components, found {len(parts) - 1}")
            try:
                vec = [float(x) for x in parts[1:]]
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric component") from None
            word = parts[0]
            if word in seen:
                continue
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if n_lines != count:
        raise DataError(f"{path}: header announces {count} rows, found {n_lines}")
    if not words:
        raise DataError(f"{path}: no embeddings")
    return EmbeddingTable(words, np.asarray(rows, dtype=np.float64), language)


def save_embeddings(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{table.size} {table.dim}\n")
        for word, vec in zip(table.words, table.vectors):
            fh.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def levenshtein(a, b):
    """Unit-cost edit distance between two strings."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def within_distance(a, b, limit):
    """True when ``levenshtein(a, b) <= limit``, with early exit."""
    if abs(len(a) - len(b)) > limit:
        return False
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a) <= limit
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        if min(current) > limit:
            return False
        previous = current
    return previous[-1] <= limit


def oov_candidates(word, table, threshold):
    t = int(threshold)
    return [v for v in table.words_of_length(len(word) - t, len(word) + t) if within_distance(word, v, t)]


def resolve_word(word, table, policy):
    """The in-vocabulary word standing in for ``word``, or None if unresolved."""
    if word in table.index:
        return word
    if policy.mode == "off":
        return None
    key = (word, policy.threshold, policy.tie_break, policy.seed)
    try:
        return table._oov_cache[key]
    except KeyError:
        pass
    candidates = sorted(oov_candidates(word, table, policy.threshold))
    if not candidates:
        choice = None
    elif policy.tie_break == "lexicographic":
        choice = candidates[0]
    else:
        # seeded per word so the choice does not depend on call order
        choice = random.Random(f"{policy.seed}\x00{word}").choice(candidates)
    table._oov_cache[key] = choice
    return choice


def resolve(word, table, policy):
    """Vector for ``word`` under ``policy``, or None when unresolved."""
    hit = resolve_word(word, table, policy)
    return None if hit is None else table[hit]


def collapse_cross_lingual(table_a, table_b):
    """Share vectors of identically spelled words across two tables.

    For every surface form present in both tables, the smaller table takes
    the vector of the larger one. On equal sizes ``table_a`` is the donor.
    """
    if table_a.dim != table_b.dim:
        raise DataError(f"embedding dimensions differ: {table_a.dim} != {table_b.dim}")
    if table_b.size > table_a.size:
        donor, receiver = table_b, table_a
    else:
        donor, receiver = table_a, table_b
    shared = [w for w in receiver.words if w in donor.index]
    if not shared:
        return table_a, table_b
    logger.info("collapsing %d shared surface forms into the %r table", len(shared), receiver.language)
    updated = receiver.replace({w: donor[w] for w in shared})
    if receiver is table_a:
        return updated, table_b
    return table_a, updated


def embed_distribution(dist: DiscreteDistribution, table, policy):
    """Resolve the support of ``dist`` and drop unresolved words.

    Returns ``(vectors, distribution)`` with one row per surviving word.
    Two support words resolving to the same vocabulary entry keep separate
    rows.
    """
    words, mass, rows = [], [], []
    for word, w in zip(dist.words, dist.weights):
        hit = resolve_word(word, table, policy)
        if hit is None:
            continue
        words.append(word)
        mass.append(w)
        rows.append(table.index[hit])
    if not words:
        raise DataError(f"no word of {dist.source_doc!r} could be embedded")
    if len(words) == len(dist.words):
        return table.vectors[rows], dist
    return table.vectors[rows], normalized(words, mass, dist.source_doc)


def unresolved_words(words, table, policy):
    return [w for w in words if resolve_word(w, table, policy) is None]
