"""Corpus ingestion: tokenization, cleaning and document frequencies.

Documents are lowercased and tokenized on whitespace; stopwords,
punctuation-only tokens and any token containing a digit are removed; the
first ``MAX_TOKENS`` surviving tokens are kept and documents with fewer than
``MIN_TOKENS`` survivors are rejected.
"""

import csv
import logging
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .exceptions import DataError

logger = logging.getLogger(__name__)

MAX_TOKENS = 500
MIN_TOKENS = 6


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str
    language: str = ""

    def __post_init__(self):
        if not self.id:
            raise DataError("document id must be non-empty")


@dataclass(frozen=True)
class Document:
    """A cleaned document: ordered tokens plus their counts."""

    id: str
    language: str
    tokens: tuple
    counts: Mapping[str, int] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.counts is None:
            object.__setattr__(self, "counts", dict(Counter(self.tokens)))
        if sum(self.counts.values()) != len(self.tokens):
            raise DataError(f"document {self.id!r}: counts do not match tokens")
        if len(self.tokens) > MAX_TOKENS:
            raise DataError(f"document {self.id!r} has more than {MAX_TOKENS} tokens")

    def __len__(self):
        return len(self.tokens)


@dataclass(frozen=True)
class Rejected:
    id: str
    reason: str


@dataclass(frozen=True)
class Corpus:
    documents: tuple
    doc_freq: Mapping[str, int]
    language: str = ""
    rejected: tuple = ()

    @property
    def size(self):
        return len(self.documents)

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    @property
    def ids(self):
        return [d.id for d in self.documents]

    def get(self, doc_id):
        for d in self.documents:
            if d.id == doc_id:
                return d
        raise KeyError(doc_id)


def _is_punct(ch):
    return unicodedata.category(ch).startswith("P")


def _strip_punct(token):
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text):
    """Split on unicode whitespace and strip surrounding punctuation.

    Tokens that consist only of punctuation vanish.

    >>> tokenize("The cat sits.")
    ['The', 'cat', 'sits']
    """
    out = []
    for raw in text.split():
        tok = _strip_punct(raw)
        if tok:
            out.append(tok)
    return out


def _keep(token, stopwords):
    if token in stopwords:
        return False
    if any(ch.isdigit() for ch in token):
        return False
    return True


def clean_tokens(text, stopwords=frozenset()):
    """Lowercase, tokenize, filter and truncate; no length check."""
    kept = [t for t in tokenize(text.lower()) if _keep(t, stopwords)]
    return kept[:MAX_TOKENS]


def preprocess(raw, stopwords=frozenset()):
    """Turn a :class:`RawDocument` into a :class:`Document` or :class:`Rejected`."""
    tokens = clean_tokens(raw.text, stopwords)
    if len(tokens) < MIN_TOKENS:
        return Rejected(raw.id, f"too-short ({len(tokens)} < {MIN_TOKENS} tokens)")
    return Document(raw.id, raw.language, tokens)


def document_frequencies(documents: Iterable[Document]):
    df = Counter()
    for doc in documents:
        df.update(doc.counts.keys())
    return dict(df)


def build_corpus(raws: Sequence[RawDocument], stopwords=frozenset(), language=None):
    """Preprocess ``raws`` and compute document frequencies over the survivors."""
    docs, rejected = [], []
    seen = set()
    for raw in raws:
        if raw.id in seen:
            raise DataError(f"duplicate document id {raw.id!r}")
        seen.add(raw.id)
        out = preprocess(raw, stopwords)
        if isinstance(out, Rejected):
            logger.debug("rejected %s: %s", out.id, out.reason)
            rejected.append(out)
        else:
            docs.append(out)
    if not docs:
        raise DataError(f"no documents survived preprocessing ({len(rejected)} rejected)")
    if language is None:
        language = docs[0].language
    return Corpus(tuple(docs), document_frequencies(docs), language, tuple(rejected))


def read_corpus(path, language=""):
    """Read a UTF-8 ``id<TAB>text`` file into raw documents."""
    raws, seen = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            doc_id, sep, text = line.partition("\t")
            if not sep or not doc_id:
                raise DataError(f"{path}:{lineno}: expected 'id<TAB>text'")
            if doc_id in seen:
                raise DataError(f"{path}:{lineno}: duplicate document id {doc_id!r}")
            seen.add(doc_id)
            raws.append(RawDocument(doc_id, text, language))
    return raws


def read_stopwords(path):
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


def write_corpus(raws, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for raw in raws:
            if "\t" in raw.text or "\n" in raw.text:
                raise DataError(f"document {raw.id!r}: text contains a tab or newline")
            fh.write(f"{raw.id}\t{raw.text}\n")


def write_rejections(rejected, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        for r in rejected:
            writer.writerow([r.id, r.reason])


def load_corpus(path, language="", stopwords=frozenset()):
    return build_corpus(read_corpus(Path(path), language), stopwords, language)
