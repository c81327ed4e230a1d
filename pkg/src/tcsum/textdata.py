"""Tokenization, embedding tables and the JSON-lines corpus formats.

Embedding file (UTF-8 text)::

    <count> <dim>
    token v1 v2 ... v_dim

Classification corpus, one JSON object per line::

    {"id": str, "category": str, "text": str}

Cluster corpus, one JSON object per line::

    {"id": str, "category": str | null, "documents": [[sentence, ...], ...],
     "references": [str, ...], "budget": {"unit": "words" | "bytes", "value": int}}
"""

from __future__ import annotations

import hashlib
import json
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .numerics import DTYPE

ABBREVIATIONS = ("u.s.", "mr.", "dr.", "st.")
TERMINALS = frozenset(".!?")

_TOKEN_RE = re.compile(
    r"(?<!\w)(?:u\.s\.|mr\.|dr\.|st\.)"  # abbreviations never end a sentence
    r"|\w+(?:['’.]\w+)*"
    r"|[^\w\s]"
)


@dataclass(frozen=True)
class SentenceTokens:
    tokens: tuple[str, ...]
    source_text: str

    def __len__(self) -> int:
        return len(self.tokens)


def tokenize_words(text: str) -> list[str]:
    """Lowercased word and punctuation tokens, no sentence splitting."""
    return _TOKEN_RE.findall(text.lower())


def tokenize(text: str) -> list[SentenceTokens]:
    """Split ``text`` into sentences of lowercased tokens.

    A sentence ends at a run of ``.``/``!``/``?`` tokens that is followed by
    whitespace or the end of the text. Abbreviations in
    :data:`ABBREVIATIONS` are single tokens and never end a sentence.
    """
    lowered = text.lower()
    matches = list(_TOKEN_RE.finditer(lowered))
    sentences: list[SentenceTokens] = []
    start = 0
    for i, m in enumerate(matches):
        if m.group() not in TERMINALS:
            continue
        nxt = matches[i + 1] if i + 1 < len(matches) else None
        if nxt is not None and nxt.group() in TERMINALS:
            continue
        end = m.end()
        if end < len(lowered) and not lowered[end].isspace():
            continue
        chunk = matches[start:i + 1]
        sentences.append(_sentence(chunk, text))
        start = i + 1
    if start < len(matches):
        sentences.append(_sentence(matches[start:], text))
    return [s for s in sentences if s.tokens]


def _sentence(chunk: Sequence[re.Match], text: str) -> SentenceTokens:
    tokens = tuple(m.group() for m in chunk)
    source = text[chunk[0].start():chunk[-1].end()] if chunk else ""
    return SentenceTokens(tokens, source)


def sentence_from_text(text: str) -> SentenceTokens:
    """Treat ``text`` as exactly one sentence (used by the cluster reader)."""
    return SentenceTokens(tuple(tokenize_words(text)), text)


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------

def oov_seed(token: str) -> int:
    """64-bit seed for an out-of-vocabulary token: first 8 bytes of BLAKE2b, big endian."""
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "big")


def oov_vector(token: str, dim: int, scale: float = 0.1) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(oov_seed(token)))
    return rng.uniform(-scale, scale, size=dim)


class EmbeddingTable:
    """Frozen token -> vector map of fixed dimension with a total lookup.

    Unknown tokens get a deterministic vector seeded by :func:`oov_seed`, so
    the same token always maps to the same vector across runs and processes.
    """

    def __init__(self, tokens: Sequence[str], vectors: np.ndarray):
        vectors = np.array(vectors, dtype=DTYPE)
        if vectors.ndim != 2 or vectors.shape[0] != len(tokens):
            raise DataError("vectors must be a (len(tokens), dim) matrix")
        self.dim = int(vectors.shape[1])
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise DataError("duplicate tokens in embedding table")
        vectors.setflags(write=False)
        self.vectors = vectors
        self._oov: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def lookup(self, token: str) -> np.ndarray:
        i = self.index.get(token)
        if i is not None:
            return self.vectors[i]
        vec = self._oov.get(token)
        if vec is None:
            vec = oov_vector(token, self.dim)
            vec.setflags(write=False)
            self._oov[token] = vec
        return vec

    def rows(self, tokens: Sequence[str]) -> np.ndarray:
        """Stack the vectors of ``tokens`` into an ``(len(tokens), dim)`` array."""
        if not tokens:
            return np.zeros((0, self.dim), dtype=DTYPE)
        idx = [self.index.get(t, -1) for t in tokens]
        if min(idx) >= 0:
            return self.vectors[idx]
        return np.stack([self.lookup(t) for t in tokens])

    def __eq__(self, other) -> bool:
        return (isinstance(other, EmbeddingTable) and self.tokens == other.tokens
                and np.array_equal(self.vectors, other.vectors))


def embed_token(table: EmbeddingTable, token: str) -> np.ndarray:
    return table.lookup(token)


def load_embeddings(path) -> EmbeddingTable:
    """Read a word2vec-style text embedding file.

    Duplicate tokens keep the last row and emit a warning. Format violations
    raise :class:`DataError` naming the offending line number.
    """
    path = Path(path)
    order: dict[str, int] = {}
    rows: list[list[float]] = []
    with path.open(encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise DataError(f"{path}: line 1: expected header 'count dim', got {header.strip()!r}")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataError(f"{path}: line 1: non-integer header {header.strip()!r}") from None
        if dim <= 0 or count < 0:
            raise DataError(f"{path}: line 1: invalid header values count={count} dim={dim}")
        n_rows = 0
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.rstrip().split(" ")
            token, values = fields[0], fields[1:]
            if not token:
                raise DataError(f"{path}: line {lineno}: missing token")
            if len(values) != dim:
                raise DataError(f"{path}: line {lineno}: expected {dim} values, got {len(values)}")
            try:
                vec = [float(v) for v in values]
            except ValueError:
                raise DataError(f"{path}: line {lineno}: non-numeric value") from None
            if not all(np.isfinite(vec)):
                raise DataError(f"{path}: line {lineno}: non-finite value")
            n_rows += 1
            if token in order:
                warnings.warn(f"{path}: line {lineno}: duplicate token {token!r}, keeping last",
                              stacklevel=2)
                rows[order[token]] = vec
            else:
                order[token] = len(rows)
                rows.append(vec)
    if n_rows != count:
        warnings.warn(f"{path}: header declares {count} rows, found {n_rows}", stacklevel=2)
    vectors = np.array(rows, dtype=DTYPE).reshape(len(rows), dim)
    return EmbeddingTable(list(order), vectors)


def save_embeddings(table: EmbeddingTable, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {table.dim}\n")
        for token, vec in zip(table.tokens, table.vectors):
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")


# ---------------------------------------------------------------------------
# Corpora
# ---------------------------------------------------------------------------

BUDGET_UNITS = ("words", "bytes")


@dataclass(frozen=True)
class Budget:
    unit: str
    value: int

    def __post_init__(self):
        if self.unit not in BUDGET_UNITS:
            raise DataError(f"budget unit must be one of {BUDGET_UNITS}, got {self.unit!r}")
        if isinstance(self.value, bool) or not isinstance(self.value, int) or self.value <= 0:
            raise DataError(f"budget value must be a positive integer, got {self.value!r}")


@dataclass(frozen=True)
class LabeledDoc:
    id: str
    category: str
    sentences: tuple[SentenceTokens, ...]

    @property
    def text(self) -> str:
        return " ".join(s.source_text for s in self.sentences)


@dataclass(frozen=True)
class ClusterRecord:
    id: str
    documents: tuple[tuple[SentenceTokens, ...], ...]
    references: tuple[str, ...]
    category: str | None = None
    budget: Budget = field(default_factory=lambda: Budget("words", 100))

    def __post_init__(self):
        if not self.documents:
            raise DataError(f"cluster {self.id!r}: at least one document is required")

    def sentences(self) -> list[SentenceTokens]:
        """Flatten to a single document: documents in order, sentences in order."""
        return [s for doc in self.documents for s in doc]


_CLS_FIELDS = {"id", "category", "text"}
_CLUSTER_FIELDS = {"id", "category", "documents", "references", "budget"}
_CLUSTER_REQUIRED = {"id", "documents", "references", "budget"}


def _json_records(path) -> Iterable[tuple[int, dict]]:
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise DataError(f"{path}: line {lineno}: expected a JSON object")
            yield lineno, obj


def _check_fields(obj: dict, allowed: set, required: set, where: str) -> None:
    rid = obj.get("id", "?")
    unknown = set(obj) - allowed
    if unknown:
        raise DataError(f"{where}: record {rid!r}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise DataError(f"{where}: record {rid!r}: missing field(s) {sorted(missing)}")
    if not isinstance(obj["id"], str):
        raise DataError(f"{where}: record id must be a string")


def read_classification_corpus(path, categories: Sequence[str] | None = None
                               ) -> tuple[list[LabeledDoc], list[str]]:
    """Read labeled documents and the category vocabulary in first-seen order.

    If ``categories`` is given, the vocabulary is fixed to it and any record
    outside it is rejected.
    """
    docs: list[LabeledDoc] = []
    vocab: list[str] = list(categories) if categories is not None else []
    seen = set(vocab)
    for lineno, obj in _json_records(path):
        where = f"{path}: line {lineno}"
        _check_fields(obj, _CLS_FIELDS, _CLS_FIELDS, where)
        cat, text = obj["category"], obj["text"]
        if not isinstance(cat, str) or not isinstance(text, str):
            raise DataError(f"{where}: record {obj['id']!r}: category and text must be strings")
        if cat not in seen:
            if categories is not None:
                raise DataError(f"{where}: record {obj['id']!r}: category {cat!r} not in {list(categories)}")
            seen.add(cat)
            vocab.append(cat)
        docs.append(LabeledDoc(obj["id"], cat, tuple(tokenize(text))))
    return docs, vocab


def write_classification_corpus(docs: Iterable[LabeledDoc], path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps({"id": d.id, "category": d.category, "text": d.text},
                                ensure_ascii=False) + "\n")


def read_cluster_corpus(path, categories: Sequence[str] | None = None) -> list[ClusterRecord]:
    """Read summarization clusters.

    Each sentence string becomes one :class:`SentenceTokens`; strings that
    tokenize to nothing are dropped. Missing references are allowed here and
    rejected by the trainer.
    """
    allowed = set(categories) if categories is not None else None
    out: list[ClusterRecord] = []
    for lineno, obj in _json_records(path):
        where = f"{path}: line {lineno}"
        _check_fields(obj, _CLUSTER_FIELDS, _CLUSTER_REQUIRED, where)
        rid = obj["id"]
        cat = obj.get("category")
        if cat is not None and not isinstance(cat, str):
            raise DataError(f"{where}: record {rid!r}: category must be a string or null")
        if cat is not None and allowed is not None and cat not in allowed:
            raise DataError(f"{where}: record {rid!r}: category {cat!r} not in {list(categories)}")
        documents = obj["documents"]
        if not isinstance(documents, list) or not all(
                isinstance(d, list) and all(isinstance(s, str) for s in d) for d in documents):
            raise DataError(f"{where}: record {rid!r}: documents must be a list of lists of strings")
        refs = obj["references"]
        if not isinstance(refs, list) or not all(isinstance(r, str) for r in refs):
            raise DataError(f"{where}: record {rid!r}: references must be a list of strings")
        b = obj["budget"]
        if not isinstance(b, dict) or set(b) != {"unit", "value"}:
            raise DataError(f"{where}: record {rid!r}: budget must be {{'unit', 'value'}}")
        try:
            budget = Budget(b["unit"], b["value"])
        except DataError as exc:
            raise DataError(f"{where}: record {rid!r}: {exc}") from None
        docs = tuple(
            tuple(s for s in (sentence_from_text(t) for t in d) if s.tokens) for d in documents
        )
        docs = tuple(d for d in docs if d)
        if not docs:
            raise DataError(f"{where}: record {rid!r}: no non-empty documents")
        out.append(ClusterRecord(rid, docs, tuple(refs), cat, budget))
    return out


def write_cluster_corpus(clusters: Iterable[ClusterRecord], path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for c in clusters:
            obj = {
                "id": c.id,
                "category": c.category,
                "documents": [[s.source_text for s in d] for d in c.documents],
                "references": list(c.references),
                "budget": {"unit": c.budget.unit, "value": c.budget.value},
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
