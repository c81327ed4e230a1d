"""CNN sentence encoder with max-over-time pooling and mean-pooled documents.

A sentence of ``N`` words is turned into ``max(1, N - h + 1)`` windows of
``h`` concatenated word vectors (zero vectors pad the right end when
``N < h``). Each window is mapped through ``tanh(W_alpha @ window)`` with no
bias, and every feature keeps its maximum over windows; ties go to the
lowest window index. A document is the mean of its sentence vectors.

All functions are batched: a batch is a list of documents, each a list of
token sequences. The forward pass returns a :class:`EncoderCache` that the
backward pass consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numerics import DTYPE, init_uniform
from .textdata import EmbeddingTable


@dataclass
class EncoderParams:
    w_alpha: np.ndarray  # (m, h*k)
    h: int = 2

    def __post_init__(self):
        self.w_alpha = np.asarray(self.w_alpha, dtype=DTYPE)
        if self.w_alpha.ndim != 2 or self.h < 1 or self.w_alpha.shape[1] % self.h:
            raise ValueError(f"w_alpha of shape {self.w_alpha.shape} incompatible with h={self.h}")

    @property
    def m(self) -> int:
        return self.w_alpha.shape[0]

    @property
    def k(self) -> int:
        return self.w_alpha.shape[1] // self.h


def init_encoder(k: int, m: int, h: int, rng: np.random.Generator, scale: float = 0.1) -> EncoderParams:
    return EncoderParams(init_uniform((m, h * k), scale, rng), h)


@dataclass
class Windows:
    """Padded window tensor for a flat list of sentences."""

    x: np.ndarray      # (S, W, h*k)
    mask: np.ndarray   # (S, W) True where the window exists

    @property
    def n_sentences(self) -> int:
        return self.x.shape[0]


def build_windows(sentences: Sequence[Sequence[str]], table: EmbeddingTable, h: int) -> Windows:
    if not sentences:
        raise ValueError("no sentences to encode")
    k = table.dim
    counts = []
    for toks in sentences:
        if len(toks) == 0:
            raise ValueError("cannot encode an empty sentence")
        counts.append(max(1, len(toks) - h + 1))
    w_max = max(counts)
    x = np.zeros((len(sentences), w_max, h * k), dtype=DTYPE)
    mask = np.zeros((len(sentences), w_max), dtype=bool)
    for s, (toks, n_win) in enumerate(zip(sentences, counts)):
        emb = np.zeros((n_win + h - 1, k), dtype=DTYPE)
        emb[:len(toks)] = table.rows(list(toks))
        for j in range(h):
            x[s, :n_win, j * k:(j + 1) * k] = emb[j:j + n_win]
        mask[s, :n_win] = True
    return Windows(x, mask)


def concat_windows(parts: Sequence[Windows]) -> Windows:
    w_max = max(p.x.shape[1] for p in parts)
    xs, ms = [], []
    for p in parts:
        pad = w_max - p.x.shape[1]
        xs.append(np.pad(p.x, ((0, 0), (0, pad), (0, 0))) if pad else p.x)
        ms.append(np.pad(p.mask, ((0, 0), (0, pad))) if pad else p.mask)
    return Windows(np.concatenate(xs), np.concatenate(ms))


@dataclass
class EncoderCache:
    windows: Windows
    argmax: np.ndarray       # (S, m) winning window per feature
    v_sent: np.ndarray       # (S, m) pooled sentence vectors
    doc_index: np.ndarray    # (S,) document of each sentence
    doc_sizes: np.ndarray    # (B,)


def encode_sentences(windows: Windows, params: EncoderParams) -> tuple[np.ndarray, np.ndarray]:
    """Pooled sentence vectors ``(S, m)`` and their argmax window indices."""
    if windows.x.shape[2] != params.w_alpha.shape[1]:
        raise ValueError(f"window width {windows.x.shape[2]} != filter width {params.w_alpha.shape[1]}")
    g = np.tanh(windows.x @ params.w_alpha.T)           # (S, W, m)
    g = np.where(windows.mask[:, :, None], g, -np.inf)
    argmax = g.argmax(axis=1)                            # first max wins ties
    v = np.take_along_axis(g, argmax[:, None, :], axis=1)[:, 0, :]
    return v, argmax


def encode_documents(docs: Sequence[Sequence[Sequence[str]]] | None, table: EmbeddingTable | None,
                     params: EncoderParams, windows: Windows | None = None,
                     doc_sizes: Sequence[int] | None = None
                     ) -> tuple[np.ndarray, EncoderCache]:
    """Encode a batch of documents.

    Either pass ``docs`` + ``table`` or prebuilt ``windows`` + ``doc_sizes``.
    Returns document vectors ``(B, m)`` and the cache for backprop; sentence
    vectors are ``cache.v_sent``.
    """
    if windows is None:
        if any(len(d) == 0 for d in docs):
            raise ValueError("cannot encode an empty document")
        flat = [s for d in docs for s in d]
        doc_sizes = [len(d) for d in docs]
        windows = build_windows(flat, table, params.h)
    sizes = np.asarray(doc_sizes, dtype=np.int64)
    if sizes.sum() != windows.n_sentences or (sizes <= 0).any():
        raise ValueError("document sizes do not match the sentence count")
    v_sent, argmax = encode_sentences(windows, params)
    doc_index = np.repeat(np.arange(len(sizes)), sizes)
    v_doc = np.zeros((len(sizes), params.m), dtype=DTYPE)
    np.add.at(v_doc, doc_index, v_sent)
    v_doc /= sizes[:, None]
    return v_doc, EncoderCache(windows, argmax, v_sent, doc_index, sizes)


def encoder_backward(cache: EncoderCache, grad_doc: np.ndarray | None = None,
                     grad_sent: np.ndarray | None = None) -> np.ndarray:
    """Gradient wrt ``W_alpha`` given upstream gradients on documents and/or sentences.

    Only the winning window of each feature receives gradient; ``tanh'`` is
    ``1 - g**2``; a document spreads ``1/|D|`` of its gradient to each sentence.
    """
    s_count, m = cache.v_sent.shape
    d_sent = np.zeros((s_count, m), dtype=DTYPE)
    if grad_doc is not None:
        grad_doc = np.asarray(grad_doc, dtype=DTYPE)
        if grad_doc.shape != (len(cache.doc_sizes), m):
            raise ValueError(f"grad_doc shape {grad_doc.shape} does not match cache "
                             f"({len(cache.doc_sizes)}, {m})")
        d_sent += grad_doc[cache.doc_index] / cache.doc_sizes[cache.doc_index, None]
    if grad_sent is not None:
        grad_sent = np.asarray(grad_sent, dtype=DTYPE)
        if grad_sent.shape != (s_count, m):
            raise ValueError(f"grad_sent shape {grad_sent.shape} does not match cache {(s_count, m)}")
        d_sent += grad_sent
    d_pre = d_sent * (1.0 - cache.v_sent ** 2)          # (S, m)
    x = cache.windows.x
    grad = np.zeros((m, x.shape[2]), dtype=DTYPE)
    for w in range(x.shape[1]):
        sel = np.where(cache.argmax == w, d_pre, 0.0)    # (S, m)
        if sel.any():
            grad += sel.T @ x[:, w, :]
    return grad


# Single-item conveniences --------------------------------------------------

@dataclass
class SentenceEncoding:
    v_s: np.ndarray
    argmax_index: np.ndarray


@dataclass
class DocEncoding:
    v_d: np.ndarray
    sentence_encodings: list[SentenceEncoding]


def encode_sentence(tokens: Sequence[str], table: EmbeddingTable, params: EncoderParams) -> SentenceEncoding:
    tokens = getattr(tokens, "tokens", tokens)
    if len(tokens) == 0:
        raise ValueError("cannot encode an empty sentence")
    v, idx = encode_sentences(build_windows([tokens], table, params.h), params)
    return SentenceEncoding(v[0], idx[0])


def encode_document(sentences: Sequence[SentenceEncoding]) -> DocEncoding:
    if not sentences:
        raise ValueError("cannot encode an empty document")
    v = np.mean(np.stack([s.v_s for s in sentences]), axis=0)
    return DocEncoding(v, list(sentences))
