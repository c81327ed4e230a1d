"""Softmax category head over document vectors and its mini-batch trainer."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .encoder import EncoderParams, encode_documents, encoder_backward, init_encoder
from .errors import DataError
from .numerics import DTYPE, AdaGradState, adagrad_step, init_uniform, make_rng, softmax
from .textdata import EmbeddingTable, LabeledDoc

log = logging.getLogger(__name__)


@dataclass
class ClassifierParams:
    w_beta: np.ndarray        # (|C|, m)
    categories: list[str]

    def __post_init__(self):
        self.w_beta = np.asarray(self.w_beta, dtype=DTYPE)
        if len(self.categories) < 2:
            raise ValueError("a classifier needs at least two categories")
        if self.w_beta.ndim != 2 or self.w_beta.shape[0] != len(self.categories):
            raise ValueError(f"w_beta shape {self.w_beta.shape} does not match "
                             f"{len(self.categories)} categories")

    def category_id(self, category: str | int) -> int:
        if isinstance(category, (int, np.integer)):
            if not 0 <= category < len(self.categories):
                raise ValueError(f"category id {category} out of range")
            return int(category)
        try:
            return self.categories.index(category)
        except ValueError:
            raise ValueError(f"unknown category {category!r}; known: {self.categories}") from None


@dataclass(frozen=True)
class CategoryDistribution:
    probs: np.ndarray

    def argmax(self) -> int:
        return int(np.argmax(self.probs))


def classify(v_d: np.ndarray, params: ClassifierParams) -> CategoryDistribution:
    v_d = np.asarray(v_d, dtype=DTYPE)
    if v_d.shape != (params.w_beta.shape[1],):
        raise ValueError(f"document vector shape {v_d.shape} != ({params.w_beta.shape[1]},)")
    return CategoryDistribution(softmax(params.w_beta @ v_d))


def cross_entropy(dist: CategoryDistribution, c_d: int) -> float:
    """Negative log-likelihood of the true category; ``inf`` when its probability is 0."""
    if not 0 <= c_d < len(dist.probs):
        raise ValueError(f"category id {c_d} out of range for {len(dist.probs)} categories")
    p = float(dist.probs[c_d])
    return math.inf if p == 0.0 else -math.log(p)


def classification_loss(docs, labels: Sequence[int], table: EmbeddingTable,
                        enc: EncoderParams, cls: ClassifierParams, *, windows=None, doc_sizes=None,
                        with_grad: bool = True):
    """Mean cross-entropy over a batch, with gradients wrt ``W_alpha`` and ``W_beta``.

    Returns ``(loss, grad_alpha, grad_beta, probs)``; the gradients are None
    when ``with_grad`` is false.
    """
    v_doc, cache = encode_documents(docs, table, enc, windows=windows, doc_sizes=doc_sizes)
    labels = np.asarray(labels, dtype=np.int64)
    probs = softmax(v_doc @ cls.w_beta.T)                # (B, C)
    b = len(labels)
    loss = float(-np.log(probs[np.arange(b), labels]).mean())
    if not with_grad:
        return loss, None, None, probs
    d_logits = probs.copy()
    d_logits[np.arange(b), labels] -= 1.0
    d_logits /= b
    g_beta = d_logits.T @ v_doc
    g_alpha = encoder_backward(cache, grad_doc=d_logits @ cls.w_beta)
    return loss, g_alpha, g_beta, probs


@dataclass
class ClassifierConfig:
    epochs: int = 10
    batch_size: int = 128
    learning_rate: float = 0.1
    seed: int = 0
    m: int = 50
    h: int = 2
    init_scale: float = 0.1
    patience: int | None = 3      # epochs without held-out gain before stopping; needs held-out docs


@dataclass
class TrainingLog:
    epochs: list[dict] = field(default_factory=list)


def predict(docs: Sequence[LabeledDoc], table: EmbeddingTable, enc: EncoderParams,
            cls: ClassifierParams, batch_size: int = 256) -> np.ndarray:
    out = []
    for i in range(0, len(docs), batch_size):
        chunk = docs[i:i + batch_size]
        v_doc, _ = encode_documents([[s.tokens for s in d.sentences] for d in chunk], table, enc)
        out.append(np.argmax(v_doc @ cls.w_beta.T, axis=1))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def accuracy(docs: Sequence[LabeledDoc], table: EmbeddingTable, enc: EncoderParams,
             cls: ClassifierParams) -> float:
    if not docs:
        return float("nan")
    gold = np.array([cls.category_id(d.category) for d in docs])
    return float((predict(docs, table, enc, cls) == gold).mean())


def train_classifier(corpus: Sequence[LabeledDoc], table: EmbeddingTable,
                     config: ClassifierConfig = ClassifierConfig(),
                     categories: Sequence[str] | None = None,
                     heldout: Sequence[LabeledDoc] = ()
                     ) -> tuple[EncoderParams, ClassifierParams, TrainingLog]:
    """Train ``W_alpha`` and ``W_beta`` with mini-batch AdaGrad on mean cross-entropy.

    Documents are reshuffled every epoch by a generator seeded from
    ``config.seed``. Word vectors are never touched.
    """
    if categories is None:
        categories = list(dict.fromkeys(d.category for d in corpus))
    categories = list(categories)
    present = {d.category for d in corpus}
    if len(present) < 2:
        raise DataError(f"classification corpus needs at least two categories, found {sorted(present)}")
    rng = make_rng(config.seed)
    enc = init_encoder(table.dim, config.m, config.h, rng, config.init_scale)
    cls = ClassifierParams(init_uniform((len(categories), config.m), config.init_scale, rng), categories)
    labels = np.array([cls.category_id(d.category) for d in corpus])
    docs = [[s.tokens for s in d.sentences] for d in corpus]
    empty = [corpus[i].id for i, d in enumerate(docs) if not d]
    if empty:
        raise DataError(f"documents without sentences: {empty[:5]}")

    state = AdaGradState.for_params([enc.w_alpha, cls.w_beta], config.learning_rate)
    train_log = TrainingLog()
    best, stale = -1.0, 0
    best_params = (enc, cls)
    for epoch in range(config.epochs):
        order = rng.permutation(len(docs))
        total, correct = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, g_alpha, g_beta, probs = classification_loss(
                [docs[i] for i in idx], labels[idx], table, enc, cls)
            (w_alpha, w_beta), state = adagrad_step([enc.w_alpha, cls.w_beta], [g_alpha, g_beta], state)
            enc = EncoderParams(w_alpha, enc.h)
            cls = ClassifierParams(w_beta, categories)
            total += loss * len(idx)
            correct += int((probs.argmax(axis=1) == labels[idx]).sum())
        entry = {"epoch": epoch + 1, "loss": total / len(docs), "train_accuracy": correct / len(docs)}
        if heldout:
            entry["heldout_accuracy"] = accuracy(heldout, table, enc, cls)
        train_log.epochs.append(entry)
        log.info("classifier epoch %(epoch)d loss=%(loss).4f acc=%(train_accuracy).3f", entry)
        if heldout and config.patience is not None:
            if entry["heldout_accuracy"] > best:
                best, stale, best_params = entry["heldout_accuracy"], 0, (enc, cls)
            else:
                stale += 1
                if stale >= config.patience:
                    log.info("early stop after epoch %d", epoch + 1)
                    enc, cls = best_params
                    break
    return enc, cls, train_log
