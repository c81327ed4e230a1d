"""Category-adaptive summary embedding, cosine saliency and pairwise training.

The transformation applied to a document vector is a mixture of per-category
sub-matrices weighted by the classifier's category distribution. The summary
embedding is ``tanh(W_gamma @ v_doc)`` and a sentence's saliency is its
cosine with that embedding. Training samples (high, low) saliency sentence
pairs and minimizes the hinge ``max(0, omega - r_plus + r_minus)``.

Modes:

``tcsum``
    one sub-matrix per category, mixed by the predicted distribution.
``singlet``
    a single matrix on top of the classification-trained encoder.
``notc``
    a single matrix, encoder trained from scratch on summarization pairs.
``emsim``
    no matrix; saliency is ``cos(v_sent, v_doc)``.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifier import CategoryDistribution, ClassifierParams
from .encoder import (EncoderParams, Windows, build_windows, concat_windows, encode_documents,
                      encoder_backward, init_encoder)
from .errors import DataError, ModelError
from .numerics import DTYPE, AdaGradState, adagrad_step, cosine, make_rng, softmax
from .rouge import RougeConfig, SaliencyLabels, label_saliency
from .textdata import ClusterRecord, EmbeddingTable

log = logging.getLogger(__name__)

MODES = ("tcsum", "singlet", "notc", "emsim")
MODEL_VERSION = 1


@dataclass
class SummarizerParams:
    sub_matrices: list[np.ndarray]
    mode: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise ModelError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        self.sub_matrices = [np.asarray(w, dtype=DTYPE) for w in self.sub_matrices]
        for w in self.sub_matrices:
            if w.ndim != 2 or w.shape[0] != w.shape[1]:
                raise ModelError(f"sub-matrices must be square, got {w.shape}")
        if len({w.shape for w in self.sub_matrices}) > 1:
            raise ModelError("sub-matrices must share one shape")
        expected = {"singlet": 1, "notc": 1, "emsim": 0}.get(self.mode)
        if expected is not None and len(self.sub_matrices) != expected:
            raise ModelError(f"mode {self.mode} carries {expected} matrices, got {len(self.sub_matrices)}")
        if self.mode == "tcsum" and len(self.sub_matrices) < 2:
            raise ModelError("tcsum needs one sub-matrix per category (at least two)")


@dataclass(frozen=True)
class TrainPair:
    cluster_id: str
    s_plus: int
    s_minus: int
    label_plus: float
    label_minus: float


# ---------------------------------------------------------------------------
# Forward pieces
# ---------------------------------------------------------------------------

def _probs(v_c) -> np.ndarray:
    return np.asarray(v_c.probs if isinstance(v_c, CategoryDistribution) else v_c, dtype=DTYPE)


def compose_transform(v_c, sub_matrices: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_i v_c[i] * sub_matrices[i]``."""
    p = _probs(v_c)
    if p.shape != (len(sub_matrices),):
        raise ValueError(f"{p.shape[0] if p.ndim else 0} weights for {len(sub_matrices)} sub-matrices")
    return np.tensordot(p, np.stack(sub_matrices), axes=1)


def summary_embedding(v_d: np.ndarray, w_gamma: np.ndarray) -> np.ndarray:
    v_d = np.asarray(v_d, dtype=DTYPE)
    if w_gamma.ndim != 2 or w_gamma.shape[1] != v_d.shape[0]:
        raise ValueError(f"transform {w_gamma.shape} cannot act on a vector of length {v_d.shape[0]}")
    return np.tanh(w_gamma @ v_d)


def saliency(v_s: np.ndarray, v_summary: np.ndarray) -> float:
    """Cosine between a sentence vector and the summary embedding; 0 if either is zero."""
    if not np.any(v_s) or not np.any(v_summary):
        warnings.warn("zero vector in saliency; score set to 0", RuntimeWarning, stacklevel=2)
        return 0.0
    return cosine(v_s, v_summary)


def pairwise_loss(r_plus: float, r_minus: float, omega: float = 0.1) -> float:
    return max(0.0, omega - r_plus + r_minus)


def _row_cos(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    na = np.linalg.norm(a, axis=-1)
    nb = np.linalg.norm(b, axis=-1)
    denom = na * nb
    safe = denom > 0
    r = np.zeros_like(denom)
    r[safe] = (a * b).sum(axis=-1)[safe] / denom[safe]
    return r, na, nb


def _cos_grads(a, b, r, na, nb):
    """d cos / d a and d cos / d b, row-wise; zero where a norm vanishes."""
    safe = (na > 0) & (nb > 0)
    na_ = np.where(safe, na, 1.0)[:, None]
    nb_ = np.where(safe, nb, 1.0)[:, None]
    da = b / (na_ * nb_) - r[:, None] * a / na_ ** 2
    db = a / (na_ * nb_) - r[:, None] * b / nb_ ** 2
    da[~safe] = 0.0
    db[~safe] = 0.0
    return da, db


def pair_batch_loss(sub_matrices: Sequence[np.ndarray], v_c: np.ndarray, v_doc: np.ndarray,
                    a_plus: np.ndarray, a_minus: np.ndarray, omega: float):
    """Mean hinge loss over a batch of pairs and its gradients.

    ``v_c`` is ``(P, n_sub)``, the remaining arrays ``(P, m)``; row ``p`` of
    each describes one pair. The category weights are constants. Returns
    ``(loss, grad_subs, grad_v_doc, grad_a_plus, grad_a_minus)``.
    """
    stack = np.stack(sub_matrices)                       # (C, m, m)
    w = np.einsum("pc,cij->pij", v_c, stack)
    v_sum = np.tanh(np.einsum("pij,pj->pi", w, v_doc))
    r_p, na_p, nb = _row_cos(a_plus, v_sum)
    r_m, na_m, _ = _row_cos(a_minus, v_sum)
    margin = omega - r_p + r_m
    active = (margin > 0).astype(DTYPE)
    n = len(margin)
    loss = float(np.maximum(margin, 0.0).sum() / n)
    coef_p, coef_m = -active / n, active / n
    da_p, db_p = _cos_grads(a_plus, v_sum, r_p, na_p, nb)
    da_m, db_m = _cos_grads(a_minus, v_sum, r_m, na_m, nb)
    d_sum = coef_p[:, None] * db_p + coef_m[:, None] * db_m
    dz = d_sum * (1.0 - v_sum ** 2)
    g_subs = np.einsum("pc,pi,pj->cij", v_c, dz, v_doc)
    g_doc = np.einsum("pij,pi->pj", w, dz)
    return loss, list(g_subs), g_doc, coef_p[:, None] * da_p, coef_m[:, None] * da_m


def sample_pair(labels: SaliencyLabels, thresholds: tuple[float, float] = (0.3, 0.3),
                rng: np.random.Generator | None = None) -> TrainPair:
    """Draw ``s_plus`` from the top ``hi`` fraction and ``s_minus`` from the bottom ``lo`` fraction.

    Draws are redrawn until ``label_plus > label_minus``.
    """
    rng = rng if rng is not None else make_rng(0)
    scores = np.asarray(labels.scores, dtype=DTYPE)
    n = len(scores)
    if n < 2 or np.all(scores == scores[0]):
        raise DataError(f"cluster {labels.cluster_id!r}: need two sentences with distinct labels")
    hi, lo = thresholds
    if not (0 < hi <= 1 and 0 < lo <= 1):
        raise ValueError("thresholds must lie in (0, 1]")
    ranked = np.sort(scores)[::-1]
    n_hi = max(1, math.ceil(round(hi * n, 9)))
    n_lo = max(1, math.ceil(round(lo * n, 9)))
    # sentences tied with the cut-off label belong to the set
    top = np.flatnonzero(scores >= ranked[n_hi - 1])
    bottom = np.flatnonzero(scores <= ranked[n - n_lo])
    while True:
        p = int(top[rng.integers(len(top))])
        q = int(bottom[rng.integers(len(bottom))])
        if scores[p] > scores[q]:
            return TrainPair(labels.cluster_id, p, q, float(scores[p]), float(scores[q]))


def style_similarity(sub_matrices: Sequence[np.ndarray]) -> np.ndarray:
    """Cosine similarity between flattened sub-matrices, diagonal forced to zero."""
    if len(sub_matrices) < 2:
        raise ValueError("style similarity needs at least two matrices")
    flat = np.stack([np.asarray(w, dtype=DTYPE).ravel() for w in sub_matrices])
    peak = np.abs(flat).max(axis=1)
    zero = peak == 0
    flat = flat / np.where(zero, 1.0, peak)[:, None]
    norms = np.linalg.norm(flat, axis=1)
    if zero.any():
        warnings.warn(f"zero matrices at {np.flatnonzero(zero).tolist()}; their similarities set to 0",
                      RuntimeWarning, stacklevel=2)
    unit = flat / np.where(zero, 1.0, norms)[:, None]
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    sim = (sim + sim.T) / 2
    sim[zero, :] = 0.0
    sim[:, zero] = 0.0
    np.fill_diagonal(sim, 0.0)
    return sim


# ---------------------------------------------------------------------------
# Full model
# ---------------------------------------------------------------------------

@dataclass
class TCSumModel:
    encoder: EncoderParams
    classifier: ClassifierParams | None
    summarizer: SummarizerParams
    categories: list[str]

    @property
    def mode(self) -> str:
        return self.summarizer.mode

    def __post_init__(self):
        if self.mode == "tcsum":
            if self.classifier is None:
                raise ModelError("tcsum mode requires classifier parameters")
            if len(self.summarizer.sub_matrices) != len(self.categories):
                raise ModelError(f"{len(self.summarizer.sub_matrices)} sub-matrices for "
                                 f"{len(self.categories)} categories")
        for w in self.summarizer.sub_matrices:
            if w.shape[0] != self.encoder.m:
                raise ModelError(f"sub-matrix size {w.shape[0]} != encoder dimension {self.encoder.m}")

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "dims": {"k": self.encoder.k, "m": self.encoder.m, "h": self.encoder.h},
            "categories": list(self.categories),
            "mode": self.mode,
            "w_alpha": self.encoder.w_alpha.tolist(),
            "w_beta": None if self.classifier is None else self.classifier.w_beta.tolist(),
            "sub_matrices": [w.tolist() for w in self.summarizer.sub_matrices],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TCSumModel":
        try:
            if obj["version"] != MODEL_VERSION:
                raise ModelError(f"unsupported model version {obj['version']!r}")
            dims = obj["dims"]
            enc = EncoderParams(np.array(obj["w_alpha"], dtype=DTYPE), int(dims["h"]))
            if (enc.k, enc.m) != (dims["k"], dims["m"]):
                raise ModelError(f"w_alpha shape {enc.w_alpha.shape} disagrees with dims {dims}")
            cats = list(obj["categories"])
            clf = None
            if obj.get("w_beta") is not None:
                clf = ClassifierParams(np.array(obj["w_beta"], dtype=DTYPE), cats)
            summ = SummarizerParams([np.array(w, dtype=DTYPE) for w in obj.get("sub_matrices", [])],
                                    obj.get("mode", "emsim"))
            return cls(enc, clf, summ, cats)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"malformed model document: {exc}") from None

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TCSumModel":
        path = Path(path)
        if not path.is_file():
            raise ModelError(f"model file not found: {path}")
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: invalid JSON ({exc.msg})") from None
        return cls.from_dict(obj)


def _category_weights(model: TCSumModel, v_doc: np.ndarray, force_category) -> np.ndarray:
    """Weights over the model's matrices for one document."""
    n_sub = len(model.summarizer.sub_matrices)
    if force_category is not None:
        if model.mode != "tcsum":
            raise ModelError(f"a forced category needs a tcsum model, not {model.mode}")
        j = force_category if isinstance(force_category, (int, np.integer)) else None
        if j is None:
            if force_category not in model.categories:
                raise ModelError(f"unknown category {force_category!r}; known: {model.categories}")
            j = model.categories.index(force_category)
        if not 0 <= j < n_sub:
            raise ModelError(f"category index {j} out of range")
        return np.eye(n_sub)[j]
    if model.mode == "tcsum":
        return softmax(model.classifier.w_beta @ v_doc)
    return np.ones(n_sub)


def score_encoded(v_sent: np.ndarray, v_doc: np.ndarray, model: TCSumModel,
                  force_category=None) -> np.ndarray:
    """Saliency of each row of ``v_sent`` for a document with vector ``v_doc``."""
    if model.mode == "emsim":
        if force_category is not None:
            raise ModelError("a forced category needs a tcsum model, not emsim")
        target = v_doc
    else:
        weights = _category_weights(model, v_doc, force_category)
        target = summary_embedding(v_doc, compose_transform(weights, model.summarizer.sub_matrices))
    r, _, _ = _row_cos(v_sent, np.broadcast_to(target, v_sent.shape))
    return np.clip(r, -1.0, 1.0)


def rank_sentences(cluster: ClusterRecord, model: TCSumModel, table: EmbeddingTable,
                   mode: str | None = None, force_category=None) -> np.ndarray:
    """Saliency for every sentence of the flattened cluster.

    ``mode`` may only differ from the model's own mode when it is ``emsim``,
    which needs nothing but the encoder.
    """
    sentences = cluster.sentences()
    if not sentences:
        raise DataError(f"cluster {cluster.id!r} has no sentences")
    if mode is not None and mode != model.mode:
        if mode != "emsim":
            raise ModelError(f"model was trained as {model.mode!r}; cannot rank as {mode!r}")
        model = as_emsim(model)
    v_doc, cache = encode_documents([[s.tokens for s in sentences]], table, model.encoder)
    return score_encoded(cache.v_sent, v_doc[0], model, force_category)


def as_emsim(model: TCSumModel) -> TCSumModel:
    return TCSumModel(model.encoder, model.classifier, SummarizerParams([], "emsim"), model.categories)


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

@dataclass
class SummarizerConfig:
    mode: str = "tcsum"
    epochs: int = 10
    pairs_per_cluster: int = 64
    omega: float = 0.1
    learning_rate: float = 0.1
    batch_size: int = 128
    seed: int = 0
    hi_pct: float = 0.3
    lo_pct: float = 0.3
    init_noise: float = 0.01
    # only used by notc, which builds its own encoder
    m: int = 50
    h: int = 2
    init_scale: float = 0.1


def init_sub_matrices(n: int, m: int, rng: np.random.Generator, noise: float = 0.01) -> list[np.ndarray]:
    """Identity plus uniform ``[-noise, noise]`` jitter, one per matrix."""
    return [np.eye(m) + rng.uniform(-noise, noise, size=(m, m)) for _ in range(n)]


@dataclass
class _Prepared:
    cluster: ClusterRecord
    labels: SaliencyLabels
    windows: Windows


def prepare_clusters(clusters: Sequence[ClusterRecord], table: EmbeddingTable, h: int,
                     rouge_config: RougeConfig = RougeConfig(n=2)) -> list[_Prepared]:
    """Label clusters and build their window tensors, skipping unusable ones with a warning."""
    out = []
    for c in clusters:
        if not c.references:
            warnings.warn(f"cluster {c.id!r} has no references; skipped", stacklevel=2)
            continue
        labels = label_saliency(c, rouge_config)
        if len(labels.scores) < 2 or np.all(labels.scores == labels.scores[0]):
            warnings.warn(f"cluster {c.id!r} has no two distinctly labeled sentences; skipped",
                          stacklevel=2)
            continue
        out.append(_Prepared(c, labels, build_windows([s.tokens for s in c.sentences()], table, h)))
    return out


def train_summarizer(clusters: Sequence[ClusterRecord], table: EmbeddingTable,
                     config: SummarizerConfig = SummarizerConfig(),
                     base: TCSumModel | None = None, prepared: list[_Prepared] | None = None
                     ) -> TCSumModel:
    """Fit the transformation matrices (and, for ``notc``, the encoder).

    ``base`` supplies the classification-trained encoder and classifier for
    every mode except ``notc``; those weights stay frozen and the category
    weights are treated as constants.
    """
    mode = config.mode
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    rng = make_rng(config.seed)
    if mode == "notc":
        encoder = init_encoder(table.dim, config.m, config.h, rng, config.init_scale)
        classifier = None
        categories = list(base.categories) if base is not None else []
    else:
        if base is None:
            raise ModelError(f"mode {mode} needs a classification-trained base model")
        encoder, classifier, categories = base.encoder, base.classifier, list(base.categories)
        if mode == "tcsum" and classifier is None:
            raise ModelError("tcsum needs a base model with classifier weights")
    if encoder.k != table.dim:
        raise ModelError(f"encoder expects {encoder.k}-dim word vectors, table has {table.dim}")
    if mode == "emsim":
        return TCSumModel(encoder, classifier, SummarizerParams([], "emsim"), categories)

    if prepared is None:
        prepared = prepare_clusters(clusters, table, encoder.h)
    if not prepared:
        raise DataError("no usable training clusters (all lacked references or distinct labels)")

    n_sub = len(categories) if mode == "tcsum" else 1
    subs = init_sub_matrices(n_sub, encoder.m, rng, config.init_noise)
    train_encoder = mode == "notc"

    def cluster_features(enc):
        v_doc, cache = encode_documents(None, None, enc, windows=concat_windows([p.windows for p in prepared]),
                                        doc_sizes=[p.windows.n_sentences for p in prepared])
        return v_doc, cache

    offsets = np.cumsum([0] + [p.windows.n_sentences for p in prepared])
    if not train_encoder:
        v_doc_all, cache_all = cluster_features(encoder)
        v_sent_all = cache_all.v_sent
        if mode == "tcsum":
            v_c_all = softmax(v_doc_all @ classifier.w_beta.T)
        else:
            v_c_all = np.ones((len(prepared), 1))

    params = subs + ([encoder.w_alpha] if train_encoder else [])
    state = AdaGradState.for_params(params, config.learning_rate)
    thresholds = (config.hi_pct, config.lo_pct)
    for epoch in range(config.epochs):
        pairs = []
        for ci, p in enumerate(prepared):
            for _ in range(config.pairs_per_cluster):
                tp = sample_pair(p.labels, thresholds, rng)
                pairs.append((ci, tp.s_plus, tp.s_minus))
        pairs = np.array(pairs, dtype=np.int64).reshape(-1, 3)
        pairs = pairs[rng.permutation(len(pairs))]
        total = 0.0
        for start in range(0, len(pairs), config.batch_size):
            batch = pairs[start:start + config.batch_size]
            ci, sp, sm = batch[:, 0], batch[:, 1], batch[:, 2]
            if not train_encoder:
                loss, g_subs, _, _, _ = pair_batch_loss(
                    subs, v_c_all[ci], v_doc_all[ci],
                    v_sent_all[offsets[ci] + sp], v_sent_all[offsets[ci] + sm], config.omega)
                subs, state = adagrad_step(subs, g_subs, state)
            else:
                uniq, local = np.unique(ci, return_inverse=True)
                win = concat_windows([prepared[u].windows for u in uniq])
                sizes = [prepared[u].windows.n_sentences for u in uniq]
                v_doc, cache = encode_documents(None, None, encoder, windows=win, doc_sizes=sizes)
                off = np.cumsum([0] + sizes)
                rows_p, rows_m = off[local] + sp, off[local] + sm
                loss, g_subs, g_doc, g_ap, g_am = pair_batch_loss(
                    subs, np.ones((len(batch), 1)), v_doc[local],
                    cache.v_sent[rows_p], cache.v_sent[rows_m], config.omega)
                grad_doc = np.zeros_like(v_doc)
                np.add.at(grad_doc, local, g_doc)
                grad_sent = np.zeros_like(cache.v_sent)
                np.add.at(grad_sent, rows_p, g_ap)
                np.add.at(grad_sent, rows_m, g_am)
                g_alpha = encoder_backward(cache, grad_doc, grad_sent)
                new, state = adagrad_step(subs + [encoder.w_alpha], g_subs + [g_alpha], state)
                subs, encoder = new[:-1], EncoderParams(new[-1], encoder.h)
            total += loss * len(batch)
        log.info("summarizer[%s] epoch %d mean hinge %.4f", mode, epoch + 1, total / max(1, len(pairs)))
    return TCSumModel(encoder, classifier, SummarizerParams(subs, mode), categories)


def pairwise_accuracy(model: TCSumModel, clusters: Sequence[ClusterRecord], table: EmbeddingTable,
                      pairs_per_cluster: int = 64, thresholds=(0.3, 0.3), seed: int = 0) -> float:
    """Fraction of sampled (high, low) label pairs the model orders correctly."""
    rng = make_rng(seed)
    hits = total = 0
    for p in prepare_clusters(clusters, table, model.encoder.h):
        scores = rank_sentences(p.cluster, model, table)
        for _ in range(pairs_per_cluster):
            tp = sample_pair(p.labels, thresholds, rng)
            hits += scores[tp.s_plus] > scores[tp.s_minus]
            total += 1
    if total == 0:
        raise DataError("no labeled pairs to evaluate")
    return hits / total
