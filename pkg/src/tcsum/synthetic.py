"""Deterministic synthetic corpora for desk-scale experiments.

Each category owns a disjoint *style lexicon*. Classification documents mix
general vocabulary with tokens from their own lexicon (and a little noise
from other lexicons), so the category is learnable from text. Summarization
clusters are built around a topic; some sentences carry tokens of the
cluster's own lexicon, some carry tokens of another category's lexicon and
some carry category-neutral *marker* tokens. A sentence's latent importance
is::

    style_signal * (# own-lexicon tokens) + (1 - style_signal) * (# marker tokens)

and the reference summaries are assembled from the most important
sentences. With ``style_signal = 1`` only own-category style matters, so the
ideal ranking depends on the category; with ``style_signal = 0`` it ignores
the category entirely.

Word vectors are random Gaussian, shared by both tasks. Tokens of one style
lexicon share a category direction (weight ``style_cohesion``), the way
topical words cluster in trained embeddings.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DataError
from .numerics import make_rng
from .textdata import Budget, ClusterRecord, EmbeddingTable, LabeledDoc, SentenceTokens

CATEGORY_NAMES = ("biography", "disaster", "politics", "business", "culture", "health",
                  "law", "society", "science", "sports", "international")


@dataclass(frozen=True)
class SynthConfig:
    categories: int = 3
    docs_per_cat: int = 400
    sents_per_doc: int = 8
    vocab_per_cat: int = 80
    style_signal: float = 0.8
    clusters_per_cat: int = 50
    docs_per_cluster: int = 3
    general_vocab: int = 600
    topic_size: int = 40
    marker_vocab: int = 30
    own_rate: float = 0.35
    other_rate: float = 0.15
    sent_len: int = 12
    refs_per_cluster: int = 4
    ref_pool: int = 8
    ref_sentences: int = 4
    dim: int = 50
    embedding_std: float = 0.5
    style_cohesion: float = 0.8

    def validate(self) -> None:
        if self.categories < 2:
            raise DataError("synthetic corpus needs at least two categories")
        if self.vocab_per_cat <= 0 or self.general_vocab <= 0 or self.marker_vocab <= 0:
            raise DataError("vocabulary sizes must be positive")
        if not 0.0 <= self.style_signal <= 1.0:
            raise DataError("style_signal must lie in [0, 1]")
        if self.sent_len < 4:
            raise DataError("sent_len must be at least 4")
        if min(self.docs_per_cat, self.sents_per_doc, self.clusters_per_cat,
               self.docs_per_cluster, self.refs_per_cluster, self.ref_sentences, self.dim) <= 0:
            raise DataError("counts must be positive")
        if self.ref_sentences > self.ref_pool:
            raise DataError("ref_sentences cannot exceed ref_pool")
        if not 0.0 <= self.style_cohesion <= 1.0:
            raise DataError("style_cohesion must lie in [0, 1]")
        if not (0 <= self.own_rate and 0 <= self.other_rate and self.own_rate + self.other_rate <= 1):
            raise DataError("own_rate and other_rate must be non-negative and sum to at most 1")
        if self.topic_size > self.general_vocab:
            raise DataError("topic_size cannot exceed general_vocab")

    def to_dict(self) -> dict:
        return asdict(self)


def category_names(n: int) -> list[str]:
    if n <= len(CATEGORY_NAMES):
        return list(CATEGORY_NAMES[:n])
    return [f"cat{i:02d}" for i in range(n)]


class _Lexicon:
    def __init__(self, cfg: SynthConfig, names: list[str]):
        self.general = [f"w{i:04d}" for i in range(cfg.general_vocab)]
        self.markers = [f"key{i:03d}" for i in range(cfg.marker_vocab)]
        self.style = [[f"{name[:3]}{j:03d}" for j in range(cfg.vocab_per_cat)] for name in names]

    def all_tokens(self) -> list[str]:
        return ["."] + self.general + self.markers + [t for lex in self.style for t in lex]


def _sentence(rng, base_pool, length, inserts, topic=None) -> SentenceTokens:
    """``length`` filler tokens with ``inserts`` written over distinct random slots, then a period.

    Filler comes from ``topic`` and ``base_pool`` with equal odds when a topic is given.
    """
    tokens = [base_pool[i] for i in rng.integers(len(base_pool), size=length)]
    if topic:
        from_topic = rng.random(length) < 0.5
        picks = rng.integers(len(topic), size=length)
        tokens = [topic[j] if t else tok for tok, t, j in zip(tokens, from_topic, picks)]
    slots = rng.choice(length, size=len(inserts), replace=False)
    for slot, tok in zip(slots, inserts):
        tokens[slot] = tok
    return SentenceTokens(tuple(tokens) + (".",), " ".join(tokens) + ".")


def _pick(rng, lexicon, count) -> list[str]:
    return [lexicon[i] for i in rng.integers(len(lexicon), size=count)]


def _classification_docs(rng, cfg, lex, names) -> list[LabeledDoc]:
    docs = []
    n_cat = cfg.categories
    for c in range(n_cat):
        for d in range(cfg.docs_per_cat):
            sents = []
            for _ in range(cfg.sents_per_doc):
                inserts = []
                if rng.random() < 0.6:
                    inserts += _pick(rng, lex.style[c], int(rng.integers(1, 3)))
                if rng.random() < 0.2:
                    other = (c + int(rng.integers(1, n_cat))) % n_cat
                    inserts += _pick(rng, lex.style[other], 1)
                if rng.random() < 0.2:
                    inserts += _pick(rng, lex.markers, 1)
                sents.append(_sentence(rng, lex.general, cfg.sent_len, inserts))
            docs.append(LabeledDoc(f"{names[c]}-{d:04d}", names[c], tuple(sents)))
    order = rng.permutation(len(docs))
    return [docs[i] for i in order]


def _cluster(rng, cfg, lex, names, c, idx) -> ClusterRecord:
    n_cat = cfg.categories
    topic = [lex.general[i] for i in rng.choice(len(lex.general), size=cfg.topic_size, replace=False)]
    documents, importance = [], []
    for _ in range(cfg.docs_per_cluster):
        doc = []
        for _ in range(cfg.sents_per_doc):
            inserts, own, marks = [], 0, 0
            u = rng.random()
            if u < cfg.own_rate:
                own = int(rng.integers(1, 4))
                inserts += _pick(rng, lex.style[c], own)
            elif u < cfg.own_rate + cfg.other_rate:
                other = (c + int(rng.integers(1, n_cat))) % n_cat
                inserts += _pick(rng, lex.style[other], int(rng.integers(1, 4)))
            if rng.random() < 0.3:
                marks = int(rng.integers(1, 3))
                inserts += _pick(rng, lex.markers, marks)
            doc.append(_sentence(rng, lex.general, cfg.sent_len, inserts, topic))
            importance.append(cfg.style_signal * own + (1 - cfg.style_signal) * marks
                              + 1e-3 * rng.random())
        documents.append(tuple(doc))
    flat = [s for d in documents for s in d]
    best = sorted(range(len(flat)), key=lambda i: (-importance[i], i))[:cfg.ref_pool]
    strong = [i for i in best if importance[i] >= 0.5]
    if len(strong) >= cfg.ref_sentences:
        best = strong
    refs = []
    for _ in range(cfg.refs_per_cluster):
        chosen = rng.choice(best, size=min(cfg.ref_sentences, len(best)), replace=False)
        refs.append(" ".join(flat[i].source_text for i in chosen))
    budget = Budget("words", cfg.ref_sentences * cfg.sent_len)
    return ClusterRecord(f"{names[c]}-c{idx:03d}", tuple(documents), tuple(refs), names[c], budget)


def synth_corpus(seed: int, config: SynthConfig = SynthConfig()
                 ) -> tuple[list[LabeledDoc], list[ClusterRecord], EmbeddingTable]:
    """Generate ``(classification docs, clusters, embeddings)`` deterministically from ``seed``."""
    config.validate()
    names = category_names(config.categories)
    lex = _Lexicon(config, names)
    rng_emb, rng_cls, rng_sum = (make_rng(s) for s in np.random.SeedSequence(seed).generate_state(3))
    tokens = lex.all_tokens()
    vectors = rng_emb.normal(0.0, config.embedding_std, size=(len(tokens), config.dim))
    centroids = rng_emb.normal(0.0, config.embedding_std, size=(config.categories, config.dim))
    first = 1 + len(lex.general) + len(lex.markers)
    a, b = np.sqrt(config.style_cohesion), np.sqrt(1.0 - config.style_cohesion)
    for c in range(config.categories):
        rows = slice(first + c * config.vocab_per_cat, first + (c + 1) * config.vocab_per_cat)
        vectors[rows] = a * centroids[c] + b * vectors[rows]
    table = EmbeddingTable(tokens, vectors)
    docs = _classification_docs(rng_cls, config, lex, names)
    clusters = []
    for idx in range(config.clusters_per_cat * config.categories):
        clusters.append(_cluster(rng_sum, config, lex, names, idx % config.categories, idx))
    return docs, clusters, table


def separable_corpus(seed: int, n_docs: int = 2000, sents_per_doc: int = 2, sent_len: int = 8,
                     dim: int = 50) -> tuple[list[LabeledDoc], EmbeddingTable]:
    """Two categories decided by the presence of one dedicated token."""
    rng = make_rng(seed)
    general = [f"w{i:03d}" for i in range(200)]
    marker = "signal"
    vocab = ["."] + general + [marker]
    table = EmbeddingTable(vocab, rng.normal(0.0, 0.5, size=(len(vocab), dim)))
    docs = []
    for d in range(n_docs):
        positive = bool(rng.random() < 0.5)
        sents = []
        for s in range(sents_per_doc):
            inserts = [marker] if positive and s == 0 else []
            sents.append(_sentence(rng, general, sent_len, inserts))
        docs.append(LabeledDoc(f"d{d:04d}", "pos" if positive else "neg", tuple(sents)))
    return docs, table
