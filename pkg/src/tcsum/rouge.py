"""ROUGE-N recall, used both for evaluation and for sentence saliency labels.

Semantics follow ROUGE-1.5.5 run with ``-m -f A`` as far as they matter
here: optional Porter stemming, no stopword removal, clipped n-gram matches,
per-reference recall averaged over references. No resampling.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from nltk.stem.porter import PorterStemmer

from .errors import DataError
from .textdata import ClusterRecord, tokenize_words

_STEMMER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@lru_cache(maxsize=200_000)
def stem(token: str) -> str:
    return _STEMMER.stem(token)


STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been before being
below between both but by can could did do does doing down during each few for from further
had has have having he her here hers herself him himself his how i if in into is it its itself
just me more most my myself no nor not now of off on once only or other our ours ourselves out
over own same she should so some such than that the their theirs them themselves then there
these they this those through to too under until up very was we were what when where which
while who whom why will with would you your yours yourself yourselves
""".split())


@dataclass(frozen=True)
class RougeConfig:
    n: int = 2
    stem: bool = True
    remove_stopwords: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")


def rouge_tokens(text: str) -> list[str]:
    """Word tokens for scoring: lowercased, punctuation-only tokens dropped."""
    return [t for t in tokenize_words(text) if any(ch.isalnum() for ch in t)]


def _prepare(tokens: Sequence[str], config: RougeConfig) -> list[str]:
    toks = list(tokens)
    if config.remove_stopwords:
        toks = [t for t in toks if t not in STOPWORDS]
    if config.stem:
        toks = [stem(t) for t in toks]
    return toks


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], references: Sequence[Sequence[str]],
            config: RougeConfig = RougeConfig()) -> float:
    """Mean over references of clipped n-gram matches / reference n-gram count.

    References with fewer than ``n`` tokens are skipped; if every reference is
    skipped a :class:`DataError` is raised.
    """
    n = config.n
    cand = ngram_counts(_prepare(candidate, config), n)
    scores = []
    for ref in references:
        ref_counts = ngram_counts(_prepare(ref, config), n)
        total = sum(ref_counts.values())
        if total == 0:
            continue
        hit = sum(min(c, cand[g]) for g, c in ref_counts.items())
        scores.append(hit / total)
    if not scores:
        raise DataError(f"no reference has at least {n} tokens")
    return sum(scores) / len(scores)


@dataclass(frozen=True)
class SaliencyLabels:
    cluster_id: str
    scores: np.ndarray


def label_saliency(cluster: ClusterRecord, config: RougeConfig = RougeConfig(n=2)) -> SaliencyLabels:
    """ROUGE-N recall of every sentence of the flattened cluster against its references."""
    if not cluster.references:
        raise DataError(f"cluster {cluster.id!r} has no references")
    refs = [rouge_tokens(r) for r in cluster.references]
    scores = [rouge_n(rouge_tokens(s.source_text), refs, config) for s in cluster.sentences()]
    return SaliencyLabels(cluster.id, np.array(scores, dtype=np.float64))


def score_summary(summary_text: str, references: Sequence[str]) -> dict[str, float]:
    """ROUGE-1 and ROUGE-2 recall of a rendered summary (stemmed, stopwords kept)."""
    cand = rouge_tokens(summary_text)
    refs = [rouge_tokens(r) for r in references]
    return {
        "rouge_1": rouge_n(cand, refs, RougeConfig(n=1)),
        "rouge_2": rouge_n(cand, refs, RougeConfig(n=2)),
    }
