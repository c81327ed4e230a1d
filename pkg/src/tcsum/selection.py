"""Greedy budgeted sentence selection with a unigram-overlap redundancy filter."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .rouge import STOPWORDS
from .textdata import Budget, SentenceTokens


@dataclass(frozen=True)
class SummaryResult:
    selected: tuple[int, ...]   # positions in the flattened cluster, document order
    text: str
    used: int
    budget: Budget


def sentence_cost(text: str, unit: str) -> int:
    if unit == "words":
        return len(text.split())
    return len(text.encode("utf-8"))


def content_words(sentence: SentenceTokens) -> set[str]:
    return {t for t in sentence.tokens if t not in STOPWORDS and any(c.isalnum() for c in t)}


def greedy_select(sentences: Sequence[SentenceTokens], scores: Sequence[float], budget: Budget,
                  redundancy_threshold: float = 0.5) -> SummaryResult:
    """Pick sentences by descending score until nothing else fits.

    A candidate is skipped when more than ``redundancy_threshold`` of its
    content unigrams already occur in the selection, or when it would push
    the summary over budget. Byte budgets count the UTF-8 length of the
    selected sentences joined by single spaces. Ties in score go to the
    earlier sentence.
    """
    if len(sentences) != len(scores):
        raise ValueError("one score per sentence is required")
    if not 0.0 <= redundancy_threshold <= 1.0:
        raise ValueError("redundancy_threshold must lie in [0, 1]")
    order = sorted(range(len(sentences)), key=lambda i: (-scores[i], i))
    chosen: list[int] = []
    seen: set[str] = set()
    used = 0
    for i in order:
        text = sentences[i].source_text
        cost = sentence_cost(text, budget.unit)
        if budget.unit == "bytes" and chosen:
            cost += 1
        if used + cost > budget.value:
            continue
        words = content_words(sentences[i])
        if words and len(words & seen) / len(words) > redundancy_threshold:
            continue
        chosen.append(i)
        seen |= words
        used += cost
    chosen.sort()
    text = " ".join(sentences[i].source_text for i in chosen)
    return SummaryResult(tuple(chosen), text, sentence_cost(text, budget.unit) if chosen else 0, budget)
