import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcsum.selection import greedy_select, sentence_cost
from tcsum.textdata import Budget, sentence_from_text


def sents(*texts):
    return [sentence_from_text(t) for t in texts]


def words(prefix, n):
    return " ".join(f"{prefix}{i}" for i in range(n))


class TestGreedy:
    def test_everything_fits(self):
        s = sents("Alpha beta.", "Gamma delta.", "Epsilon zeta.")
        r = greedy_select(s, [0.1, 0.9, 0.5], Budget("words", 100), redundancy_threshold=1.0)
        assert r.selected == (0, 1, 2)
        assert r.text == "Alpha beta. Gamma delta. Epsilon zeta."
        assert r.used == 6

    def test_duplicate_skipped(self):
        s = sents("Storm hits coast.", "Storm hits coast.")
        r = greedy_select(s, [0.5, 0.5], Budget("words", 100), 0.5)
        assert r.selected == (0,)

    def test_budget_arithmetic(self):
        s = sents(words("a", 60), words("b", 50))
        r = greedy_select(s, [0.9, 0.8], Budget("words", 100), 0.5)
        assert r.selected == (0,) and r.used == 60

    def test_smaller_later_sentence_still_fits(self):
        s = sents(words("a", 60), words("b", 50), words("c", 30))
        r = greedy_select(s, [0.9, 0.8, 0.1], Budget("words", 100), 0.5)
        assert r.selected == (0, 2)

    def test_document_order_output(self):
        s = sents("First one.", "Second one here.", "Third item now.")
        r = greedy_select(s, [0.1, 0.2, 0.9], Budget("words", 100), 1.0)
        assert r.text.startswith("First")

    def test_ties_prefer_earlier(self):
        s = sents(words("a", 6), words("b", 6))
        assert greedy_select(s, [0.5, 0.5], Budget("words", 6), 1.0).selected == (0,)

    def test_byte_budget_counts_spaces(self):
        s = sents("abcd.", "efgh.")                       # 5 bytes each, joined: 11
        assert greedy_select(s, [1, 0.5], Budget("bytes", 10), 1.0).selected == (0,)
        r = greedy_select(s, [1, 0.5], Budget("bytes", 11), 1.0)
        assert r.selected == (0, 1) and r.used == 11

    def test_nothing_fits(self):
        r = greedy_select(sents(words("a", 20)), [1.0], Budget("words", 5))
        assert r.selected == () and r.text == "" and r.used == 0

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            greedy_select(sents("A b."), [1.0, 2.0], Budget("words", 5))
        with pytest.raises(ValueError):
            greedy_select(sents("A b."), [1.0], Budget("words", 5), 1.5)


sentence_texts = st.lists(st.lists(st.sampled_from(["storm", "coast", "rain", "city", "the", "mayor", "flood"]),
                                   min_size=1, max_size=12).map(lambda ws: " ".join(ws) + "."),
                          min_size=1, max_size=10)


@settings(max_examples=1000, deadline=None)
@given(sentence_texts, st.data(), st.sampled_from(["words", "bytes"]), st.integers(1, 120),
       st.floats(0, 1))
def test_budget_never_exceeded(texts, data, unit, value, threshold):
    scores = data.draw(st.lists(st.floats(-1, 1), min_size=len(texts), max_size=len(texts)))
    r = greedy_select(sents(*texts), scores, Budget(unit, value), threshold)
    assert r.used <= value
    assert sentence_cost(r.text, unit) == r.used
    assert list(r.selected) == sorted(set(r.selected))


@settings(max_examples=1000, deadline=None)
@given(sentence_texts, st.data(), st.integers(1, 60))
def test_threshold_one_depends_only_on_order_and_budget(texts, data, value):
    """With no redundancy filter the selection is a budget walk down the score order."""
    scores = data.draw(st.lists(st.floats(-1, 1), min_size=len(texts), max_size=len(texts)))
    s = sents(*texts)
    r = greedy_select(s, scores, Budget("words", value), 1.0)
    used, expected = 0, []
    for i in sorted(range(len(s)), key=lambda i: (-scores[i], i)):
        cost = len(s[i].source_text.split())
        if used + cost <= value:
            expected.append(i)
            used += cost
    assert r.selected == tuple(sorted(expected))
    # doubling is exact in floating point, so order and selection are kept
    assert greedy_select(s, [2 * x for x in scores], Budget("words", value), 1.0).selected == r.selected


@settings(max_examples=1000, deadline=None)
@given(sentence_texts, st.data(), st.integers(1, 60), st.floats(0, 1))
def test_deterministic(texts, data, value, threshold):
    scores = data.draw(st.lists(st.floats(-1, 1), min_size=len(texts), max_size=len(texts)))
    s = sents(*texts)
    assert greedy_select(s, scores, Budget("words", value), threshold) == \
        greedy_select(list(s), list(scores), Budget("words", value), threshold)
