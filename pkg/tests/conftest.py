import numpy as np
import pytest

from tcsum.synthetic import SynthConfig, synth_corpus
from tcsum.textdata import EmbeddingTable

SMALL = SynthConfig(docs_per_cat=30, clusters_per_cat=4, sents_per_doc=4, dim=8)


def pytest_collection_modifyitems(items):
    """Tag hypothesis tests with ``property`` and record their example budget."""
    for item in items:
        fn = getattr(item, "function", None)
        settings = getattr(fn, "_hypothesis_internal_use_settings", None)
        if getattr(fn, "is_hypothesis_test", False) and settings is not None:
            item.add_marker(pytest.mark.property)
            item.user_properties.append(("max_examples", settings.max_examples))


@pytest.fixture(scope="session")
def small_corpus():
    """A few dozen documents and a dozen clusters over 8-dim vectors."""
    return synth_corpus(3, SMALL)


@pytest.fixture
def tiny_table():
    tokens = ["the", "cat", "sat", "on", "mat", "dog"]
    vectors = np.arange(len(tokens) * 3, dtype=float).reshape(-1, 3) / 10.0
    return EmbeddingTable(tokens, vectors)


@pytest.fixture(scope="session")
def small_base(small_corpus):
    """Classifier-only model (two epochs, m=6) on the small corpus."""
    from tcsum.classifier import ClassifierConfig, train_classifier
    from tcsum.summarizer import SummarizerParams, TCSumModel

    docs, _, table = small_corpus
    enc, cls, _ = train_classifier(docs, table, ClassifierConfig(epochs=2, m=6, batch_size=32, seed=0))
    return TCSumModel(enc, cls, SummarizerParams([], "emsim"), list(cls.categories))
