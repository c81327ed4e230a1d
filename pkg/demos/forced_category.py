"""
Forcing a category
==================

The classifier normally mixes the category matrices. Forcing one category
instead shows how the summary changes with the assumed style.
"""

import numpy as np

from tcsum import (ClassifierConfig, SummarizerConfig, SummarizerParams, TCSumModel, classify, encode_documents,
                   train_classifier, train_summarizer)
from tcsum.harness import forced_category_scores, summarize_cluster
from tcsum.synthetic import SynthConfig, synth_corpus

docs, clusters, table = synth_corpus(2, SynthConfig(docs_per_cat=150, clusters_per_cat=20,
                                                     style_signal=1.0, dim=20))
enc, cls, _ = train_classifier(docs, table, ClassifierConfig(epochs=5, m=20))
base = TCSumModel(enc, cls, SummarizerParams([], "emsim"), list(cls.categories))
train, test = clusters[:-6], clusters[-6:]
model = train_summarizer(train, table, SummarizerConfig(epochs=5, m=20), base=base)

###############################################################################
# ROUGE-2 per forced category. The true category is marked with a star.

for cluster, row in zip(test, forced_category_scores(test, model, table)):
    cells = "  ".join(f"{cat}{'*' if cat == cluster.category else ' '} {v:.3f}" for cat, v in row.items())
    print(f"{cluster.id:<18} {cells}")

###############################################################################
# The selected sentence positions for one cluster under each forced category.

cluster = test[0]
for cat in model.categories:
    _, result = summarize_cluster(cluster, model, table, force_category=cat)
    print(f"{cat:<10} selected {list(result.selected)}")
_, free = summarize_cluster(cluster, model, table)
print(f"{'(mixed)':<10} selected {list(free.selected)}")

###############################################################################
# The mix the classifier assigned to this cluster.

tokens = [[s.tokens for s in cluster.sentences()]]
v_doc, _ = encode_documents(tokens, table, model.encoder)
probs = classify(v_doc[0], model.classifier).probs
print("category mix:", {c: round(float(p), 3) for c, p in zip(model.categories, probs)})
