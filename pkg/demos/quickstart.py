"""
Quickstart: classifier transfer into a summarizer
=================================================

Generate a small synthetic corpus, train the CNN classifier, reuse its
encoder and category distribution to train a summarizer, then summarize
one cluster.
"""

import numpy as np

from tcsum import (ClassifierConfig, SummarizerConfig, SummarizerParams, TCSumModel, greedy_select,
                   rank_sentences, score_summary, train_classifier, train_summarizer)
from tcsum.synthetic import SynthConfig, synth_corpus

###############################################################################
# A corpus with three categories. Each category has its own style lexicon;
# reference summaries favour sentences written in the cluster's own style.

config = SynthConfig(docs_per_cat=150, clusters_per_cat=20, dim=20)
docs, clusters, table = synth_corpus(seed=0, config=config)
print(f"{len(docs)} labeled documents, {len(clusters)} clusters, {table.dim}-dim vectors")

###############################################################################
# Train the classifier. Its convolution filters become the shared encoder.

enc, cls, log = train_classifier(docs, table, ClassifierConfig(epochs=5, m=20))
print("classifier loss per epoch:", [round(e["loss"], 3) for e in log.epochs])
base = TCSumModel(enc, cls, SummarizerParams([], "emsim"), list(cls.categories))

###############################################################################
# Train the summarizer on all but the last five clusters. The encoder and
# the classifier stay frozen; only the per-category matrices learn.

train, test = clusters[:-5], clusters[-5:]
model = train_summarizer(train, table, SummarizerConfig(epochs=5, m=20), base=base)

###############################################################################
# Rank the sentences of a held-out cluster and pick a summary under its budget.

cluster = test[0]
scores = rank_sentences(cluster, model, table)
summary = greedy_select(cluster.sentences(), scores, cluster.budget)
print("top sentence scores:", np.round(np.sort(scores)[::-1][:4], 3))
print("summary:", summary.text)
print("ROUGE:", {k: round(v, 3) for k, v in score_summary(summary.text, cluster.references).items()})
