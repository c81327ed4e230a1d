"""
Comparing category styles
=========================

Each category owns one transformation matrix. Flattening the matrices and
taking pairwise cosines shows which categories summarize alike.
"""

from tcsum import ClassifierConfig, SummarizerConfig, SummarizerParams, TCSumModel, train_classifier, train_summarizer
from tcsum.harness import style_report, style_table
from tcsum.synthetic import SynthConfig, synth_corpus

###############################################################################
# Four categories this time, with summaries driven purely by style.

docs, clusters, table = synth_corpus(1, SynthConfig(categories=4, docs_per_cat=150, clusters_per_cat=15,
                                                     style_signal=1.0, dim=20))
enc, cls, _ = train_classifier(docs, table, ClassifierConfig(epochs=5, m=20))
base = TCSumModel(enc, cls, SummarizerParams([], "emsim"), list(cls.categories))
model = train_summarizer(clusters, table, SummarizerConfig(epochs=5, m=20), base=base)

###############################################################################
# The table has zeros on the diagonal; self-similarity carries no information.

print(style_table(style_report(model)))
