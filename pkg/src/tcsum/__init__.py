"""Category-adaptive extractive multi-document summarization.

A CNN text classifier supplies document vectors and category distributions;
category-weighted transformation matrices turn a cluster vector into a
summary embedding, and sentences are ranked by cosine against it.
"""

__version__ = "0.1.0"

from .errors import DataError, ModelError, TCSumError
from .numerics import AdaGradState, adagrad_step, cosine, grad_check, init_uniform, make_rng, softmax
from .textdata import (Budget, ClusterRecord, EmbeddingTable, LabeledDoc, SentenceTokens,
                       load_embeddings, read_classification_corpus, read_cluster_corpus,
                       save_embeddings, tokenize, write_classification_corpus, write_cluster_corpus)
from .encoder import EncoderParams, encode_document, encode_documents, encode_sentence, init_encoder
from .classifier import ClassifierConfig, ClassifierParams, classify, cross_entropy, train_classifier
from .rouge import RougeConfig, label_saliency, rouge_n, score_summary
from .selection import SummaryResult, greedy_select
from .summarizer import (MODES, SummarizerConfig, SummarizerParams, TCSumModel, compose_transform,
                         pairwise_loss, rank_sentences, saliency, style_similarity, summary_embedding,
                         train_summarizer)
from .harness import EvalReport, ExperimentConfig, assign_folds, run_crossval
