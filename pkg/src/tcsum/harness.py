"""Cross-validation, experiment configuration and report emission."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .classifier import ClassifierConfig, train_classifier
from .errors import DataError
from .numerics import make_rng
from .rouge import score_summary
from .selection import greedy_select
from .summarizer import (MODES, SummarizerConfig, SummarizerParams, TCSumModel, prepare_clusters,
                         rank_sentences, style_similarity, train_summarizer)
from .textdata import ClusterRecord, EmbeddingTable, LabeledDoc

log = logging.getLogger(__name__)

REPORT_SCHEMA = 1


@dataclass
class ExperimentConfig:
    classification_path: str | None = None
    clusters_path: str | None = None
    embeddings_path: str | None = None
    out_dir: str | None = None
    k: int = 50
    m: int = 50
    h: int = 2
    omega: float = 0.1
    learning_rate: float = 0.1
    batch_size: int = 128
    classifier_epochs: int = 10
    summarizer_epochs: int = 10
    pairs_per_cluster: int = 64
    hi_pct: float = 0.3
    lo_pct: float = 0.3
    redundancy_threshold: float = 0.5
    modes: tuple[str, ...] = MODES
    folds: int = 3
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.modes = tuple(self.modes)
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ValueError(f"unknown mode(s) {bad}; expected a subset of {MODES}")

    def to_dict(self) -> dict:
        """Settings that influence results (output location and thread count do not)."""
        d = dataclasses.asdict(self)
        d["modes"] = list(self.modes)
        del d["out_dir"], d["workers"]
        return d

    def overrides(self) -> dict:
        """Fields that differ from the defaults."""
        base = ExperimentConfig().to_dict()
        return {k: v for k, v in self.to_dict().items() if base[k] != v}

    def sha256(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    def classifier_config(self) -> ClassifierConfig:
        return ClassifierConfig(epochs=self.classifier_epochs, batch_size=self.batch_size,
                                learning_rate=self.learning_rate, seed=self.seed, m=self.m, h=self.h)

    def summarizer_config(self, mode: str, seed: int) -> SummarizerConfig:
        return SummarizerConfig(mode=mode, epochs=self.summarizer_epochs,
                                pairs_per_cluster=self.pairs_per_cluster, omega=self.omega,
                                learning_rate=self.learning_rate, batch_size=self.batch_size,
                                seed=seed, hi_pct=self.hi_pct, lo_pct=self.lo_pct, m=self.m, h=self.h)


def derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def assign_folds(clusters: Sequence[ClusterRecord], n_folds: int, seed: int) -> list[list[ClusterRecord]]:
    """Round-robin fold assignment over a seeded permutation of the clusters."""
    if n_folds < 2:
        raise DataError("cross-validation needs at least two folds")
    order = make_rng(seed).permutation(len(clusters))
    fold_of = np.empty(len(clusters), dtype=np.int64)
    fold_of[order] = np.arange(len(clusters)) % n_folds
    return [[c for c, f in zip(clusters, fold_of) if f == i] for i in range(n_folds)]


@dataclass(frozen=True)
class ClusterScore:
    cluster_id: str
    fold: int
    mode: str
    rouge_1: float
    rouge_2: float
    selected: tuple[int, ...]


@dataclass
class EvalReport:
    config: dict
    modes: list[str]
    n_folds: int
    rows: list[ClusterScore]
    models: dict = field(default_factory=dict, repr=False)   # (fold, mode) -> TCSumModel
    folds: list = field(default_factory=list, repr=False)    # held-out clusters per fold

    def scores(self, mode: str, metric: str = "rouge_2", fold: int | None = None) -> list[float]:
        return [getattr(r, metric) for r in self.rows
                if r.mode == mode and (fold is None or r.fold == fold)]

    def mean(self, mode: str, metric: str = "rouge_2", fold: int | None = None) -> float:
        vals = self.scores(mode, metric, fold)
        return sum(vals) / len(vals)

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA,
            "config": self.config,
            "modes": self.modes,
            "n_folds": self.n_folds,
            "mean": {m: {k: self.mean(m, k) for k in ("rouge_1", "rouge_2")} for m in self.modes},
            "folds": [
                {"fold": f, "mean": {m: {k: self.mean(m, k, f) for k in ("rouge_1", "rouge_2")}
                                     for m in self.modes}}
                for f in range(self.n_folds)
            ],
            "clusters": [dataclasses.asdict(r) | {"selected": list(r.selected)} for r in self.rows],
            "runtime": runtime_metadata(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_text(self) -> str:
        head = f"{'mode':<8} " + " ".join(f"{'fold' + str(f) + ' R1':>10} {'fold' + str(f) + ' R2':>10}"
                                          for f in range(self.n_folds))
        head += f" {'mean R1':>9} {'mean R2':>9}"
        lines = ["ROUGE recall (%)", head, "-" * len(head)]
        for m in self.modes:
            cells = " ".join(f"{100 * self.mean(m, 'rouge_1', f):>10.2f} {100 * self.mean(m, 'rouge_2', f):>10.2f}"
                             for f in range(self.n_folds))
            lines.append(f"{m:<8} {cells} {100 * self.mean(m, 'rouge_1'):>9.2f} "
                         f"{100 * self.mean(m, 'rouge_2'):>9.2f}")
        return "\n".join(lines) + "\n"


def runtime_metadata() -> dict:
    """Environment facts that are stable between identical runs (no clocks)."""
    return {"package": __version__, "numpy": np.__version__, "python": platform.python_version()}


def summarize_cluster(cluster: ClusterRecord, model: TCSumModel, table: EmbeddingTable,
                      redundancy_threshold: float = 0.5, force_category=None, mode: str | None = None):
    scores = rank_sentences(cluster, model, table, mode=mode, force_category=force_category)
    return scores, greedy_select(cluster.sentences(), scores, cluster.budget, redundancy_threshold)


def evaluate(clusters: Sequence[ClusterRecord], model: TCSumModel, table: EmbeddingTable,
             redundancy_threshold: float = 0.5, workers: int = 1, force_category=None
             ) -> list[tuple[dict, tuple[int, ...]]]:
    """ROUGE of the greedy summary for each cluster, in input order."""
    def one(c):
        _, result = summarize_cluster(c, model, table, redundancy_threshold, force_category)
        return score_summary(result.text, c.references), result.selected

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, clusters))
    return [one(c) for c in clusters]


def train_base(docs: Sequence[LabeledDoc], table: EmbeddingTable, config: ExperimentConfig) -> TCSumModel:
    enc, cls, _ = train_classifier(docs, table, config.classifier_config())
    return TCSumModel(enc, cls, SummarizerParams([], "emsim"), list(cls.categories))


def run_crossval(folds: Sequence[Sequence[ClusterRecord]], table: EmbeddingTable,
                 config: ExperimentConfig, base: TCSumModel | None = None,
                 classification_docs: Sequence[LabeledDoc] | None = None) -> EvalReport:
    """Train on all folds but one, evaluate greedy summaries on the held-out fold, rotate."""
    if len(folds) < 2:
        raise DataError("cross-validation needs at least two folds")
    if any(len(f) == 0 for f in folds):
        raise DataError("every fold must contain at least one cluster")
    for key, value in config.overrides().items():
        log.info("config override: %s = %r", key, value)
    if base is None and any(m != "notc" for m in config.modes):
        if not classification_docs:
            raise DataError("modes other than notc need classification data or a base model")
        base = train_base(classification_docs, table, config)

    rows: list[ClusterScore] = []
    models = {}
    for i, test in enumerate(folds):
        if any(not c.references for c in test):
            raise DataError(f"fold {i}: held-out clusters need references for evaluation")
        train = [c for j, f in enumerate(folds) if j != i for c in f]
        prepared = prepare_clusters(train, table, config.h)
        if not prepared:
            raise DataError(f"fold {i}: no labeled training clusters")
        for mode_idx, mode in enumerate(config.modes):
            seed = derived_seed(config.seed, i, mode_idx)
            model = train_summarizer(train, table, config.summarizer_config(mode, seed), base=base,
                                     prepared=prepared)
            models[(i, mode)] = model
            for c, (scores, selected) in zip(test, evaluate(test, model, table, config.redundancy_threshold,
                                                            config.workers)):
                rows.append(ClusterScore(c.id, i, mode, scores["rouge_1"], scores["rouge_2"], selected))
            log.info("fold %d %s: R1=%.4f R2=%.4f", i, mode,
                     np.mean([r.rouge_1 for r in rows if r.fold == i and r.mode == mode]),
                     np.mean([r.rouge_2 for r in rows if r.fold == i and r.mode == mode]))
    return EvalReport(config.to_dict(), list(config.modes), len(folds), rows, models,
                      [list(f) for f in folds])


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest(config: ExperimentConfig, inputs: dict[str, str | None]) -> dict:
    """Everything needed to rerun an experiment: config hash, seed, input checksums."""
    return {
        "config_sha256": config.sha256(),
        "config": config.to_dict(),
        "seed": config.seed,
        "inputs": {name: {"path": str(p), "sha256": file_sha256(p)}
                   for name, p in sorted(inputs.items()) if p is not None},
        "runtime": runtime_metadata(),
    }


def write_crossval_outputs(report: EvalReport, out_dir, config: ExperimentConfig,
                           inputs: dict[str, str | None], base: TCSumModel | None = None) -> None:
    out = Path(out_dir)
    (out / "models").mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "manifest.json").write_text(json.dumps(manifest(config, inputs), indent=1) + "\n",
                                       encoding="utf-8")
    if base is not None:
        base.save(out / "models" / "base.json")
    for (fold, mode), model in sorted(report.models.items()):
        model.save(out / "models" / f"fold{fold}-{mode}.json")


def style_report(model: TCSumModel) -> dict:
    sim = style_similarity(model.summarizer.sub_matrices)
    return {"categories": list(model.categories), "similarity": sim.tolist()}


def style_table(report: dict) -> str:
    cats = report["categories"]
    width = max(8, max(len(c) for c in cats) + 1)
    lines = [" " * width + "".join(f"{c:>{width}}" for c in cats)]
    for c, row in zip(cats, report["similarity"]):
        lines.append(f"{c:<{width}}" + "".join(f"{v:>{width}.3f}" for v in row))
    return "\n".join(lines) + "\n"


def forced_category_scores(clusters: Sequence[ClusterRecord], model: TCSumModel, table: EmbeddingTable,
                           redundancy_threshold: float = 0.5) -> list[dict[str, float]]:
    """ROUGE-2 of the summary obtained when each category is forced, per cluster."""
    out = []
    for c in clusters:
        row = {}
        for cat in model.categories:
            _, result = summarize_cluster(c, model, table, redundancy_threshold, force_category=cat)
            row[cat] = score_summary(result.text, c.references)["rouge_2"]
        out.append(row)
    return out
