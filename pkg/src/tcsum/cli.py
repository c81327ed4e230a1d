"""Command line interface.

Every subcommand accepts ``--config FILE``: a flat ``key = value`` text file
whose keys are the long option names (dashes or underscores). Blank lines and
lines starting with ``#`` are ignored. Flags given on the command line win
over the file, which wins over the built-in defaults.

Exit status: 0 on success, 1 on usage errors, 2 on data or model errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .classifier import ClassifierConfig, accuracy, train_classifier
from .errors import DataError, ModelError, TCSumError
from .harness import (ExperimentConfig, assign_folds, run_crossval, style_report, style_table,
                      summarize_cluster, train_base, write_crossval_outputs)
from .rouge import RougeConfig, rouge_n, rouge_tokens, score_summary
from .summarizer import MODES, SummarizerConfig, SummarizerParams, TCSumModel, train_summarizer
from .synthetic import SynthConfig, synth_corpus
from .textdata import (load_embeddings, read_classification_corpus, read_cluster_corpus,
                       save_embeddings, write_classification_corpus, write_cluster_corpus)

log = logging.getLogger("tcsum")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _modes(text: str) -> tuple[str, ...]:
    modes = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"modes must be a comma list drawn from {', '.join(MODES)}")
    return modes


# name -> (type, default, help); every option is --name-with-dashes
_COMMON = {"config": (str, None, "flat key=value file supplying defaults for any option below"),
           "verbose": (_bool, False, "log progress to stderr")}

_OPTIONS = {
    "synth": {
        "out": (str, None, "output directory (classification.jsonl, clusters.jsonl, embeddings.txt)"),
        "seed": (int, 7, "generator seed"),
        "categories": (int, 3, "number of categories"),
        "docs_per_cat": (int, SynthConfig.docs_per_cat, "classification documents per category"),
        "clusters_per_cat": (int, SynthConfig.clusters_per_cat, "summarization clusters per category"),
        "style_signal": (float, SynthConfig.style_signal, "weight of own-category style in importance, in [0, 1]"),
        "style_cohesion": (float, SynthConfig.style_cohesion, "share of a style token's vector from its category direction"),
        "dim": (int, SynthConfig.dim, "word vector dimension"),
    },
    "train-classifier": {
        "corpus": (str, None, "classification corpus (JSON lines: id, category, text)"),
        "embeddings": (str, None, "word vectors in text format"),
        "out": (str, None, "path of the model file to write"),
        "epochs": (int, 10, "training epochs"),
        "batch_size": (int, 128, "documents per mini-batch"),
        "learning_rate": (float, 0.1, "AdaGrad learning rate"),
        "m": (int, 50, "number of convolution filters"),
        "h": (int, 2, "convolution window width"),
        "seed": (int, 0, "initialization and shuffling seed"),
        "heldout_fraction": (float, 0.0, "fraction of documents held out for accuracy and early stopping"),
        "patience": (int, 3, "stop after this many epochs without held-out gain (needs held-out documents)"),
    },
    "train-summarizer": {
        "clusters": (str, None, "cluster corpus with references (JSON lines)"),
        "embeddings": (str, None, "word vectors in text format"),
        "base_model": (str, None, "classifier model from train-classifier (not used by notc)"),
        "out": (str, None, "path of the model file to write"),
        "mode": (str, "tcsum", "one of " + ", ".join(MODES)),
        "epochs": (int, 10, "training epochs"),
        "pairs_per_cluster": (int, 64, "sentence pairs sampled per cluster and epoch"),
        "omega": (float, 0.1, "hinge margin"),
        "learning_rate": (float, 0.1, "AdaGrad learning rate"),
        "batch_size": (int, 128, "pairs per mini-batch"),
        "hi_pct": (float, 0.3, "fraction of top-labeled sentences eligible as positives"),
        "lo_pct": (float, 0.3, "fraction of bottom-labeled sentences eligible as negatives"),
        "m": (int, 50, "number of convolution filters (notc only)"),
        "h": (int, 2, "convolution window width (notc only)"),
        "seed": (int, 0, "sampling and initialization seed"),
    },
    "summarize": {
        "model": (str, None, "trained model file"),
        "embeddings": (str, None, "word vectors in text format"),
        "clusters": (str, None, "cluster corpus (JSON lines)"),
        "cluster_id": (str, None, "summarize only this cluster"),
        "mode": (str, None, "ranking mode; defaults to the model's own, emsim is always available"),
        "force_category": (str, None, "use this category's transformation instead of the classifier's mix"),
        "redundancy_threshold": (float, 0.5, "skip sentences whose content words overlap the summary more than this"),
        "out": (str, None, "write JSON lines here instead of stdout"),
    },
    "rouge": {
        "candidate": (str, None, "candidate summary text file"),
        "reference": (str, None, "reference text file; repeat the flag for several"),
        "stem": (_bool, True, "apply Porter stemming"),
    },
    "crossval": {
        "classification": (str, None, "classification corpus (not needed when modes=notc)"),
        "clusters": (str, None, "cluster corpus with references"),
        "embeddings": (str, None, "word vectors in text format"),
        "out": (str, None, "output directory for reports, manifest and models"),
        "modes": (_modes, MODES, "comma-separated modes to compare"),
        "folds": (int, 3, "number of folds (at least 2)"),
        "seed": (int, 0, "run seed for fold assignment and training"),
        "classifier_epochs": (int, 10, "classifier training epochs"),
        "summarizer_epochs": (int, 10, "summarizer training epochs"),
        "pairs_per_cluster": (int, 64, "sentence pairs sampled per cluster and epoch"),
        "omega": (float, 0.1, "hinge margin"),
        "learning_rate": (float, 0.1, "AdaGrad learning rate"),
        "batch_size": (int, 128, "mini-batch size"),
        "hi_pct": (float, 0.3, "top-label fraction for positives"),
        "lo_pct": (float, 0.3, "bottom-label fraction for negatives"),
        "m": (int, 50, "number of convolution filters"),
        "h": (int, 2, "convolution window width"),
        "redundancy_threshold": (float, 0.5, "selection redundancy threshold"),
        "workers": (int, 1, "threads for held-out evaluation"),
    },
    "style-analysis": {
        "model": (str, None, "trained tcsum model file"),
        "out": (str, None, "also write the JSON report here"),
    },
}

_REQUIRED = {
    "synth": ["out"],
    "train-classifier": ["corpus", "embeddings", "out"],
    "train-summarizer": ["clusters", "embeddings", "out"],
    "summarize": ["model", "embeddings", "clusters"],
    "rouge": ["candidate", "reference"],
    "crossval": ["clusters", "embeddings", "out"],
    "style-analysis": ["model"],
}

_HELP = {
    "synth": "write a deterministic synthetic corpus",
    "train-classifier": "train the CNN classifier (encoder and softmax layer)",
    "train-summarizer": "train the ranking summarizer on top of a classifier",
    "summarize": "rank sentences and emit greedy budgeted summaries",
    "rouge": "ROUGE-1/2 recall of a candidate against references",
    "crossval": "cross-validated comparison of summarizer modes",
    "style-analysis": "pairwise similarity of the per-category transformations",
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tcsum", description="Category-adaptive extractive multi-document summarization.",
                     epilog="Run 'tcsum COMMAND --help' for the options of each command.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, options in _OPTIONS.items():
        p = sub.add_parser(name, help=_HELP[name], description=_HELP[name])
        for key, (typ, default, text) in {**options, **_COMMON}.items():
            flag = "--" + key.replace("_", "-")
            shown = ",".join(default) if isinstance(default, tuple) else default
            suffix = " (required)" if key in _REQUIRED[name] else f" (default: {shown})"
            kwargs = dict(dest=key, default=argparse.SUPPRESS, help=text + suffix)
            if key == "reference":
                kwargs["action"] = "append"
            elif key == "verbose":
                kwargs.update(action="store_const", const=True, help=text)
            else:
                kwargs["type"] = typ
            p.add_argument(flag, **kwargs)
    return parser


def read_config_file(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file into raw strings."""
    out: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read config file {path}: {exc.strerror}") from None
    for no, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{no}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve_options(command: str, namespace: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    options = _OPTIONS[command]
    resolved = {k: d for k, (_, d, _) in {**options, **_COMMON}.items()}
    given = vars(namespace)
    if given.get("config"):
        for key, raw in read_config_file(given["config"]).items():
            if key not in options:
                raise UsageError(f"{given['config']}: unknown key {key!r} for {command}")
            typ = options[key][0]
            try:
                if key == "reference":
                    resolved[key] = [r.strip() for r in raw.split(",") if r.strip()]
                else:
                    resolved[key] = typ(raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{given['config']}: bad value for {key}: {exc}") from None
    for key, value in given.items():
        if key != "command":
            resolved[key] = value
    missing = [k for k in _REQUIRED[command] if resolved.get(k) in (None, [])]
    if missing:
        raise UsageError(f"tcsum {command}: missing required option(s): "
                         + ", ".join("--" + k.replace("_", "-") for k in missing))
    return resolved


def _write_json(obj, path=None) -> None:
    text = json.dumps(obj, indent=1) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_synth(o: dict) -> None:
    cfg = SynthConfig(categories=o["categories"], docs_per_cat=o["docs_per_cat"],
                      clusters_per_cat=o["clusters_per_cat"], style_signal=o["style_signal"],
                      style_cohesion=o["style_cohesion"], dim=o["dim"])
    docs, clusters, table = synth_corpus(o["seed"], cfg)
    out = Path(o["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_classification_corpus(docs, out / "classification.jsonl")
    write_cluster_corpus(clusters, out / "clusters.jsonl")
    save_embeddings(table, out / "embeddings.txt")
    (out / "synth_config.json").write_text(json.dumps({"seed": o["seed"], **cfg.to_dict()}, indent=1) + "\n",
                                           encoding="utf-8")
    print(f"wrote {len(docs)} documents, {len(clusters)} clusters, {len(table.tokens)} vectors to {out}")


def cmd_train_classifier(o: dict) -> None:
    table = load_embeddings(o["embeddings"])
    docs, _ = read_classification_corpus(o["corpus"])
    frac = o["heldout_fraction"]
    if not 0.0 <= frac < 1.0:
        raise UsageError("--heldout-fraction must lie in [0, 1)")
    n_held = int(round(frac * len(docs)))
    train, held = docs[:len(docs) - n_held], docs[len(docs) - n_held:]
    cfg = ClassifierConfig(epochs=o["epochs"], batch_size=o["batch_size"], learning_rate=o["learning_rate"],
                           seed=o["seed"], m=o["m"], h=o["h"], patience=o["patience"])
    categories = list(dict.fromkeys(d.category for d in docs))
    enc, cls, _ = train_classifier(train, table, cfg, categories=categories, heldout=held)
    model = TCSumModel(enc, cls, SummarizerParams([], "emsim"), categories)
    model.save(o["out"])
    report = {"model": o["out"], "train_accuracy": accuracy(train, table, enc, cls)}
    if held:
        report["heldout_accuracy"] = accuracy(held, table, enc, cls)
    _write_json(report)


def cmd_train_summarizer(o: dict) -> None:
    if o["mode"] not in MODES:
        raise UsageError(f"--mode must be one of {', '.join(MODES)}")
    table = load_embeddings(o["embeddings"])
    base = None
    if o["mode"] != "notc":
        if not o["base_model"]:
            raise UsageError(f"--base-model is required for mode {o['mode']}")
        base = TCSumModel.load(o["base_model"])
    clusters = read_cluster_corpus(o["clusters"], base.categories if base else None)
    cfg = SummarizerConfig(mode=o["mode"], epochs=o["epochs"], pairs_per_cluster=o["pairs_per_cluster"],
                           omega=o["omega"], learning_rate=o["learning_rate"], batch_size=o["batch_size"],
                           seed=o["seed"], hi_pct=o["hi_pct"], lo_pct=o["lo_pct"], m=o["m"], h=o["h"])
    model = train_summarizer(clusters, table, cfg, base=base)
    model.save(o["out"])
    _write_json({"model": o["out"], "mode": model.mode, "clusters": len(clusters)})


def cmd_summarize(o: dict) -> None:
    model = TCSumModel.load(o["model"])
    table = load_embeddings(o["embeddings"])
    clusters = read_cluster_corpus(o["clusters"])
    if o["cluster_id"] is not None:
        clusters = [c for c in clusters if c.id == o["cluster_id"]]
        if not clusters:
            raise DataError(f"no cluster with id {o['cluster_id']!r} in {o['clusters']}")
    if o["mode"] is not None and o["mode"] not in MODES:
        raise UsageError(f"--mode must be one of {', '.join(MODES)}")
    lines = []
    for c in clusters:
        scores, result = summarize_cluster(c, model, table, o["redundancy_threshold"],
                                           force_category=o["force_category"], mode=o["mode"])
        rec = {"id": c.id, "mode": o["mode"] or model.mode, "forced_category": o["force_category"],
               "scores": [float(s) for s in scores], "selected": list(result.selected),
               "text": result.text, "used": result.used,
               "budget": {"unit": result.budget.unit, "value": result.budget.value}}
        if c.references:
            rec["rouge"] = score_summary(result.text, c.references)
        lines.append(json.dumps(rec))
    text = "".join(line + "\n" for line in lines)
    if o["out"]:
        Path(o["out"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def cmd_rouge(o: dict) -> None:
    cand = rouge_tokens(_read_text(o["candidate"]))
    refs = [rouge_tokens(_read_text(p)) for p in o["reference"]]
    _write_json({f"rouge_{n}": rouge_n(cand, refs, RougeConfig(n=n, stem=o["stem"])) for n in (1, 2)})


def cmd_crossval(o: dict) -> None:
    if o["folds"] < 2:
        raise UsageError("--folds must be at least 2")
    cfg = ExperimentConfig(classification_path=o["classification"], clusters_path=o["clusters"],
                           embeddings_path=o["embeddings"], out_dir=o["out"], m=o["m"], h=o["h"],
                           omega=o["omega"], learning_rate=o["learning_rate"], batch_size=o["batch_size"],
                           classifier_epochs=o["classifier_epochs"], summarizer_epochs=o["summarizer_epochs"],
                           pairs_per_cluster=o["pairs_per_cluster"], hi_pct=o["hi_pct"], lo_pct=o["lo_pct"],
                           redundancy_threshold=o["redundancy_threshold"], modes=o["modes"],
                           folds=o["folds"], seed=o["seed"], workers=o["workers"])
    table = load_embeddings(cfg.embeddings_path)
    cfg.k = table.dim
    docs = None
    categories = None
    if any(m != "notc" for m in cfg.modes):
        if not cfg.classification_path:
            raise UsageError("--classification is required unless modes=notc")
        docs, _ = read_classification_corpus(cfg.classification_path)
        categories = list(dict.fromkeys(d.category for d in docs))
    clusters = read_cluster_corpus(cfg.clusters_path, categories)
    base = train_base(docs, table, cfg) if docs else None
    report = run_crossval(assign_folds(clusters, cfg.folds, cfg.seed), table, cfg, base=base)
    inputs = {"classification": cfg.classification_path, "clusters": cfg.clusters_path,
              "embeddings": cfg.embeddings_path}
    write_crossval_outputs(report, cfg.out_dir, cfg, inputs, base=base)
    sys.stdout.write(report.to_text())


def cmd_style_analysis(o: dict) -> None:
    model = TCSumModel.load(o["model"])
    if model.mode != "tcsum":
        raise ModelError(f"style analysis needs a tcsum model, {o['model']} is {model.mode}")
    report = style_report(model)
    if o["out"]:
        _write_json(report, o["out"])
    sys.stdout.write(json.dumps(report) + "\n\n" + style_table(report))


_COMMANDS = {
    "synth": cmd_synth,
    "train-classifier": cmd_train_classifier,
    "train-summarizer": cmd_train_summarizer,
    "summarize": cmd_summarize,
    "rouge": cmd_rouge,
    "crossval": cmd_crossval,
    "style-analysis": cmd_style_analysis,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        options = resolve_options(ns.command, ns)
        logging.basicConfig(level=logging.INFO if options["verbose"] else logging.WARNING,
                            format="%(name)s: %(message)s")
        _COMMANDS[ns.command](options)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip("\n") + "\n")
        return 1
    except (TCSumError, OSError, ValueError) as exc:
        sys.stderr.write(f"tcsum: error: {exc}\n")
        return 2
    except SystemExit as exc:   # --help
        return int(exc.code or 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
