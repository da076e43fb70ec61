"""Pipeline stages and the run manifest.

Each stage reads its declared inputs from the output directory (or the
configured corpus path), writes its artifacts, and nothing else.  Re-running
a stage with unchanged inputs reproduces its outputs byte for byte.
"""

from __future__ import annotations

import hashlib
import os
import time
import warnings
from pathlib import Path

import numpy as np

from .. import __version__
from ..corpus import (
    Corpus,
    TokenizedDoc,
    default_lexicon,
    default_stopwords,
    load_lexicon,
    load_word_list,
    parse_corpus,
    preprocess_document,
    read_tokenized_corpus,
    tokenize_corpus,
    write_tokenized_corpus,
)
from ..graphs import (
    EdgePolicy,
    assemble_series,
    build_events,
    read_event_log,
    write_event_log,
    write_snapshot_series,
)
from ..metrics import (
    UnclassifiableCurveError,
    build_pair_labeling,
    classify_assembly,
    measure_series,
    null_model,
    pairwise_modularity,
    read_metric_curve,
    write_metric_curve,
    write_modularity_matrix,
    write_null_band,
)
from ..topics import (
    LdaConfig,
    TopicAssignment,
    assign_articles,
    infer_theta,
    load_model,
    save_model,
    top_words,
    train_lda,
)
from .config import NULL_TOPIC_STRIDE, PipelineConfig, derive_seed

__all__ = [
    "StageError",
    "StageDependencyError",
    "STAGE_ORDER",
    "run_stage",
    "run_all",
    "apply_model",
    "write_manifest",
]


class StageError(RuntimeError):
    pass


class StageDependencyError(StageError):
    def __init__(self, missing: Path, needed_stage: str):
        super().__init__(
            f"missing input {missing}; run the '{needed_stage}' stage first"
        )
        self.needed_stage = needed_stage


# ---------------------------------------------------------------------------
# Artifact layout


def tokens_path(out: Path) -> Path:
    return out / "tokenized_corpus.txt"


def issues_path(out: Path) -> Path:
    return out / "ingest_issues.txt"


def model_path(out: Path) -> Path:
    return out / "model.json"


def top_words_path(out: Path) -> Path:
    return out / "top_words.tsv"


def assignments_path(out: Path) -> Path:
    return out / "assignments.tsv"


def events_path(out: Path, topic: int) -> Path:
    return out / "events" / f"topic_{topic:02d}.events"


def metrics_path(out: Path, topic: int, policy: EdgePolicy) -> Path:
    return out / "metrics" / f"topic_{topic:02d}_{policy}.csv"


def snapshots_path(out: Path, topic: int, policy: EdgePolicy) -> Path:
    return out / "snapshots" / f"topic_{topic:02d}_{policy}.txt"


def classification_path(out: Path, topic: int) -> Path:
    return out / "classifications" / f"topic_{topic:02d}.csv"


def null_path(out: Path, topic: int) -> Path:
    return out / "null" / f"topic_{topic:02d}.csv"


def modularity_path(out: Path) -> Path:
    return out / "modularity.csv"


def report_path(out: Path) -> Path:
    return out / "report.csv"


def manifest_path(out: Path) -> Path:
    return out / "manifest.txt"


def _require(path: Path, needed_stage: str) -> Path:
    if not path.exists():
        raise StageDependencyError(path, needed_stage)
    return path


def _load_corpus(config: PipelineConfig) -> Corpus:
    if not config.corpus.exists():
        raise StageError(f"corpus file not found: {config.corpus}")
    with open(config.corpus, encoding="utf-8") as fh:
        corpus, _ = parse_corpus(fh)
    return corpus


def _stopwords(config: PipelineConfig) -> frozenset[str]:
    words = (
        load_word_list(config.stopwords)
        if config.stopwords
        else default_stopwords()
    )
    if config.extra_stopwords:
        words = words | load_word_list(config.extra_stopwords)
    return frozenset(words)


def _lexicon(config: PipelineConfig) -> dict[str, str]:
    return load_lexicon(config.lexicon) if config.lexicon else default_lexicon()


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _preprocessing_meta(config: PipelineConfig) -> dict[str, str]:
    meta = {}
    stop = config.stopwords if config.stopwords else None
    lex = config.lexicon if config.lexicon else None
    meta["stopwords_digest"] = _digest_words(_stopwords(config))
    meta["lexicon_digest"] = _digest_lexicon(_lexicon(config))
    meta["stopwords_path"] = str(stop) if stop else "builtin"
    meta["lexicon_path"] = str(lex) if lex else "builtin"
    return meta


def _digest_words(words: frozenset[str]) -> str:
    h = hashlib.sha256()
    for w in sorted(words):
        h.update(w.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def _digest_lexicon(lexicon: dict[str, str]) -> str:
    h = hashlib.sha256()
    for k in sorted(lexicon):
        h.update(f"{k}\t{lexicon[k]}\n".encode("utf-8"))
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Stages


def stage_ingest(config: PipelineConfig) -> list[Path]:
    out = config.out
    out.mkdir(parents=True, exist_ok=True)
    if not config.corpus.exists():
        raise StageError(f"corpus file not found: {config.corpus}")
    with open(config.corpus, encoding="utf-8") as fh:
        corpus, issues = parse_corpus(fh)
    vocab, docs = tokenize_corpus(
        corpus, _stopwords(config), _lexicon(config), config.min_count
    )
    write_tokenized_corpus(vocab, docs, tokens_path(out))
    with open(issues_path(out), "w", encoding="utf-8") as fh:
        for issue in issues:
            fh.write(f"{issue.line_no}\t{issue.message}\n")
    return [tokens_path(out), issues_path(out)]


def stage_train(config: PipelineConfig) -> list[Path]:
    out = config.out
    vocab, docs = read_tokenized_corpus(_require(tokens_path(out), "ingest"))
    lda = LdaConfig(
        k=config.k,
        alpha=config.effective_alpha(),
        beta=config.beta,
        iterations=config.iterations,
        seed=derive_seed(config.seed, "train"),
    )
    model = train_lda(docs, vocab, lda)
    model.meta.update(_preprocessing_meta(config))
    save_model(model, model_path(out))
    return [model_path(out)]


def stage_topwords(config: PipelineConfig, n: int = 15) -> list[Path]:
    out = config.out
    model = load_model(_require(model_path(out), "train"))
    with open(top_words_path(out), "w", encoding="utf-8") as fh:
        fh.write("topic\trank\tterm\tprobability\n")
        for topic in range(model.k):
            for rank, (term, prob) in enumerate(top_words(model, topic, n), start=1):
                fh.write(f"{topic}\t{rank}\t{term}\t{prob!r}\n")
    return [top_words_path(out)]


def _write_assignments(assignments: list[TopicAssignment], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("doc_id\ttopics\tscheme\n")
        for a in assignments:
            topics = " ".join(str(t) for t in a.topics)
            fh.write(f"{a.doc_id}\t{topics}\t{a.scheme}\n")


def read_assignments(path: Path) -> list[TopicAssignment]:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "doc_id\ttopics\tscheme":
        raise StageError(f"{path}: unexpected assignments header")
    out = []
    for line in lines[1:]:
        doc_id, topics_s, scheme = line.split("\t")
        topics = tuple(int(t) for t in topics_s.split()) if topics_s else ()
        out.append(TopicAssignment(doc_id=doc_id, topics=topics, scheme=scheme))
    return out


def stage_assign(config: PipelineConfig) -> list[Path]:
    out = config.out
    model = load_model(_require(model_path(out), "train"))
    if model.theta is None or model.doc_ids is None:
        raise StageError("model file lacks theta; retrain with theta retained")
    assignments = assign_articles(
        model.doc_ids, model.theta, config.assignment_scheme()
    )
    _write_assignments(assignments, assignments_path(out))
    return [assignments_path(out)]


def _topic_doc_ids(assignments: list[TopicAssignment]) -> dict[int, list[str]]:
    by_topic: dict[int, list[str]] = {}
    for a in assignments:
        for t in a.topics:
            by_topic.setdefault(t, []).append(a.doc_id)
    return by_topic


def _selected_topics(config: PipelineConfig, available: list[int]) -> list[int]:
    if config.topics_filter is None:
        return sorted(available)
    chosen = set(config.topics_filter)
    return [t for t in sorted(available) if t in chosen]


def stage_assemble(config: PipelineConfig, write_snapshots: bool = False) -> list[Path]:
    out = config.out
    assignments = read_assignments(_require(assignments_path(out), "assign"))
    corpus = _load_corpus(config)
    by_topic = _topic_doc_ids(assignments)
    (out / "events").mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []
    for topic in _selected_topics(config, list(by_topic)):
        log = build_events(
            by_topic[topic],
            corpus,
            config.convention,
            max_authors=config.max_authors,
        )
        if not log.events:
            continue
        write_event_log(log, events_path(out, topic))
        outputs.append(events_path(out, topic))
        if write_snapshots:
            (out / "snapshots").mkdir(exist_ok=True)
            for policy in config.edge_policies():
                series = assemble_series(log, policy)
                write_snapshot_series(series, snapshots_path(out, topic, policy))
                outputs.append(snapshots_path(out, topic, policy))
    return outputs


def _topics_with_events(out: Path) -> list[int]:
    events_dir = out / "events"
    if not events_dir.is_dir():
        raise StageDependencyError(events_dir, "assemble")
    topics = []
    for path in sorted(events_dir.glob("topic_*.events")):
        topics.append(int(path.stem.split("_")[1]))
    return topics


def stage_measure(config: PipelineConfig) -> list[Path]:
    out = config.out
    topics = _selected_topics(config, _topics_with_events(out))
    (out / "metrics").mkdir(parents=True, exist_ok=True)
    outputs = []
    for topic in topics:
        log = read_event_log(events_path(out, topic))
        for policy in config.edge_policies():
            series = assemble_series(log, policy)
            curve = measure_series(
                series,
                exact_limit=config.exact_path_limit,
                sample_sources=config.sample_sources,
                seed=derive_seed(config.seed, "measure"),
            )
            write_metric_curve(curve, metrics_path(out, topic, policy))
            outputs.append(metrics_path(out, topic, policy))
    return outputs


CLASSIFICATION_COLUMNS = (
    "topic,n_articles,assembly_class,final_gcc_fraction,peak_month,"
    "peak_value,decline_ratio"
)


def stage_classify(config: PipelineConfig) -> list[Path]:
    """Classify each topic's unlimited-lifetime curve."""
    out = config.out
    topics = _selected_topics(config, _topics_with_events(out))
    (out / "classifications").mkdir(parents=True, exist_ok=True)
    unlimited = EdgePolicy(None)
    outputs = []
    for topic in topics:
        curve_file = metrics_path(out, topic, unlimited)
        _require(curve_file, "measure")
        curve = read_metric_curve(curve_file)
        log = read_event_log(events_path(out, topic))
        try:
            result = classify_assembly(curve, config.classifier_thresholds())
            row = (
                f"{topic},{log.n_articles},{result.assembly_class},"
                f"{result.final_gcc_fraction!r},"
                f"{'' if result.peak_month is None else result.peak_month},"
                f"{'' if result.peak_value is None else repr(result.peak_value)},"
                f"{'' if result.decline_ratio is None else repr(result.decline_ratio)}"
            )
        except UnclassifiableCurveError:
            row = f"{topic},{log.n_articles},unclassifiable,,,,"
        with open(classification_path(out, topic), "w", encoding="utf-8") as fh:
            fh.write(CLASSIFICATION_COLUMNS + "\n")
            fh.write(row + "\n")
        outputs.append(classification_path(out, topic))
    return outputs


def stage_null(config: PipelineConfig) -> list[Path]:
    out = config.out
    topics = _selected_topics(config, _topics_with_events(out))
    corpus = _load_corpus(config)
    (out / "null").mkdir(parents=True, exist_ok=True)
    outputs = []
    for topic in topics:
        log = read_event_log(events_path(out, topic))
        n_articles = (
            config.null_articles
            if config.null_articles is not None
            else min(log.n_articles, len(corpus))
        )
        band = null_model(
            corpus,
            n_articles=n_articles,
            n_instances=config.null_instances,
            policy=EdgePolicy(None),
            seed=derive_seed(config.seed, "null", topic * NULL_TOPIC_STRIDE),
            convention=config.convention,
            exact_limit=config.exact_path_limit,
            sample_sources=config.sample_sources,
        )
        write_null_band(band, null_path(out, topic))
        outputs.append(null_path(out, topic))
    return outputs


def stage_modularity(config: PipelineConfig) -> list[Path]:
    out = config.out
    topics = _selected_topics(config, _topics_with_events(out))
    logs = {t: read_event_log(events_path(out, t)) for t in topics}
    entries: list[tuple[int, int, float | None]] = []
    for a in topics:
        for b in topics:
            # The diagonal labels every author 'both', which scores 0.
            labeling = build_pair_labeling(logs[a], logs[b])
            try:
                q = pairwise_modularity(labeling)
            except ValueError:
                q = None
            entries.append((a, b, q))
    write_modularity_matrix(entries, modularity_path(out))
    return [modularity_path(out)]


def stage_report(config: PipelineConfig) -> list[Path]:
    """Concatenate per-topic classifications into one summary table."""
    out = config.out
    topics = _selected_topics(config, _topics_with_events(out))
    rows = []
    for topic in topics:
        path = _require(classification_path(out, topic), "classify")
        lines = path.read_text(encoding="utf-8").splitlines()
        if len(lines) != 2 or lines[0] != CLASSIFICATION_COLUMNS:
            raise StageError(f"{path}: unexpected classification file")
        rows.append(lines[1])
    with open(report_path(out), "w", encoding="utf-8") as fh:
        fh.write(CLASSIFICATION_COLUMNS + "\n")
        for row in rows:
            fh.write(row + "\n")
    return [report_path(out)]


STAGE_ORDER = [
    "ingest",
    "train",
    "topwords",
    "assign",
    "assemble",
    "measure",
    "classify",
    "null",
    "modularity",
    "report",
]

_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "train": stage_train,
    "topwords": stage_topwords,
    "assign": stage_assign,
    "assemble": stage_assemble,
    "measure": stage_measure,
    "classify": stage_classify,
    "null": stage_null,
    "modularity": stage_modularity,
    "report": stage_report,
}


def run_stage(name: str, config: PipelineConfig) -> list[Path]:
    if name not in _STAGE_FUNCS:
        raise StageError(f"unknown stage: {name!r}")
    return _STAGE_FUNCS[name](config)


def run_all(config: PipelineConfig, stages: list[str] | None = None) -> Path:
    """Run stages in order and write the run manifest."""
    chosen = stages if stages is not None else STAGE_ORDER
    timings: list[tuple[str, float]] = []
    outputs: list[Path] = []
    for name in chosen:
        started = time.perf_counter()
        outputs.extend(run_stage(name, config))
        timings.append((name, time.perf_counter() - started))
    write_manifest(config, outputs, timings)
    return manifest_path(config.out)


def write_manifest(
    config: PipelineConfig,
    outputs: list[Path],
    timings: list[tuple[str, float]],
) -> None:
    """Atomically written key=value manifest with input/output digests."""
    out = config.out
    lines = [f"tool\ttopicnets {__version__}"]
    for key, value in sorted(config.echo().items()):
        lines.append(f"config.{key}\t{value}")
    inputs = [config.corpus]
    for opt in (config.stopwords, config.extra_stopwords, config.lexicon):
        if opt is not None:
            inputs.append(opt)
    for path in inputs:
        lines.append(f"input\t{path}\t{_file_digest(path)}")
    for name, seconds in timings:
        lines.append(f"timing\t{name}\t{seconds:.3f}")
    for path in sorted(set(outputs)):
        rel = path.relative_to(out)
        lines.append(f"output\t{rel}\t{_file_digest(path)}")
    tmp = manifest_path(out).with_suffix(".tmp")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    os.replace(tmp, manifest_path(out))


# ---------------------------------------------------------------------------
# Cross-corpus application


def apply_model(
    config: PipelineConfig,
    corpus_b_path: Path,
    apply_out: Path,
    force: bool = False,
) -> list[Path]:
    """Apply a trained model to a second corpus: infer, assign, assemble,
    measure under the standard stages, writing into ``apply_out``.

    The second corpus must be preprocessed with the same stop list and
    lexicon; digests recorded in the model file guard against mismatches
    unless ``force`` is set.
    """
    model = load_model(_require(model_path(config.out), "train"))
    meta = _preprocessing_meta(config)
    for key in ("stopwords_digest", "lexicon_digest"):
        if key in model.meta and model.meta[key] != meta[key] and not force:
            raise StageError(
                f"{key.split('_')[0]} mismatch between training and apply runs"
            )

    if not corpus_b_path.exists():
        raise StageError(f"corpus file not found: {corpus_b_path}")
    with open(corpus_b_path, encoding="utf-8") as fh:
        corpus_b, _ = parse_corpus(fh)
    apply_out.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []

    if len(corpus_b) == 0:
        warnings.warn(f"second corpus {corpus_b_path} is empty", stacklevel=2)
        _write_assignments([], apply_out / "assignments.tsv")
        return [apply_out / "assignments.tsv"]

    stopwords = _stopwords(config)
    lexicon = _lexicon(config)
    docs: list[TokenizedDoc] = []
    for doc in corpus_b:
        tokens = preprocess_document(doc, stopwords, lexicon)
        ids = tuple(
            model.vocabulary.index[t] for t in tokens if t in model.vocabulary.index
        )
        docs.append(TokenizedDoc(doc_id=doc.doc_id, tokens=ids, month=doc.month))

    thetas = np.vstack(
        [
            infer_theta(
                model,
                doc,
                seed=derive_seed(config.seed, "infer", i),
                sweeps=config.infer_sweeps,
                burn_in=config.infer_burn_in,
            )
            for i, doc in enumerate(docs)
        ]
    )
    assignments = assign_articles(
        [d.doc_id for d in docs], thetas, config.assignment_scheme()
    )
    _write_assignments(assignments, apply_out / "assignments.tsv")
    outputs.append(apply_out / "assignments.tsv")

    by_topic = _topic_doc_ids(assignments)
    (apply_out / "events").mkdir(exist_ok=True)
    (apply_out / "metrics").mkdir(exist_ok=True)
    for topic in _selected_topics(config, list(by_topic)):
        log = build_events(
            by_topic[topic],
            corpus_b,
            config.convention,
            max_authors=config.max_authors,
        )
        if not log.events:
            continue
        write_event_log(log, apply_out / "events" / f"topic_{topic:02d}.events")
        outputs.append(apply_out / "events" / f"topic_{topic:02d}.events")
        for policy in config.edge_policies():
            series = assemble_series(log, policy)
            curve = measure_series(
                series,
                exact_limit=config.exact_path_limit,
                sample_sources=config.sample_sources,
                seed=derive_seed(config.seed, "measure"),
            )
            path = apply_out / "metrics" / f"topic_{topic:02d}_{policy}.csv"
            write_metric_curve(curve, path)
            outputs.append(path)
    return outputs
