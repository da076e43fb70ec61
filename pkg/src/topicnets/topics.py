"""Topic model training, held-out inference, top words, and article
assignment under the two thresholding schemes."""

from __future__ import annotations

import base64
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _gibbs
from .corpus import TokenizedDoc, Vocabulary

__all__ = [
    "LdaConfig",
    "TopicModel",
    "ThresholdScheme",
    "CumulativeCoverageScheme",
    "TopicAssignment",
    "train_lda",
    "infer_theta",
    "top_words",
    "assign_articles",
    "save_model",
    "load_model",
]

MODEL_FORMAT = "topicnets-model/1"

# Kernel RNGs take 32-bit seeds; derived seeds are reduced modulo 2**32.
_SEED_MASK = 0xFFFFFFFF


@dataclass(frozen=True)
class LdaConfig:
    """Collapsed-Gibbs sampler settings.

    ``alpha`` is the per-topic symmetric Dirichlet weight (default 5.0/k),
    ``beta`` the per-term weight.
    """

    k: int
    alpha: float
    beta: float = 0.01
    iterations: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")

    @classmethod
    def default(cls, k: int, seed: int, iterations: int = 1000) -> "LdaConfig":
        return cls(k=k, alpha=5.0 / k, beta=0.01, iterations=iterations, seed=seed)


@dataclass
class TopicModel:
    """Trained model: topic-term matrix ``phi`` (k x V) and, when retained,
    the training documents' topic mixtures ``theta`` (D x k)."""

    phi: np.ndarray
    theta: np.ndarray | None
    doc_ids: list[str] | None
    vocabulary: Vocabulary
    config: LdaConfig
    meta: dict[str, str] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.phi.shape[0]

    def validate(self, tol: float = 1e-9) -> None:
        _check_rows(self.phi, "phi", tol)
        if self.theta is not None:
            _check_rows(self.theta, "theta", tol)


def _check_rows(matrix: np.ndarray, name: str, tol: float) -> None:
    if np.any(matrix <= 0):
        raise ValueError(f"{name} contains non-positive entries")
    sums = matrix.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > tol):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise ValueError(f"{name} rows deviate from 1 by up to {worst:g}")


def _token_arrays(docs: Sequence[TokenizedDoc]) -> tuple[np.ndarray, np.ndarray]:
    w_ids: list[int] = []
    d_ids: list[int] = []
    for d, doc in enumerate(docs):
        w_ids.extend(doc.tokens)
        d_ids.extend([d] * len(doc.tokens))
    return np.asarray(w_ids, np.int32), np.asarray(d_ids, np.int32)


def train_lda(
    docs: Sequence[TokenizedDoc], vocabulary: Vocabulary, config: LdaConfig
) -> TopicModel:
    """Train by collapsed Gibbs sampling; deterministic for fixed inputs+seed."""
    if len(vocabulary) < 1:
        raise ValueError("empty vocabulary")
    w_ids, d_ids = _token_arrays(docs)
    if w_ids.size == 0:
        raise ValueError("corpus has no tokens")
    if config.k > w_ids.size:
        warnings.warn(
            f"k={config.k} exceeds total token count {w_ids.size}", stacklevel=2
        )
    n_kw, n_dk = _gibbs.train_sweeps(
        w_ids,
        d_ids,
        config.k,
        len(vocabulary),
        len(docs),
        config.alpha,
        config.beta,
        config.iterations,
        config.seed & _SEED_MASK,
    )
    phi = (n_kw + config.beta) / (
        n_kw.sum(axis=1, keepdims=True) + len(vocabulary) * config.beta
    )
    theta = (n_dk + config.alpha) / (
        n_dk.sum(axis=1, keepdims=True) + config.k * config.alpha
    )
    model = TopicModel(
        phi=phi,
        theta=theta,
        doc_ids=[doc.doc_id for doc in docs],
        vocabulary=vocabulary,
        config=config,
    )
    model.validate()
    return model


def infer_theta(
    model: TopicModel,
    doc: TokenizedDoc,
    seed: int,
    sweeps: int = 200,
    burn_in: int = 100,
) -> np.ndarray:
    """Infer a held-out document's topic mixture with phi held fixed.

    Averages the per-sweep theta estimates over the post-burn-in window.
    A document with no in-vocabulary tokens yields the uniform prior.
    """
    if not 0 <= burn_in < sweeps:
        raise ValueError("need 0 <= burn_in < sweeps")
    w_ids = np.asarray(
        [t for t in doc.tokens if t < model.phi.shape[1]], np.int32
    )
    theta = _gibbs.infer_sweeps(
        w_ids, model.phi, model.config.alpha, sweeps, burn_in, seed & _SEED_MASK
    )
    if abs(float(theta.sum()) - 1.0) > 1e-9:
        raise ValueError("inferred theta does not sum to 1")
    return theta


def top_words(model: TopicModel, topic: int, n: int) -> list[tuple[str, float]]:
    """Terms ranked by descending phi; ties broken lexicographically."""
    if not 0 <= topic < model.k:
        raise ValueError(f"topic {topic} out of range for k={model.k}")
    if n < 1:
        raise ValueError("n must be >= 1")
    row = model.phi[topic]
    order = sorted(range(len(row)), key=lambda i: (-row[i], model.vocabulary.terms[i]))
    return [(model.vocabulary.terms[i], float(row[i])) for i in order[:n]]


@dataclass(frozen=True)
class ThresholdScheme:
    """Assign topic t when theta[t] > tau; tau > 0.5 forces at most one."""

    tau: float = 0.6

    def __post_init__(self) -> None:
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")

    def __str__(self) -> str:
        return f"threshold:{self.tau!r}"

    def select(self, theta: np.ndarray) -> tuple[int, ...]:
        return tuple(int(t) for t in np.nonzero(theta > self.tau)[0])


@dataclass(frozen=True)
class CumulativeCoverageScheme:
    """Assign the smallest descending-probability prefix of topics whose
    combined mass reaches ``coverage``; ties broken by ascending topic id."""

    coverage: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.coverage <= 1.0:
            raise ValueError(f"coverage must lie in (0, 1], got {self.coverage}")

    def __str__(self) -> str:
        return f"coverage:{self.coverage!r}"

    def select(self, theta: np.ndarray) -> tuple[int, ...]:
        order = sorted(range(len(theta)), key=lambda t: (-theta[t], t))
        chosen: list[int] = []
        mass = 0.0
        for t in order:
            chosen.append(t)
            mass += float(theta[t])
            if mass >= self.coverage:
                break
        return tuple(sorted(chosen))


Scheme = ThresholdScheme | CumulativeCoverageScheme


@dataclass(frozen=True)
class TopicAssignment:
    doc_id: str
    topics: tuple[int, ...]
    scheme: str


def assign_articles(
    doc_ids: Sequence[str], thetas: np.ndarray, scheme: Scheme
) -> list[TopicAssignment]:
    """Apply an assignment scheme to each row of a D x k theta matrix."""
    thetas = np.asarray(thetas, np.float64)
    if thetas.ndim != 2 or len(doc_ids) != thetas.shape[0]:
        raise ValueError("doc_ids and thetas rows must align")
    sums = thetas.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        raise ValueError("theta rows must sum to 1 within 1e-6")
    label = str(scheme)
    return [
        TopicAssignment(doc_id=doc_id, topics=scheme.select(row), scheme=label)
        for doc_id, row in zip(doc_ids, thetas)
    ]


def _encode_array(arr: np.ndarray) -> dict:
    data = np.ascontiguousarray(arr, dtype="<f8")
    return {
        "shape": list(data.shape),
        "dtype": "<f8",
        "data": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def _decode_array(obj: dict) -> np.ndarray:
    raw = base64.b64decode(obj["data"])
    return np.frombuffer(raw, dtype=obj["dtype"]).reshape(obj["shape"]).copy()


def save_model(model: TopicModel, path: str | Path, include_theta: bool = True) -> None:
    """Versioned, self-describing JSON model file; byte-stable for equal inputs."""
    payload = {
        "format": MODEL_FORMAT,
        "config": {
            "k": model.config.k,
            "alpha": model.config.alpha,
            "beta": model.config.beta,
            "iterations": model.config.iterations,
            "seed": model.config.seed,
        },
        "vocabulary": {
            "terms": model.vocabulary.terms,
            "min_count": model.vocabulary.min_count,
            "digest": model.vocabulary.digest(),
        },
        "meta": dict(sorted(model.meta.items())),
        "phi": _encode_array(model.phi),
    }
    if include_theta and model.theta is not None:
        payload["theta"] = _encode_array(model.theta)
        payload["doc_ids"] = model.doc_ids
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text, encoding="utf-8")


def load_model(path: str | Path) -> TopicModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    cfg = payload["config"]
    config = LdaConfig(
        k=cfg["k"],
        alpha=cfg["alpha"],
        beta=cfg["beta"],
        iterations=cfg["iterations"],
        seed=cfg["seed"],
    )
    terms = payload["vocabulary"]["terms"]
    vocab = Vocabulary(
        terms=list(terms),
        index={t: i for i, t in enumerate(terms)},
        min_count=payload["vocabulary"]["min_count"],
    )
    if vocab.digest() != payload["vocabulary"]["digest"]:
        raise ValueError(f"{path}: vocabulary digest mismatch")
    theta = _decode_array(payload["theta"]) if "theta" in payload else None
    model = TopicModel(
        phi=_decode_array(payload["phi"]),
        theta=theta,
        doc_ids=payload.get("doc_ids"),
        vocabulary=vocab,
        config=config,
        meta=dict(payload.get("meta", {})),
    )
    model.validate()
    return model
