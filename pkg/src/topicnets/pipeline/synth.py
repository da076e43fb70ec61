"""Synthetic corpus generator with planted topics and planted collaboration
communities.

Each topic owns a disjoint vocabulary block and an author pool partitioned
into fixed research groups (pools are disjoint unless ``pool_overlap``
shares a slice between neighboring topics).  Article text is sampled from
the planted topic-term distributions; article author lists are sampled from
one group, with a per-topic, month-dependent probability of pulling in
authors from other groups of the same pool.  With zero cross-group mixing
every connected component stays confined to a single group, so no giant
component can form; with high mixing the groups wire together into a dense
component.

A sidecar truth file records the planted term distributions and each
document's dominant topic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import Corpus, Document, YearMonth

__all__ = ["SyntheticSpec", "SyntheticTruth", "generate_synthetic", "load_truth"]

TRUTH_FORMAT = "topicnets-truth/1"

_CONSONANTS = "bcdfgklmnprstvz"
_VOWELS = "aeiou"

# (mixing at first month, mixing at last month) per topic; defaults plant two
# densifying communities, one weakly mixing, and two that never mix.
_DEFAULT_MIXING = ((0.0, 0.85), (0.0, 0.85), (0.0, 0.12), (0.0, 0.0), (0.0, 0.0))


@dataclass(frozen=True)
class SyntheticSpec:
    n_topics: int = 5
    vocab_per_topic: int = 40
    n_docs: int = 2000
    doc_length: int = 50
    months: int = 72
    start: YearMonth = YearMonth(1994, 1)
    groups_per_topic: int = 40
    group_size: int = 6
    min_authors: int = 2
    max_authors: int = 5
    mixing: tuple[tuple[float, float], ...] = _DEFAULT_MIXING
    dominant_weight: float = 0.9
    name_variant_rate: float = 0.0
    pool_overlap: float = 0.0
    seed: int = 7

    def __post_init__(self) -> None:
        if self.n_topics < 1 or self.n_docs < 1 or self.months < 1:
            raise ValueError("n_topics, n_docs and months must be positive")
        if len(self.mixing) != self.n_topics:
            raise ValueError("one mixing ramp per topic is required")
        if not 0 < self.dominant_weight <= 1:
            raise ValueError("dominant_weight must lie in (0, 1]")
        if self.max_authors > self.group_size:
            raise ValueError(
                f"article author count {self.max_authors} exceeds group size "
                f"{self.group_size}"
            )
        if not 1 <= self.min_authors <= self.max_authors:
            raise ValueError("need 1 <= min_authors <= max_authors")
        for lo, hi in self.mixing:
            if not (0 <= lo <= 1 and 0 <= hi <= 1):
                raise ValueError("mixing rates must lie in [0, 1]")
        if not 0 <= self.pool_overlap < 1:
            raise ValueError("pool_overlap must lie in [0, 1)")


@dataclass
class SyntheticTruth:
    terms: list[str]  # all planted terms, topic blocks concatenated
    phi: np.ndarray  # n_topics x len(terms)
    doc_topics: dict[str, int]
    spec_echo: dict

    def planted_row(self, topic: int) -> dict[str, float]:
        return {t: float(p) for t, p in zip(self.terms, self.phi[topic])}


def _word(rng: np.random.Generator, syllables: int) -> str:
    return "".join(
        _CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
        for _ in range(syllables)
    )


def _unique_words(
    rng: np.random.Generator, count: int, syllables: int, taken: set[str]
) -> list[str]:
    words: list[str] = []
    while len(words) < count:
        w = _word(rng, syllables)
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


def _mixing_rate(spec: SyntheticSpec, topic: int, month: int) -> float:
    lo, hi = spec.mixing[topic]
    if spec.months == 1:
        return hi
    frac = month / (spec.months - 1)
    # Quadratic ramp: late months mix much harder than early ones.
    return lo + (hi - lo) * frac * frac


def generate_synthetic(spec: SyntheticSpec) -> tuple[Corpus, SyntheticTruth]:
    """Deterministically generate a corpus and its sidecar truth."""
    rng = np.random.default_rng(spec.seed)
    taken: set[str] = set()

    # Disjoint vocabulary blocks, one Dirichlet(1) term distribution per topic.
    blocks = [
        _unique_words(rng, spec.vocab_per_topic, 3, taken)
        for _ in range(spec.n_topics)
    ]
    terms = [w for block in blocks for w in block]
    vocab_total = len(terms)
    phi = np.zeros((spec.n_topics, vocab_total))
    for t in range(spec.n_topics):
        weights = rng.dirichlet(np.ones(spec.vocab_per_topic))
        phi[t, t * spec.vocab_per_topic : (t + 1) * spec.vocab_per_topic] = weights

    # Author pools: unique (first initial, last name) across the whole corpus
    # so the first-initial convention never merges two planted authors.
    pool_size = spec.groups_per_topic * spec.group_size
    last_names = _unique_words(rng, spec.n_topics * pool_size, 3, taken)
    names: list[list[tuple[str, str]]] = []
    used_initials: set[tuple[str, str]] = set()
    idx = 0
    for t in range(spec.n_topics):
        pool: list[tuple[str, str]] = []
        for _ in range(pool_size):
            last = last_names[idx]
            idx += 1
            while True:
                first = _word(rng, 2)
                if (first[0], last) not in used_initials:
                    used_initials.add((first[0], last))
                    break
            pool.append((first.capitalize(), last.capitalize()))
        names.append(pool)
    # Adjacent pools may share a slice of authors, so some authors publish in
    # two neighboring fields (lowers the pair's modularity below 1).
    shared = int(round(spec.pool_overlap * pool_size))
    for t in range(1, spec.n_topics):
        for j in range(shared):
            names[t][j] = names[t - 1][pool_size - shared + j]

    def author_name(topic: int, member: int, variant: bool) -> str:
        first, last = names[topic][member]
        return f"{first[0]}. {last}" if variant else f"{first} {last}"

    theta_other = (
        (1.0 - spec.dominant_weight) / (spec.n_topics - 1)
        if spec.n_topics > 1
        else 0.0
    )
    # Per-topic cumulative weights over that topic's own block; sampling
    # inside the block keeps rounding at the tail from escaping it.
    block_cum = np.vstack(
        [
            np.cumsum(phi[t, t * spec.vocab_per_topic : (t + 1) * spec.vocab_per_topic])
            for t in range(spec.n_topics)
        ]
    )
    documents: list[Document] = []
    doc_topics: dict[str, int] = {}
    for d in range(spec.n_docs):
        topic = d % spec.n_topics
        month = int(rng.integers(spec.months))
        rate = _mixing_rate(spec, topic, month)

        # Token stream from the planted mixture.
        theta = np.full(spec.n_topics, theta_other)
        theta[topic] = spec.dominant_weight
        topic_draws = rng.choice(spec.n_topics, size=spec.doc_length, p=theta)
        word_u = rng.random(spec.doc_length)
        tokens = [
            terms[
                z * spec.vocab_per_topic
                + min(
                    int(np.searchsorted(block_cum[z], u, side="right")),
                    spec.vocab_per_topic - 1,
                )
            ]
            for z, u in zip(topic_draws, word_u)
        ]

        # Author list: one home group, plus cross-group members at `rate`.
        group = int(rng.integers(spec.groups_per_topic))
        n_authors = int(rng.integers(spec.min_authors, spec.max_authors + 1))
        members = group * spec.group_size + rng.choice(
            spec.group_size, size=n_authors, replace=False
        )
        members = [int(m) for m in members]
        for i in range(1, len(members)):
            if rng.random() < rate:
                members[i] = int(rng.integers(pool_size))
        members = sorted(set(members))
        authors = [
            author_name(topic, m, rng.random() < spec.name_variant_rate)
            for m in members
        ]

        doc_id = f"s{d:05d}"
        documents.append(
            Document(
                doc_id=doc_id,
                title=" ".join(tokens[:8]).capitalize() + ".",
                abstract=" ".join(tokens[8:]) + ".",
                authors=tuple(authors),
                month=spec.start.plus(month),
            )
        )
        doc_topics[doc_id] = topic

    truth = SyntheticTruth(
        terms=terms,
        phi=phi,
        doc_topics=doc_topics,
        spec_echo={
            "n_topics": spec.n_topics,
            "vocab_per_topic": spec.vocab_per_topic,
            "n_docs": spec.n_docs,
            "doc_length": spec.doc_length,
            "months": spec.months,
            "start": str(spec.start),
            "groups_per_topic": spec.groups_per_topic,
            "group_size": spec.group_size,
            "min_authors": spec.min_authors,
            "max_authors": spec.max_authors,
            "mixing": [list(m) for m in spec.mixing],
            "dominant_weight": spec.dominant_weight,
            "name_variant_rate": spec.name_variant_rate,
            "pool_overlap": spec.pool_overlap,
            "seed": spec.seed,
        },
    )
    return Corpus(documents), truth


def write_truth(truth: SyntheticTruth, path: str | Path) -> None:
    payload = {
        "format": TRUTH_FORMAT,
        "terms": truth.terms,
        "phi": [[float(p) for p in row] for row in truth.phi],
        "doc_topics": truth.doc_topics,
        "spec": truth.spec_echo,
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )


def load_truth(path: str | Path) -> SyntheticTruth:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != TRUTH_FORMAT:
        raise ValueError(f"{path}: not a {TRUTH_FORMAT} file")
    return SyntheticTruth(
        terms=list(payload["terms"]),
        phi=np.asarray(payload["phi"], dtype=np.float64),
        doc_topics={k: int(v) for k, v in payload["doc_topics"].items()},
        spec_echo=dict(payload["spec"]),
    )
