"""Temporal co-authorship network construction.

A topic's assigned articles become a time-stamped event log (one clique per
article), which is then materialized into monthly snapshots.  Nodes persist
forever; edges either persist (unlimited policy) or expire when the pair's
most recent joint article falls out of the lifetime window.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus, NamingConvention, YearMonth, normalize_author

__all__ = [
    "CollabEvent",
    "CollaborationEventLog",
    "EdgePolicy",
    "GraphSnapshot",
    "SnapshotSeries",
    "build_events",
    "assemble_series",
    "write_event_log",
    "read_event_log",
    "write_snapshot_series",
]

EVENTS_FORMAT = "topicnets-events 1"
SNAPSHOTS_FORMAT = "topicnets-snapshots 1"


@dataclass(frozen=True)
class CollabEvent:
    month: int
    authors: tuple[str, ...]  # sorted, deduplicated labels
    doc_id: str


@dataclass
class CollaborationEventLog:
    events: list[CollabEvent]  # sorted by (month, doc_id)
    first_seen: dict[str, int]
    origin: YearMonth
    convention: NamingConvention

    @property
    def n_articles(self) -> int:
        return len(self.events)

    @property
    def n_authors(self) -> int:
        return len(self.first_seen)


@dataclass(frozen=True)
class EdgePolicy:
    """Edge survival rule; ``lifetime`` in months, None means never expire.

    Expiry counts from the most recent joint article: an edge last renewed
    at month m' is present at month m iff m - m' < lifetime.
    """

    lifetime: int | None = None

    def __post_init__(self) -> None:
        if self.lifetime is not None and self.lifetime < 1:
            raise ValueError("finite lifetime must be >= 1 month")

    @property
    def is_unlimited(self) -> bool:
        return self.lifetime is None

    def covers(self, last_collab: int, month: int) -> bool:
        return self.lifetime is None or month - last_collab < self.lifetime

    def __str__(self) -> str:
        return "unlimited" if self.lifetime is None else f"{self.lifetime}m"

    @classmethod
    def parse(cls, text: str) -> "EdgePolicy":
        text = text.strip().lower()
        if text in ("unlimited", "none"):
            return cls(None)
        return cls(int(text.removesuffix("m")))


@dataclass
class GraphSnapshot:
    """State of the network at one month.

    ``edges`` maps a sorted label pair to (last_collaboration_month,
    collaboration_count); the count tallies all joint articles so far and is
    reporting-only.
    """

    month: int
    nodes: frozenset[str]
    edges: dict[tuple[str, str], tuple[int, int]]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


@dataclass
class SnapshotSeries:
    snapshots: list[GraphSnapshot]
    policy: EdgePolicy
    origin: YearMonth

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)


def build_events(
    doc_ids: Iterable[str],
    corpus: Corpus,
    convention: NamingConvention,
    origin: YearMonth | None = None,
    max_authors: int | None = None,
) -> CollaborationEventLog:
    """One event per assigned article, authors normalized and deduplicated.

    ``origin`` defaults to the corpus-wide earliest month, so month indices
    are comparable across topics.  ``max_authors`` (off by default) drops
    articles whose author list exceeds the cap, for sensitivity analysis.
    """
    if origin is None:
        origin = corpus.origin
    events: list[CollabEvent] = []
    first_seen: dict[str, int] = {}
    for doc_id in doc_ids:
        doc = corpus.get(doc_id)
        if doc is None:
            raise ValueError(f"assigned doc_id not in corpus: {doc_id}")
        if max_authors is not None and len(doc.authors) > max_authors:
            continue
        try:
            labels = {normalize_author(a, convention).label for a in doc.authors}
        except ValueError as exc:
            raise ValueError(f"document {doc_id}: {exc}") from exc
        month = doc.month.index_from(origin)
        if month < 0:
            raise ValueError(f"document {doc_id} predates origin {origin}")
        events.append(CollabEvent(month, tuple(sorted(labels)), doc_id))
    events.sort(key=lambda e: (e.month, e.doc_id))
    for event in events:
        for label in event.authors:
            if label not in first_seen:
                first_seen[label] = event.month
    return CollaborationEventLog(
        events=events, first_seen=first_seen, origin=origin, convention=convention
    )


def assemble_series(
    log: CollaborationEventLog, policy: EdgePolicy = EdgePolicy()
) -> SnapshotSeries:
    """Materialize one snapshot per month from first to last event month."""
    if not log.events:
        raise ValueError("cannot assemble a series from an empty event log")
    by_month: dict[int, list[CollabEvent]] = {}
    for event in log.events:
        by_month.setdefault(event.month, []).append(event)
    first = log.events[0].month
    last = log.events[-1].month

    nodes: set[str] = set()
    pairs: dict[tuple[str, str], tuple[int, int]] = {}
    snapshots: list[GraphSnapshot] = []
    for month in range(first, last + 1):
        for event in by_month.get(month, ()):
            nodes.update(event.authors)
            for pair in combinations(event.authors, 2):
                _, count = pairs.get(pair, (month, 0))
                pairs[pair] = (month, count + 1)
        if policy.is_unlimited:
            active = dict(pairs)
        else:
            active = {
                pair: state
                for pair, state in pairs.items()
                if policy.covers(state[0], month)
            }
        snapshots.append(
            GraphSnapshot(month=month, nodes=frozenset(nodes), edges=active)
        )
    return SnapshotSeries(snapshots=snapshots, policy=policy, origin=log.origin)


def write_event_log(log: CollaborationEventLog, path: str | Path) -> None:
    """One tab-separated line per event: month, doc_id, ';'-joined authors."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(EVENTS_FORMAT + "\n")
        fh.write(f"origin\t{log.origin}\n")
        fh.write(f"convention\t{log.convention.value}\n")
        for event in log.events:
            fh.write(f"{event.month}\t{event.doc_id}\t{';'.join(event.authors)}\n")


def read_event_log(path: str | Path) -> CollaborationEventLog:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != EVENTS_FORMAT:
        raise ValueError(f"{path}: not a {EVENTS_FORMAT!r} file")
    origin = YearMonth.parse(lines[1].split("\t")[1])
    convention = NamingConvention.parse(lines[2].split("\t")[1])
    events: list[CollabEvent] = []
    first_seen: dict[str, int] = {}
    for line in lines[3:]:
        month_s, doc_id, authors_s = line.split("\t")
        event = CollabEvent(int(month_s), tuple(authors_s.split(";")), doc_id)
        events.append(event)
        for label in event.authors:
            first_seen.setdefault(label, event.month)
    return CollaborationEventLog(
        events=events, first_seen=first_seen, origin=origin, convention=convention
    )


def write_snapshot_series(series: SnapshotSeries, path: str | Path) -> None:
    """Per-month edge-list export.

    ``N <month> <label>`` marks a node's first month; ``E <month> <u> <v>
    <last_collab>`` lists every edge present at that month.
    """
    seen: set[str] = set()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SNAPSHOTS_FORMAT + "\n")
        fh.write(f"origin\t{series.origin}\n")
        fh.write(f"policy\t{series.policy}\n")
        for snap in series:
            for label in sorted(snap.nodes - seen):
                fh.write(f"N\t{snap.month}\t{label}\n")
            seen.update(snap.nodes)
            for (u, v), (last, _) in sorted(snap.edges.items()):
                fh.write(f"E\t{snap.month}\t{u}\t{v}\t{last}\n")
