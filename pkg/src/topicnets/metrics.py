"""Structural measurements over snapshot series.

Covers largest-component statistics, mean geodesic path length (exact
all-pairs BFS or seeded source sampling), the three-way assembly
classification, randomized null-model bands, and the pairwise normalized
modularity score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cc_csgraph
from scipy.sparse.csgraph import dijkstra

from .corpus import Corpus, NamingConvention
from .graphs import (
    CollaborationEventLog,
    EdgePolicy,
    GraphSnapshot,
    SnapshotSeries,
    assemble_series,
    build_events,
)

__all__ = [
    "MetricPoint",
    "MetricCurve",
    "AssemblyClass",
    "ClassifierThresholds",
    "AssemblyResult",
    "UnclassifiableCurveError",
    "NullBin",
    "NullBand",
    "CommunityLabeling",
    "connected_components",
    "gcc_fraction",
    "mean_path_length",
    "measure_series",
    "classify_assembly",
    "null_model",
    "build_pair_labeling",
    "pairwise_modularity",
    "write_metric_curve",
    "read_metric_curve",
    "write_null_band",
    "write_modularity_matrix",
]


# ---------------------------------------------------------------------------
# Components and path lengths


def connected_components(snapshot: GraphSnapshot) -> dict[str, list[str]]:
    """Partition of all nodes keyed by component id (smallest member label)."""
    parent: dict[str, str] = {node: node for node in snapshot.nodes}

    def find(x: str) -> str:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for u, v in snapshot.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[rv] = ru
    groups: dict[str, list[str]] = {}
    for node in snapshot.nodes:
        groups.setdefault(find(node), []).append(node)
    return {min(members): sorted(members) for members in groups.values()}


def _largest_component(snapshot: GraphSnapshot) -> list[str]:
    """Members of the largest component; size ties broken by component id."""
    components = connected_components(snapshot)
    _, members = min(components.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    return members


def gcc_fraction(snapshot: GraphSnapshot) -> float:
    """Fraction of nodes in the largest connected component."""
    if snapshot.n_nodes == 0:
        raise ValueError("gcc_fraction undefined for an empty snapshot")
    return len(_largest_component(snapshot)) / snapshot.n_nodes


def _subgraph_csr(snapshot: GraphSnapshot, members: list[str]) -> csr_matrix:
    index = {label: i for i, label in enumerate(members)}
    rows: list[int] = []
    cols: list[int] = []
    for u, v in snapshot.edges:
        iu = index.get(u)
        iv = index.get(v)
        if iu is None or iv is None:
            continue
        rows.extend((iu, iv))
        cols.extend((iv, iu))
    n = len(members)
    data = np.ones(len(rows), np.int8)
    return csr_matrix((data, (rows, cols)), shape=(n, n))


def mean_path_length(
    snapshot: GraphSnapshot, sources: int | None = None, seed: int = 0
) -> tuple[float | None, str]:
    """Mean geodesic distance over the largest component's node pairs.

    ``sources=None`` averages over all unordered pairs via BFS from every
    component node; otherwise distances from ``sources`` seeded-random nodes
    to all component nodes are averaged (self-distances excluded).  Returns
    (value, mode); the value is None when the component has < 2 nodes.
    """
    members = sorted(_largest_component(snapshot))
    g = len(members)
    mode = "exact" if sources is None else f"sampled:{sources}"
    if g < 2:
        return None, mode
    member_set = set(members)
    inside = sum(1 for u, v in snapshot.edges if u in member_set and v in member_set)
    if inside == g * (g - 1) // 2:
        # Complete component: every distance is 1 under either mode.
        return 1.0, mode
    adj = _subgraph_csr(snapshot, members)
    if sources is None or sources >= g:
        # With every node as a source the sampled average reduces to exact.
        indices = np.arange(g)
        n_sources = g
    else:
        rng = np.random.default_rng(seed)
        indices = np.sort(rng.choice(g, size=sources, replace=False))
        n_sources = sources
    dist = dijkstra(adj, unweighted=True, indices=indices)
    total = float(dist.sum())
    return total / (n_sources * (g - 1)), mode


# ---------------------------------------------------------------------------
# Series measurement


@dataclass(frozen=True)
class MetricPoint:
    month: int
    year_month: str
    n_nodes: int
    n_edges: int
    gcc_nodes: int
    gcc_fraction: float
    mean_path_length: float | None
    path_mode: str


@dataclass
class MetricCurve:
    points: list[MetricPoint]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def _measure_snapshot(
    snap: GraphSnapshot, exact_limit: int, sample_sources: int, seed: int
) -> tuple[int, float | None, str]:
    """Array-path measurement of one snapshot: (gcc_nodes, mpl, mode).

    Equivalent to connected_components + mean_path_length but builds the
    adjacency once; the public operations stay the reference surface.
    """
    nodes = sorted(snap.nodes)
    n = len(nodes)
    index = {label: i for i, label in enumerate(nodes)}
    rows = np.empty(2 * len(snap.edges), np.int32)
    cols = np.empty(2 * len(snap.edges), np.int32)
    for e, (u, v) in enumerate(snap.edges):
        iu, iv = index[u], index[v]
        rows[2 * e], cols[2 * e] = iu, iv
        rows[2 * e + 1], cols[2 * e + 1] = iv, iu
    adj = csr_matrix(
        (np.ones(rows.size, np.int8), (rows, cols)), shape=(n, n)
    )
    n_comp, labels = _cc_csgraph(adj, directed=False)
    sizes = np.bincount(labels, minlength=n_comp)
    best_size = sizes.max()
    candidates = np.nonzero(sizes == best_size)[0]
    # Ties resolved by smallest member; nodes are sorted, so the component
    # containing the lowest index wins.
    first_idx = np.full(n_comp, n, np.int64)
    np.minimum.at(first_idx, labels, np.arange(n))
    gcc_label = candidates[np.argmin(first_idx[candidates])]
    members = np.nonzero(labels == gcc_label)[0]
    g = int(best_size)
    sources = None if g <= exact_limit else sample_sources
    mode = "exact" if sources is None else f"sampled:{sources}"
    if g < 2:
        return g, None, mode
    sub = adj[members][:, members]
    if sub.nnz == g * (g - 1):
        return g, 1.0, mode
    if sources is None or sources >= g:
        indices = np.arange(g)
        n_sources = g
    else:
        rng = np.random.default_rng(seed)
        indices = np.sort(rng.choice(g, size=sources, replace=False))
        n_sources = sources
    dist = dijkstra(sub, unweighted=True, indices=indices)
    return g, float(dist.sum()) / (n_sources * (g - 1)), mode


def measure_series(
    series: SnapshotSeries,
    exact_limit: int = 2000,
    sample_sources: int = 1000,
    seed: int = 0,
) -> MetricCurve:
    """One MetricPoint per month; exact path lengths while the largest
    component stays within ``exact_limit`` nodes, sampled beyond."""
    if not series.snapshots:
        raise ValueError("empty snapshot series")
    points: list[MetricPoint] = []
    for snap in series:
        g, mpl, mode = _measure_snapshot(
            snap, exact_limit, sample_sources, seed + snap.month
        )
        points.append(
            MetricPoint(
                month=snap.month,
                year_month=str(series.origin.plus(snap.month)),
                n_nodes=snap.n_nodes,
                n_edges=snap.n_edges,
                gcc_nodes=g,
                gcc_fraction=g / snap.n_nodes,
                mean_path_length=mpl,
                path_mode=mode,
            )
        )
    return MetricCurve(points)


# ---------------------------------------------------------------------------
# Assembly classification


class AssemblyClass:
    NO_GC = "no_gc"
    TREELIKE_GC = "treelike_gc"
    DENSE_GC = "dense_gc"


@dataclass(frozen=True)
class ClassifierThresholds:
    dense_gcc: float = 0.25
    treelike_gcc: float = 0.10
    decline: float = 0.10
    smoothing_window: int = 5


@dataclass(frozen=True)
class AssemblyResult:
    assembly_class: str
    final_gcc_fraction: float
    peak_month: int | None
    peak_value: float | None
    decline_ratio: float | None


class UnclassifiableCurveError(ValueError):
    pass


def _smooth(values: list[float], window: int) -> list[float]:
    half = window // 2
    out = []
    for i in range(len(values)):
        lo = max(0, i - half)
        hi = min(len(values), i + half + 1)
        out.append(sum(values[lo:hi]) / (hi - lo))
    return out


def classify_assembly(
    curve: MetricCurve, thresholds: ClassifierThresholds = ClassifierThresholds()
) -> AssemblyResult:
    """Three-way classification of a metric curve.

    Dense: final gcc_fraction >= dense_gcc and the smoothed path-length
    curve has an interior maximum followed by a decline of at least
    ``decline`` of the peak.  Treelike: not dense, final gcc_fraction >=
    treelike_gcc.  Otherwise no giant component.
    """
    defined = [
        (p.month, p.mean_path_length)
        for p in curve
        if p.mean_path_length is not None
    ]
    if len(defined) < 3:
        raise UnclassifiableCurveError(
            f"need >= 3 points with defined path length, have {len(defined)}"
        )
    months = [m for m, _ in defined]
    smoothed = _smooth([v for _, v in defined], thresholds.smoothing_window)

    peak_idx = max(range(len(smoothed)), key=lambda i: (smoothed[i], -i))
    peak_value = smoothed[peak_idx]
    interior = 0 < peak_idx < len(smoothed) - 1
    decline_ratio = None
    if interior and peak_value > 0:
        trough = min(smoothed[peak_idx + 1 :])
        decline_ratio = (peak_value - trough) / peak_value

    final_gcc = curve.points[-1].gcc_fraction
    declined = decline_ratio is not None and decline_ratio >= thresholds.decline
    if final_gcc >= thresholds.dense_gcc and declined:
        cls = AssemblyClass.DENSE_GC
    elif final_gcc >= thresholds.treelike_gcc:
        cls = AssemblyClass.TREELIKE_GC
    else:
        cls = AssemblyClass.NO_GC
    return AssemblyResult(
        assembly_class=cls,
        final_gcc_fraction=final_gcc,
        peak_month=months[peak_idx] if interior else None,
        peak_value=peak_value if interior else None,
        decline_ratio=decline_ratio,
    )


# ---------------------------------------------------------------------------
# Null model


@dataclass(frozen=True)
class NullBin:
    bin_lo: float
    bin_hi: float
    mean_gcc_fraction: float
    std_gcc_fraction: float
    mean_mpl: float | None
    std_mpl: float | None


@dataclass
class NullBand:
    bins: list[NullBin]
    n_instances: int
    n_articles: int
    seed: int

    def lookup(self, n_nodes: int) -> NullBin:
        """Populated bin nearest to ``n_nodes`` on the log scale."""
        if not self.bins:
            raise ValueError("null band has no bins")
        target = math.log10(max(n_nodes, 1))
        return min(
            self.bins,
            key=lambda b: abs((math.log10(b.bin_lo) + math.log10(b.bin_hi)) / 2 - target),
        )


def _bin_index(n_nodes: int, bins_per_decade: int) -> int:
    return math.floor(bins_per_decade * math.log10(n_nodes) + 1e-12)


def null_model(
    corpus: Corpus,
    n_articles: int,
    n_instances: int,
    policy: EdgePolicy,
    seed: int,
    convention: NamingConvention = NamingConvention.FULL_NAME,
    bins_per_decade: int = 20,
    exact_limit: int = 2000,
    sample_sources: int = 1000,
) -> NullBand:
    """Band of gcc_fraction / mean path length over random article samples.

    Instance i samples ``n_articles`` documents uniformly without
    replacement using ``seed + i``, builds its co-authorship series under
    ``policy``, and measures it.  Curves are aligned on geometric
    total-node-count bins and aggregated across instances.
    """
    if n_instances < 1:
        raise ValueError("n_instances must be >= 1")
    if n_articles > len(corpus):
        raise ValueError(
            f"n_articles {n_articles} exceeds corpus size {len(corpus)}"
        )
    all_ids = [doc.doc_id for doc in corpus]
    origin = corpus.origin
    # bin -> per-instance value lists, filled in instance order
    gcc_by_bin: dict[int, list[float]] = {}
    mpl_by_bin: dict[int, list[float]] = {}
    for i in range(n_instances):
        rng = np.random.default_rng(seed + i)
        picked = rng.choice(len(all_ids), size=n_articles, replace=False)
        doc_ids = [all_ids[j] for j in sorted(picked)]
        log = build_events(doc_ids, corpus, convention, origin=origin)
        series = assemble_series(log, policy)
        curve = measure_series(
            series,
            exact_limit=exact_limit,
            sample_sources=sample_sources,
            seed=seed + i,
        )
        inst_gcc: dict[int, list[float]] = {}
        inst_mpl: dict[int, list[float]] = {}
        for p in curve:
            b = _bin_index(p.n_nodes, bins_per_decade)
            inst_gcc.setdefault(b, []).append(p.gcc_fraction)
            if p.mean_path_length is not None:
                inst_mpl.setdefault(b, []).append(p.mean_path_length)
        for b, values in inst_gcc.items():
            gcc_by_bin.setdefault(b, []).append(sum(values) / len(values))
        for b, values in inst_mpl.items():
            mpl_by_bin.setdefault(b, []).append(sum(values) / len(values))

    bins: list[NullBin] = []
    for b in sorted(gcc_by_bin):
        gcc_vals = np.asarray(gcc_by_bin[b])
        mpl_vals = np.asarray(mpl_by_bin.get(b, []))
        bins.append(
            NullBin(
                bin_lo=10 ** (b / bins_per_decade),
                bin_hi=10 ** ((b + 1) / bins_per_decade),
                mean_gcc_fraction=float(gcc_vals.mean()),
                std_gcc_fraction=float(gcc_vals.std()),
                mean_mpl=float(mpl_vals.mean()) if mpl_vals.size else None,
                std_mpl=float(mpl_vals.std()) if mpl_vals.size else None,
            )
        )
    return NullBand(
        bins=bins, n_instances=n_instances, n_articles=n_articles, seed=seed
    )


# ---------------------------------------------------------------------------
# Pairwise modularity


@dataclass
class CommunityLabeling:
    """Nodes labeled 'x', 'y', or 'both', plus the co-authorship edge list."""

    labels: dict[str, str]
    edges: list[tuple[str, str]]

    def __post_init__(self) -> None:
        valid = {"x", "y", "both"}
        bad = {l for l in self.labels.values() if l not in valid}
        if bad:
            raise ValueError(f"invalid labels: {sorted(bad)}")
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if u not in self.labels or v not in self.labels:
                raise ValueError(f"edge endpoint missing a label: ({u!r}, {v!r})")


def build_pair_labeling(
    log_x: CollaborationEventLog, log_y: CollaborationEventLog
) -> CommunityLabeling:
    """Label the union network of two topics' final co-authorship graphs."""
    authors_x = set(log_x.first_seen)
    authors_y = set(log_y.first_seen)
    labels: dict[str, str] = {}
    for a in authors_x | authors_y:
        if a in authors_x and a in authors_y:
            labels[a] = "both"
        elif a in authors_x:
            labels[a] = "x"
        else:
            labels[a] = "y"
    pairs: set[tuple[str, str]] = set()
    for log in (log_x, log_y):
        for event in log.events:
            pairs.update(combinations(event.authors, 2))
    return CommunityLabeling(labels=labels, edges=sorted(pairs))


def pairwise_modularity(labeling: CommunityLabeling) -> float:
    """Normalized modularity Q/Qmax of a two-community labeling.

    Same-community pairs are those where both nodes carry the same
    single-topic label; any pair involving a 'both' node counts as unlike.
    A network whose whole degree mass sits in one community scores 0.
    """
    m = len(labeling.edges)
    if m < 1:
        raise ValueError("modularity undefined without edges")
    degree: dict[str, int] = {node: 0 for node in labeling.labels}
    within = {"x": 0, "y": 0}
    for u, v in labeling.edges:
        degree[u] += 1
        degree[v] += 1
        lu, lv = labeling.labels[u], labeling.labels[v]
        if lu == lv and lu in within:
            within[lu] += 1
    strength = {"x": 0, "y": 0}
    for node, label in labeling.labels.items():
        if label in strength:
            strength[label] += degree[node]
    two_m = 2.0 * m
    null_term = (strength["x"] ** 2 + strength["y"] ** 2) / two_m
    numerator = 2.0 * (within["x"] + within["y"]) - null_term
    denominator = two_m - null_term
    if denominator == 0.0:
        # All degree mass in a single community; numerator is 0 too.
        return 0.0
    return numerator / denominator


# ---------------------------------------------------------------------------
# CSV interfaces


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


METRIC_COLUMNS = (
    "month_index,year_month,n_nodes,n_edges,gcc_nodes,gcc_fraction,"
    "mean_path_length,path_mode"
)


def write_metric_curve(curve: MetricCurve, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(METRIC_COLUMNS + "\n")
        for p in curve:
            fh.write(
                f"{p.month},{p.year_month},{p.n_nodes},{p.n_edges},"
                f"{p.gcc_nodes},{_fmt(p.gcc_fraction)},"
                f"{_fmt(p.mean_path_length)},{p.path_mode}\n"
            )


def read_metric_curve(path: str | Path) -> MetricCurve:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != METRIC_COLUMNS:
        raise ValueError(f"{path}: unexpected metric CSV header")
    points = []
    for line in lines[1:]:
        (month, ym, n_nodes, n_edges, gcc_nodes, gcc_frac, mpl, mode) = line.split(",")
        points.append(
            MetricPoint(
                month=int(month),
                year_month=ym,
                n_nodes=int(n_nodes),
                n_edges=int(n_edges),
                gcc_nodes=int(gcc_nodes),
                gcc_fraction=float(gcc_frac),
                mean_path_length=float(mpl) if mpl else None,
                path_mode=mode,
            )
        )
    return MetricCurve(points)


NULL_COLUMNS = "bin_lo,bin_hi,mean_gcc_fraction,std_gcc_fraction,mean_mpl,std_mpl"


def write_null_band(band: NullBand, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(NULL_COLUMNS + "\n")
        for b in band.bins:
            fh.write(
                f"{_fmt(b.bin_lo)},{_fmt(b.bin_hi)},{_fmt(b.mean_gcc_fraction)},"
                f"{_fmt(b.std_gcc_fraction)},{_fmt(b.mean_mpl)},{_fmt(b.std_mpl)}\n"
            )


MODULARITY_COLUMNS = "topic_a,topic_b,q_over_qmax"


def write_modularity_matrix(
    entries: Iterable[tuple[int, int, float | None]], path: str | Path
) -> None:
    """Long-format matrix rows (topic_a, topic_b, score); None renders 'nan'."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MODULARITY_COLUMNS + "\n")
        for a, b, q in entries:
            q_str = "nan" if q is None else repr(float(q))
            fh.write(f"{a},{b},{q_str}\n")
