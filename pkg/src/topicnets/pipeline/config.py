"""Run configuration: flat key=value file, CLI overrides, derived seeds."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from ..corpus import NamingConvention
from ..graphs import EdgePolicy
from ..metrics import ClassifierThresholds
from ..topics import CumulativeCoverageScheme, Scheme, ThresholdScheme

__all__ = [
    "PipelineConfig",
    "load_config_file",
    "derive_seed",
    "SEED_STREAMS",
]

# Seed streams are arithmetic offsets from the mandatory global seed.  Streams
# that need one seed per item (documents, null instances) add the item index
# on top of the stream base.
SEED_STREAMS = {
    "train": 1,
    "infer": 2_000_000,
    "measure": 4_000_000,
    "null": 6_000_000,
}
# Per-topic stride inside the null stream: instance i of topic t uses
# seed + SEED_STREAMS["null"] + t * NULL_TOPIC_STRIDE + i.
NULL_TOPIC_STRIDE = 10_000


def derive_seed(seed: int, stream: str, index: int = 0) -> int:
    return seed + SEED_STREAMS[stream] + index


@dataclass(frozen=True)
class PipelineConfig:
    corpus: Path
    out: Path
    seed: int
    stopwords: Path | None = None  # None -> shipped default list
    extra_stopwords: Path | None = None  # corpus-specific additions
    lexicon: Path | None = None  # None -> shipped default lexicon
    convention: NamingConvention = NamingConvention.FULL_NAME
    min_count: int = 5
    k: int = 50
    alpha: float | None = None  # None -> 5.0 / k
    beta: float = 0.01
    iterations: int = 1000
    infer_sweeps: int = 200
    infer_burn_in: int = 100
    scheme: str = "threshold"
    tau: float = 0.6
    coverage: float = 0.5
    lifetimes: tuple[int | None, ...] = (None, 24, 60, 120)
    max_authors: int | None = None
    dense_gcc: float = 0.25
    treelike_gcc: float = 0.10
    decline: float = 0.10
    smoothing_window: int = 5
    null_instances: int = 100
    null_articles: int | None = None  # None -> per-topic article count
    exact_path_limit: int = 2000
    sample_sources: int = 1000
    topics_filter: tuple[int, ...] | None = None

    def assignment_scheme(self) -> Scheme:
        if self.scheme == "threshold":
            return ThresholdScheme(self.tau)
        if self.scheme == "coverage":
            return CumulativeCoverageScheme(self.coverage)
        raise ValueError(f"unknown scheme: {self.scheme!r}")

    def classifier_thresholds(self) -> ClassifierThresholds:
        return ClassifierThresholds(
            dense_gcc=self.dense_gcc,
            treelike_gcc=self.treelike_gcc,
            decline=self.decline,
            smoothing_window=self.smoothing_window,
        )

    def edge_policies(self) -> list[EdgePolicy]:
        return [EdgePolicy(lifetime) for lifetime in self.lifetimes]

    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 5.0 / self.k

    def echo(self) -> dict[str, str]:
        """Stable key=value view for manifests."""
        out: dict[str, str] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                text = ""
            elif f.name == "lifetimes":
                text = ",".join(
                    "unlimited" if v is None else str(v) for v in value
                )
            elif f.name == "topics_filter":
                text = ",".join(str(v) for v in value)
            elif isinstance(value, NamingConvention):
                text = value.value
            else:
                text = str(value)
            out[f.name] = text
        return out


_PATH_KEYS = {"corpus", "out", "stopwords", "extra_stopwords", "lexicon"}
_INT_KEYS = {
    "seed",
    "min_count",
    "k",
    "iterations",
    "infer_sweeps",
    "infer_burn_in",
    "smoothing_window",
    "null_instances",
    "exact_path_limit",
    "sample_sources",
}
_OPT_INT_KEYS = {"max_authors", "null_articles"}
_FLOAT_KEYS = {"beta", "tau", "coverage", "dense_gcc", "treelike_gcc", "decline"}
_OPT_FLOAT_KEYS = {"alpha"}


def _parse_lifetimes(text: str) -> tuple[int | None, ...]:
    out: list[int | None] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        out.append(None if part == "unlimited" else int(part))
    if not out:
        raise ValueError("lifetimes must name at least one policy")
    return tuple(out)


def parse_config_pairs(pairs: dict[str, str], base_dir: Path) -> dict:
    """Convert raw key=value strings into PipelineConfig field values."""
    known = {f.name for f in fields(PipelineConfig)}
    values: dict = {}
    for key, raw in pairs.items():
        if key not in known:
            raise ValueError(f"unknown config key: {key!r}")
        if key in _PATH_KEYS:
            values[key] = (base_dir / raw).resolve() if raw else None
        elif key in _INT_KEYS:
            values[key] = int(raw)
        elif key in _OPT_INT_KEYS:
            values[key] = int(raw) if raw else None
        elif key in _FLOAT_KEYS:
            values[key] = float(raw)
        elif key in _OPT_FLOAT_KEYS:
            values[key] = float(raw) if raw else None
        elif key == "lifetimes":
            values[key] = _parse_lifetimes(raw)
        elif key == "convention":
            values[key] = NamingConvention.parse(raw)
        elif key == "topics_filter":
            values[key] = tuple(int(t) for t in raw.split(",")) if raw else None
        else:  # scheme
            values[key] = raw
    return values


def load_config_file(path: str | Path) -> dict:
    """Read a flat ``key = value`` file; paths resolve relative to the file."""
    path = Path(path)
    pairs: dict[str, str] = {}
    for line_no, line in enumerate(
        path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}: line {line_no}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        pairs[key.strip()] = value.strip()
    return parse_config_pairs(pairs, path.parent)
