"""topicnets command line.

Subcommands map one-to-one onto pipeline stages, plus ``run`` (all stages +
manifest), ``synth`` (generate a planted corpus), and ``apply`` (apply a
trained model to a second corpus).  Exits 0 on success; on failure prints a
single machine-readable ``error\t<type>\t<message>`` line to stderr and
exits 1 (2 for usage errors).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..corpus import YearMonth, serialize_corpus
from .config import PipelineConfig, load_config_file, parse_config_pairs
from .stages import STAGE_ORDER, apply_model, run_all, run_stage, stage_assemble
from .synth import _DEFAULT_MIXING, SyntheticSpec, generate_synthetic, write_truth


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key=value config file")
    parser.add_argument("--corpus", type=Path, help="corpus records (JSON lines)")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--seed", type=int, help="global seed (mandatory)")
    parser.add_argument(
        "--topics", help="comma-separated topic ids to restrict graph stages to"
    )
    parser.add_argument(
        "--lifetime",
        help="comma-separated edge lifetimes in months, e.g. 'unlimited,24,60,120'",
    )
    parser.add_argument(
        "--scheme", choices=["threshold", "coverage"], help="assignment scheme"
    )
    parser.add_argument(
        "--convention",
        choices=["full", "initial"],
        help="author naming convention",
    )
    parser.add_argument("--k", type=int, help="topic count")
    parser.add_argument("--iterations", type=int, help="Gibbs sweeps")
    parser.add_argument("--tau", type=float, help="threshold scheme cutoff")
    parser.add_argument("--coverage", type=float, help="coverage scheme mass")
    parser.add_argument("--instances", type=int, help="null-model instances")
    parser.add_argument("--min-count", type=int, help="vocabulary count threshold")
    parser.add_argument("--stopwords", type=Path, help="stop list file")
    parser.add_argument(
        "--extra-stopwords", type=Path, help="corpus-specific stop list file"
    )
    parser.add_argument("--lexicon", type=Path, help="lemma lexicon file")


_FLAG_TO_KEY = {
    "corpus": "corpus",
    "out": "out",
    "seed": "seed",
    "topics": "topics_filter",
    "lifetime": "lifetimes",
    "scheme": "scheme",
    "convention": "convention",
    "k": "k",
    "iterations": "iterations",
    "tau": "tau",
    "coverage": "coverage",
    "instances": "null_instances",
    "min_count": "min_count",
    "stopwords": "stopwords",
    "extra_stopwords": "extra_stopwords",
    "lexicon": "lexicon",
}


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    values: dict = {}
    if args.config:
        values.update(load_config_file(args.config))
    overrides: dict[str, str] = {}
    for flag, key in _FLAG_TO_KEY.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = str(value)
    values.update(parse_config_pairs(overrides, Path.cwd()))
    missing = [k for k in ("corpus", "out", "seed") if k not in values]
    if missing:
        raise ValueError(
            f"missing required settings: {', '.join(missing)} "
            "(set via --config file or flags)"
        )
    return PipelineConfig(**values)


def _cmd_stage(name: str):
    def handler(args: argparse.Namespace) -> None:
        config = _build_config(args)
        if name == "assemble":
            outputs = stage_assemble(config, getattr(args, "write_snapshots", False))
        else:
            outputs = run_stage(name, config)
        for path in outputs:
            print(path)

    return handler


def _cmd_run(args: argparse.Namespace) -> None:
    config = _build_config(args)
    stages = args.stages.split(",") if args.stages else None
    manifest = run_all(config, stages)
    print(manifest)


def _cmd_synth(args: argparse.Namespace) -> None:
    mixing = None
    if args.mixing:
        parts = [p for p in args.mixing.split(";") if p]
        mixing = tuple(
            (float(lo), float(hi))
            for lo, hi in (p.split(":") for p in parts)
        )
    kwargs = dict(
        n_docs=args.docs,
        months=args.months,
        seed=args.seed,
        name_variant_rate=args.variant_rate,
        pool_overlap=args.pool_overlap,
        start=YearMonth.parse(args.start),
    )
    if mixing is not None:
        kwargs["mixing"] = mixing
        kwargs["n_topics"] = args.topics_count or len(mixing)
    elif args.topics_count is not None:
        kwargs["n_topics"] = args.topics_count
        kwargs["mixing"] = tuple(
            _DEFAULT_MIXING[i % len(_DEFAULT_MIXING)]
            for i in range(args.topics_count)
        )
    spec = SyntheticSpec(**kwargs)
    corpus, truth = generate_synthetic(spec)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        serialize_corpus(corpus, fh)
    write_truth(truth, args.truth)
    print(args.out)
    print(args.truth)


def _cmd_apply(args: argparse.Namespace) -> None:
    config = _build_config(args)
    outputs = apply_model(
        config, args.second_corpus, args.apply_out, force=args.force
    )
    for path in outputs:
        print(path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicnets",
        description="Topic-partitioned co-authorship network assembly analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in STAGE_ORDER:
        p = sub.add_parser(name, help=f"run the {name} stage")
        _add_common(p)
        if name == "assemble":
            p.add_argument(
                "--write-snapshots",
                action="store_true",
                help="also export per-month edge lists for each policy",
            )
        p.set_defaults(func=_cmd_stage(name))

    p = sub.add_parser("run", help="run all stages and write the manifest")
    _add_common(p)
    p.add_argument("--stages", help="comma-separated subset, in order")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("synth", help="generate a planted synthetic corpus")
    p.add_argument("--out", type=Path, required=True, help="corpus file to write")
    p.add_argument("--truth", type=Path, required=True, help="truth sidecar file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--docs", type=int, default=2000)
    p.add_argument("--topics-count", type=int, default=None)
    p.add_argument("--months", type=int, default=72)
    p.add_argument("--start", default="1994-01")
    p.add_argument("--variant-rate", type=float, default=0.0)
    p.add_argument("--pool-overlap", type=float, default=0.0)
    p.add_argument(
        "--mixing",
        help="per-topic 'lo:hi' ramps joined by ';', e.g. '0:0.85;0:0;0:0.2'",
    )
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("apply", help="apply a trained model to a second corpus")
    _add_common(p)
    p.add_argument(
        "--second-corpus", type=Path, required=True, help="corpus B records"
    )
    p.add_argument(
        "--apply-out", type=Path, required=True, help="output directory for B"
    )
    p.add_argument(
        "--force", action="store_true", help="ignore preprocessing digest mismatch"
    )
    p.set_defaults(func=_cmd_apply)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI error surface
        print(f"error\t{type(exc).__name__}\t{exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
