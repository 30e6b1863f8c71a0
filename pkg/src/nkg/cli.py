"""Command-line front end.

Subcommands: build, normalize, query, eval, fixture. Every command is a
thin shell over the library; payload goes to standard output, diagnostics
to standard error.

Exit codes:
    0  success
    1  unexpected internal error
    2  unreadable input, malformed JSON, or schema/config violation
    3  graph is already normalized
    4  embedding provider failure
    5  unknown id (event, entity, scope, or node)
    6  query mode does not match the graph
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import resources
from .annotations import parse_annotations
from .builder import build_all
from .embedding import HashedNgramProvider, RemoteProvider, load_vector_file
from .errors import (
    AlreadyNormalized,
    DanglingReference,
    DuplicateId,
    EmptyLabel,
    GraphError,
    MalformedJson,
    NkgError,
    NotAnEventNode,
    NotNormalized,
    ProviderError,
    SchemaViolation,
    UnknownEntity,
    UnknownEvent,
    UnknownNode,
    UnknownScope,
)
from .evaluation import build_gold, load_gold_labels, render_report, run_eval
from .fixtures import FIXTURE_KINDS, generate_fixture
from .graph import deserialize
from .lexicon import SynonymLexicon, load_lexicon
from .normalize import (
    DEFAULT_THRESHOLD,
    NormalizationMap,
    apply_normalization,
    build_normalization_map,
)
from .reasoner import (
    character_trajectory,
    reconstruct_timeline,
    retrieve_actions,
    summarize_event,
    trace_dialogue,
)

log = logging.getLogger(__name__)

ENV_THRESHOLD = "NKG_THRESHOLD"
ENV_EMBED_URL = "NKG_EMBED_URL"

QUERY_TASKS = ("action", "dialogue", "trajectory", "timeline", "summary")


@dataclass(frozen=True)
class Config:
    threshold: float = DEFAULT_THRESHOLD
    embedder: str = "hashed"
    lexicon_path: str | None = None
    mode: str = "raw"
    output_format: str = "json"


def resolve_config(args: argparse.Namespace, env: dict | None = None) -> Config:
    """Merge flag, environment, config-file, and default settings.

    Precedence: flags beat environment variables beat the --config file
    beat built-in defaults.
    """
    env = os.environ if env is None else env
    file_cfg: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            file_cfg = json.loads(Path(config_path).read_text())
        except json.JSONDecodeError as exc:
            raise MalformedJson(f"config file {config_path}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise SchemaViolation(str(config_path), "config file must hold an object")

    threshold = getattr(args, "threshold", None)
    if threshold is None and ENV_THRESHOLD in env:
        try:
            threshold = float(env[ENV_THRESHOLD])
        except ValueError:
            raise ValueError(f"{ENV_THRESHOLD} must be a number, got {env[ENV_THRESHOLD]!r}")
    if threshold is None:
        threshold = file_cfg.get("threshold", DEFAULT_THRESHOLD)
    if not isinstance(threshold, (int, float)) or not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold!r}")

    embedder = getattr(args, "embedder", None)
    if embedder is None and ENV_EMBED_URL in env:
        embedder = f"remote:{env[ENV_EMBED_URL]}"
    if embedder is None:
        embedder = file_cfg.get("embedder", "hashed")

    lexicon_path = getattr(args, "lexicon", None) or file_cfg.get("lexicon")

    return Config(
        threshold=float(threshold),
        embedder=embedder,
        lexicon_path=lexicon_path,
        mode=getattr(args, "mode", None) or "raw",
        output_format=getattr(args, "format", None) or "json",
    )


def make_provider(spec: str):
    if spec == "hashed":
        return HashedNgramProvider()
    if spec.startswith("file:"):
        return load_vector_file(spec[5:])
    if spec.startswith("remote:"):
        url = spec[7:]
        if not url.startswith(("http://", "https://")):
            raise ValueError(f"remote embedder needs an http(s) URL, got {url!r}")
        return RemoteProvider(url)
    raise ValueError(f"embedder must be hashed, file:PATH, or remote:URL, got {spec!r}")


def load_lexicon_config(path: str | None) -> SynonymLexicon:
    if path is None:
        return resources.default_lexicon()
    return load_lexicon(Path(path).read_bytes())


def map_side_path(graph_path: Path) -> Path:
    """Where the normalization map lands next to a normalized graph file."""
    name = graph_path.name
    if name.endswith(".json"):
        return graph_path.with_name(name[: -len(".json")] + ".map.json")
    return graph_path.with_name(name + ".map.json")


def _emit(payload: bytes, output: str | None) -> None:
    if output:
        Path(output).write_bytes(payload)
        log.info("wrote %s", output)
    else:
        sys.stdout.write(payload.decode())


# --- subcommands ------------------------------------------------------------


def cmd_build(args: argparse.Namespace) -> int:
    doc = parse_annotations(Path(args.input).read_bytes())
    graph = build_all(doc)
    Path(args.output).write_bytes(graph.to_json_bytes())
    log.info(
        "built graph for %s: %d nodes, %d edges -> %s",
        doc.story_id,
        graph.node_count(),
        graph.edge_count(),
        args.output,
    )
    return 0


def cmd_normalize(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    graph = deserialize(Path(args.input).read_bytes())
    if graph.normalized:
        raise AlreadyNormalized(f"{args.input} is already normalized")
    gold_labels = None
    if args.gold:
        gold_labels = set(load_gold_labels(Path(args.gold).read_bytes()))
    norm_map = build_normalization_map(
        graph,
        make_provider(config.embedder),
        load_lexicon_config(config.lexicon_path),
        config.threshold,
        gold_labels=gold_labels,
    )
    normalized = apply_normalization(graph, norm_map)
    output = Path(args.output)
    output.write_bytes(normalized.to_json_bytes())
    side = map_side_path(output)
    side.write_bytes(norm_map.to_json_bytes())
    log.info(
        "normalized %s at threshold %s (%d clusters) -> %s, map -> %s",
        args.input,
        config.threshold,
        len(norm_map.clusters),
        output,
        side,
    )
    return 0


def _query_norm_map(args: argparse.Namespace) -> NormalizationMap | None:
    if getattr(args, "map", None):
        return NormalizationMap.from_json_bytes(Path(args.map).read_bytes())
    side = map_side_path(Path(args.input))
    if side.exists():
        return NormalizationMap.from_json_bytes(side.read_bytes())
    return None


def cmd_query(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    graph = deserialize(Path(args.input).read_bytes())
    if args.task == "action":
        hits = retrieve_actions(
            graph,
            args.arg,
            config.mode,
            norm_map=_query_norm_map(args),
            lexicon=load_lexicon_config(config.lexicon_path),
            provider=make_provider(config.embedder),
        )
        payload: object = [hit.as_dict() for hit in hits]
    elif args.task == "dialogue":
        payload = trace_dialogue(graph, args.arg).as_dict()
    elif args.task == "trajectory":
        payload = character_trajectory(graph, args.arg).as_dict()
    elif args.task == "timeline":
        payload = reconstruct_timeline(graph, args.arg, args.order).as_dict()
    else:
        payload = summarize_event(graph, args.arg).as_dict()
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    doc = parse_annotations(Path(args.input).read_bytes())
    gold_bytes = Path(args.gold).read_bytes() if args.gold else None
    gold_labels = set(load_gold_labels(gold_bytes)) if gold_bytes else None
    graph_raw = build_all(doc)
    norm_map = build_normalization_map(
        doc,
        make_provider(config.embedder),
        load_lexicon_config(config.lexicon_path),
        config.threshold,
        gold_labels=gold_labels,
    )
    graph_norm = apply_normalization(graph_raw, norm_map)
    gold = build_gold(doc, normalization_map=norm_map, gold_label_file=gold_bytes)
    report = run_eval(
        doc,
        graph_raw,
        graph_norm,
        gold,
        norm_map=norm_map,
        normalized_all=args.normalized_all,
    )
    _emit(render_report(report, config.output_format), args.output)
    return 0


def cmd_fixture(args: argparse.Namespace) -> int:
    doc = generate_fixture(args.kind, seed=args.seed, variance=args.variance)
    _emit(doc.to_json_bytes(), args.output)
    return 0


# --- wiring -----------------------------------------------------------------


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--threshold", type=float, default=None)
    parser.add_argument(
        "--embedder", default=None, metavar="{hashed|file:PATH|remote:URL}"
    )
    parser.add_argument("--lexicon", default=None, metavar="PATH")
    parser.add_argument("--config", default=None, metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nkg", description="Narrative knowledge graph toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a raw graph from annotations")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("normalize", help="normalize a raw graph")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--gold", default=None, metavar="PATH")
    _add_config_flags(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("query", help="run a reasoning task against a graph")
    p.add_argument("task", choices=QUERY_TASKS)
    p.add_argument("arg", help="query label or node/entity/scope id")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("raw", "normalized"), default=None)
    p.add_argument("--order", choices=("reading", "storytime"), default="reading")
    p.add_argument("--map", default=None, metavar="PATH")
    _add_config_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="score the five tasks against gold")
    p.add_argument("--input", required=True)
    p.add_argument("--gold", default=None, metavar="PATH")
    p.add_argument("--output", default=None)
    p.add_argument(
        "--format", choices=("json", "csv", "md", "plotdata"), default=None
    )
    p.add_argument("--normalized-all", action="store_true", dest="normalized_all")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fixture", help="emit a synthetic annotation document")
    p.add_argument("kind", choices=FIXTURE_KINDS)
    p.add_argument("--output", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variance", type=float, default=0.0)
    p.set_defaults(func=cmd_fixture)

    return parser


_EXIT_MAP = (
    (NotNormalized, 6),
    ((UnknownEvent, UnknownEntity, UnknownScope, UnknownNode, NotAnEventNode), 5),
    (ProviderError, 4),
    (AlreadyNormalized, 3),
    (
        (
            MalformedJson,
            SchemaViolation,
            DuplicateId,
            DanglingReference,
            EmptyLabel,
            GraphError,
            ValueError,
            OSError,
        ),
        2,
    ),
    (NkgError, 1),
)


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single translation point to exit codes
        for types, code in _EXIT_MAP:
            if isinstance(exc, types):
                print(f"error: {exc}", file=sys.stderr)
                return code
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
