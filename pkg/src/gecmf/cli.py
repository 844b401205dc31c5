"""Command-line pipeline: extract / expand / mask / evaluate.

Stages are composable through files (M2 corpora, instance records, masked
records, report records) so each can be run and tested in isolation. Every
writing command drops a manifest.json with the effective configuration,
toolkit version and model id, sufficient to re-run bit-identically against
the mock backends.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .alignment import extract_edits
from .core import AnnotatedSentence, EditKind, as_tokens, parse_m2, serialize_m2
from .errors import ConfigurationError, GecmfError, M2ParseError, ProtocolError, TransportError
from .evaluation import (
    MatchMode,
    default_mode,
    evaluate_corpus,
    render_grid,
    report_record,
    write_reports,
)
from .expansion import (
    EACH_EDIT,
    LAST_EDIT,
    expand_corpus,
    read_instances,
    write_instances,
)
from .fillmask import FillModel, GoldMock, LexiconMock, RemoteClient
from .masking import MaskStrategy, mask_instance, write_masked

ENDPOINT_ENV = "GECMF_ENDPOINT"

_SCHEMES = {"each-edit": EACH_EDIT, "last-edit": LAST_EDIT}
_STRATEGIES = {s.value: s for s in MaskStrategy}
_MODES = {m.value: m for m in MatchMode}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as handle:
        config = json.load(handle)
    if not isinstance(config, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return config


def _merged(args: argparse.Namespace, config: dict, key: str, default=None):
    """Flag value if given, else config file value, else default."""
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _build_model(name: str, endpoint: str | None) -> FillModel:
    if name == "gold-mock":
        return GoldMock()
    if name == "lexicon-mock":
        return LexiconMock()
    if name == "remote":
        endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise ConfigurationError(
                f"remote model requires --endpoint or ${ENDPOINT_ENV}"
            )
        return RemoteClient(endpoint)
    raise ConfigurationError(f"unknown model {name!r}")


def _write_manifest(out_dir: Path, command: str, config: dict, model_id: str | None):
    manifest = {
        "toolkit_version": __version__,
        "command": command,
        "config": config,
        "model_id": model_id,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _read_sentence_file(path: str) -> list:
    with open(path, encoding="utf-8") as handle:
        return [as_tokens(line.split()) for line in handle.read().splitlines()]


def cmd_extract(args) -> int:
    sources = _read_sentence_file(args.source)
    targets = _read_sentence_file(args.target)
    if len(sources) != len(targets):
        print(
            f"error: {args.source} has {len(sources)} sentences but {args.target} "
            f"has {len(targets)}",
            file=sys.stderr,
        )
        return 2
    sentences = [
        AnnotatedSentence(src, extract_edits(src, tgt), 0)
        for src, tgt in zip(sources, targets)
    ]
    text = serialize_m2(sentences)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_expand(args, config: dict) -> int:
    corpus = _merged(args, config, "corpus")
    scheme = _merged(args, config, "scheme", EACH_EDIT)
    out = Path(_merged(args, config, "out", "."))
    if not corpus:
        print("error: expand requires --corpus", file=sys.stderr)
        return 2
    with open(corpus, encoding="utf-8") as handle:
        sentences = parse_m2(handle.read())
    schemes = list(_SCHEMES) if scheme == "all" else [scheme]
    out.mkdir(parents=True, exist_ok=True)
    for one_scheme in schemes:
        instances = expand_corpus(sentences, _SCHEMES[one_scheme], annotator_id=args.annotator)
        path = out / f"instances.{one_scheme}.jsonl"
        with open(path, "w", encoding="utf-8") as handle:
            count = write_instances(instances, handle)
        print(f"scheme={one_scheme} instances={count} file={path}")
    _write_manifest(out, "expand", {"corpus": corpus, "schemes": schemes, "annotator": args.annotator}, None)
    return 0


def cmd_mask(args, config: dict) -> int:
    strategy = _STRATEGIES[_merged(args, config, "strategy", "single")]
    out = Path(_merged(args, config, "out", "."))
    model_name = _merged(args, config, "model", "gold-mock")
    model = _build_model(model_name, _merged(args, config, "endpoint"))
    piece_tokenizer = model.pieces if strategy is MaskStrategy.TARGET_LENGTH else None
    with open(args.instances, encoding="utf-8") as handle:
        instances = list(read_instances(handle))
    masked = []
    skipped_deletions = 0
    for instance in instances:
        if instance.residual.kind is EditKind.DELETION:
            skipped_deletions += 1
            continue
        masked.append(mask_instance(instance, strategy, piece_tokenizer))
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"masked.{strategy.value}.jsonl"
    with open(path, "w", encoding="utf-8") as handle:
        count = write_masked(masked, handle, strategy)
    _write_manifest(
        out,
        "mask",
        {"instances": args.instances, "strategy": strategy.value, "model": model_name},
        model.model_id,
    )
    print(f"strategy={strategy.value} masked={count} skipped_deletions={skipped_deletions} file={path}")
    return 0


def _instances_by_scheme(args, config: dict) -> dict:
    """Resolve the instance sets to evaluate, keyed by scheme label."""
    instances_path = _merged(args, config, "instances")
    corpus = _merged(args, config, "corpus")
    scheme = _merged(args, config, "scheme", EACH_EDIT)
    if instances_path:
        with open(instances_path, encoding="utf-8") as handle:
            instances = list(read_instances(handle))
        label = next((i.scheme for i in instances if i.scheme), "instances")
        return {label: instances}
    if not corpus:
        raise ConfigurationError("evaluate requires --instances or --corpus")
    with open(corpus, encoding="utf-8") as handle:
        sentences = parse_m2(handle.read())
    schemes = list(_SCHEMES) if scheme == "all" else [scheme]
    return {s: expand_corpus(sentences, _SCHEMES[s], annotator_id=args.annotator) for s in schemes}


def cmd_evaluate(args, config: dict) -> int:
    strategy_arg = _merged(args, config, "strategy", "single")
    strategies = list(_STRATEGIES.values()) if strategy_arg == "all" else [_STRATEGIES[strategy_arg]]
    k = int(_merged(args, config, "top-k", 5))
    mode_arg = _merged(args, config, "mode")
    include_deletions = bool(_merged(args, config, "include-deletions", False))
    oracle = _merged(args, config, "rerank", "none") == "oracle"
    out = Path(_merged(args, config, "out", "."))
    model_name = _merged(args, config, "model", "gold-mock")
    jobs = _merged(args, config, "jobs")
    jobs = int(jobs) if jobs is not None else (os.cpu_count() or 1)

    model = _build_model(model_name, _merged(args, config, "endpoint"))
    if isinstance(model, RemoteClient):
        jobs = min(jobs, model.max_in_flight)
        model.health()  # fail fast and record the checkpoint id

    by_scheme = _instances_by_scheme(args, config)
    reports = {}
    records = []
    for strategy in strategies:
        mode = _MODES[mode_arg] if mode_arg else default_mode(strategy)
        for scheme, instances in by_scheme.items():
            report = evaluate_corpus(
                instances,
                strategy,
                model,
                k=k,
                mode=mode,
                include_deletions=include_deletions,
                oracle_rerank=oracle,
                jobs=jobs,
            )
            reports[(strategy.value, scheme)] = report
            records.append(report_record(report, strategy, scheme, mode, k))

    table = render_grid(reports, k=k)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "reports.jsonl", "w", encoding="utf-8") as handle:
        write_reports(records, handle)
    (out / "report.txt").write_text(table + "\n", encoding="utf-8")
    _write_manifest(
        out,
        "evaluate",
        {
            "strategy": strategy_arg,
            "schemes": sorted(by_scheme),
            "model": model_name,
            "top_k": k,
            "mode": mode_arg,
            "include_deletions": include_deletions,
            "rerank": "oracle" if oracle else "none",
            "jobs": jobs,
            "seed": _merged(args, config, "seed"),
        },
        model.model_id,
    )
    print(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gecmf",
        description="Single-edit GEC via masked language model infilling.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="extract edits between parallel sentence files as M2")
    p_extract.add_argument("source", help="source sentences, one tokenized sentence per line")
    p_extract.add_argument("target", help="corrected sentences, parallel to source")
    p_extract.add_argument("--out", help="output M2 file (default: stdout)")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--out", help="output directory")

    p_expand = sub.add_parser("expand", parents=[common], help="expand an M2 corpus into single-edit instances")
    p_expand.add_argument("--corpus", help="M2 corpus file")
    p_expand.add_argument("--scheme", choices=[*_SCHEMES, "all"], help="expansion scheme")
    p_expand.add_argument("--annotator", type=int, default=0, help="annotator id to expand (default 0)")

    p_mask = sub.add_parser("mask", parents=[common], help="mask instance records under a strategy")
    p_mask.add_argument("--instances", required=True, help="instance record file")
    p_mask.add_argument("--strategy", choices=list(_STRATEGIES), help="masking strategy")
    p_mask.add_argument("--model", choices=["gold-mock", "lexicon-mock", "remote"])
    p_mask.add_argument("--endpoint", help="model server URL (or $GECMF_ENDPOINT)")

    p_eval = sub.add_parser("evaluate", parents=[common], help="run the mask/fill/score pipeline")
    p_eval.add_argument("--instances", help="instance record file (alternative to --corpus)")
    p_eval.add_argument("--corpus", help="M2 corpus to expand on the fly")
    p_eval.add_argument("--scheme", choices=[*_SCHEMES, "all"])
    p_eval.add_argument("--strategy", choices=[*_STRATEGIES, "all"])
    p_eval.add_argument("--model", choices=["gold-mock", "lexicon-mock", "remote"])
    p_eval.add_argument("--endpoint", help="model server URL (or $GECMF_ENDPOINT)")
    p_eval.add_argument("--top-k", dest="top_k", type=int, help="candidate depth (default 5)")
    p_eval.add_argument("--mode", choices=list(_MODES), help="override the strategy's default match mode")
    p_eval.add_argument("--include-deletions", dest="include_deletions", action="store_const", const=True)
    p_eval.add_argument("--rerank", choices=["none", "oracle"])
    p_eval.add_argument("--jobs", type=int, help="worker threads (default: logical CPUs)")
    p_eval.add_argument("--seed", type=int, help="reserved for future sampling features")
    p_eval.add_argument("--annotator", type=int, default=0)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "extract":
            return cmd_extract(args)
        config = _load_config(args.config)
        if args.command == "expand":
            return cmd_expand(args, config)
        if args.command == "mask":
            return cmd_mask(args, config)
        if args.command == "evaluate":
            return cmd_evaluate(args, config)
    except M2ParseError as err:
        print(f"error: corpus parse failed: {err}", file=sys.stderr)
        return 2
    except (TransportError, ProtocolError) as err:
        print(f"error: model backend failed: {err}", file=sys.stderr)
        return 3
    except GecmfError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


def entrypoint() -> None:  # pragma: no cover
    raise SystemExit(main())
