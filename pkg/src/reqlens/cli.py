"""Command-line entry points: index, train, extract, replay, serve, eval.

Flags are kebab-case.  A JSON config file (``--config``) can preset the
engine configuration; explicit flags override file values.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from pathlib import Path

from reqlens import classifier
from reqlens.config import EngineConfig
from reqlens.index import SnippetIndex
from reqlens.offline import render_summary, report_to_json, run_offline_extraction


def _load_config(path: str | None) -> EngineConfig:
    if path is None:
        return EngineConfig()
    with open(path, encoding="utf-8") as handle:
        return EngineConfig.from_dict(json.load(handle))


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    config = _load_config(getattr(args, "config", None))
    window_overrides = {}
    for name in ("token_budget", "utterance_budget", "min_tokens"):
        value = getattr(args, name, None)
        if value is not None:
            window_overrides[name] = value
    if window_overrides:
        config = config.override("window", **window_overrides)
    extraction_overrides = {}
    for name in ("top_k", "min_df"):
        value = getattr(args, name, None)
        if value is not None:
            extraction_overrides[name] = value
    if extraction_overrides:
        config = config.override("extraction", **extraction_overrides)
    if getattr(args, "m", None) is not None:
        config = config.override("retrieval", m=args.m)
    return config


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--token-budget", type=int, dest="token_budget")
    parser.add_argument("--utterance-budget", type=int, dest="utterance_budget")
    parser.add_argument("--min-tokens", type=int, dest="min_tokens")
    parser.add_argument("--top-k", type=int, dest="top_k")
    parser.add_argument("--min-df", type=int, dest="min_df")
    parser.add_argument("-m", "--max-results", type=int, dest="m")


def cmd_index(args: argparse.Namespace) -> int:
    index = SnippetIndex.from_dir(args.corpus_dir)
    digest = index.save(args.out)
    print(
        f"indexed {index.n_snippets} snippets from {args.corpus_dir} "
        f"(avg length {index.avg_len:.1f} tokens)"
    )
    print(f"wrote {args.out} sha256={digest[:12]}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    examples = classifier.read_training_csv(args.data)
    hyper = classifier.Hyperparams(
        lam=args.lam,
        epochs=args.epochs,
        seed=args.seed,
        use_bigrams=not args.no_bigrams,
        use_lm_features=not args.no_lm_features,
    )
    model = classifier.train(examples, hyper)
    digest = classifier.save_model(model, args.out)
    metrics = classifier.evaluate(model, examples)
    print(f"trained on {len(examples)} examples, labels: {', '.join(model.labels)}")
    print(f"training accuracy: {metrics['accuracy']:.3f}")
    print(f"wrote {args.out} sha256={digest[:12]}")
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    index = SnippetIndex.load(args.index)
    model = classifier.load_model(args.model)
    doc_text = Path(args.input).read_text("utf-8")
    report = run_offline_extraction(index, model, doc_text, _engine_config(args))
    payload = report_to_json(report)
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
        print(f"wrote report to {args.out}")
    else:
        sys.stdout.write(payload)
    sys.stderr.write(render_summary(report))
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    import httpx

    config = _engine_config(args)
    if args.server:
        client = httpx.Client(base_url=args.server, timeout=30.0)
        close = client.close
    else:
        # In-process mode: drive the ASGI app through its HTTP interface.
        from fastapi.testclient import TestClient

        from reqlens.server import build_engine, create_app

        engine = build_engine(args.index, args.model, config=config, store_dir=args.data_dir)
        client = TestClient(create_app(engine))
        close = client.close
    try:
        from reqlens.replay import replay_transcript

        result = replay_transcript(
            args.transcript,
            client,
            speed_factor=args.speed_factor,
            session_id=args.session_id,
        )
    finally:
        close()
    latencies = result.latencies_ms
    print(
        f"session {result.session_id}: {result.n_utterances} utterances, "
        f"{result.n_events} extraction events"
    )
    if latencies:
        print(
            f"append latency ms: median {statistics.median(latencies):.1f} "
            f"p99 {result.percentile(99):.1f} max {max(latencies):.1f}"
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from reqlens.server import serve

    serve(
        args.index,
        args.model,
        port=args.port,
        host=args.host,
        config=_engine_config(args),
        store_dir=args.data_dir,
        ui_dir=args.ui_dir,
    )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    model = classifier.load_model(args.model)
    examples = classifier.read_training_csv(args.data)
    metrics = classifier.evaluate(model, examples)
    print(json.dumps(metrics, sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reqlens",
        description="Live lexical-association assistant for requirements elicitation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build a snippet index from a corpus directory")
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("train", help="train the requirement classifier from a label,text CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambda", type=float, default=1e-3, dest="lam")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-bigrams", action="store_true")
    p.add_argument("--no-lm-features", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("extract", help="offline extraction over an existing document")
    p.add_argument("--index", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("replay", help="replay a diarized transcript through the API")
    p.add_argument("--transcript", required=True)
    p.add_argument("--server", help="gateway URL; omit to run in-process")
    p.add_argument("--index", help="index file (in-process mode)")
    p.add_argument("--model", help="model file (in-process mode)")
    p.add_argument("--data-dir", help="session log directory (in-process mode)")
    p.add_argument("--speed-factor", type=float, default=0.0)
    p.add_argument("--session-id")
    _add_config_flags(p)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--index", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", help="session log directory")
    p.add_argument("--ui-dir", help="serve the built dashboard from this directory at /ui")
    _add_config_flags(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="evaluate a trained model on a label,text CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay" and not args.server and not (args.index and args.model):
        parser.error("replay needs either --server or both --index and --model")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
