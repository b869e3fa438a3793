"""Command-line interface.

    qa index  --corpus FILE --out DIR [--config FILE] [overrides]
    qa ask    --bundle DIR [--top-n N] [--timing] QUESTION
    qa eval   --bundle DIR --dataset FILE [--mode rc|pipeline] [--out FILE]
    qa serve  --bundle DIR [--bind HOST:PORT] [--frontend DIR]
    qa lda fit --corpus FILE --out FILE [--topics K ...]
    qa report render --report FILE --out-dir DIR

Exit codes: 0 success, 1 usage error, 2 data error, 3 external-service
error. ask/eval/serve default to the config recorded in the bundle
manifest; --config replaces it.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import PipelineConfig, apply_env_overrides, load_config
from .corpus import build_tokenized_corpus, load_corpus, load_qa_dataset
from .errors import DataError, ExternalServiceError
from .evaluation import EvalReport, evaluate, load_predictions
from .pipeline import IndexBundle, answer_question, build_index, load_bundle, run_eval
from .report import render_report_files, render_table
from .topics import fit_lda, save_model

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SERVICE = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qa", description="Scientific-article question answering")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_index = sub.add_parser("index", help="build an index bundle")
    p_index.add_argument("--corpus", required=True, help="corpus JSONL file")
    p_index.add_argument("--out", required=True, help="bundle output directory")
    _add_config_args(p_index)
    p_index.add_argument("--pipeline", choices=("keyword-cosine", "lda-filter"))
    p_index.add_argument("--keywords", help="comma-separated keyword list")
    p_index.add_argument("--top-n", type=int, dest="top_n")
    p_index.add_argument("--seed", type=int, help="LDA seed override")
    p_index.add_argument("--lda-topics", type=int, dest="lda_topics")
    p_index.add_argument("--lda-iterations", type=int, dest="lda_iterations")
    p_index.add_argument("--lda-min-tokens", type=int, dest="lda_min_tokens")

    p_ask = sub.add_parser("ask", help="answer one question against a bundle")
    p_ask.add_argument("--bundle", required=True)
    _add_config_args(p_ask)
    p_ask.add_argument("--top-n", type=int, dest="top_n")
    p_ask.add_argument("--timing", action="store_true", help="include per-stage timings")
    p_ask.add_argument("question")

    p_eval = sub.add_parser("eval", help="score a QA dataset")
    p_eval.add_argument("--bundle", help="index bundle (optional with --predictions)")
    _add_config_args(p_eval)
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--mode", choices=("rc", "pipeline"), default="rc")
    p_eval.add_argument("--predictions",
                        help="score a pre-computed predictions file instead of running a reader")
    p_eval.add_argument("--out", help="write the report JSON here")
    p_eval.add_argument("--system", help="system name for the report")

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--bundle", required=True)
    _add_config_args(p_serve)
    p_serve.add_argument("--bind", default="127.0.0.1:8000")
    p_serve.add_argument("--frontend", help="static UI directory to host at /")

    p_lda = sub.add_parser("lda", help="topic model utilities")
    lda_sub = p_lda.add_subparsers(dest="lda_command", required=True, parser_class=_Parser)
    p_fit = lda_sub.add_parser("fit", help="fit a topic model on a corpus")
    p_fit.add_argument("--corpus", required=True)
    p_fit.add_argument("--out", required=True, help="model file to write")
    p_fit.add_argument("--topics", type=int, default=20)
    p_fit.add_argument("--alpha", type=float)
    p_fit.add_argument("--beta", type=float, default=0.01)
    p_fit.add_argument("--iterations", type=int, default=500)
    p_fit.add_argument("--seed", type=int, default=42)
    p_fit.add_argument("--min-tokens", type=int, default=25, dest="min_tokens")

    p_report = sub.add_parser("report", help="report utilities")
    report_sub = p_report.add_subparsers(dest="report_command", required=True, parser_class=_Parser)
    p_render = report_sub.add_parser("render", help="render a report JSON")
    p_render.add_argument("--report", required=True, help="report JSON file")
    p_render.add_argument("--out-dir", dest="out_dir", help="write table/CSV/figure here")

    return parser


def _add_config_args(parser):
    parser.add_argument("--config", help="TOML config file")


def _resolve_config(args, bundle: IndexBundle = None) -> PipelineConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    if bundle is not None:
        config = bundle.config
        apply_env_overrides(config)
        config.validate()
        return config
    config = PipelineConfig()
    apply_env_overrides(config)
    return config


def _cmd_index(args) -> int:
    if args.config:
        config = load_config(args.config)
    else:
        config = PipelineConfig()
        apply_env_overrides(config)
    if args.pipeline:
        config.pipeline = args.pipeline
    if args.keywords is not None:
        config.keywords = [k.strip() for k in args.keywords.split(",") if k.strip()]
    if args.top_n is not None:
        config.top_n = args.top_n
    if args.seed is not None:
        config.lda.seed = args.seed
    if args.lda_topics is not None:
        config.lda.topics = args.lda_topics
    if args.lda_iterations is not None:
        config.lda.iterations = args.lda_iterations
    if args.lda_min_tokens is not None:
        config.lda.min_tokens = args.lda_min_tokens
    config.validate()
    bundle = build_index(args.corpus, config, args.out)
    manifest = bundle.manifest
    print(
        f"indexed {manifest['articles']} articles into {args.out} "
        f"(skipped {manifest['skipped_records']}, duplicates {manifest['duplicate_ids']}, "
        f"vocabulary {manifest['vocab_size']})"
    )
    if manifest["lda_excluded"]:
        print(f"excluded from topic fit (too short): {', '.join(manifest['lda_excluded'])}")
    return EXIT_OK


def _cmd_ask(args) -> int:
    bundle = load_bundle(args.bundle)
    config = _resolve_config(args, bundle)
    result = answer_question(bundle, config, args.question, top_n=args.top_n)
    print(json.dumps(result.to_dict(include_timing=args.timing), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_eval(args) -> int:
    if args.predictions:
        examples, _ = load_qa_dataset(args.dataset)
        if not examples:
            raise DataError(f"{args.dataset}: empty dataset")
        report = evaluate(
            load_predictions(args.predictions),
            examples,
            dataset_name=Path(args.dataset).stem,
            system_name=args.system or "external",
        )
    else:
        if not args.bundle:
            raise ValueError("--bundle is required unless --predictions is given")
        bundle = load_bundle(args.bundle)
        config = _resolve_config(args, bundle)
        report = run_eval(bundle, config, args.dataset, mode=args.mode,
                          system_name=args.system)
    if args.out:
        report.save(args.out)
        print(f"wrote {args.out}")
    print(render_table([report]), end="")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .server import serve

    bundle = load_bundle(args.bundle)
    config = _resolve_config(args, bundle)
    frontend = Path(args.frontend) if args.frontend else None
    serve(bundle, config, bind=args.bind, frontend_dir=frontend)
    return EXIT_OK


def _cmd_lda_fit(args) -> int:
    articles, stats = load_corpus(args.corpus)
    if not articles:
        raise DataError(f"{args.corpus}: corpus produced no articles")
    docs, vocab = build_tokenized_corpus(articles)
    eligible = [doc for doc in docs if len(doc) >= args.min_tokens]
    excluded = len(docs) - len(eligible)
    if not eligible:
        raise DataError(f"no article reaches --min-tokens={args.min_tokens}")
    alpha = args.alpha if args.alpha is not None else 50.0 / args.topics
    model, _ = fit_lda(
        eligible,
        vocab,
        k=args.topics,
        alpha=alpha,
        beta=args.beta,
        iterations=args.iterations,
        seed=args.seed,
    )
    save_model(model, args.out)
    print(
        f"fit {args.topics} topics on {len(eligible)} docs "
        f"({excluded} excluded as too short, {stats.skipped} records skipped); wrote {args.out}"
    )
    return EXIT_OK


def _cmd_report_render(args) -> int:
    report = EvalReport.load(args.report)
    if args.out_dir:
        paths = render_report_files(report, args.out_dir)
        print(f"wrote {', '.join(str(p) for p in paths)}")
    print(render_table([report]), end="")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "index":
            return _cmd_index(args)
        if args.command == "ask":
            return _cmd_ask(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "lda":
            return _cmd_lda_fit(args)
        if args.command == "report":
            return _cmd_report_render(args)
        parser.error(f"unknown command {args.command!r}")
    except ValueError as exc:
        print(f"qa: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"qa: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ExternalServiceError as exc:
        print(f"qa: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
