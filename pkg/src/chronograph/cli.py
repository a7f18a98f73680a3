"""Command-line entry point: one subcommand per stage plus ``run``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .gender import load_lexicon, validate_accuracy
from .ingest import DumpError
from .pipeline import (
    EXIT_CONFIG,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_STAGE,
    STAGES,
    ConfigError,
    InputError,
    PipelineConfig,
    run_gender,
    run_graph,
    run_ingest,
    run_news,
    run_pipeline,
    run_rank,
)
from .ranking import DEFAULT_DAMPING, DEFAULT_EPSILON, DEFAULT_MAX_ITER
from .rules import RuleError

log = logging.getLogger("chronograph")


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise InputError(f"not found: {p}")
    return p


def _slices(args) -> Optional[tuple[int, int, int]]:
    if args.slice_from is None and args.slice_to is None:
        return None
    if args.slice_from is None or args.slice_to is None:
        raise ConfigError("--slice-from and --slice-to go together")
    return (args.slice_from, args.slice_to, args.slice_step)


def _add_slice_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--slice-from", type=int, help="first slice year (negative for BC)")
    p.add_argument("--slice-to", type=int, help="last slice year")
    p.add_argument("--slice-step", type=int, default=1)


def cmd_ingest(args) -> dict[str, Any]:
    out = Path(args.out)
    redirects = Path(args.redirects) if args.redirects else out.with_name("redirects.jsonl")
    return run_ingest(
        _existing(args.dump),
        args.rules or args.lang,
        out,
        lexicon_source=args.lexicon,
        strict=args.strict,
        fmt=args.format,
        redirects_out=redirects,
        texts_out=Path(args.texts_out) if args.texts_out else None,
    )


def cmd_graph(args) -> dict[str, Any]:
    return run_graph(_existing(args.index), Path(args.out_dir), args.formats, _slices(args), args.slice_format)


def cmd_rank(args) -> dict[str, Any]:
    slices = _slices(args)
    out = Path(args.out)
    return run_rank(
        _existing(args.graph),
        out,
        args.top,
        args.damping,
        args.epsilon,
        args.max_iter,
        args.categories,
        args.sphere,
        ranked_graph_out=Path(args.ranked_graph) if args.ranked_graph else None,
        slices=slices,
        slice_out=out.with_name("slice_rankings.csv") if slices else None,
    )


def cmd_gender(args) -> dict[str, Any]:
    if args.validate:
        lexicon = load_lexicon(args.lexicon or "en")
        labeled = []
        with open(_existing(args.validate), encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    labeled.append((row["text"], row["gender"]))
        return {"pages": len(labeled), "accuracy": validate_accuracy(labeled, lexicon)}
    if not args.index or not args.out:
        raise ConfigError("gender needs --index and --out (or --validate)")
    timeseries = None
    if args.timeseries:
        timeseries = (args.timeseries[0], args.timeseries[1], args.step)
    return run_gender(
        _existing(args.index),
        Path(args.out),
        args.lexicon,
        _existing(args.texts) if args.texts else None,
        timeseries,
        args.top_k_population,
        _existing(args.graph) if args.graph else None,
    )


def cmd_news(args) -> dict[str, Any]:
    return run_news(
        [_existing(p) for p in args.listing],
        _existing(args.articles) if args.articles else None,
        args.lexicon or args.lang,
        Path(args.out_dir),
        args.lang,
        args.top,
        args.year,
    )


def cmd_news_fetch(args) -> dict[str, Any]:
    from .wikinews import fetch_articles

    titles = _existing(args.titles).read_text(encoding="utf-8").splitlines()
    report = fetch_articles(titles, args.out, args.lang, args.rps, args.concurrency)
    return {"fetched": len(report.fetched), "cached": len(report.cached), "failed": report.failed}


def _parse_override(text: str) -> tuple[str, Any]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"--set expects KEY=VALUE, got {text!r}")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def cmd_run(args) -> int:
    overrides = dict(_parse_override(item) for item in args.set)
    if args.out_dir:
        overrides["out_dir"] = str(Path(args.out_dir).resolve())
    config = PipelineConfig.load(args.config, overrides)
    stages = [s.strip() for s in args.stages.split(",") if s.strip()] if args.stages else None
    result = run_pipeline(config, stages)
    if result.error:
        print(f"chronograph: {result.error}", file=sys.stderr)
    else:
        json.dump(result.reports, sys.stdout, indent=2, sort_keys=True, default=str)
        sys.stdout.write("\n")
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chronograph", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="stream a dump into a people index")
    p.add_argument("--dump", required=True)
    p.add_argument("--lang", default="en")
    p.add_argument("--rules", help="language rule file (default: bundled rules for --lang)")
    p.add_argument("--lexicon", help="gender lexicon to classify pages while ingesting")
    p.add_argument("--out", required=True, help="index JSONL path")
    p.add_argument("--redirects", help="redirect table path (default: redirects.jsonl next to --out)")
    p.add_argument("--texts-out", help="also write person wikitext as JSONL")
    p.add_argument("--format", choices=["auto", "xml", "jsonl"], default="auto")
    p.add_argument("--strict", action="store_true", help="fail on the first malformed record")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("graph", help="build the overlap-filtered graph and year slices")
    p.add_argument("--index", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--formats", nargs="+", choices=["graphml", "edge_csv", "dot"], default=["graphml", "edge_csv"])
    p.add_argument("--slice-format", choices=["graphml", "edge_csv", "dot"], default="edge_csv")
    _add_slice_args(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("rank", help="PageRank top-K lists with categories and in-group share")
    p.add_argument("--graph", required=True, help="GraphML written by the graph stage")
    p.add_argument("--top", type=int, default=50)
    p.add_argument("--damping", type=float, default=DEFAULT_DAMPING)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--categories", help="category rule file or bundled name")
    p.add_argument("--sphere", help="language-sphere rule file or bundled language code")
    p.add_argument("--ranked-graph", help="also write GraphML with pagerank/indegree/category")
    p.add_argument("--out", required=True, help="rankings CSV")
    _add_slice_args(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("gender", help="gender labels and female share over time")
    p.add_argument("--index")
    p.add_argument("--lexicon")
    p.add_argument("--texts", help="JSONL of {title, text} to reclassify with --lexicon")
    p.add_argument("--timeseries", nargs=2, type=int, metavar=("FROM", "TO"))
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--top-k-population", type=int, help="restrict each year to the top-K of its slice")
    p.add_argument("--graph", help="GraphML needed for --top-k-population")
    p.add_argument("--validate", help="labeled JSONL of {text, gender}; print accuracy")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_gender)

    p = sub.add_parser("news", help="Wikinews co-occurrence network and text scores")
    p.add_argument("--listing", action="append", required=True)
    p.add_argument("--articles")
    p.add_argument("--lexicon", help="sentiment lexicon (default: bundled for --lang)")
    p.add_argument("--lang", default="en")
    p.add_argument("--year", type=int, help="year for entries whose listing omits it")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_news)

    p = sub.add_parser("news-fetch", help="download article texts (also: news fetch)")
    p.add_argument("--titles", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lang", default="en")
    p.add_argument("--rps", type=float, default=2.0)
    p.add_argument("--concurrency", type=int, default=2)
    p.set_defaults(func=cmd_news_fetch)

    p = sub.add_parser("run", help="run several stages from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--stages", help=f"comma-separated subset of {','.join(STAGES)}")
    p.add_argument("--out-dir", help="override out_dir")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config field")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:2] == ["news", "fetch"]:
        argv = ["news-fetch"] + argv[2:]
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        result = args.func(args)
    except (ConfigError, RuleError) as exc:
        print(f"chronograph: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, DumpError, FileNotFoundError) as exc:
        print(f"chronograph: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - map every stage failure to one exit code
        log.debug("stage failure", exc_info=True)
        print(f"chronograph: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE
    if isinstance(result, int):
        return result
    json.dump(result, sys.stdout, indent=2, sort_keys=True, default=str)
    sys.stdout.write("\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
