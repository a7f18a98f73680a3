"""Stage orchestration: ingest -> graph -> rank -> gender -> news.

Every artifact is written atomically and byte-stably; timestamps live only
in ``manifest.json``.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import hashlib
import io
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import islice
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import filelock

from . import __version__
from .chronology import PeopleGraph, build_full_graph, slice_series
from .export import export_graph, read_graphml, render_graph, write_atomic
from .gender import (
    BUNDLED_LEXICONS,
    GenderPoint,
    classify_gender,
    gender_timeseries,
    load_lexicon,
    top_k_gender_timeseries,
)
from .ingest import DumpReader, PeopleIndex, build_people_index, read_index
from .ranking import (
    DEFAULT_DAMPING,
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITER,
    SphereClassifier,
    categorize,
    indegree,
    ingroup_fraction,
    pagerank,
    rankings_csv,
    top_k,
)
from .records import REFERENCE_YEAR
from .rules import RuleError, load_category_rules, load_language_rules, load_sphere_rules
from .wikinews import (
    aggregate_scores,
    betweenness,
    build_news_network,
    load_article_texts,
    load_sentiment_lexicon,
    parse_news_index,
)

log = logging.getLogger(__name__)

STAGES = ("ingest", "graph", "rank", "gender", "news")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_STAGE = 4


class ConfigError(ValueError):
    exit_code = EXIT_CONFIG


class InputError(FileNotFoundError):
    exit_code = EXIT_INPUT


class StageError(RuntimeError):
    exit_code = EXIT_STAGE

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


def worker_count() -> int:
    """Worker cap from CHRONOGRAPH_THREADS (default: CPU count)."""
    raw = os.environ.get("CHRONOGRAPH_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring non-integer CHRONOGRAPH_THREADS=%r", raw)
    return os.cpu_count() or 1


def sha256_file(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def sha256_dir(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    root = Path(path)
    for item in sorted(p for p in root.rglob("*") if p.is_file()):
        h.update(str(item.relative_to(root)).encode("utf-8") + b"\0")
        h.update(sha256_file(item).encode("ascii") + b"\n")
    return h.hexdigest()


def _digest(path: Path) -> str:
    return sha256_dir(path) if path.is_dir() else sha256_file(path)


# --- stage bodies, shared by the pipeline and the single-stage subcommands ---


def run_ingest(
    dump: Path,
    rules_source: Union[str, Path],
    out_index: Path,
    lexicon_source: Optional[Union[str, Path]] = None,
    strict: bool = False,
    fmt: str = "auto",
    redirects_out: Optional[Path] = None,
    texts_out: Optional[Path] = None,
    reference_year: int = REFERENCE_YEAR,
) -> dict[str, Any]:
    rules = load_language_rules(rules_source)
    lexicon = load_lexicon(lexicon_source) if lexicon_source is not None else None
    with open(dump, "rb") as fh:
        reader = DumpReader(fh, fmt, strict=strict)
        pages: Iterable = reader
        text_sink = None
        if texts_out is not None:
            text_sink = _TextSink(texts_out, rules)
            pages = text_sink.tap(reader)
        index = build_people_index(pages, rules, lexicon, reference_year)
        if text_sink is not None:
            text_sink.commit(index)
    write_atomic(out_index, index.dumps())
    if redirects_out is not None:
        buf = io.StringIO()
        index.write_redirects(buf)
        write_atomic(redirects_out, buf.getvalue())
    dated = sum(1 for p in index.people.values() if p.dated)
    return {
        "pages": reader.stats.pages,
        "skipped_namespace": reader.stats.skipped_namespace,
        "bytes_read": reader.stats.bytes_read,
        "max_page_chars": reader.stats.max_page_chars,
        "line_errors": len(reader.stats.errors),
        "persons": len(index),
        "dated": dated,
        "undated": len(index) - dated,
        "redirects": len(index.redirects),
        "duplicates": index.duplicates,
    }


class _TextSink:
    """Spools person-page texts to a temp file while the index is built."""

    def __init__(self, path: Path, rules):
        from .ingest import detect_person_page

        self.path = Path(path)
        self.detect = detect_person_page
        self.rules = rules
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.tmp = self.path.with_name(f".{self.path.name}.spool")
        self.fh = open(self.tmp, "w", encoding="utf-8")

    def tap(self, pages):
        for page in pages:
            if self.detect(page, self.rules):
                self.fh.write(json.dumps({"title": page.title, "text": page.wikitext}, ensure_ascii=False))
                self.fh.write("\n")
            yield page

    def commit(self, index: PeopleIndex) -> None:
        self.fh.close()
        latest: dict[str, str] = {}
        with open(self.tmp, encoding="utf-8") as fh:
            for line in fh:
                row = json.loads(line)
                if row["title"] in index.people:
                    latest[row["title"]] = line
        write_atomic(self.path, "".join(latest[t] for t in sorted(latest)))
        self.tmp.unlink()


def run_graph(
    index_path: Path,
    out_dir: Path,
    formats: Sequence[str] = ("graphml", "edge_csv", "dot"),
    slices: Optional[tuple[int, int, int]] = None,
    slice_format: str = "edge_csv",
    reference_year: int = REFERENCE_YEAR,
) -> dict[str, Any]:
    index = read_index(index_path)
    graph = build_full_graph(index, reference_year)
    ext = {"graphml": "graphml", "edge_csv": "csv", "dot": "dot"}
    for fmt in formats:
        export_graph(graph, fmt, out_dir / f"graph.{ext[fmt]}")
    report: dict[str, Any] = {"nodes": len(graph.nodes), "edges": len(graph.edges)}
    if slices is not None:
        slice_dir = out_dir / "slices"
        count = nonempty = 0
        for year, piece in slice_series(graph, *slices):
            count += 1
            if piece.nodes:
                nonempty += 1
                write_atomic(slice_dir / f"slice_{year}.{ext[slice_format]}", render_graph(piece, slice_format))
        report.update(slices=count, nonempty_slices=nonempty)
    return report


def _batched(items, size):
    it = iter(items)
    while True:
        batch = list(islice(it, size))
        if not batch:
            return
        yield batch


def run_rank(
    graph_path: Path,
    out_csv: Path,
    k: int = 50,
    damping: float = DEFAULT_DAMPING,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    categories_source: Optional[Union[str, Path]] = None,
    sphere_source: Optional[Union[str, Path]] = None,
    ranked_graph_out: Optional[Path] = None,
    slices: Optional[tuple[int, int, int]] = None,
    slice_out: Optional[Path] = None,
    ingroup_out: Optional[Path] = None,
) -> dict[str, Any]:
    graph = read_graphml(graph_path)
    if not graph.nodes:
        raise ValueError(f"graph {graph_path} has no nodes")
    category_rules = load_category_rules(categories_source) if categories_source else ()
    sphere = SphereClassifier(*load_sphere_rules(sphere_source)) if sphere_source else None

    result = pagerank(graph, damping, epsilon, max_iter)
    if not result.converged:
        log.warning("PageRank stopped after %d iterations (delta %.3g)", result.iterations, result.delta)
    entries = top_k(graph, k, damping, epsilon, max_iter)
    write_atomic(out_csv, rankings_csv(entries, graph.nodes, category_rules, sphere))
    report: dict[str, Any] = {
        "nodes": len(graph.nodes),
        "converged": result.converged,
        "iterations": result.iterations,
        "top": [e.title for e in entries[:10]],
    }
    if sphere is not None:
        stats = ingroup_fraction(entries, graph.nodes, sphere, category_rules)
        report["ingroup"] = dataclasses.asdict(stats)
        if ingroup_out is not None:
            write_atomic(ingroup_out, json.dumps(dataclasses.asdict(stats), indent=2, sort_keys=True) + "\n")
    if ranked_graph_out is not None:
        deg = indegree(graph)
        extra = {
            t: {
                "pagerank": result.scores[t],
                "indegree": deg[t],
                "category": categorize(graph.nodes[t], category_rules).role,
            }
            for t in graph.nodes
        }
        export_graph(graph, "graphml", ranked_graph_out, extra)
    if slices is not None and slice_out is not None:
        workers = worker_count()

        def rank_slice(item):
            year, piece = item
            return year, (top_k(piece, k, damping, epsilon, max_iter) if piece.nodes else [])

        parts = []
        first = True
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for batch in _batched(slice_series(graph, *slices), workers * 4):
                for year, ranked in pool.map(rank_slice, batch):
                    parts.append(rankings_csv(ranked, graph.nodes, category_rules, sphere, year=year, header=first))
                    first = False
        write_atomic(slice_out, "".join(parts))
    return report


def timeseries_csv(points: Sequence[GenderPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["year", "percent_female", "population"])
    for p in points:
        writer.writerow([p.year, "" if p.percent_female is None else f"{p.percent_female:.6f}", p.population])
    return buf.getvalue()


def run_gender(
    index_path: Path,
    out_dir: Path,
    lexicon_source: Optional[Union[str, Path]] = None,
    texts_path: Optional[Path] = None,
    timeseries: Optional[tuple[int, int, int]] = None,
    population_top_k: Optional[int] = None,
    graph_path: Optional[Path] = None,
    reference_year: int = REFERENCE_YEAR,
) -> dict[str, Any]:
    index = read_index(index_path)
    if texts_path is not None:
        if lexicon_source is None:
            raise ConfigError("reclassifying texts needs a lexicon")
        lexicon = load_lexicon(lexicon_source)
        with open(texts_path, encoding="utf-8") as fh:
            for line in fh:
                row = json.loads(line)
                person = index.people.get(row["title"])
                if person is None:
                    continue
                res = classify_gender(row["text"], lexicon)
                person.gender, person.female_count, person.male_count = res.gender, res.female_count, res.male_count

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["title", "gender", "female_count", "male_count"])
    counts = {"male": 0, "female": 0, "unknown": 0}
    for title in sorted(index.people):
        p = index.people[title]
        counts[p.gender.value] += 1
        writer.writerow([title, p.gender.value, p.female_count, p.male_count])
    write_atomic(out_dir / "genders.csv", buf.getvalue())
    report: dict[str, Any] = dict(counts)
    if timeseries is not None:
        if population_top_k:
            if graph_path is None:
                raise ConfigError("a top-K population needs a graph")
            graph = read_graphml(graph_path)
            # genders may have been reclassified above
            for title, node in graph.nodes.items():
                if title in index.people:
                    node.gender = index.people[title].gender
            points = top_k_gender_timeseries(graph, *timeseries, k=population_top_k)
        else:
            points = gender_timeseries(index.people.values(), *timeseries, reference_year=reference_year)
        write_atomic(out_dir / "gender_timeseries.csv", timeseries_csv(points))
        report["timeseries_points"] = len(points)
        report["timeseries_null_points"] = sum(p.percent_female is None for p in points)
    return report


def run_news(
    listings: Sequence[Path],
    articles_dir: Optional[Path],
    lexicon_source: Union[str, Path],
    out_dir: Path,
    lang: str = "en",
    top: int = 20,
    year: Optional[int] = None,
) -> dict[str, Any]:
    anchors = []
    for listing in listings:
        anchors.extend(parse_news_index(Path(listing).read_text(encoding="utf-8"), lang, year))
    graph = build_news_network(anchors)
    lexicon = load_sentiment_lexicon(lexicon_source)

    anchors_jsonl = "".join(
        json.dumps({"date": a.date, "summary": a.summary, "links": list(a.links)}, ensure_ascii=False) + "\n"
        for a in anchors
    )
    write_atomic(out_dir / "news_anchors.jsonl", anchors_jsonl)
    report: dict[str, Any] = {
        "anchors": len(anchors),
        "undated_anchors": sum(not a.date_known for a in anchors),
        "nodes": len(graph.nodes),
        "edges": len(graph.edges),
    }
    if not graph.nodes:
        raise ValueError("news listings contain no links")
    central = betweenness(graph)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "title", "betweenness"])
    ordered = sorted(central.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    for i, (title, value) in enumerate(ordered, start=1):
        writer.writerow([i, title, f"{value:.12g}"])
    write_atomic(out_dir / "news_betweenness.csv", buf.getvalue())

    if articles_dir is not None:
        texts = load_article_texts(articles_dir)
        result = aggregate_scores(graph, texts, lexicon, top, central)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["language", "mean_sentiment", "mean_emotionality", "mean_complexity", "scored"])
        writer.writerow([lang, f"{result.mean_sentiment:.12g}", f"{result.mean_emotionality:.12g}",
                         f"{result.mean_complexity:.12g}", result.scored])
        write_atomic(out_dir / "news_report.csv", buf.getvalue())
        report.update(
            scored=result.scored,
            mean_sentiment=result.mean_sentiment,
            mean_emotionality=result.mean_emotionality,
            mean_complexity=result.mean_complexity,
        )
    extra = {t: {"betweenness": v} for t, v in central.items()}
    export_graph(graph, "graphml", out_dir / "news_graph.graphml", extra)
    export_graph(graph, "edge_csv", out_dir / "news_graph.csv")
    return report


# --- configuration and the full run ---


@dataclass
class YearRange:
    start: int
    stop: int
    step: int = 1

    @classmethod
    def parse(cls, value: Any, name: str) -> Optional["YearRange"]:
        if value is None:
            return None
        if not isinstance(value, dict) or set(value) - {"from", "to", "step"} or not {"from", "to"} <= set(value):
            raise ConfigError(f"{name} must be an object with 'from', 'to' and optional 'step'")
        try:
            return cls(int(value["from"]), int(value["to"]), int(value.get("step", 1)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: {exc}") from exc

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.start, self.stop, self.step)


_PATH_FIELDS = ("dump", "index", "graph", "news_articles", "out_dir")
_RULE_FIELDS = ("rules", "lexicon", "categories", "sphere", "sentiment_lexicon")


@dataclass
class PipelineConfig:
    out_dir: Path
    lang: str = "en"
    dump: Optional[Path] = None
    dump_format: str = "auto"
    index: Optional[Path] = None
    graph: Optional[Path] = None
    rules: Optional[str] = None
    lexicon: Optional[str] = None
    categories: Optional[str] = "default"
    sphere: Optional[str] = None
    sentiment_lexicon: Optional[str] = None
    news_listings: list[Path] = field(default_factory=list)
    news_articles: Optional[Path] = None
    news_year: Optional[int] = None
    news_top: int = 20
    slices: Optional[YearRange] = None
    timeseries: Optional[YearRange] = None
    gender_population_top_k: Optional[int] = None
    top_k: int = 50
    damping: float = DEFAULT_DAMPING
    epsilon: float = DEFAULT_EPSILON
    max_iter: int = DEFAULT_MAX_ITER
    strict: bool = False
    formats: list[str] = field(default_factory=lambda: ["graphml", "edge_csv", "dot"])
    slice_format: str = "edge_csv"
    reference_year: int = REFERENCE_YEAR

    @classmethod
    def from_dict(cls, data: dict[str, Any], base: Optional[Path] = None) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "out_dir" not in data:
            raise ConfigError("config needs 'out_dir'")
        base = base or Path.cwd()
        values = dict(data)

        def resolve(p: Any) -> Path:
            path = Path(p)
            return path if path.is_absolute() else base / path

        for name in _PATH_FIELDS:
            if values.get(name) is not None:
                values[name] = resolve(values[name])
        for name in _RULE_FIELDS:
            v = values.get(name)
            # rule entries are either bundled names or paths to JSON files
            if isinstance(v, str) and (v.endswith(".json") or "/" in v):
                values[name] = str(resolve(v))
        values["news_listings"] = [resolve(p) for p in values.get("news_listings", [])]
        values["slices"] = YearRange.parse(values.get("slices"), "slices")
        values["timeseries"] = YearRange.parse(values.get("timeseries"), "timeseries")
        try:
            config = cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        config.check_types()
        return config

    @classmethod
    def load(cls, path: Union[str, Path], overrides: Optional[dict[str, Any]] = None) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise InputError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if overrides:
            data = {**data, **overrides}
        return cls.from_dict(data, path.parent)

    def check_types(self) -> None:
        for name in ("top_k", "max_iter", "news_top", "reference_year"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not 0 < float(self.damping) < 1:
            raise ConfigError("damping must lie in (0, 1)")
        if float(self.epsilon) <= 0:
            raise ConfigError("epsilon must be positive")
        bad = set(self.formats) - {"graphml", "edge_csv", "dot"}
        if bad or self.slice_format not in ("graphml", "edge_csv", "dot"):
            raise ConfigError(f"unknown graph formats: {sorted(bad) or [self.slice_format]}")
        if self.dump_format not in ("auto", "xml", "jsonl"):
            raise ConfigError("dump_format must be auto, xml or jsonl")

    def to_json(self) -> dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Path):
                v = str(v)
            elif isinstance(v, YearRange):
                v = {"from": v.start, "to": v.stop, "step": v.step}
            elif isinstance(v, list):
                v = [str(x) for x in v]
            out[f.name] = v
        return out

    # defaults that depend on the language
    @property
    def rules_source(self) -> str:
        return self.rules or self.lang

    @property
    def lexicon_source(self) -> Optional[str]:
        if self.lexicon:
            return self.lexicon
        return self.lang if self.lang in BUNDLED_LEXICONS else None

    @property
    def sentiment_source(self) -> str:
        return self.sentiment_lexicon or self.lang

    @property
    def sphere_source(self) -> Optional[str]:
        return self.sphere or self.lang

    @property
    def index_path(self) -> Path:
        return self.out_dir / "index.jsonl"

    @property
    def graph_path(self) -> Path:
        return self.out_dir / "graph.graphml"


@dataclass
class PipelineResult:
    exit_code: int
    reports: dict[str, dict[str, Any]]
    manifest: Optional[Path] = None
    error: Optional[str] = None


def _check_rule(loader, source, name: str) -> None:
    if source is None:
        return
    if (str(source).endswith(".json") or "/" in str(source)) and not Path(source).exists():
        raise InputError(f"{name} file not found: {source}")
    try:
        loader(source)
    except RuleError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def validate(config: PipelineConfig, stages: Sequence[str]) -> dict[str, Path]:
    """Check every input the requested stages need; return them by name."""
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        raise ConfigError(f"unknown stages {unknown}; choose from {list(STAGES)}")
    inputs: dict[str, Path] = {}

    def need(name: str, path: Optional[Path], what: str) -> None:
        if path is None:
            raise ConfigError(f"{what} requires '{name}' in the config")
        if not Path(path).exists():
            raise InputError(f"{what}: {name} not found: {path}")
        inputs[name] = Path(path)

    if "ingest" in stages:
        need("dump", config.dump, "ingest")
        _check_rule(load_language_rules, config.rules_source, "rules")
        _check_rule(load_lexicon, config.lexicon_source, "lexicon")
    if ("graph" in stages or "gender" in stages) and "ingest" not in stages:
        need("index", config.index or config.index_path, "graph/gender")
    if "rank" in stages:
        if "graph" not in stages:
            need("graph", config.graph or config.graph_path, "rank")
        _check_rule(load_category_rules, config.categories, "categories")
        _check_rule(load_sphere_rules, config.sphere_source, "sphere")
    if "gender" in stages and config.gender_population_top_k and "graph" not in stages:
        need("graph", config.graph or config.graph_path, "gender")
    if "news" in stages:
        if not config.news_listings:
            raise ConfigError("news requires 'news_listings' in the config")
        for i, listing in enumerate(config.news_listings):
            need(f"news_listings[{i}]", listing, "news")
        if config.news_articles is not None:
            need("news_articles", config.news_articles, "news")
        _check_rule(load_sentiment_lexicon, config.sentiment_source, "sentiment_lexicon")
    for name in _RULE_FIELDS:
        src = {"rules": config.rules_source, "lexicon": config.lexicon_source, "categories": config.categories,
               "sphere": config.sphere_source, "sentiment_lexicon": config.sentiment_source}[name]
        if src is not None and Path(src).exists():
            inputs[name] = Path(src)
    return inputs


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run_pipeline(config: PipelineConfig, stages: Optional[Sequence[str]] = None) -> PipelineResult:
    """Run the requested stages in dependency order and write a manifest."""
    requested = list(STAGES if not stages else stages)
    try:
        inputs = validate(config, requested)
    except (ConfigError, InputError) as exc:
        log.error("%s", exc)
        return PipelineResult(exc.exit_code, {}, error=str(exc))
    ordered = [s for s in STAGES if s in requested]

    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    lock = filelock.FileLock(str(out / ".chronograph.lock"))
    try:
        lock.acquire(timeout=0)
    except filelock.Timeout:
        msg = f"another pipeline is running in {out}"
        log.error("%s", msg)
        return PipelineResult(EXIT_CONFIG, {}, error=msg)

    started = _now()
    reports: dict[str, dict[str, Any]] = {}
    outputs_before = _artifact_digests(out)
    index_path = config.index if (config.index and "ingest" not in ordered) else config.index_path
    graph_path = config.graph if (config.graph and "graph" not in ordered) else config.graph_path
    slices = config.slices.as_tuple() if config.slices else None
    status, error, code = "ok", None, EXIT_OK
    try:
        for stage in ordered:
            t0 = time.perf_counter()
            log.info("stage %s: start", stage)
            try:
                if stage == "ingest":
                    reports[stage] = run_ingest(
                        config.dump, config.rules_source, index_path, config.lexicon_source,
                        config.strict, config.dump_format, out / "redirects.jsonl",
                        reference_year=config.reference_year,
                    )
                elif stage == "graph":
                    reports[stage] = run_graph(index_path, out, config.formats, slices, config.slice_format,
                                               config.reference_year)
                elif stage == "rank":
                    reports[stage] = run_rank(
                        graph_path, out / "rankings.csv", config.top_k, config.damping, config.epsilon,
                        config.max_iter, config.categories, config.sphere_source,
                        ranked_graph_out=out / "ranked_graph.graphml", slices=slices,
                        slice_out=out / "slice_rankings.csv" if slices else None,
                        ingroup_out=out / "ingroup.json",
                    )
                elif stage == "gender":
                    reports[stage] = run_gender(
                        index_path, out, None, None,
                        config.timeseries.as_tuple() if config.timeseries else None,
                        config.gender_population_top_k, graph_path, config.reference_year,
                    )
                elif stage == "news":
                    reports[stage] = run_news(
                        config.news_listings, config.news_articles, config.sentiment_source, out / "news",
                        config.lang, config.news_top, config.news_year,
                    )
            except Exception as exc:
                raise StageError(stage, exc) from exc
            elapsed = time.perf_counter() - t0
            reports[stage]["seconds"] = round(elapsed, 3)
            log.info("stage %s: done in %.2fs", stage, elapsed)
    except StageError as exc:
        log.error("%s", exc)
        status, error, code = "failed", str(exc), EXIT_STAGE
    finally:
        manifest = out / "manifest.json"
        try:
            outputs = _artifact_digests(out)
            produced = {k: v for k, v in outputs.items() if outputs_before.get(k) != v or k in outputs_before}
            doc = {
                "tool": "chronograph",
                "version": __version__,
                "started_at": started,
                "finished_at": _now(),
                "status": status,
                "error": error,
                "stages": ordered,
                "parameters": config.to_json(),
                "inputs": {name: {"path": str(p), "sha256": _digest(p)} for name, p in sorted(inputs.items())},
                "outputs": dict(sorted(produced.items())),
                "reports": {k: _jsonable(v) for k, v in reports.items()},
            }
            write_atomic(manifest, json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
        finally:
            lock.release()
    return PipelineResult(code, reports, manifest, error)


def _artifact_digests(out: Path) -> dict[str, str]:
    digests = {}
    for path in sorted(out.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(out).as_posix()
        if rel == "manifest.json" or path.name.startswith("."):
            continue
        digests[rel] = sha256_file(path)
    return digests


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and value != value:
        return None
    return value
