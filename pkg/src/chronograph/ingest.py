"""Streaming ingestion of MediaWiki dumps into a people index.

Two input formats are understood: a ``pages-articles`` XML export (plain,
gzip or bz2, sniffed from the first bytes) and a JSONL fixture format with
one ``{"title", "ns", "text", "categories"}`` object per line.
"""

from __future__ import annotations

import bz2
import enum
import gzip
import io
import json
import logging
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Callable, Iterable, Iterator, Optional, Union
from xml.parsers import expat

from .chronology import extract_lifespan
from .gender import GenderLexicon, classify_gender
from .records import REFERENCE_YEAR, PersonRecord
from .rules import LanguageRules
from .wikitext import (
    LinkMention,
    RawPage,
    count_link_targets,
    extract_categories,
    normalize_title,
    redirect_target,
    strip_ignored_spans,
)

log = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 20
_MAX_DUPLICATE_WARNINGS = 20


class DumpFormat(str, enum.Enum):
    AUTO = "auto"
    XML = "xml"
    JSONL = "jsonl"


class DumpError(Exception):
    """Unrecoverable input problem. ``offset`` is the byte position (in the
    decompressed stream) just past the last page that was read intact."""

    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class LineError:
    line: int
    offset: int
    message: str


@dataclass
class DumpStats:
    pages: int = 0
    skipped_namespace: int = 0
    bytes_read: int = 0
    max_page_chars: int = 0
    errors: list[LineError] = field(default_factory=list)


def _sniff(stream: BinaryIO) -> BinaryIO:
    if not hasattr(stream, "peek"):
        stream = io.BufferedReader(stream)  # type: ignore[arg-type]
    head = stream.peek(3)[:3]
    if head.startswith(b"BZh"):
        return bz2.BZ2File(stream)  # type: ignore[return-value]
    if head.startswith(b"\x1f\x8b"):
        return gzip.GzipFile(fileobj=stream)  # type: ignore[return-value]
    return stream


def _detect_format(stream: BinaryIO) -> DumpFormat:
    head = stream.peek(4096).lstrip()  # type: ignore[attr-defined]
    if head.startswith(b"\xef\xbb\xbf"):
        head = head[3:].lstrip()
    if head.startswith(b"{"):
        return DumpFormat.JSONL
    return DumpFormat.XML


class _XmlPageCollector:
    """expat callbacks that turn ``<page>`` elements into RawPage values."""

    def __init__(self, stats: DumpStats):
        self.stats = stats
        self.parser = expat.ParserCreate()
        self.parser.buffer_text = True
        self.parser.buffer_size = 1 << 16
        self.parser.StartElementHandler = self._start
        self.parser.EndElementHandler = self._end
        self.parser.CharacterDataHandler = self._data
        self.stack: list[str] = []
        self.ready: list[RawPage] = []
        self.last_page_end = 0
        self._reset()

    def _reset(self) -> None:
        self.title: list[str] = []
        self.ns: list[str] = []
        self.text: list[str] = []
        self.text_chars = 0
        self.redirect: Optional[str] = None
        self.capture: Optional[list[str]] = None
        self.in_text = False

    def _start(self, name: str, attrs: dict[str, str]) -> None:
        stack = self.stack
        parent = stack[-1] if stack else None
        stack.append(name)
        if parent == "page":
            if name == "title":
                self.capture = self.title
            elif name == "ns":
                self.capture = self.ns
            elif name == "redirect":
                self.redirect = attrs.get("title")
        elif parent == "revision":
            if name == "text":
                # keep only the last revision's text
                self.text = []
                self.text_chars = 0
                self.capture = self.text
                self.in_text = True
        elif name == "page":
            self._reset()

    def _end(self, name: str) -> None:
        self.stack.pop()
        self.capture = None
        if name == "page":
            self.last_page_end = self.parser.CurrentByteIndex + len("</page>")
            self._emit()
        elif self.in_text:
            self.in_text = False
            if self.text_chars > self.stats.max_page_chars:
                self.stats.max_page_chars = self.text_chars

    def _data(self, data: str) -> None:
        capture = self.capture
        if capture is not None:
            capture.append(data)
            if self.in_text:
                self.text_chars += len(data)

    def _emit(self) -> None:
        ns_text = "".join(self.ns).strip()
        namespace = int(ns_text) if ns_text.lstrip("-").isdigit() else 0
        if namespace != 0:
            self.stats.skipped_namespace += 1
            return
        title = normalize_title("".join(self.title))
        if not title:
            return
        text = "".join(self.text)
        redirect = normalize_title(self.redirect) if self.redirect else redirect_target(text)
        self.stats.pages += 1
        categories = [] if redirect else extract_categories(text)
        self.ready.append(RawPage(title, 0, text, categories, redirect or None))


class DumpReader:
    """Iterate namespace-0 pages of a dump in dump order.

    Only one page (plus a fixed read buffer) is held at a time. Bad JSONL
    lines are recorded in ``stats.errors`` and skipped unless ``strict``.
    """

    def __init__(
        self,
        source: BinaryIO,
        fmt: Union[DumpFormat, str] = DumpFormat.AUTO,
        strict: bool = False,
        on_error: Optional[Callable[[LineError], None]] = None,
    ):
        self.stream = _sniff(source)
        self.fmt = DumpFormat(fmt)
        if self.fmt is DumpFormat.AUTO:
            self.fmt = _detect_format(self.stream)
        self.strict = strict
        self.on_error = on_error
        self.stats = DumpStats()

    def __iter__(self) -> Iterator[RawPage]:
        if self.fmt is DumpFormat.XML:
            return self._iter_xml()
        return self._iter_jsonl()

    def _iter_xml(self) -> Iterator[RawPage]:
        collector = _XmlPageCollector(self.stats)
        parser = collector.parser
        while True:
            chunk = self.stream.read(CHUNK_SIZE)
            final = not chunk
            try:
                parser.Parse(chunk, final)
            except expat.ExpatError as exc:
                yield from collector.ready
                raise DumpError(
                    f"malformed XML at byte {parser.ErrorByteIndex} "
                    f"(line {exc.lineno}, column {exc.offset}): {expat.ErrorString(exc.code)}; "
                    f"last complete page ends at byte {collector.last_page_end}",
                    collector.last_page_end,
                ) from exc
            self.stats.bytes_read += len(chunk)
            if collector.ready:
                pages, collector.ready = collector.ready, []
                yield from pages
            if final:
                return

    def _fail(self, line: int, offset: int, message: str, last_good: int) -> None:
        err = LineError(line, offset, message)
        if self.strict:
            raise DumpError(f"line {line} (byte {offset}): {message}", last_good)
        self.stats.errors.append(err)
        if self.on_error is not None:
            self.on_error(err)
        else:
            log.warning("skipping line %d: %s", line, message)

    def _iter_jsonl(self) -> Iterator[RawPage]:
        offset = 0
        for lineno, raw in enumerate(self.stream, start=1):
            start, offset = offset, offset + len(raw)
            self.stats.bytes_read = offset
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                self._fail(lineno, start, f"invalid JSON: {exc}", start)
                continue
            problem = _jsonl_problem(obj)
            if problem:
                self._fail(lineno, start, problem, start)
                continue
            text = obj["text"]
            self.stats.max_page_chars = max(self.stats.max_page_chars, len(text))
            if obj["ns"] != 0:
                self.stats.skipped_namespace += 1
                continue
            title = normalize_title(obj["title"])
            if not title:
                self._fail(lineno, start, "title is empty after normalization", start)
                continue
            redirect = obj.get("redirect")
            redirect = normalize_title(redirect) if redirect else redirect_target(text)
            categories = [normalize_title(c) for c in obj["categories"]]
            self.stats.pages += 1
            yield RawPage(title, 0, text, [c for c in categories if c], redirect or None)


def _jsonl_problem(obj: object) -> Optional[str]:
    if not isinstance(obj, dict):
        return "expected a JSON object"
    if not isinstance(obj.get("title"), str):
        return "field 'title' must be a string"
    if not isinstance(obj.get("ns"), int) or isinstance(obj.get("ns"), bool):
        return "field 'ns' must be an integer"
    if not isinstance(obj.get("text"), str):
        return "field 'text' must be a string"
    cats = obj.get("categories")
    if not isinstance(cats, list) or not all(isinstance(c, str) for c in cats):
        return "field 'categories' must be a list of strings"
    if obj.get("redirect") is not None and not isinstance(obj["redirect"], str):
        return "field 'redirect' must be a string"
    return None


def parse_dump_stream(
    source: BinaryIO,
    fmt: Union[DumpFormat, str] = DumpFormat.AUTO,
    strict: bool = False,
) -> Iterator[RawPage]:
    return iter(DumpReader(source, fmt, strict))


def detect_person_page(page: RawPage, rules: LanguageRules) -> bool:
    if page.redirect:
        return False
    for pattern in rules.person_categories:
        if any(pattern.search(c) for c in page.categories):
            return True
    return any(p.search(page.wikitext) for p in rules.person_text)


class PeopleIndex(Mapping):
    """Person records by title plus the redirect map used to resolve links."""

    def __init__(
        self,
        people: Optional[dict[str, PersonRecord]] = None,
        redirects: Optional[dict[str, str]] = None,
        lang: str = "",
    ):
        self.people = people if people is not None else {}
        self.redirects = redirects if redirects is not None else {}
        self.lang = lang
        self.duplicates = 0
        self.dropped_redirects = 0

    def __getitem__(self, title: str) -> PersonRecord:
        return self.people[title]

    def __iter__(self) -> Iterator[str]:
        return iter(self.people)

    def __len__(self) -> int:
        return len(self.people)

    def write_jsonl(self, out: io.TextIOBase) -> None:
        for title in sorted(self.people):
            out.write(json.dumps(self.people[title].to_json(), ensure_ascii=False, sort_keys=True,
                                 separators=(",", ":")))
            out.write("\n")

    def write_redirects(self, out: io.TextIOBase) -> None:
        for src in sorted(self.redirects):
            out.write(json.dumps({"from": src, "to": self.redirects[src]}, ensure_ascii=False,
                                 separators=(",", ":")))
            out.write("\n")

    def dumps(self) -> str:
        buf = io.StringIO()
        self.write_jsonl(buf)
        return buf.getvalue()


def read_index(path: Union[str, Path]) -> PeopleIndex:
    people: dict[str, PersonRecord] = {}
    lang = ""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = PersonRecord.from_json(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise DumpError(f"{path}:{lineno}: bad index record ({exc})", 0) from exc
            people[record.title] = record
            lang = lang or record.lang
    return PeopleIndex(people, lang=lang)


def build_people_index(
    pages: Iterable[RawPage],
    rules: LanguageRules,
    lexicon: Optional[GenderLexicon] = None,
    reference_year: int = REFERENCE_YEAR,
) -> PeopleIndex:
    """One pass over the pages: keep person pages, remember redirects, then
    resolve every person's links to canonical person titles.

    Redirects are followed one hop; a redirect pointing at another redirect
    is dropped. Links to anything that is not a person page are discarded.
    """
    index = PeopleIndex(lang=rules.lang)
    people = index.people
    redirects: dict[str, str] = {}
    # raw link counts per person; turned into LinkMention lists at the end
    pending: dict[str, Counter[str]] = {}

    for page in pages:
        if page.title in people or page.title in redirects:
            index.duplicates += 1
            if index.duplicates <= _MAX_DUPLICATE_WARNINGS:
                log.warning("duplicate page %r: keeping the later occurrence", page.title)
            people.pop(page.title, None)
            pending.pop(page.title, None)
            redirects.pop(page.title, None)
        if page.redirect:
            if page.redirect != page.title:
                redirects[page.title] = page.redirect
            continue
        if not detect_person_page(page, rules):
            continue
        clean = strip_ignored_spans(page.wikitext)
        record = PersonRecord(
            title=page.title,
            lang=rules.lang,
            lifespan=extract_lifespan(page, rules.dates, reference_year),
            categories=list(page.categories),
        )
        pending[page.title] = count_link_targets(clean)
        if lexicon is not None:
            result = classify_gender(clean, lexicon)
            record.gender = result.gender
            record.female_count, record.male_count = result.female_count, result.male_count
        people[page.title] = record

    if index.duplicates > _MAX_DUPLICATE_WARNINGS:
        log.warning("%d duplicate pages in total", index.duplicates)

    for src, dst in redirects.items():
        if src in people:
            continue
        if dst in redirects:
            index.dropped_redirects += 1
            log.warning("dropping redirect chain %r -> %r -> %r", src, dst, redirects[dst])
            continue
        if dst in people:
            index.redirects[src] = dst

    for title, record in people.items():
        counts: dict[str, int] = {}
        for target, n in pending[title].items():
            target = index.redirects.get(target, target)
            if target == title or target not in people:
                continue
            counts[target] = counts.get(target, 0) + n
        record.links = [LinkMention(t, c) for t, c in sorted(counts.items())]
    return index

