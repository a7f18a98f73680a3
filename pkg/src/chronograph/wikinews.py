"""Wikinews listings: dated anchors, topic co-occurrence network, betweenness
and lexicon-based text scores.

The text scores are open stand-ins for the proprietary sentiment,
emotionality and complexity measures used in earlier Wikinews studies:

* sentiment = p / (p + n), or 0.5 when no lexicon word occurs
* emotionality = (p + n) / T
* complexity = (distinct tokens / T) * mean token length

with p, n the positive and negative lexicon hits and T the token count.
"""

from __future__ import annotations

import json
import logging
import re
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from html.parser import HTMLParser
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union
from urllib.parse import quote, unquote

from .gender import tokenize
from .rules import RuleError, bundled_path
from .wikitext import is_article_target, normalize_title, plain_text, strip_ignored_spans

log = logging.getLogger(__name__)

MONTHS = {
    "en": ["january", "february", "march", "april", "may", "june", "july", "august",
           "september", "october", "november", "december"],
    "de": ["januar", "februar", "märz", "april", "mai", "juni", "juli", "august",
           "september", "oktober", "november", "dezember"],
    "es": ["enero", "febrero", "marzo", "abril", "mayo", "junio", "julio", "agosto",
           "septiembre", "octubre", "noviembre", "diciembre"],
    "pt": ["janeiro", "fevereiro", "março", "abril", "maio", "junho", "julho", "agosto",
           "setembro", "outubro", "novembro", "dezembro"],
}
_EXTRA_MONTHS = {"jänner": 1, "setiembre": 9, "sept": 9}

_HEADING = re.compile(r"^(=+)\s*(.+?)\s*\1\s*$")
_ENTRY = re.compile(r"^[*#]+\s*(.*)$")
_NEWS_LINK = re.compile(
    r"\[\[([^\[\]|\n]*)(?:\|([^\[\]]*))?\]\]|\{\{\s*[wW]\s*\|\s*([^|{}\n]+?)\s*(?:\|\s*([^{}\n]*?)\s*)?\}\}"
)
_W_TEMPLATE = re.compile(r"\{\{\s*[wW]\s*\|\s*([^|{}\n]+?)\s*(?:\|\s*([^{}\n]*?)\s*)?\}\}")
_WIKIPEDIA_PREFIX = re.compile(r"^:?\s*(?:w|wikipedia)\s*:\s*(?:[a-z]{2,3}\s*:\s*)?", re.IGNORECASE)


def _month_lookup(lang: str) -> dict[str, int]:
    names = {}
    for code in (lang, "en"):
        for i, name in enumerate(MONTHS.get(code, ()), start=1):
            names.setdefault(name, i)
            names.setdefault(name[:3], i)
    names.update(_EXTRA_MONTHS)
    return names


@dataclass(frozen=True)
class _Date:
    year: Optional[int]
    month: Optional[int]
    day: Optional[int]

    def iso(self) -> Optional[str]:
        if self.month is None:
            return f"{self.year:04d}" if self.year is not None else None
        tail = f"{self.month:02d}" + (f"-{self.day:02d}" if self.day is not None else "")
        return f"{self.year:04d}-{tail}" if self.year is not None else f"--{tail}"


class _DateParser:
    def __init__(self, lang: str):
        self.months = _month_lookup(lang)
        names = "|".join(sorted(map(re.escape, self.months), key=len, reverse=True))
        self.iso = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})\b")
        self.month_day = re.compile(rf"^({names})\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?\b(?:,?\s+(\d{{4}}))?", re.I)
        self.day_month = re.compile(
            rf"^(\d{{1,2}})\.?\s+(?:de\s+)?({names})\b\.?(?:\s+(?:de\s+)?(\d{{4}}))?", re.I
        )
        self.month_only = re.compile(rf"^({names})\b\.?(?:\s+(?:de\s+)?(\d{{4}}))?\s*$", re.I)
        self.year_only = re.compile(r"^(\d{4})\s*$")

    def parse(self, text: str) -> tuple[Optional[_Date], int]:
        """Date at the start of ``text`` and the length of the match."""
        text = text.strip()
        m = self.iso.match(text)
        if m:
            return _Date(int(m.group(1)), int(m.group(2)), int(m.group(3))), m.end()
        m = self.month_day.match(text)
        if m:
            year = int(m.group(3)) if m.group(3) else None
            return _Date(year, self.months[m.group(1).lower()], int(m.group(2))), m.end()
        m = self.day_month.match(text)
        if m:
            year = int(m.group(3)) if m.group(3) else None
            return _Date(year, self.months[m.group(2).lower()], int(m.group(1))), m.end()
        m = self.month_only.match(text)
        if m:
            year = int(m.group(2)) if m.group(2) else None
            return _Date(year, self.months[m.group(1).lower()], None), m.end()
        m = self.year_only.match(text)
        if m:
            return _Date(int(m.group(1)), None, None), m.end()
        return None, 0


@dataclass(frozen=True)
class NewsAnchor:
    date: Optional[str]
    summary: str
    links: tuple[str, ...]

    @property
    def date_known(self) -> bool:
        return self.date is not None


def _news_target(raw: str) -> str:
    raw = _WIKIPEDIA_PREFIX.sub("", raw.strip())
    if not is_article_target(raw):
        return ""
    return normalize_title(raw.split("#", 1)[0])


def news_links(entry: str) -> tuple[str, ...]:
    """Article titles linked from one entry, in order, without duplicates.

    Plain links, ``w:``-prefixed links into Wikipedia and ``{{w|...}}``
    templates all count.
    """
    seen: dict[str, None] = {}
    for m in _NEWS_LINK.finditer(strip_ignored_spans(entry)):
        raw = m.group(1) if m.group(3) is None else m.group(3)
        target = _news_target(raw)
        if target:
            seen.setdefault(target, None)
    return tuple(seen)


def _summary(entry: str) -> str:
    entry = _W_TEMPLATE.sub(lambda m: m.group(2) or m.group(1), entry)
    entry = re.sub(r"\[\[\s*:?\s*(?:w|wikipedia)\s*:", "[[", entry, flags=re.IGNORECASE)
    return " ".join(plain_text(entry).split())


def parse_news_index(text: str, lang: str = "en", year: Optional[int] = None) -> list[NewsAnchor]:
    """One anchor per bullet entry of a Wikinews listing.

    An entry dated by a leading date uses that date; otherwise it inherits
    the closest preceding date heading. Entries before any date get
    ``date=None``.
    """
    dates = _DateParser(lang)
    current: Optional[_Date] = None
    anchors = []
    for line in strip_ignored_spans(text).splitlines():
        line = line.strip()
        heading = _HEADING.match(line)
        if heading:
            found, _ = dates.parse(heading.group(2))
            if found is not None:
                if found.month is None:
                    year = found.year
                    current = None
                else:
                    current = found
            continue
        entry = _ENTRY.match(line)
        if not entry:
            continue
        body = entry.group(1)
        own, used = dates.parse(body)
        if own is not None and own.month is not None:
            body = body[used:].lstrip(" :–—-")
            date = own
        else:
            date = current
        iso = None
        if date is not None:
            if date.year is None and year is not None:
                date = _Date(year, date.month, date.day)
            iso = date.iso()
        anchors.append(NewsAnchor(iso, _summary(body), news_links(body)))
    return anchors


@dataclass(frozen=True)
class TextScores:
    sentiment: float
    emotionality: float
    complexity: float


@dataclass
class NewsGraph:
    """Undirected co-occurrence graph; edge keys are ordered pairs (a < b)."""

    nodes: set[str] = field(default_factory=set)
    edges: dict[tuple[str, str], int] = field(default_factory=dict)
    scores: dict[str, TextScores] = field(default_factory=dict)

    directed = False

    def __len__(self) -> int:
        return len(self.nodes)

    def weight(self, a: str, b: str) -> int:
        return self.edges.get((a, b) if a < b else (b, a), 0)

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {n: [] for n in sorted(self.nodes)}
        for a, b in sorted(self.edges):
            adj[a].append(b)
            adj[b].append(a)
        for nbrs in adj.values():
            nbrs.sort()
        return adj

    def sorted_edges(self) -> list[tuple[str, str, int]]:
        return [(a, b, w) for (a, b), w in sorted(self.edges.items())]


def build_news_network(anchors: Iterable[NewsAnchor]) -> NewsGraph:
    graph = NewsGraph()
    for anchor in anchors:
        links = sorted(set(anchor.links))
        graph.nodes.update(links)
        for a, b in combinations(links, 2):
            graph.edges[(a, b)] = graph.edges.get((a, b), 0) + 1
    return graph


def betweenness(graph: NewsGraph) -> dict[str, float]:
    """Unnormalized shortest-path betweenness on the unweighted skeleton,
    each unordered pair counted once (Brandes accumulation)."""
    adj = graph.adjacency()
    score = {v: 0.0 for v in adj}
    for s in adj:
        order = []
        preds: dict[str, list[str]] = {v: [] for v in adj}
        sigma = dict.fromkeys(adj, 0)
        dist = dict.fromkeys(adj, -1)
        sigma[s], dist[s] = 1, 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = dict.fromkeys(adj, 0.0)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                score[w] += delta[w]
    return {v: c / 2.0 for v, c in score.items()}


@dataclass(frozen=True)
class SentimentLexicon:
    lang: str
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self) -> None:
        for term in self.positive | self.negative:
            if term != term.lower():
                raise ValueError(f"lexicon term {term!r} is not lowercase")
        both = self.positive & self.negative
        if both:
            raise ValueError(f"terms both positive and negative: {sorted(both)}")


def load_sentiment_lexicon(source: Union[str, Path]) -> SentimentLexicon:
    path = Path(source)
    if not path.exists() and str(source) in ("en", "de", "es", "pt"):
        path = bundled_path("sentiment", str(source))
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise RuleError(f"cannot load sentiment lexicon {source}: {exc}") from exc
    unknown = set(data) - {"lang", "positive", "negative", "comment"}
    if unknown:
        raise RuleError(f"unknown sentiment lexicon keys {sorted(unknown)}")
    return SentimentLexicon(str(data.get("lang", "")), frozenset(data.get("positive", ())),
                            frozenset(data.get("negative", ())))


def score_text(text: str, lexicon: SentimentLexicon) -> TextScores:
    tokens = tokenize(text)
    if not tokens:
        raise ValueError("cannot score a text without tokens")
    pos = sum(t in lexicon.positive for t in tokens)
    neg = sum(t in lexicon.negative for t in tokens)
    total = len(tokens)
    sentiment = pos / (pos + neg) if pos + neg else 0.5
    complexity = len(set(tokens)) / total * (sum(map(len, tokens)) / total)
    return TextScores(sentiment, (pos + neg) / total, complexity)


@dataclass(frozen=True)
class NewsReport:
    lang: str
    scored: int
    mean_sentiment: float
    mean_emotionality: float
    mean_complexity: float
    top: tuple[tuple[str, float], ...]


def aggregate_scores(
    graph: NewsGraph,
    texts: Mapping[str, str],
    lexicon: SentimentLexicon,
    top: int = 20,
    centrality: Optional[Mapping[str, float]] = None,
) -> NewsReport:
    """Score every node with an article text, then average.

    Scores are stored on ``graph.scores``. The report also carries the
    ``top`` nodes by betweenness.
    """
    graph.scores.clear()
    for title in sorted(graph.nodes):
        text = texts.get(title)
        if text is None or not tokenize(text):
            continue
        graph.scores[title] = score_text(text, lexicon)
    if not graph.scores:
        raise ValueError("no graph node has a scorable article text")
    n = len(graph.scores)
    values = list(graph.scores.values())
    if centrality is None:
        centrality = betweenness(graph)
    ranked = sorted(centrality.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    return NewsReport(
        lang=lexicon.lang,
        scored=n,
        mean_sentiment=sum(s.sentiment for s in values) / n,
        mean_emotionality=sum(s.emotionality for s in values) / n,
        mean_complexity=sum(s.complexity for s in values) / n,
        top=tuple(ranked),
    )


def article_filename(title: str) -> str:
    return quote(title, safe="") + ".txt"


def load_article_texts(directory: Union[str, Path]) -> dict[str, str]:
    """Article texts keyed by title from a directory of percent-encoded
    ``<title>.txt`` files."""
    texts = {}
    for path in sorted(Path(directory).glob("*.txt")):
        title = normalize_title(unquote(path.name[: -len(".txt")]))
        texts[title] = path.read_text(encoding="utf-8")
    return texts


class _TextExtractor(HTMLParser):
    _SKIP = {"script", "style", "table", "sup"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self.depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self.depth += 1
        elif tag in ("p", "br", "li", "h2", "h3", "div"):
            self.parts.append("\n")

    def handle_endtag(self, tag):
        if tag in self._SKIP and self.depth:
            self.depth -= 1

    def handle_data(self, data):
        if not self.depth:
            self.parts.append(data)


def html_to_text(html: str) -> str:
    parser = _TextExtractor()
    parser.feed(html)
    parser.close()
    lines = (" ".join(line.split()) for line in "".join(parser.parts).splitlines())
    return "\n".join(line for line in lines if line)


class _RateLimiter:
    def __init__(self, rps: float):
        self.interval = 1.0 / rps if rps > 0 else 0.0
        self.lock = threading.Lock()
        self.next_at = 0.0

    def wait(self) -> None:
        with self.lock:
            now = time.monotonic()
            delay = self.next_at - now
            self.next_at = max(now, self.next_at) + self.interval
        if delay > 0:
            time.sleep(delay)


@dataclass
class FetchReport:
    fetched: list[str] = field(default_factory=list)
    cached: list[str] = field(default_factory=list)
    failed: dict[str, str] = field(default_factory=dict)


def fetch_articles(
    titles: Sequence[str],
    out_dir: Union[str, Path],
    lang: str = "en",
    rps: float = 2.0,
    concurrency: int = 2,
    client=None,
    base_url: Optional[str] = None,
) -> FetchReport:
    """Download rendered article HTML, convert to text, cache on disk.

    Titles whose text file already exists are not requested again.
    """
    import httpx

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base_url = base_url or f"https://{lang}.wikipedia.org/w/index.php"
    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=30.0, headers={"User-Agent": "chronograph/0.1 (research batch)"})
    limiter = _RateLimiter(rps)
    report = FetchReport()
    lock = threading.Lock()

    def fetch(title: str) -> None:
        target = out / article_filename(title)
        if target.exists():
            with lock:
                report.cached.append(title)
            return
        limiter.wait()
        try:
            resp = client.get(base_url, params={"title": title, "action": "render"})
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            with lock:
                report.failed[title] = str(exc)
            log.warning("fetch failed for %r: %s", title, exc)
            return
        tmp = target.with_name(target.name + ".part")
        tmp.write_text(html_to_text(resp.text), encoding="utf-8")
        tmp.replace(target)
        with lock:
            report.fetched.append(title)

    try:
        unique = list(dict.fromkeys(normalize_title(t) for t in titles if t.strip()))
        with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
            list(pool.map(fetch, unique))
    finally:
        if own_client:
            client.close()
    report.fetched.sort()
    report.cached.sort()
    return report
