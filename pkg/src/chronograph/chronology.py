"""Lifespans, the lifetime-overlap filter and per-year graph slices."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

import numpy as np

from .records import (
    IMPUTED_LIFESPAN,
    MAX_LIFESPAN,
    MAX_SLICE_YEAR,
    MIN_SLICE_YEAR,
    REFERENCE_YEAR,
    Lifespan,
    PersonRecord,
    check_year,
    ordinal_to_year,
    shift_year,
    year_to_ordinal,
)
from .rules import DateRules
from .wikitext import RawPage

log = logging.getLogger(__name__)


def _signed(number: str, bc: Optional[str]) -> Optional[int]:
    value = int(number)
    if value == 0:
        return None
    return -value if bc else value


def _first_category_year(categories: Iterable[str], patterns) -> Optional[int]:
    for cat in categories:
        for pat in patterns:
            m = pat.search(cat)
            if m:
                year = _signed(m.group("year"), m.groupdict().get("bc"))
                if year is not None:
                    return year
    return None


def _first_text_year(text: str, patterns) -> tuple[Optional[int], bool]:
    for pat in patterns:
        m = pat.search(text)
        if m:
            year = _signed(m.group("year"), m.groupdict().get("bc"))
            if year is not None:
                return year, bool(m.groupdict().get("approx"))
    return None, False


def _lifespan_line(text: str, patterns) -> tuple[Optional[int], Optional[int], bool]:
    for pat in patterns:
        m = pat.search(text)
        if not m:
            continue
        g = m.groupdict()
        birth_n, death_n = int(g["birth"]), int(g["death"])
        birth_bc, death_bc = g.get("birth_bc"), g.get("death_bc")
        # "(318–272 BC)": a trailing era marker covers both years
        if death_bc and not birth_bc and birth_n >= death_n:
            birth_bc = death_bc
        birth, death = _signed(g["birth"], birth_bc), _signed(g["death"], death_bc)
        if birth is None or death is None:
            continue
        return birth, death, bool(g.get("birth_approx") or g.get("death_approx"))
    return None, None, False


def extract_lifespan(
    page: RawPage,
    patterns: DateRules,
    reference_year: int = REFERENCE_YEAR,
) -> Optional[Lifespan]:
    """Birth and death years of a person page.

    Category years win over anything found in the text. A missing death
    year is imputed as birth + 70 (approx) when the person cannot plausibly
    be alive at ``reference_year``; otherwise it stays empty. Contradictory
    or over-long lifespans give ``None``.
    """
    birth = _first_category_year(page.categories, patterns.birth_categories)
    death = _first_category_year(page.categories, patterns.death_categories)
    approx = False

    if birth is None or death is None:
        line_birth, line_death, line_approx = _lifespan_line(page.wikitext, patterns.lifespan_text)
        if birth is None:
            birth, approx = _first_text_year(page.wikitext, patterns.birth_text)
            if birth is None and line_birth is not None:
                birth, approx = line_birth, line_approx
        if death is None:
            death, death_approx = _first_text_year(page.wikitext, patterns.death_text)
            if death is None and line_death is not None:
                death, death_approx = line_death, line_approx
            approx = approx or death_approx

    if birth is None:
        return None
    if death is None and birth <= reference_year - MAX_LIFESPAN:
        death, approx = shift_year(birth, IMPUTED_LIFESPAN), True
    try:
        return Lifespan(birth, death, approx)
    except ValueError as exc:
        log.debug("rejecting lifespan of %s: %s", page.title, exc)
        return None


def lifespans_overlap(a: Lifespan, b: Lifespan, reference_year: int = REFERENCE_YEAR) -> bool:
    """Closed-interval overlap: sharing a single year counts."""
    return max(a.birth, b.birth) <= min(a.effective_death(reference_year), b.effective_death(reference_year))


@dataclass
class PeopleGraph:
    """Directed, mention-weighted graph over dated persons."""

    nodes: dict[str, PersonRecord] = field(default_factory=dict)
    edges: dict[tuple[str, str], int] = field(default_factory=dict)
    reference_year: int = REFERENCE_YEAR

    directed = True

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def year_range(self) -> Optional[tuple[int, int]]:
        spans = [p.lifespan for p in self.nodes.values() if p.lifespan is not None]
        if not spans:
            return None
        return (min(s.birth for s in spans), max(s.effective_death(self.reference_year) for s in spans))

    def sorted_edges(self) -> list[tuple[str, str, int]]:
        return [(s, d, w) for (s, d), w in sorted(self.edges.items())]


def build_full_graph(index: Mapping[str, PersonRecord], reference_year: int = REFERENCE_YEAR) -> PeopleGraph:
    """All dated persons, with an edge wherever a page links a contemporary."""
    graph = PeopleGraph(reference_year=reference_year)
    for title in sorted(index):
        person = index[title]
        if person.lifespan is not None:
            graph.nodes[title] = person
    for src, person in graph.nodes.items():
        for mention in person.links:
            if mention.target == src:
                continue
            other = graph.nodes.get(mention.target)
            if other is None:
                continue
            if lifespans_overlap(person.lifespan, other.lifespan, reference_year):
                key = (src, mention.target)
                graph.edges[key] = graph.edges.get(key, 0) + mention.count
    return graph


def check_slice_year(year: int) -> int:
    check_year(year)
    if not MIN_SLICE_YEAR <= year <= MAX_SLICE_YEAR:
        raise ValueError(f"slice year {year} outside [{MIN_SLICE_YEAR}, {MAX_SLICE_YEAR}]")
    return year


class SliceIndex:
    """Vectorized alive-at-year lookups over one graph.

    A person is in the slice for ``year`` iff birth <= year <= death; an
    edge survives iff the year lies in the intersection of both lifespans.
    """

    def __init__(self, graph: PeopleGraph):
        self.graph = graph
        self.titles = list(graph.nodes)
        ref = graph.reference_year
        self.births = np.array([graph.nodes[t].lifespan.birth for t in self.titles], dtype=np.int64)
        self.deaths = np.array([graph.nodes[t].lifespan.effective_death(ref) for t in self.titles], dtype=np.int64)
        pos = {t: i for i, t in enumerate(self.titles)}
        self.edge_keys = list(graph.edges)
        src = np.array([pos[s] for s, _ in self.edge_keys], dtype=np.int64)
        dst = np.array([pos[d] for _, d in self.edge_keys], dtype=np.int64)
        self.edge_lo = np.maximum(self.births[src], self.births[dst]) if len(src) else np.empty(0, np.int64)
        self.edge_hi = np.minimum(self.deaths[src], self.deaths[dst]) if len(src) else np.empty(0, np.int64)

    def at(self, year: int) -> PeopleGraph:
        check_slice_year(year)
        out = PeopleGraph(reference_year=self.graph.reference_year)
        alive = np.flatnonzero((self.births <= year) & (self.deaths >= year))
        for i in alive:
            t = self.titles[i]
            out.nodes[t] = self.graph.nodes[t]
        live_edges = np.flatnonzero((self.edge_lo <= year) & (self.edge_hi >= year))
        for i in live_edges:
            key = self.edge_keys[i]
            out.edges[key] = self.graph.edges[key]
        return out


def build_slice(graph: PeopleGraph, year: int) -> PeopleGraph:
    """Subgraph of persons alive in ``year`` and the edges among them."""
    check_slice_year(year)
    ref = graph.reference_year
    out = PeopleGraph(reference_year=ref)
    for title, person in graph.nodes.items():
        if person.lifespan is not None and person.lifespan.alive_in(year, ref):
            out.nodes[title] = person
    for (src, dst), w in graph.edges.items():
        if src in out.nodes and dst in out.nodes:
            out.edges[(src, dst)] = w
    return out


def year_grid(start: int, stop: int, step: int = 1) -> list[int]:
    """Years from ``start`` to ``stop`` inclusive, ``step`` apart on the
    calendar with no year 0 (so -3000..1950 by 1 has 4950 entries)."""
    check_year(start)
    check_year(stop)
    if step < 1:
        raise ValueError("step must be a positive integer")
    if not start < stop:
        raise ValueError(f"start {start} must precede stop {stop}")
    first, last = year_to_ordinal(start), year_to_ordinal(stop)
    return [ordinal_to_year(o) for o in range(first, last + 1, step)]


def slice_series(
    graph: PeopleGraph, start: int, stop: int, step: int = 1
) -> Iterator[tuple[int, PeopleGraph]]:
    years = year_grid(start, stop, step)
    for year in years:
        check_slice_year(year)
    index = SliceIndex(graph)
    for year in years:
        yield year, index.at(year)
