"""PageRank, indegree, top-K lists, role categories and in-group shares."""

from __future__ import annotations

import csv
import io
import re
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .records import PersonRecord
from .rules import ROLES, CategoryRule

DEFAULT_DAMPING = 0.85
DEFAULT_EPSILON = 1e-10
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True)
class PageRankResult:
    scores: dict[str, float]
    iterations: int
    converged: bool
    delta: float


def _arrays(graph) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray]:
    titles = sorted(graph.nodes)
    pos = {t: i for i, t in enumerate(titles)}
    items = sorted(graph.edges.items())
    src = np.fromiter((pos[s] for (s, _), _ in items), dtype=np.int64, count=len(items))
    dst = np.fromiter((pos[d] for (_, d), _ in items), dtype=np.int64, count=len(items))
    w = np.fromiter((float(x) for _, x in items), dtype=np.float64, count=len(items))
    return titles, src, dst, w


def pagerank(
    graph,
    damping: float = DEFAULT_DAMPING,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PageRankResult:
    """Weighted PageRank by power iteration.

    A node passes its mass to successors in proportion to edge weight.
    Nodes without out-edges spread their mass uniformly. Iteration stops when
    the L1 change drops below ``epsilon``; hitting ``max_iter`` first returns
    the current vector with ``converged=False``.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must lie in (0, 1), got {damping}")
    if epsilon <= 0 or max_iter < 1:
        raise ValueError("epsilon must be positive and max_iter at least 1")
    titles, src, dst, w = _arrays(graph)
    n = len(titles)
    if n == 0:
        raise ValueError("PageRank of an empty graph is undefined")

    out_weight = np.bincount(src, weights=w, minlength=n)
    dangling = out_weight == 0
    share = np.zeros_like(w)
    if len(w):
        share = w / out_weight[src]

    x = np.full(n, 1.0 / n)
    delta = float("inf")
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        flow = np.bincount(dst, weights=x[src] * share, minlength=n)
        y = damping * (flow + x[dangling].sum() / n) + (1.0 - damping) / n
        y /= y.sum()
        delta = float(np.abs(y - x).sum())
        x = y
        if delta < epsilon:
            converged = True
            break
    return PageRankResult(dict(zip(titles, x.tolist())), iterations, converged, delta)


def indegree(graph) -> dict[str, int]:
    """Number of distinct nodes with an edge into each node."""
    sources: dict[str, set[str]] = {t: set() for t in graph.nodes}
    for src, dst in graph.edges:
        sources[dst].add(src)
    return {t: len(s) for t, s in sources.items()}


@dataclass(frozen=True)
class RankingEntry:
    title: str
    pagerank: float
    indegree: int
    rank: int


def _score_key(score: float) -> float:
    # 12 significant digits, the precision written to CSV; keeps ties stable
    # under floating-point noise from summation order
    return float(f"{score:.12g}")


def rank_all(graph, damping=DEFAULT_DAMPING, epsilon=DEFAULT_EPSILON, max_iter=DEFAULT_MAX_ITER) -> list[RankingEntry]:
    scores = pagerank(graph, damping, epsilon, max_iter).scores
    deg = indegree(graph)
    order = sorted(graph.nodes, key=lambda t: (-_score_key(scores[t]), -deg[t], t))
    return [RankingEntry(t, scores[t], deg[t], i) for i, t in enumerate(order, start=1)]


def top_k(graph, k: int, damping=DEFAULT_DAMPING, epsilon=DEFAULT_EPSILON, max_iter=DEFAULT_MAX_ITER) -> list[RankingEntry]:
    if k < 1:
        raise ValueError("k must be at least 1")
    return rank_all(graph, damping, epsilon, max_iter)[:k]


@dataclass(frozen=True)
class PersonCategory:
    role: str
    source: Optional[str]


def categorize(person: PersonRecord, rules: Sequence[CategoryRule]) -> PersonCategory:
    """First rule (in ruleset order) matching any of the person's categories."""
    for rule in rules:
        for cat in person.categories:
            if rule.pattern.search(cat):
                return PersonCategory(rule.role, rule.pattern.pattern)
    return PersonCategory("other", None)


class SphereClassifier:
    """In-group test for one Wikipedia edition: a person is in-group when
    any of their categories matches an in-group pattern."""

    def __init__(self, lang: str, patterns: Sequence[re.Pattern[str]]):
        self.lang = lang
        self.patterns = tuple(patterns)

    def __call__(self, person: PersonRecord) -> bool:
        return any(p.search(c) for p in self.patterns for c in person.categories)


@dataclass(frozen=True)
class IngroupStats:
    total: int
    ingroup: int
    fraction: float
    roles: dict[str, int]


def ingroup_fraction(
    entries: Sequence[RankingEntry],
    people: Mapping[str, PersonRecord],
    sphere: Callable[[PersonRecord], bool],
    category_rules: Sequence[CategoryRule] = (),
) -> IngroupStats:
    if not entries:
        raise ValueError("in-group fraction of an empty ranking is undefined")
    roles: Counter[str] = Counter({r: 0 for r in ROLES})
    inside = 0
    for entry in entries:
        person = people[entry.title]
        roles[categorize(person, category_rules).role] += 1
        inside += bool(sphere(person))
    return IngroupStats(len(entries), inside, inside / len(entries), dict(roles))


RANKING_COLUMNS = ("rank", "title", "pagerank", "indegree", "category", "ingroup")


def rankings_csv(
    entries: Sequence[RankingEntry],
    people: Optional[Mapping[str, PersonRecord]] = None,
    category_rules: Sequence[CategoryRule] = (),
    sphere: Optional[Callable[[PersonRecord], bool]] = None,
    year: Optional[int] = None,
    header: bool = True,
) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow((["year"] if year is not None else []) + list(RANKING_COLUMNS))
    for e in entries:
        person = people.get(e.title) if people is not None else None
        category = categorize(person, category_rules).role if person is not None else ""
        ingroup = "" if person is None or sphere is None else int(bool(sphere(person)))
        row = [e.rank, e.title, f"{e.pagerank:.12g}", e.indegree, category, ingroup]
        if year is not None:
            row.insert(0, year)
        writer.writerow(row)
    return buf.getvalue()
