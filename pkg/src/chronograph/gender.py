"""Pronoun-frequency gender heuristic and the share of women over time."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .chronology import slice_series, year_grid
from .ranking import top_k
from .records import REFERENCE_YEAR, Gender, PersonRecord, year_to_ordinal
from .rules import RuleError, bundled_path

_TOKEN = re.compile(r"\w+")

BUNDLED_LEXICONS = ("en", "de", "es", "pt")


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens (maximal runs of word characters)."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class GenderLexicon:
    lang: str
    female_terms: frozenset[str]
    male_terms: frozenset[str]

    def __post_init__(self) -> None:
        for name, terms in (("female", self.female_terms), ("male", self.male_terms)):
            if not terms:
                raise ValueError(f"{name} term list is empty")
            for term in terms:
                if term != term.lower() or _TOKEN.fullmatch(term) is None:
                    raise ValueError(f"{name} term {term!r} must be a single lowercase word")
        both = self.female_terms & self.male_terms
        if both:
            raise ValueError(f"terms listed as both female and male: {sorted(both)}")

    def swapped(self) -> "GenderLexicon":
        return GenderLexicon(self.lang, self.male_terms, self.female_terms)

    @classmethod
    def from_dict(cls, data: dict) -> "GenderLexicon":
        unknown = set(data) - {"lang", "female", "male", "comment"}
        if unknown:
            raise RuleError(f"unknown lexicon keys {sorted(unknown)}")
        return cls(str(data.get("lang", "")), frozenset(data.get("female", ())), frozenset(data.get("male", ())))


def load_lexicon(source: Union[str, Path]) -> GenderLexicon:
    """Lexicon from a JSON file, or a bundled one by language code."""
    path = Path(source)
    if not path.exists() and str(source) in BUNDLED_LEXICONS:
        path = bundled_path("lexicons", str(source))
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise RuleError(f"cannot load lexicon {source}: {exc}") from exc
    return GenderLexicon.from_dict(data)


@dataclass(frozen=True)
class GenderResult:
    gender: Gender
    female_count: int
    male_count: int


def decide(female_count: int, male_count: int) -> Gender:
    if female_count > male_count:
        return Gender.FEMALE
    if male_count > female_count:
        return Gender.MALE
    return Gender.UNKNOWN


def classify_gender(text: str, lexicon: GenderLexicon) -> GenderResult:
    """Majority vote of female vs male lexicon tokens; ties are unknown."""
    tokens = tokenize(text)
    female = sum(map(lexicon.female_terms.__contains__, tokens))
    male = sum(map(lexicon.male_terms.__contains__, tokens))
    return GenderResult(decide(female, male), female, male)


def validate_accuracy(labeled: Sequence[tuple[str, Union[Gender, str]]], lexicon: GenderLexicon) -> float:
    """Share of pages classified as their label; an unknown counts as a miss."""
    if not labeled:
        raise ValueError("cannot measure accuracy on an empty labeled set")
    correct = 0
    for text, label in labeled:
        truth = Gender(label)
        if truth is Gender.UNKNOWN:
            raise ValueError("gold labels must be male or female")
        correct += classify_gender(text, lexicon).gender is truth
    return correct / len(labeled)


@dataclass(frozen=True)
class GenderPoint:
    year: int
    percent_female: Optional[float]
    population: int


def gender_timeseries(
    people: Iterable[PersonRecord],
    start: int,
    stop: int,
    step: int = 1,
    reference_year: int = REFERENCE_YEAR,
) -> list[GenderPoint]:
    """Percentage of women among classified, dated persons alive each year.

    Years with nobody classified alive get ``percent_female=None``.
    """
    years = year_grid(start, stop, step)
    lo, hi = year_to_ordinal(years[0]), year_to_ordinal(years[-1])
    size = hi - lo + 2
    total = np.zeros(size, dtype=np.int64)
    women = np.zeros(size, dtype=np.int64)
    for person in people:
        if person.lifespan is None or person.gender is Gender.UNKNOWN:
            continue
        a = max(year_to_ordinal(person.lifespan.birth), lo)
        b = min(year_to_ordinal(person.lifespan.effective_death(reference_year)), hi)
        if a > b:
            continue
        total[a - lo] += 1
        total[b - lo + 1] -= 1
        if person.gender is Gender.FEMALE:
            women[a - lo] += 1
            women[b - lo + 1] -= 1
    total = np.cumsum(total)
    women = np.cumsum(women)
    return [_point(y, int(women[year_to_ordinal(y) - lo]), int(total[year_to_ordinal(y) - lo])) for y in years]


def _point(year: int, women: int, population: int) -> GenderPoint:
    if population == 0:
        return GenderPoint(year, None, 0)
    return GenderPoint(year, 100.0 * women / population, population)


def top_k_gender_timeseries(
    graph,
    start: int,
    stop: int,
    step: int = 1,
    k: int = 50,
    **pagerank_args,
) -> list[GenderPoint]:
    """Like :func:`gender_timeseries`, but the population of each year is the
    top ``k`` persons by PageRank in that year's slice."""
    points = []
    for year, piece in slice_series(graph, start, stop, step):
        if len(piece) == 0:
            points.append(GenderPoint(year, None, 0))
            continue
        genders = [piece.nodes[e.title].gender for e in top_k(piece, k, **pagerank_args)]
        known = [g for g in genders if g is not Gender.UNKNOWN]
        points.append(_point(year, sum(g is Gender.FEMALE for g in known), len(known)))
    return points

