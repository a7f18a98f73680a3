"""Core records shared by every stage.

Years are plain signed ints with no year 0: -44 is 44 BC, 1 is AD 1.
Ordinary comparison orders them correctly; only arithmetic across the era
boundary needs :func:`shift_year` / :func:`year_span`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional

from .wikitext import LinkMention

MIN_SLICE_YEAR = -3000
MAX_SLICE_YEAR = 1950
# Persons with no death year born after REFERENCE_YEAR - MAX_LIFESPAN may
# still be alive; their effective death is REFERENCE_YEAR.
REFERENCE_YEAR = 2020
MAX_LIFESPAN = 120
IMPUTED_LIFESPAN = 70


def check_year(year: int) -> int:
    if not isinstance(year, int) or isinstance(year, bool):
        raise TypeError(f"year must be an int, got {year!r}")
    if year == 0:
        raise ValueError("there is no year 0 (use -1 for 1 BC, 1 for AD 1)")
    return year


def year_to_ordinal(year: int) -> int:
    """Position on a gapless axis: 1 BC -> 0, AD 1 -> 1."""
    check_year(year)
    return year + 1 if year < 0 else year


def ordinal_to_year(ordinal: int) -> int:
    return ordinal - 1 if ordinal <= 0 else ordinal


def shift_year(year: int, years: int) -> int:
    return ordinal_to_year(year_to_ordinal(year) + years)


def year_span(start: int, end: int) -> int:
    """Elapsed years from ``start`` to ``end``, skipping the missing year 0."""
    return year_to_ordinal(end) - year_to_ordinal(start)


def format_year(year: int) -> str:
    return f"{-year} BC" if year < 0 else f"AD {year}"


class Gender(str, enum.Enum):
    MALE = "male"
    FEMALE = "female"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Lifespan:
    birth: int
    death: Optional[int] = None
    approx: bool = False

    def __post_init__(self) -> None:
        check_year(self.birth)
        if self.death is not None:
            check_year(self.death)
            if self.death < self.birth:
                raise ValueError(f"death {self.death} precedes birth {self.birth}")
            if year_span(self.birth, self.death) > MAX_LIFESPAN:
                raise ValueError(
                    f"lifespan {self.birth}..{self.death} exceeds {MAX_LIFESPAN} years"
                )

    def effective_death(self, reference_year: int = REFERENCE_YEAR) -> int:
        return self.death if self.death is not None else max(reference_year, self.birth)

    def alive_in(self, year: int, reference_year: int = REFERENCE_YEAR) -> bool:
        return self.birth <= year <= self.effective_death(reference_year)

    def to_json(self) -> dict[str, Any]:
        return {"birth": self.birth, "death": self.death, "approx": self.approx}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Lifespan":
        return cls(int(data["birth"]), None if data.get("death") is None else int(data["death"]),
                   bool(data.get("approx", False)))


@dataclass
class PersonRecord:
    title: str
    lang: str
    lifespan: Optional[Lifespan] = None
    links: list[LinkMention] = field(default_factory=list)
    gender: Gender = Gender.UNKNOWN
    categories: list[str] = field(default_factory=list)
    female_count: int = 0
    male_count: int = 0

    @property
    def dated(self) -> bool:
        return self.lifespan is not None

    def to_json(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "lang": self.lang,
            "lifespan": self.lifespan.to_json() if self.lifespan else None,
            "undated": self.lifespan is None,
            "links": [[m.target, m.count] for m in self.links],
            "gender": self.gender.value,
            "female_count": self.female_count,
            "male_count": self.male_count,
            "categories": list(self.categories),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "PersonRecord":
        lifespan = data.get("lifespan")
        return cls(
            title=data["title"],
            lang=data.get("lang", ""),
            lifespan=Lifespan.from_json(lifespan) if lifespan else None,
            links=[LinkMention(t, int(c)) for t, c in data.get("links", [])],
            gender=Gender(data.get("gender", "unknown")),
            categories=list(data.get("categories", [])),
            female_count=int(data.get("female_count", 0)),
            male_count=int(data.get("male_count", 0)),
        )
