"""Loading of the JSON rule files (person detection, dates, categories, spheres).

Every loader accepts either a path to a JSON file or a bundled language
code such as ``"en"``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Union

PathOrName = Union[str, Path]

_FLAGS = re.IGNORECASE


class RuleError(ValueError):
    """A rule file is missing, malformed or has unknown keys."""


def _read_json(source: PathOrName, bundled_dir: str) -> dict[str, Any]:
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise RuleError(f"cannot read rule file {path}: {exc}") from exc
        origin = str(path)
    else:
        ref = resources.files("chronograph") / "data" / bundled_dir / f"{source}.json"
        if not ref.is_file():
            raise RuleError(f"no bundled {bundled_dir} rules for {source!r}")
        text = ref.read_text(encoding="utf-8")
        origin = f"bundled:{bundled_dir}/{source}"
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RuleError(f"{origin}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise RuleError(f"{origin}: expected a JSON object")
    return data


def _compile(patterns: Any, where: str) -> tuple[re.Pattern[str], ...]:
    if not isinstance(patterns, list) or not all(isinstance(p, str) for p in patterns):
        raise RuleError(f"{where}: expected a list of regex strings")
    try:
        return tuple(re.compile(p, _FLAGS) for p in patterns)
    except re.error as exc:
        raise RuleError(f"{where}: bad regex ({exc})") from exc


def _check_keys(data: dict[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise RuleError(f"{where}: unknown keys {sorted(unknown)}")


@dataclass(frozen=True)
class DateRules:
    birth_categories: tuple[re.Pattern[str], ...] = ()
    death_categories: tuple[re.Pattern[str], ...] = ()
    birth_text: tuple[re.Pattern[str], ...] = ()
    death_text: tuple[re.Pattern[str], ...] = ()
    lifespan_text: tuple[re.Pattern[str], ...] = ()


@dataclass(frozen=True)
class LanguageRules:
    """Person-page detection plus lifespan extraction patterns for one wiki."""

    lang: str
    person_categories: tuple[re.Pattern[str], ...] = ()
    person_text: tuple[re.Pattern[str], ...] = ()
    dates: DateRules = field(default_factory=DateRules)

    @classmethod
    def from_dict(cls, data: dict[str, Any], where: str = "rules") -> "LanguageRules":
        _check_keys(data, {"lang", "person_categories", "person_text", "dates", "comment"}, where)
        dates = data.get("dates", {})
        _check_keys(dates, {f.name for f in DateRules.__dataclass_fields__.values()}, f"{where}.dates")
        return cls(
            lang=str(data.get("lang", "")),
            person_categories=_compile(data.get("person_categories", []), f"{where}.person_categories"),
            person_text=_compile(data.get("person_text", []), f"{where}.person_text"),
            dates=DateRules(**{k: _compile(v, f"{where}.dates.{k}") for k, v in dates.items()}),
        )


def load_language_rules(source: PathOrName) -> LanguageRules:
    return LanguageRules.from_dict(_read_json(source, "rules"), str(source))


@dataclass(frozen=True)
class CategoryRule:
    role: str
    pattern: re.Pattern[str]


ROLES = ("politician", "religious", "artist_scientist", "other")


def load_category_rules(source: PathOrName) -> tuple[CategoryRule, ...]:
    data = _read_json(source, "categories")
    _check_keys(data, {"lang", "rules", "comment"}, str(source))
    rules = []
    for i, item in enumerate(data.get("rules", [])):
        where = f"{source}.rules[{i}]"
        if not isinstance(item, dict):
            raise RuleError(f"{where}: expected an object")
        _check_keys(item, {"role", "pattern"}, where)
        role = item.get("role")
        if role not in ROLES:
            raise RuleError(f"{where}: role must be one of {ROLES}, got {role!r}")
        (pattern,) = _compile([item.get("pattern")], where)
        rules.append(CategoryRule(role, pattern))
    return tuple(rules)


def load_sphere_rules(source: PathOrName) -> tuple[str, tuple[re.Pattern[str], ...]]:
    data = _read_json(source, "spheres")
    _check_keys(data, {"lang", "ingroup", "comment"}, str(source))
    return str(data.get("lang", "")), _compile(data.get("ingroup", []), f"{source}.ingroup")


def bundled_path(kind: str, name: str) -> Path:
    """Filesystem path of a bundled data file, e.g. ``("lexicons", "en")``."""
    ref = resources.files("chronograph") / "data" / kind / f"{name}.json"
    return Path(str(ref))
