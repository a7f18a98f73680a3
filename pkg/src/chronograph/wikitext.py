"""Wikitext helpers: title normalization, wikilinks, categories, redirects.

Everything here is regex based and works on raw page source. No template
expansion is attempted.
"""

from __future__ import annotations

import re
from collections import Counter
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

# Namespace prefixes (all languages we ship rules for) whose links are not
# article links. Compared case-insensitively.
MEDIA_PREFIXES = frozenset(
    p.casefold()
    for p in (
        "File", "Image", "Media", "Datei", "Bild", "Archivo", "Imagen",
        "Ficheiro", "Arquivo", "Imagem", "文件", "檔案", "图像", "ファイル", "画像",
    )
)
CATEGORY_PREFIXES = frozenset(
    p.casefold()
    for p in ("Category", "Kategorie", "Categoría", "Categoria", "Catégorie", "分类", "分類", "カテゴリ")
)
OTHER_NAMESPACES = frozenset(
    p.casefold()
    for p in (
        "Talk", "User", "User talk", "Wikipedia", "Project", "Template", "Vorlage",
        "Plantilla", "Predefinição", "Help", "Hilfe", "Ayuda", "Ajuda", "Portal",
        "Special", "Spezial", "Especial", "Module", "Modul", "Módulo", "Draft", "MediaWiki",
        "Diskussion", "Benutzer", "Usuario", "Usuário", "Discusión", "Discussão",
    )
)
INTERWIKI_PREFIXES = frozenset(
    (
        "w", "wikipedia", "wikt", "wiktionary", "commons", "c", "s", "wikisource", "q",
        "wikiquote", "n", "wikinews", "b", "wikibooks", "v", "wikiversity", "voy",
        "wikivoyage", "species", "d", "wikidata", "m", "meta", "mw", "metawikimedia",
        "foundation", "wmf", "outreach", "incubator", "phab", "phabricator",
    )
)
_LANG_CODE = re.compile(r"^[a-z]{2,3}(?:-[a-z0-9]+)*$")

_COMMENT = re.compile(r"<!--.*?(?:-->|\Z)", re.DOTALL)
_NOWIKI = re.compile(r"<nowiki\s*>.*?(?:</nowiki\s*>|\Z)|<nowiki\s*/>", re.DOTALL | re.IGNORECASE)
_WIKILINK = re.compile(r"\[\[([^\[\]|\n]*)(?:\|([^\[\]]*))?\]\]")
_WIKILINK_TARGET = re.compile(r"\[\[([^\[\]|\n]*)(?:\|[^\[\]]*)?\]\]")
_IGNORED_OPEN = re.compile(r"<!--|<nowiki", re.IGNORECASE)
_CATEGORY = re.compile(
    r"\[\[\s*(?:" + "|".join(sorted({re.escape(p) for p in (
        "Category", "Kategorie", "Categoría", "Categoria", "Catégorie", "分类", "分類", "カテゴリ",
    )})) + r")\s*:\s*([^\[\]|\n]+?)\s*(?:\|[^\[\]]*)?\]\]",
    re.IGNORECASE,
)
_REDIRECT = re.compile(
    r"^\s*#\s*(?:REDIRECT|WEITERLEITUNG|REDIRECCIÓN|REDIRECCION|REDIRECIONAMENTO|重定向|転送)"
    r"\s*:?\s*\[\[([^\[\]|\n]+)",
    re.IGNORECASE,
)
_REF = re.compile(r"<ref[^>/]*/>|<ref[^>]*>.*?</ref\s*>", re.DOTALL | re.IGNORECASE)
_TEMPLATE = re.compile(r"\{\{[^{}]*\}\}")
_TABLE = re.compile(r"^\{\|.*?^\|\}", re.DOTALL | re.MULTILINE)
_TAG = re.compile(r"</?[a-zA-Z][^>]*>")
_EMPHASIS = re.compile(r"'{2,}")
_HEADING = re.compile(r"^=+\s*(.*?)\s*=+\s*$", re.MULTILINE)
_SPACES = re.compile(r"[ \t]+")


@lru_cache(maxsize=1 << 16)
def normalize_title(title: str) -> str:
    """Canonical page title: underscores to spaces, collapsed whitespace,
    first character upper-cased."""
    t = " ".join(title.replace("_", " ").split())
    if t.startswith(":"):
        t = " ".join(t[1:].split())
    if not t:
        return ""
    first = t[0].upper()
    if len(first) != 1:
        # e.g. 'ß'.upper() == 'SS'; MediaWiki leaves such characters alone
        first = t[0]
    return first + t[1:]


def strip_ignored_spans(wikitext: str) -> str:
    """Remove HTML comments and nowiki spans (their content is never markup)."""
    if _IGNORED_OPEN.search(wikitext) is None:
        return wikitext
    return _NOWIKI.sub("", _COMMENT.sub("", wikitext))


def _prefix(target: str) -> Optional[str]:
    if ":" not in target:
        return None
    return target.split(":", 1)[0].strip()


def is_article_target(target: str) -> bool:
    """False for media, category, non-article namespace and interwiki targets."""
    raw = target.strip()
    if raw.startswith(":"):
        raw = raw[1:].strip()
    prefix = _prefix(raw)
    if prefix is None:
        return True
    low = prefix.casefold()
    if low in MEDIA_PREFIXES or low in CATEGORY_PREFIXES or low in OTHER_NAMESPACES:
        return False
    if low in INTERWIKI_PREFIXES or _LANG_CODE.match(prefix):
        return False
    return True


def iter_wikilinks(wikitext: str) -> Iterator[tuple[str, Optional[str]]]:
    """Yield ``(raw_target, label)`` for every ``[[...]]`` in source order.

    Comments and nowiki spans are skipped. Unbalanced brackets never raise;
    the scan just resumes at the next complete link.
    """
    for m in _WIKILINK.finditer(strip_ignored_spans(wikitext)):
        yield m.group(1), m.group(2)


@lru_cache(maxsize=1 << 16)
def link_target(raw_target: str) -> str:
    """Normalized article title for a raw link target, or '' if unusable."""
    if not is_article_target(raw_target):
        return ""
    return normalize_title(raw_target.split("#", 1)[0])


@dataclass(frozen=True, order=True)
class LinkMention:
    target: str
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"link count must be positive, got {self.count}")


def count_link_targets(wikitext: str) -> Counter[str]:
    """Mentions per normalized article target, before any redirect or
    person filtering."""
    counts: Counter[str] = Counter()
    # tally raw targets first; most pages repeat a handful of them
    for raw, n in Counter(_WIKILINK_TARGET.findall(strip_ignored_spans(wikitext))).items():
        target = link_target(raw)
        if target:
            counts[target] += n
    return counts


def extract_person_links(
    wikitext: str,
    self_title: str,
    redirects: Optional[Mapping[str, str]] = None,
    persons: Optional[Mapping[str, object] | set[str] | frozenset[str]] = None,
) -> list[LinkMention]:
    """Aggregate article links of a page into mention counts.

    Targets pass through ``redirects`` (one hop) before counting. If
    ``persons`` is given, targets outside it are dropped. Self-links are
    dropped after redirect resolution. Result is sorted by target.
    """
    self_title = normalize_title(self_title)
    counts: Counter[str] = Counter()
    for target, n in count_link_targets(wikitext).items():
        if redirects is not None:
            target = redirects.get(target, target)
        if target == self_title:
            continue
        if persons is not None and target not in persons:
            continue
        counts[target] += n
    return [LinkMention(t, c) for t, c in sorted(counts.items())]


def extract_categories(wikitext: str) -> list[str]:
    """Category names assigned by the page, in order, without duplicates.

    ``[[:Category:X]]`` is a link to the category, not membership, and is
    skipped.
    """
    names = dict.fromkeys(map(normalize_title, _CATEGORY.findall(strip_ignored_spans(wikitext))))
    names.pop("", None)
    return list(names)


def redirect_target(wikitext: str) -> Optional[str]:
    m = _REDIRECT.match(wikitext)
    if not m:
        return None
    target = link_target(m.group(1))
    return target or None


def _strip_templates(text: str, max_rounds: int = 20) -> str:
    for _ in range(max_rounds):
        new = _TEMPLATE.sub("", text)
        if new == text:
            break
        text = new
    return text


def _link_text(m: re.Match[str]) -> str:
    target, label = m.group(1), m.group(2)
    if not is_article_target(target):
        return ""
    return label if label is not None else target.split("#", 1)[0]


def plain_text(wikitext: str) -> str:
    """Rough readable text: templates, refs, tables, tags and media dropped,
    links replaced by their labels."""
    text = strip_ignored_spans(wikitext)
    text = _REF.sub("", text)
    text = _strip_templates(text)
    text = _TABLE.sub("", text)
    # inner links first, so captions holding links collapse correctly
    for _ in range(5):
        new = _WIKILINK.sub(_link_text, text)
        if new == text:
            break
        text = new
    text = _TAG.sub("", text)
    text = _EMPHASIS.sub("", text)
    text = _HEADING.sub(r"\1", text)
    text = _SPACES.sub(" ", text)
    return "\n".join(line.strip() for line in text.splitlines() if line.strip())


@dataclass
class RawPage:
    title: str
    namespace: int
    wikitext: str
    categories: list[str] = field(default_factory=list)
    redirect: Optional[str] = None

    def __post_init__(self) -> None:
        self.title = normalize_title(self.title)
        if not self.title:
            raise ValueError("page title is empty after normalization")
