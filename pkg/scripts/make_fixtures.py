"""Regenerate the bundled test fixtures under tests/fixtures.

Everything is synthetic and seeded, so rerunning gives identical bytes.
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path
from urllib.parse import quote
from xml.sax.saxutils import escape

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "tests" / "fixtures"


def year_label(y: int) -> str:
    return f"{-y} BC" if y < 0 else str(y)


def page_xml(title: str, ns: int, text: str, page_id: int, redirect: str | None = None) -> str:
    parts = [
        "  <page>",
        f"    <title>{escape(title)}</title>",
        f"    <ns>{ns}</ns>",
        f"    <id>{page_id}</id>",
    ]
    if redirect:
        parts.append(f'    <redirect title="{escape(redirect, {chr(34): "&quot;"})}" />')
    parts += [
        "    <revision>",
        f"      <id>{page_id * 10}</id>",
        '      <text xml:space="preserve">' + escape(text) + "</text>",
        "    </revision>",
        "  </page>",
    ]
    return "\n".join(parts)


def dump_xml(pages: list[str]) -> str:
    head = (
        '<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.10/" version="0.10" xml:lang="en">\n'
        "  <siteinfo>\n    <sitename>Wikipedia</sitename>\n    <dbname>enwiki</dbname>\n  </siteinfo>\n"
    )
    return head + "\n".join(pages) + "\n</mediawiki>\n"


# title, birth, death, gender, role categories
PEOPLE = [
    ("Socrates", -470, -399, "m", ["Ancient Greek philosophers"]),
    ("Plato", -428, -348, "m", ["Ancient Greek philosophers"]),
    ("Aristotle", -384, -322, "m", ["Ancient Greek philosophers", "Ancient Greek scientists"]),
    ("Alexander the Great", -356, -323, "m", ["Kings of Macedonia"]),
    ("Pyrrhus of Epirus", -319, -272, "m", ["Kings of Epirus"]),
    ("Confucius", -551, -479, "m", ["Chinese philosophers"]),
    ("Homer", None, None, "m", ["Ancient Greek poets"]),
    ("Cicero", -106, -43, "m", ["Roman consuls", "Ancient Roman writers"]),
    ("Julius Caesar", -100, -44, "m", ["Roman dictators", "Ancient Roman generals"]),
    ("Mark Antony", -83, -30, "m", ["Ancient Roman generals"]),
    ("Cleopatra", -69, -30, "f", ["Pharaohs of the Ptolemaic dynasty", "Queens of Egypt"]),
    ("Augustus", -63, 14, "m", ["Roman emperors"]),
    ("Seneca the Younger", -4, 65, "m", ["Stoic philosophers", "Ancient Roman writers"]),
    ("Jesus", -4, 30, "m", ["Prophets of Islam", "Founders of religions"]),
    ("Paul the Apostle", 5, 64, "m", ["Apostles", "Saints"]),
    ("Agrippina the Younger", 15, 59, "f", ["Roman empresses"]),
    ("Nero", 37, 68, "m", ["Roman emperors"]),
    ("Plutarch", 46, 120, "m", ["Ancient Greek biographers", "Ancient Greek philosophers"]),
    ("Trajan", 53, 117, "m", ["Roman emperors"]),
    ("Hadrian", 76, 138, "m", ["Roman emperors"]),
    ("Marcus Aurelius", 121, 180, "m", ["Roman emperors", "Stoic philosophers"]),
    ("Helena, mother of Constantine I", 246, 330, "f", ["Roman empresses", "Saints"]),
    ("Constantine the Great", 272, 337, "m", ["Roman emperors"]),
    ("Augustine of Hippo", 354, 430, "m", ["Bishops of Hippo", "Theologians"]),
    ("Hypatia", 360, 415, "f", ["Ancient Greek mathematicians", "Ancient Greek astronomers"]),
    ("Muhammad", 570, 632, "m", ["Prophets of Islam"]),
    ("Charlemagne", 742, 814, "m", ["Holy Roman Emperors", "Kings of the Franks"]),
    ("Elizabeth I", 1533, 1603, "f", ["English monarchs", "Queens regnant of England"]),
    ("William Shakespeare", 1564, 1616, "m", ["English dramatists and playwrights", "English poets"]),
    ("Galileo Galilei", 1564, 1642, "m", ["Italian physicists", "Italian astronomers"]),
    ("Isaac Newton", 1643, 1727, "m", ["English physicists", "English mathematicians"]),
    ("Napoleon", 1769, 1821, "m", ["Emperors of the French"]),
    ("Ludwig van Beethoven", 1770, 1827, "m", ["German composers"]),
    ("Jane Austen", 1775, 1817, "f", ["English novelists"]),
    ("Charles Darwin", 1809, 1882, "m", ["English naturalists"]),
    ("Queen Victoria", 1819, 1901, "f", ["Monarchs of the United Kingdom"]),
    ("Marie Curie", 1867, 1934, "f", ["French physicists", "French chemists"]),
    ("Winston Churchill", 1874, 1965, "m", ["Prime Ministers of the United Kingdom"]),
    ("Albert Einstein", 1879, 1955, "m", ["German physicists"]),
    # special cases: birth only (death imputed), and a living person
    ("Gaius Obscurus", -10, None, "m", ["Ancient Roman writers"]),
    ("Ada Livingston", 1950, None, "f", ["English novelists"]),
]

ARTICLES = ["Rome", "Roman Empire", "Athens", "Philosophy", "Christianity", "London", "Paris", "Physics"]

REDIRECTS = [
    ("Caesar", "Julius Caesar"),
    ("Julius", "Caesar"),  # a chain: dropped at ingest
    ("Octavian", "Augustus"),
    ("Alexander III of Macedon", "Alexander the Great"),
    ("Newton", "Isaac Newton"),
    ("Bonaparte", "Napoleon"),
    ("Rome (city)", "Rome"),  # points at an article, not a person
]

ALIASES = {"Julius Caesar": "Caesar", "Augustus": "Octavian", "Alexander the Great": "Alexander III of Macedon",
           "Isaac Newton": "Newton", "Napoleon": "Bonaparte"}


def person_text(rng: random.Random, person, titles: list[str]) -> str:
    title, birth, death, gender, roles = person
    subj, poss = ("He", "his") if gender == "m" else ("She", "her")
    cats = [f"{year_label(birth)} births"] if birth is not None else []
    if death is not None:
        cats.append(f"{year_label(death)} deaths")
    elif birth is None:
        cats.append("Year of birth unknown")
    elif birth > 1900:
        cats.append("Living people")
    cats += roles

    # mostly near neighbours in time, so many links survive the overlap filter
    pos = titles.index(title)
    near = [t for t in titles[max(0, pos - 5):pos + 6] if t != title]
    far = [t for t in titles if t != title and t not in near]
    linked = rng.sample(near, 4) + rng.sample(far, 2)
    rng.shuffle(linked)
    mentions = []
    for i, target in enumerate(linked):
        shown = target
        if target in ALIASES and i % 2 == 0:
            shown = ALIASES[target]
        mentions.append(f"[[{shown}]]" if i % 3 else f"[[{shown}|{target.split()[0]}]]")
    # a repeated mention gives weight 2
    mentions.append(f"[[{linked[0]}]]")
    article = rng.choice(ARTICLES)
    if birth is None:
        span = "dates unknown"
    elif death is None:
        span = f"born {year_label(birth)}"
    else:
        span = f"{year_label(birth)} – {year_label(death)}"
    lines = [
        f"'''{title}''' ({span}) was a figure of note.<ref>Some source.</ref>",
        f"{subj} was often compared with {mentions[0]} and {mentions[1]}.",
        f"Early in {poss} life {subj.lower()} lived near [[{article}]] and read {mentions[2]}.",
        f"Historians place {poss} work beside {mentions[3]}, {mentions[4]} and {mentions[5]}.",
        f"Later writers again cited {mentions[6]}. <!-- [[Hidden link]] -->",
        "",
        "== See also ==",
        f"* [[Talk:{title}]]",
        f"* [[File:{title}.jpg|thumb]]",
        f"* [[fr:{title}]]",
        "",
    ]
    lines += [f"[[Category:{c}]]" for c in cats]
    return "\n".join(lines)


def make_dump60(rng: random.Random) -> str:
    titles = [p[0] for p in PEOPLE]
    pages = []
    page_id = 1
    for person in PEOPLE:
        pages.append(page_xml(person[0], 0, person_text(rng, person, titles), page_id))
        page_id += 1
    for name in ARTICLES:
        text = f"'''{name}''' is a place or subject. See [[{rng.choice(titles)}]].\n[[Category:Topics]]"
        pages.append(page_xml(name, 0, text, page_id))
        page_id += 1
    for src, dst in REDIRECTS:
        pages.append(page_xml(src, 0, f"#REDIRECT [[{dst}]]", page_id, redirect=dst))
        page_id += 1
    for title, ns in [("Talk:Julius Caesar", 1), ("User:Example", 2), ("Template:Infobox person", 10),
                      ("Category:Roman emperors", 14)]:
        pages.append(page_xml(title, ns, "[[Nero]] [[Hadrian]] [[Category:1 births]]", page_id))
        page_id += 1
    # interleave so the dump is not grouped by kind
    rng.shuffle(pages)
    return dump_xml(pages)


PLUTARCH_PEOPLE = [
    ("Plutarch", 46, 120, ["Ancient Greek biographers"]),
    ("Hadrian", 76, 138, ["Roman emperors"]),
    ("Julius Caesar", -100, -44, ["Roman dictators"]),
    ("Nero", 37, 68, ["Roman emperors"]),
    ("Pyrrhus of Epirus", -319, -272, ["Kings of Epirus"]),
    ("George Syncellus", 750, 810, ["Byzantine chroniclers"]),
    ("Vettor Pisani", 1324, 1380, ["Venetian admirals"]),
]


def make_plutarch() -> str:
    pages = []
    for i, (title, birth, death, roles) in enumerate(PLUTARCH_PEOPLE, start=1):
        if title == "Plutarch":
            body = (
                "'''Plutarch''' was a Greek biographer. He met [[Hadrian]] and wrote on [[Julius Caesar|Caesar]] "
                "and [[Nero]]. His lives include [[Pyrrhus of Epirus|Pyrrhus]]. He is cited by "
                "[[George Syncellus|Syncellus]] and a ship was named after him by [[Vettor Pisani|Pisani]]."
            )
        elif title in ("Hadrian", "Nero", "Julius Caesar", "George Syncellus"):
            body = f"'''{title}''' is discussed by [[Plutarch]]."
        else:
            body = f"'''{title}''' was a person."
        cats = [f"{year_label(birth)} births", f"{year_label(death)} deaths"] + roles
        body += "\n" + "\n".join(f"[[Category:{c}]]" for c in cats)
        pages.append(page_xml(title, 0, body, i))
    return dump_xml(pages)


# --- gender-labeled pages ---

GENDER_TEMPLATES = {
    "en": {
        "f": ["{n} was born in {p}. She studied law and later she became a judge.",
              "Her first book appeared in {y}. She wrote about her mother and her daughter.",
              "{n} married a merchant; her husband died young and she ran the firm herself.",
              "She was a noted actress and her performances were praised."],
        "m": ["{n} was born in {p}. He studied law and later he became a judge.",
              "His first book appeared in {y}. He wrote about his father and his son.",
              "{n} married a merchant's daughter; his wife died young and he ran the firm himself.",
              "He was a noted actor and his performances were praised."],
        "confound_f": "Her father, the king, and his brother ruled the city while he was at war.",
        "confound_m": "His mother, the queen, and her sister managed the estate while she travelled.",
        "places": ["London", "Boston", "Sydney", "Dublin", "Toronto"],
    },
    "de": {
        "f": ["{n} wurde in {p} geboren. Sie studierte Recht und wurde später Richterin.",
              "Ihr erstes Buch erschien {y}. Sie schrieb über ihre Mutter und ihre Tochter.",
              "Sie war eine bekannte Schauspielerin; ihre Rollen wurden gelobt.",
              "Nach dem Tod ihres Ehemanns führte sie das Geschäft weiter."],
        "m": ["{n} wurde in {p} geboren. Er studierte Recht und wurde später Richter.",
              "Sein erstes Buch erschien {y}. Er schrieb über seinen Vater und seinen Sohn.",
              "Er war ein bekannter Schauspieler; seine Rollen wurden gelobt.",
              "Nach dem Tod seiner Ehefrau führte er das Geschäft weiter."],
        "confound_f": "Ihr Vater, der König, und sein Bruder regierten, während er im Krieg war.",
        "confound_m": "Seine Mutter, die Königin, und ihre Schwester verwalteten das Gut, während sie reiste.",
        "places": ["Berlin", "Wien", "Zürich", "Hamburg", "München"],
    },
    "es": {
        "f": ["{n}, nacida en {p}, fue una escritora y jurista.",
              "Ella publicó su primer libro en {y} y fue conocida en toda la región.",
              "Casada con un comerciante, fue elegida para el consejo y nombrada directora.",
              "Ella fue la primera mujer en el cargo; su madre fue maestra."],
        "m": ["{n}, nacido en {p}, fue un escritor y jurista.",
              "Él publicó su primer libro en {y} y fue conocido en toda la región.",
              "Casado con una comerciante, fue elegido para el consejo y nombrado director.",
              "Él fue el primero en el cargo; su padre fue maestro."],
        "confound_f": "Su padre, el rey, era hijo de un emperador.",
        "confound_m": "Su madre, la reina, era hija de una emperatriz.",
        "places": ["Madrid", "Sevilla", "Lima", "Bogotá", "Buenos Aires"],
    },
    "pt": {
        "f": ["{n}, nascida em {p}, foi uma escritora e jurista.",
              "Ela publicou o primeiro livro em {y} e ficou conhecida em todo o país.",
              "Casada com um comerciante, foi eleita para o conselho e nomeada diretora.",
              "Ela foi a primeira no cargo; a mãe dela era professora."],
        "m": ["{n}, nascido em {p}, foi um escritor e jurista.",
              "Ele publicou o primeiro livro em {y} e ficou conhecido em todo o país.",
              "Casado com uma comerciante, foi eleito para o conselho e nomeado diretor.",
              "Ele foi o primeiro no cargo; o pai dele era professor."],
        "confound_f": "O pai dela, o rei, era filho de um imperador.",
        "confound_m": "A mãe dele, a rainha, era filha de uma imperatriz.",
        "places": ["Lisboa", "Porto", "Recife", "Salvador", "Coimbra"],
    },
}


def make_gender(rng: random.Random, lang: str, count: int = 200) -> str:
    t = GENDER_TEMPLATES[lang]
    rows = []
    for i in range(count):
        label = "f" if i % 2 == 0 else "m"
        other = "m" if label == "f" else "f"
        name = f"Person {lang.upper()}{i:03d}"
        fill = {"n": name, "p": rng.choice(t["places"]), "y": rng.randint(1700, 1990)}
        k = rng.randint(2, 4)
        sentences = [s.format(**fill) for s in rng.sample(t[label], k)]
        if rng.random() < 0.4:
            # a sentence about relatives of the other gender
            sentences.insert(rng.randrange(len(sentences) + 1), t[f"confound_{label}"])
        if i % 25 == 7:
            # hard case: the page talks mostly about a relative
            sentences = [t[other][1].format(**fill), t[f"confound_{label}"]]
        rows.append(json.dumps({"title": name, "gender": "female" if label == "f" else "male",
                                "text": " ".join(sentences)}, ensure_ascii=False))
    return "\n".join(rows) + "\n"


# --- Wikinews ---

NEWS_LISTING = """\
This page lists events from the Wikinews archive.

== July 2014 ==
=== July 17 ===
* A passenger plane [[Malaysia Airlines Flight 17|crashed]] in [[Ukraine]]; officials in [[Russia]] and [[Ukraine]] traded blame.
* [[w:Israel|Israel]] launched a ground operation in the [[Gaza Strip]].
=== July 18 ===
* {{w|United Nations}} called for a ceasefire between [[Israel]] and [[Hamas]] in the [[Gaza Strip]].
* July 19: Investigators from the [[Netherlands]] arrived in [[Ukraine]] to examine the [[Malaysia Airlines Flight 17]] crash site.
* Football: [[Germany]] celebrated the [[2014 FIFA World Cup]] victory in [[Berlin]].
<!-- * [[Hidden]] entry that must not count. -->
=== July 20 ===
* The [[Ebola virus]] outbreak spread to [[Nigeria]]; the [[World Health Organization]] warned of a crisis.
* [[Russia]] and the [[United Nations]] discussed sanctions. [[File:Map.png|thumb]]
* [[Category:July 2014]]
"""

NEGATIVE_TEXTS = {
    "Malaysia Airlines Flight 17": "The plane crashed after an attack. All passengers were killed and the crash caused fear and anger.",
    "Ukraine": "War and violence continued in the east. Many people died in attacks and the crisis deepened.",
    "Russia": "Sanctions followed the crisis. Officials denied the attack but fear of war grew.",
    "Israel": "Rockets and bombing killed civilians. The violence and deaths drew protest and anger, although a ceasefire brought some hope.",
    "Gaza Strip": "The attack destroyed homes; hundreds died and a humanitarian crisis followed the bombing.",
    "Hamas": "The group fired rockets during the war and the conflict killed many.",
    "United Nations": "The council called for peace and support, but warned the crisis and violence would worsen.",
    "Netherlands": "The country mourned the dead from the crash and demanded an investigation.",
    "Germany": "The team won the final and fans celebrated the great victory with happy songs.",
    "2014 FIFA World Cup": "A successful tournament; the best team won and the final was a great success.",
    "Berlin": "Fans welcomed the team with a celebration of the victory.",
    "Ebola virus": "The disease killed thousands; the outbreak was a disaster and deaths rose in fear.",
    "Nigeria": "The outbreak brought fear and death to the city before officials contained it.",
    "World Health Organization": "The agency warned of a crisis and deaths; it called for support.",
}


# --- hand-labeled top-50 lists: (role, in-group) -> (count, category) ---

TABLE2 = {
    "en": [
        ("politician", True, 6, "Presidents of the United States"),
        ("politician", False, 20, "Roman emperors"),
        ("religious", False, 11, "Popes"),
        ("artist_scientist", True, 4, "English poets"),
        ("artist_scientist", False, 9, "Italian painters"),
    ],
    "zh": [
        ("politician", True, 44, "秦朝皇帝"),
        ("politician", False, 2, "日本幕府將軍"),
        ("religious", True, 1, "中国僧人"),
        ("artist_scientist", True, 3, "中国诗人"),
    ],
    "ja": [
        ("politician", True, 30, "日本の天皇"),
        ("politician", False, 17, "中国の皇帝"),
        ("artist_scientist", True, 1, "日本の小説家"),
        ("artist_scientist", False, 2, "古代ギリシアの哲学者"),
    ],
    "de": [
        ("politician", True, 12, "Politiker (Deutschland)"),
        ("politician", False, 11, "Kaiser (Rom)"),
        ("religious", True, 3, "Deutscher Theologe"),
        ("religious", False, 2, "Papst"),
        ("artist_scientist", True, 16, "Komponist (Deutschland)"),
        ("artist_scientist", False, 6, "Maler (Italien)"),
    ],
}


def make_table2(rng: random.Random, lang: str) -> str:
    rows = []
    for role, inside, count, category in TABLE2[lang]:
        rows += [{"role": role, "ingroup": inside, "categories": [category]} for _ in range(count)]
    rng.shuffle(rows)
    for i, row in enumerate(rows, start=1):
        row["title"] = f"Leader {i:02d}"
    return json.dumps([{k: r[k] for k in ("title", "categories", "role", "ingroup")} for r in rows],
                      ensure_ascii=False, indent=1) + "\n"


def write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=OUT)
    parser.add_argument("--seed", type=int, default=20140717)
    args = parser.parse_args(argv)
    out = args.out

    write(out / "dump60.xml", make_dump60(random.Random(args.seed)))
    write(out / "plutarch.xml", make_plutarch())
    for i, lang in enumerate(sorted(GENDER_TEMPLATES)):
        write(out / "gender" / f"{lang}.jsonl", make_gender(random.Random(args.seed + i), lang))
    for i, lang in enumerate(sorted(TABLE2)):
        write(out / "table2" / f"{lang}.json", make_table2(random.Random(args.seed + 10 + i), lang))
    write(out / "news" / "listing_en.txt", NEWS_LISTING)
    for title, text in sorted(NEGATIVE_TEXTS.items()):
        write(out / "news" / "articles" / (quote(title, safe="") + ".txt"), text + "\n")
    config = {
        "lang": "en",
        "out_dir": "out",
        "dump": "dump60.xml",
        "slices": {"from": -500, "to": 1950, "step": 50},
        "timeseries": {"from": -500, "to": 1950, "step": 50},
        "top_k": 10,
        "news_listings": ["news/listing_en.txt"],
        "news_articles": "news/articles",
        "news_year": 2014,
        "news_top": 5,
    }
    write(out / "pipeline.json", json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
