from __future__ import annotations

import itertools
import random

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chronograph.wikinews import (
    NewsGraph,
    SentimentLexicon,
    aggregate_scores,
    article_filename,
    betweenness,
    build_news_network,
    fetch_articles,
    html_to_text,
    load_article_texts,
    load_sentiment_lexicon,
    news_links,
    parse_news_index,
    score_text,
)

from conftest import FIXTURES
from oracles import exhaustive_betweenness

LEX = SentimentLexicon("xx", frozenset({"good", "win"}), frozenset({"bad", "war", "dead"}))


def test_news_links_forms():
    entry = "[[Ukraine]] and [[w:Russia|Russians]], {{w|United Nations}}, [[File:x.png]], [[ukraine]], [[Category:X]]"
    assert news_links(entry) == ("Ukraine", "Russia", "United Nations")


def test_parse_listing_dates():
    text = (
        "== 2014 ==\n=== July 17 ===\n* [[A]] met [[B]].\n"
        "* July 19: [[C]] and [[A]].\n=== 18 de julio ===\n"
    )
    anchors = parse_news_index(text, "en")
    assert [(a.date, a.links) for a in anchors] == [("2014-07-17", ("A", "B")), ("2014-07-19", ("C", "A"))]
    assert anchors[1].summary == "C and A."


def test_parse_listing_other_languages_and_missing_year():
    es = parse_news_index("=== 17 de julio de 2014 ===\n* [[A]] y [[B]]\n", "es")
    assert es[0].date == "2014-07-17"
    de = parse_news_index("* 17. Juli: [[A]]\n", "de")
    assert de[0].date == "--07-17"
    assert parse_news_index("* [[A]]\n")[0].date_known is False


def test_clique_weights():
    anchors = parse_news_index("* [[A]] [[B]] [[C]]\n* [[A]] [[B]]\n* [[D]]\n")
    g = build_news_network(anchors)
    assert g.nodes == {"A", "B", "C", "D"}
    assert g.edges == {("A", "B"): 2, ("A", "C"): 1, ("B", "C"): 1}
    assert g.weight("B", "A") == 2


def test_betweenness_path():
    g = NewsGraph({"A", "B", "C"}, {("A", "B"): 1, ("B", "C"): 1})
    assert betweenness(g) == {"A": 0.0, "B": 1.0, "C": 0.0}


def random_news_graph(rng, n, p):
    names = [f"V{i}" for i in range(n)]
    edges = {(a, b): 1 for a, b in itertools.combinations(names, 2) if rng.random() < p}
    return NewsGraph(set(names), edges)


@given(st.integers(0, 100_000), st.integers(1, 10), st.floats(0.1, 0.9))
def test_betweenness_matches_exhaustive(seed, n, p):
    g = random_news_graph(random.Random(seed), n, p)
    got = betweenness(g)
    want = exhaustive_betweenness(g.nodes, g.edges)
    assert all(abs(got[v] - want[v]) <= 1e-9 for v in g.nodes)


def test_score_text_formulas():
    s = score_text("Good war, bad war. The dead.", LEX)
    # tokens: good war bad war the dead -> p=1, n=4, T=6
    assert s.sentiment == 1 / 5
    assert s.emotionality == 5 / 6
    assert s.complexity == (5 / 6) * (sum(map(len, ["good", "war", "bad", "war", "the", "dead"])) / 6)
    assert score_text("nothing here", LEX).sentiment == 0.5
    with pytest.raises(ValueError):
        score_text("  ... ", LEX)


@given(st.lists(st.sampled_from(["good", "win", "bad", "war", "dead", "the", "a", "news"]), min_size=1, max_size=50))
def test_score_bounds(words):
    s = score_text(" ".join(words), LEX)
    assert 0 <= s.sentiment <= 1
    assert 0 <= s.emotionality <= 1
    assert s.complexity > 0


def test_sentiment_lexicon_rejects_overlap(tmp_path):
    with pytest.raises(ValueError):
        SentimentLexicon("xx", frozenset({"a"}), frozenset({"a"}))
    assert "war" in load_sentiment_lexicon("en").negative


def test_aggregate_skips_missing_texts():
    g = build_news_network(parse_news_index("* [[A]] [[B]] [[C]]\n"))
    report = aggregate_scores(g, {"A": "good win", "B": "bad war"}, LEX, top=2)
    assert report.scored == 2
    assert report.mean_sentiment == 0.5
    assert len(report.top) == 2
    with pytest.raises(ValueError):
        aggregate_scores(g, {}, LEX)


def test_article_files_round_trip(tmp_path):
    assert article_filename("AC/DC") == "AC%2FDC.txt"
    (tmp_path / article_filename("AC/DC")).write_text("rock", encoding="utf-8")
    assert load_article_texts(tmp_path) == {"AC/DC": "rock"}


def test_html_to_text():
    html = "<div><p>Hello <b>world</b></p><script>x()</script><table><tr><td>t</td></tr></table><p>Bye</p></div>"
    assert html_to_text(html) == "Hello world\nBye"


def test_fetch_uses_cache_and_mock_transport(tmp_path):
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(request.url.params["title"])
        if request.url.params["title"] == "Missing":
            return httpx.Response(404)
        return httpx.Response(200, text="<p>Text of " + request.url.params["title"] + "</p>")

    (tmp_path / article_filename("Cached")).write_text("old", encoding="utf-8")
    client = httpx.Client(transport=httpx.MockTransport(handler))
    report = fetch_articles(["Paris", "Cached", "Missing", "paris"], tmp_path, rps=1000, client=client)
    assert report.fetched == ["Paris"]
    assert report.cached == ["Cached"]
    assert list(report.failed) == ["Missing"]
    assert sorted(calls) == ["Missing", "Paris"]
    assert (tmp_path / "Paris.txt").read_text(encoding="utf-8") == "Text of Paris"
    assert not list(tmp_path.glob("*.part"))


def test_fixture_listing():
    anchors = parse_news_index((FIXTURES / "news" / "listing_en.txt").read_text(encoding="utf-8"), "en", 2014)
    assert all(a.date and a.date.startswith("2014-07-") for a in anchors)
    assert "Hidden" not in {t for a in anchors for t in a.links}
