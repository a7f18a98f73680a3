from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chronograph.chronology import PeopleGraph
from chronograph.ranking import (
    SphereClassifier,
    categorize,
    indegree,
    ingroup_fraction,
    pagerank,
    rank_all,
    rankings_csv,
    top_k,
)
from chronograph.records import PersonRecord
from chronograph.rules import CategoryRule, RuleError, load_category_rules, load_sphere_rules

from oracles import dense_pagerank


def graph(edges, nodes=()):
    g = PeopleGraph()
    for n in set(nodes) | {x for e in edges for x in e[:2]}:
        g.nodes[n] = PersonRecord(n, "en")
    for s, d, w in edges:
        g.edges[(s, d)] = w
    return g


def random_graph(rng: random.Random, n: int) -> PeopleGraph:
    names = [f"N{i}" for i in range(n)]
    edges = {}
    for _ in range(rng.randint(0, n * 3)):
        s, d = rng.choice(names), rng.choice(names)
        if s != d:
            edges[(s, d)] = rng.randint(1, 5)
    return graph([(s, d, w) for (s, d), w in edges.items()], names)


def test_pagerank_simple_cycle_is_uniform():
    res = pagerank(graph([("A", "B", 1), ("B", "C", 1), ("C", "A", 1)]))
    assert res.converged
    for v in res.scores.values():
        assert v == pytest.approx(1 / 3, abs=1e-12)


def test_pagerank_respects_weights():
    res = pagerank(graph([("A", "B", 9), ("A", "C", 1), ("B", "A", 1), ("C", "A", 1)]))
    assert res.scores["B"] > res.scores["C"]


def test_pagerank_reports_non_convergence():
    res = pagerank(graph([("A", "B", 1), ("B", "C", 1)]), max_iter=2)
    assert not res.converged and res.iterations == 2


def test_pagerank_rejects_bad_input():
    with pytest.raises(ValueError):
        pagerank(PeopleGraph())
    with pytest.raises(ValueError):
        pagerank(graph([("A", "B", 1)]), damping=1.0)


@given(st.integers(0, 100_000), st.integers(1, 12))
def test_pagerank_matches_dense_oracle(seed, n):
    g = random_graph(random.Random(seed), n)
    got = pagerank(g).scores
    want = dense_pagerank(g.nodes, g.edges)
    assert max(abs(got[t] - want[t]) for t in g.nodes) <= 1e-8
    assert abs(sum(got.values()) - 1) <= 1e-9


def test_indegree_counts_distinct_sources():
    g = graph([("A", "C", 5), ("B", "C", 1), ("C", "A", 1)])
    assert indegree(g) == {"A": 1, "B": 0, "C": 2}


def test_ranking_ties_break_on_indegree_then_title():
    # symmetric star: leaves tie on pagerank and indegree
    g = graph([("H", "A", 1), ("H", "B", 1), ("A", "H", 1), ("B", "H", 1)])
    assert [e.title for e in rank_all(g)] == ["H", "A", "B"]
    assert [e.rank for e in top_k(g, 2)] == [1, 2]
    with pytest.raises(ValueError):
        top_k(g, 0)


def test_categorize_first_rule_wins():
    rules = load_category_rules("default")
    nero = PersonRecord("Nero", "en", categories=["37 births", "Roman emperors"])
    pope = PersonRecord("Leo", "en", categories=["Popes", "Italian princes"])
    newton = PersonRecord("Newton", "en", categories=["English physicists"])
    nobody = PersonRecord("X", "en", categories=["1 births"])
    assert categorize(nero, rules).role == "politician"
    assert categorize(pope, rules).role == "religious"
    assert categorize(newton, rules).role == "artist_scientist"
    assert categorize(nobody, rules).role == "other"


def test_category_rules_validation(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"rules": [{"role": "wizard", "pattern": "x"}]}')
    with pytest.raises(RuleError):
        load_category_rules(bad)
    bad.write_text('{"rules": [], "extra": 1}')
    with pytest.raises(RuleError):
        load_category_rules(bad)


def test_sphere_and_ingroup_fraction():
    sphere = SphereClassifier(*load_sphere_rules("en"))
    people = {
        "A": PersonRecord("A", "en", categories=["English poets"]),
        "B": PersonRecord("B", "en", categories=["French chemists"]),
        "C": PersonRecord("C", "en", categories=["Presidents of the United States", "American lawyers"]),
    }
    g = graph([("A", "B", 1), ("B", "C", 1), ("C", "A", 1)])
    entries = rank_all(g)
    stats = ingroup_fraction(entries, people, sphere, load_category_rules("default"))
    assert (stats.total, stats.ingroup) == (3, 2)
    assert stats.fraction == pytest.approx(2 / 3)
    assert stats.roles == {"politician": 1, "religious": 0, "artist_scientist": 2, "other": 0}
    with pytest.raises(ValueError):
        ingroup_fraction([], people, sphere)


def test_rankings_csv_format():
    g = graph([("A", "B", 1)])
    text = rankings_csv(rank_all(g), g.nodes, [CategoryRule("politician", __import__("re").compile("x"))])
    lines = text.splitlines()
    assert lines[0] == "rank,title,pagerank,indegree,category,ingroup"
    rank, title, score, deg, cat, ing = lines[1].split(",")
    assert (rank, title, deg, cat, ing) == ("1", "B", "1", "other", "")
    assert len(score.replace("0.", "", 1).lstrip("0")) <= 12
