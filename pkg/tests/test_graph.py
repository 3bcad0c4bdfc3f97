import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signrel.errors import InvalidWindowError, ParseError
from signrel.graph import (
    degrees,
    ingest_interactions,
    load_attributes,
    load_relations,
    make_relations,
    read_edge_list,
    write_edge_list,
)


def test_karate_counts(karate):
    g, attrs = karate
    assert g.n == 34
    assert g.m == 462
    assert len([1 for (i, j) in g.edge_counts if i < j]) == 78
    assert attrs.get("1", "faction") == "HI"
    assert attrs.get("34", "faction") == "JA"


def test_empty():
    g = ingest_interactions([])
    assert g.n == 0 and g.m == 0


def test_self_loops_dropped_and_reported():
    g = ingest_interactions([("a", "a"), ("a", "b"), ("b", "b", None, 3)], directed=True)
    assert g.m == 1
    assert g.report.self_loops == 2
    assert g.count("a", "a") == 0


def test_undirected_expansion():
    g = ingest_interactions([("a", "b", None, 2), ("b", "c")])
    assert g.count("a", "b") == g.count("b", "a") == 2
    assert g.m == 6


def test_window():
    recs = [("a", "b", 0), ("a", "c", 5), ("b", "c", 10)]
    g = ingest_interactions(recs, directed=True, window=(0, 10))
    assert g.m == 2
    assert g.report.out_of_window == 1
    with pytest.raises(InvalidWindowError):
        ingest_interactions(recs, window=(5, 5))


@pytest.mark.parametrize("bad", [("a", ""), ("a", "b", "x"), ("a", "b", None, 0), ("a", "b", None, 1.5)])
def test_malformed_records(bad):
    with pytest.raises(ParseError):
        ingest_interactions([("x", "y"), bad])


def test_parse_error_carries_line(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("source,target,weight\na,b,1\nc,d,-2\n")
    with pytest.raises(ParseError) as exc:
        read_edge_list(p)
    assert exc.value.line == 3


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6), st.integers(1, 4)), max_size=40),
    st.booleans(),
)
def test_degree_invariants(edges, directed):
    g = ingest_interactions([(str(a), str(b), None, w) for a, b, w in edges], directed=directed)
    A = g.adjacency()
    k_out, k_in = degrees(g)
    assert g.m == A.sum() == k_out.sum() == k_in.sum()
    assert np.all(np.diag(A) == 0)
    assert np.array_equal(k_out, A.sum(1))
    if not directed:
        assert np.array_equal(A, A.T)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(1, 3)), max_size=25),
    st.booleans(),
)
def test_edge_list_round_trip(tmp_path_factory, edges, directed):
    g = ingest_interactions([(str(a), str(b), None, w) for a, b, w in edges], directed=directed)
    p = tmp_path_factory.mktemp("rt") / "g.csv"
    write_edge_list(g, p)
    h = read_edge_list(p, directed=directed)
    assert g.edges_by_id() == h.edges_by_id()
    assert g.m == h.m


def test_attributes_categories(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("node,gender\na,F\nb,M\nc,\n")
    attrs = load_attributes(p, categories={"gender": ["F", "M"]})
    assert attrs.get("c", "gender") is None
    p.write_text("node,gender\na,X\n")
    with pytest.raises(ParseError):
        load_attributes(p, categories={"gender": ["F", "M"]})


def test_relations(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("source,target,relation\na,b,1\nb,c,3\n")
    lab = load_relations(p, "ordered", levels=4)
    assert lab.entries["b", "a"] == 1
    assert lab.surveyed == {"a", "b", "c"}
    p.write_text("source,target,relation\na,b,1\nb,c,5\n")
    with pytest.raises(ParseError) as exc:
        load_relations(p, "ordered", levels=4)
    assert exc.value.line == 3
    with pytest.raises(ParseError):
        load_relations(p, "ordered", levels=2)
    with pytest.raises(ValueError):
        make_relations({("a", "b"): 1.0}, "continuous")
