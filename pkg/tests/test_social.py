import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import binomial_upper_exact
from signrel.errors import GroupTooSmallError, NoPositiveRelationsError
from signrel.graph import NodeAttributes
from signrel.phi import PhiCoefficients, SignedNetwork
from signrel.social import TRIAD_TYPES, binomial_upper_tail, homophily, triad_importance


def _net(nodes, weights):
    idx = {v: i for i, v in enumerate(nodes)}
    phi = np.full((len(nodes), len(nodes)), np.nan)
    for (v, w), x in weights.items():
        phi[idx[v], idx[w]] = phi[idx[w], idx[v]] = x
    return SignedNetwork(nodes=tuple(nodes), phi=phi, coefficients=PhiCoefficients())


def _attrs(mapping, name="g"):
    return NodeAttributes(values={v: {name: c} for v, c in mapping.items()},
                          categories={name: tuple(sorted(set(mapping.values())))})


def test_binomial_closed_case():
    assert binomial_upper_tail(5, 5, 0.5) == 0.03125


@pytest.mark.parametrize("p", [Fraction(1, 2), Fraction(1, 3), Fraction(49, 100), Fraction(9, 10), Fraction(1, 97)])
def test_binomial_against_fractions(p):
    for n in range(0, 21):
        for l in range(0, n + 2):
            ref = binomial_upper_exact(n, l, p)
            assert abs(binomial_upper_tail(n, l, float(p)) - float(ref)) < 1e-12


def test_binomial_deep_tail_against_mpmath():
    mpmath.mp.dps = 50
    p = mpmath.mpf("0.49")
    ref = mpmath.fsum(mpmath.binomial(2000, i) * p**i * (1 - p) ** (2000 - i) for i in range(1300, 2001))
    assert binomial_upper_tail(2000, 1300, 0.49) == pytest.approx(float(ref), rel=1e-10)


def test_homophily_basic():
    nodes = list("abcd")
    net = _net(nodes, {("a", "b"): 0.5, ("c", "d"): 0.4, ("a", "c"): -0.3, ("b", "d"): 0.2,
                       ("a", "d"): -0.1, ("b", "c"): -0.2})
    rep = homophily(net, _attrs({"a": "x", "b": "x", "c": "y", "d": "y"}), "g")
    # positive pairs ab, cd (same) and bd (different); 2 of 6 pairs share a value
    assert (rep.n, rep.l) == (3, 2)
    assert rep.p_random == pytest.approx(100 / 3)
    assert rep.p_value == pytest.approx(float(binomial_upper_exact(3, 2, Fraction(1, 3))))


def test_homophily_constant_attribute():
    nodes = list("abc")
    net = _net(nodes, {("a", "b"): 0.5, ("b", "c"): 0.1, ("a", "c"): -0.2})
    rep = homophily(net, _attrs({v: "x" for v in nodes}), "g")
    assert rep.p_positive == rep.p_random == 100.0
    assert rep.p_value == 1.0


def test_homophily_needs_positive_relations():
    nodes = list("abc")
    net = _net(nodes, {("a", "b"): -0.5, ("b", "c"): -0.1, ("a", "c"): -0.2})
    with pytest.raises(NoPositiveRelationsError):
        homophily(net, _attrs({"a": "x", "b": "y", "c": "x"}), "g")


def test_homophily_excludes_unattributed_nodes():
    nodes = list("abcd")
    net = _net(nodes, {p: 0.3 for p in itertools.combinations(nodes, 2)})
    rep = homophily(net, _attrs({"a": "x", "b": "x", "c": "y"}), "g")
    assert rep.excluded_nodes == 1 and rep.n == 3


def test_single_triad():
    net = _net(list("abc"), {("a", "b"): 0.5, ("b", "c"): 0.4, ("a", "c"): -0.2})
    rep = triad_importance(net, "abc")
    assert rep.importance["++-"] == pytest.approx(0.04)
    assert rep.triads == {"+++": 0, "++-": 1, "+--": 0, "---": 0}
    assert rep.relative["++-"] == 1.0


def test_four_node_fixture_by_hand():
    w = {("a", "b"): 0.5, ("a", "c"): 0.4, ("a", "d"): -0.2, ("b", "c"): 0.3, ("b", "d"): -0.6, ("c", "d"): 0.1}
    net = _net(list("abcd"), w)
    rep = triad_importance(net, "abcd")
    # abc: +++ 0.5*0.4*0.3; abd: +-- 0.5*0.2*0.6; acd: ++- 0.4*0.2*0.1; bcd: ++- 0.3*0.6*0.1
    assert rep.importance["+++"] == pytest.approx(0.06)
    assert rep.importance["+--"] == pytest.approx(0.06)
    assert rep.importance["++-"] == pytest.approx(0.008 + 0.018)
    assert rep.importance["---"] == 0.0
    inv = triad_importance(net, "abcd", mode="involving", node="d")
    assert inv.importance["+++"] == 0.0 and sum(inv.triads.values()) == 3
    exc = triad_importance(net, "abcd", mode="excluding", node="d")
    assert exc.importance["+++"] == pytest.approx(0.06) and sum(exc.triads.values()) == 1


def test_zero_dyads_void_triads():
    net = _net(list("abcd"), {("a", "b"): 0.5, ("b", "c"): 0.4, ("a", "c"): 0.0, ("a", "d"): 0.2,
                              ("b", "d"): 0.2, ("c", "d"): 0.2})
    rep = triad_importance(net, "abcd")
    assert rep.voided == 2
    assert sum(rep.triads.values()) == 2


def test_group_too_small():
    net = _net(list("abc"), {("a", "b"): 0.5, ("b", "c"): 0.4, ("a", "c"): -0.2})
    with pytest.raises(GroupTooSmallError):
        triad_importance(net, "abc", mode="excluding", node="a")


def _random_net(seed, n):
    rng = np.random.default_rng(seed)
    nodes = [f"n{i}" for i in range(n)]
    weights = {p: float(rng.uniform(-1, 1)) for p in itertools.combinations(nodes, 2)}
    return nodes, weights


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 12), st.floats(0.01, 50))
def test_relative_importance_properties(seed, n, lam):
    nodes, weights = _random_net(seed, n)
    rep = triad_importance(_net(nodes, weights), nodes)
    assert abs(sum(rep.relative.values()) - 1) < 1e-12
    assert all(v >= 0 for v in rep.importance.values())
    scaled = triad_importance(_net(nodes, {k: lam * v for k, v in weights.items()}), nodes)
    for t in TRIAD_TYPES:
        assert scaled.importance[t] == pytest.approx(lam**3 * rep.importance[t], rel=1e-9, abs=1e-300)
        assert scaled.relative[t] == pytest.approx(rep.relative[t], rel=1e-9, abs=1e-15)
    perm = list(np.random.default_rng(seed + 1).permutation(nodes))
    relabeled = triad_importance(_net(perm, weights), perm)
    for t in TRIAD_TYPES:
        assert relabeled.importance[t] == pytest.approx(rep.importance[t], rel=1e-12, abs=1e-300)


def test_brute_force_triads():
    nodes, weights = _random_net(11, 7)
    net = _net(nodes, weights)
    expect = dict.fromkeys(TRIAD_TYPES, 0.0)
    for a, b, c in itertools.combinations(nodes, 3):
        ws = [net.weight(a, b), net.weight(b, c), net.weight(a, c)]
        neg = sum(x < 0 for x in ws)
        expect[TRIAD_TYPES[neg]] += math.prod(abs(x) for x in ws)
    rep = triad_importance(net, nodes)
    for t in TRIAD_TYPES:
        assert rep.importance[t] == pytest.approx(expect[t], rel=1e-12)
