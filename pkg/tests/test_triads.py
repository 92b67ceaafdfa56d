import io
import math

import numpy as np
import pytest

from conftest import random_signed_graph
from signed_ego.errors import DegenerateSigns, InputError, NoTriangles
from signed_ego.signing import RelationshipProfile, Sign
from signed_ego.triads import (
    SignedGraph, SurpriseReport, brute_force_census, build_signed_graph, census_triads,
    check_weak_balance, expected_fractions, null_model_surprise, read_edgelist, surprise,
    write_edgelist,
)


def complete(n, sign):
    nodes = [f"v{i}" for i in range(n)]
    g = SignedGraph(nodes)
    for i in range(n):
        for j in range(i + 1, n):
            g.add_edge(nodes[i], nodes[j], sign)
    return g


def profile(a, b, n_pos, n_neg):
    return RelationshipProfile(a, b, n_pos=n_pos, n_neg=n_neg)


def test_collapse_single_direction():
    g = build_signed_graph([profile("a", "b", 5, 0)])
    assert g.edges == {("a", "b"): Sign.POSITIVE}


def test_collapse_mixed_directions():
    profs = [profile("a", "b", 5, 0), profile("b", "a", 1, 1)]
    assert build_signed_graph(profs).edges[("a", "b")] is Sign.NEGATIVE
    assert build_signed_graph(profs, "both-negative").edges[("a", "b")] is Sign.POSITIVE


def test_collapse_rules_agree_when_directions_agree():
    profs = [profile("a", "b", 0, 3), profile("b", "a", 0, 2), profile("a", "c", 1, 0)]
    assert build_signed_graph(profs).edges == build_signed_graph(profs, "both-negative").edges


def test_empty_graph():
    g = build_signed_graph([])
    assert g.nodes == [] and g.edges == {}
    assert census_triads(g).counts == (0, 0, 0, 0)


def test_k3_and_k4():
    assert census_triads(complete(3, Sign.POSITIVE)).counts == (0, 0, 0, 1)
    assert census_triads(complete(4, Sign.NEGATIVE)).counts == (4, 0, 0, 0)


@pytest.mark.parametrize("seed", range(50))
def test_census_matches_brute_force(seed):
    g = random_signed_graph(seed, n=5 + seed % 26)
    assert census_triads(g).counts == brute_force_census(g.nodes, g.edges)


def test_add_edge_rejects_loops_and_duplicates():
    g = SignedGraph(["a", "b"])
    g.add_edge("a", "b", Sign.POSITIVE)
    with pytest.raises(InputError):
        g.add_edge("b", "a", Sign.NEGATIVE)
    with pytest.raises(InputError):
        g.add_edge("a", "a", Sign.NEGATIVE)


def test_surprise_arithmetic():
    assert surprise(60, 50, 100, 0.5) == pytest.approx(2.0)
    assert surprise(50, 50, 100, 0.5) == 0.0
    assert math.isnan(surprise(1, 0, 100, 0.0))


def test_expected_fractions_sum_to_one():
    for p in (0.0, 0.3, 0.5, 0.9, 1.0):
        assert sum(expected_fractions(p)) == pytest.approx(1.0)


def report(s):
    return SurpriseReport((1, 1, 1, 1), (0.25,) * 4, (1.0,) * 4, (0.0,) * 4, s, 1, 1, 1, 0, [])


@pytest.mark.parametrize("s,verdict", [
    ((94.9, -12.0, -64.1, 33.4), True),
    ((94.9, -12.0, 5.0, 33.4), False),
    ((0.0, 0.0, 0.0, 0.0), False),
])
def test_weak_balance(s, verdict):
    assert check_weak_balance(report(s)) is verdict


def test_null_model_preserves_sign_totals_and_is_deterministic():
    g = random_signed_graph(3, n=40)
    a = null_model_surprise(g, shuffles=20, seed=7)
    b = null_model_surprise(g, shuffles=20, seed=7, jobs=4)
    assert a == b
    assert all(sum(c) == a.delta for c in a.shuffle_censuses)
    assert (a.n_positive, a.n_negative) == (g.n_positive, g.n_negative)
    assert null_model_surprise(g, shuffles=20, seed=8) != a


def test_null_model_errors():
    with pytest.raises(DegenerateSigns):
        null_model_surprise(complete(4, Sign.POSITIVE))
    g = SignedGraph(["a", "b", "c"])
    g.add_edge("a", "b", Sign.POSITIVE)
    g.add_edge("b", "c", Sign.NEGATIVE)
    with pytest.raises(NoTriangles):
        null_model_surprise(g)


def test_edgelist_round_trip():
    g = random_signed_graph(2, n=12)
    buf = io.StringIO()
    write_edgelist(g, buf)
    back = read_edgelist(io.StringIO(buf.getvalue()))
    assert back.edges == g.edges
    assert census_triads(back) == census_triads(g)


def test_edgelist_rejects_bad_line():
    with pytest.raises(InputError):
        read_edgelist(io.StringIO("a b x\n"))


def test_to_arrays_forward_csr():
    g = random_signed_graph(5, n=15)
    indptr, indices, edge_ids, positive = g.to_arrays()
    src = np.repeat(np.arange(len(g.nodes)), np.diff(indptr))
    assert np.all(src < indices)
    assert int(positive.sum()) == g.n_positive
