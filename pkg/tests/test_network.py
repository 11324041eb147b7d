import json
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edmnet.edm import EdmMatrix
from edmnet.errors import InsufficientSupportError, PreconditionError, UndefinedMetricError
from edmnet.network import (
    DegreeSummary,
    ThresholdGraph,
    betweenness,
    build_graph,
    ccdf_to_csv,
    clustering,
    degree_stats,
    density,
    density_from_counts,
    fit_power_law,
    graph_from_json,
    graph_to_dot,
    graph_to_json,
    network_stats,
    normalize_betweenness,
    path_metrics,
    summarize_degrees,
)
from oracles import random_graph


def _edm(values):
    values = np.asarray(values, float)
    n = len(values)
    return EdmMatrix(tuple(f"A{i}" for i in range(n)), values, np.zeros((n, n), int))


def _nx(g: ThresholdGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def test_threshold_boundaries():
    m = _edm([[0.5, 0.5, 0.1], [0.5, 0.5, 0.1], [0.1, 0.1, 0.5]])
    with pytest.raises(PreconditionError, match="theta exceeds 0.5"):
        build_graph(m, 0.9)
    with pytest.raises(PreconditionError):
        build_graph(m, -0.5)
    g = build_graph(m, 0.5)
    assert g.edges() == [(0, 1)]
    assert g.weights[0, 1] == 0.5


def test_uniform_edm_gives_complete_graph():
    g = build_graph(_edm(np.full((3, 3), 0.3)), 0.22)
    assert g.edge_count == 3
    np.testing.assert_array_equal(g.degrees(), [2, 2, 2])


def test_raising_theta_shrinks_edge_set(fixture_edm):
    low = set(build_graph(fixture_edm, 0.22).edges())
    high = set(build_graph(fixture_edm, 0.24).edges())
    assert high <= low


def test_degree_examples():
    star = ThresholdGraph.from_edges("abcde", [("a", x) for x in "bcde"])
    s = degree_stats(star)
    assert list(s.degrees) == [4, 1, 1, 1, 1]
    assert s.degrees.mean() == pytest.approx(8 / 5)
    empty = ThresholdGraph.from_edges("abcde", [])
    s = degree_stats(empty)
    assert list(s.degrees) == [0] * 5
    assert s.ccdf_points == ((0, 0.0),)


def test_power_law_exact_line():
    pts = tuple((k, k ** -1.5) for k in (1, 2, 4, 8))
    fit = fit_power_law(DegreeSummary(np.array([1, 2, 4, 8]), pts))
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.alpha_hat == pytest.approx(2.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_power_law_noisy_and_degenerate():
    rng = np.random.default_rng(42)
    degrees = np.minimum(rng.zipf(2.5, 400), 60)
    fit = fit_power_law(summarize_degrees(degrees))
    assert fit.r_squared >= 0.9
    with pytest.raises(InsufficientSupportError):
        fit_power_law(summarize_degrees([3] * 10))


def test_path_metric_examples():
    path = ThresholdGraph.from_edges("abc", [("a", "b"), ("b", "c")])
    assert path_metrics(path, "connected-only") == (pytest.approx(4 / 3), 2.0)
    two = ThresholdGraph.from_edges("abcd", [("a", "b"), ("c", "d")])
    assert path_metrics(two, "paper-compat")[0] == pytest.approx(1 / 3)
    assert path_metrics(two, "connected-only")[0] == 1.0
    k4 = ThresholdGraph.from_edges("abcd", [(x, y) for x in "abcd" for y in "abcd" if x < y])
    for mode in ("paper-compat", "connected-only"):
        assert path_metrics(k4, mode) == (1.0, 1.0)
    assert path_metrics(ThresholdGraph.from_edges("abc", []), "paper-compat") == (0.0, 0.0)
    with pytest.raises(PreconditionError):
        path_metrics(k4, "weighted")


def test_clustering_examples():
    tri = ThresholdGraph.from_edges("abc", [("a", "b"), ("b", "c"), ("a", "c")])
    c, avg = clustering(tri)
    assert list(c) == [1.0, 1.0, 1.0] and avg == 1.0
    star = ThresholdGraph.from_edges("abcd", [("a", "b"), ("a", "c"), ("a", "d")])
    assert list(clustering(star)[0]) == [0.0] * 4
    pend = ThresholdGraph.from_edges("abcd", [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")])
    c, avg = clustering(pend)
    assert list(c) == pytest.approx([1, 1, 1 / 3, 0])
    assert avg == pytest.approx(7 / 12)


def test_density_reference_rows():
    assert f"{density_from_counts(48, 111):.5f}" == "0.09840"
    assert f"{density_from_counts(37, 210):.5f}" == "0.31532"
    with pytest.raises(UndefinedMetricError):
        density_from_counts(1, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 14), st.floats(0.0, 1.0), st.integers(0, 2**32 - 1))
def test_stats_agree_with_networkx(n, p, seed):
    g = random_graph(np.random.default_rng(seed), n, p)
    h = _nx(g)
    s = network_stats(g, "connected-only")
    assert s.density == pytest.approx(nx.density(h))
    assert s.average_degree / (n - 1) == pytest.approx(s.density)
    assert s.average_clustering == pytest.approx(nx.average_clustering(h))
    lengths = [d for src, row in nx.all_pairs_shortest_path_length(h) for dst, d in row.items() if src < dst]
    assert s.diameter == (max(lengths) if lengths else 0)
    if lengths:
        assert s.average_path_length == pytest.approx(np.mean(lengths))
        compat = path_metrics(g, "paper-compat")[0]
        assert compat == pytest.approx(2 * sum(lengths) / (n * (n - 1)))


def test_normalization_values():
    assert f"{float(normalize_betweenness(369, 48)):.4f}" == "0.3414"
    assert f"{float(normalize_betweenness(84, 37)):.4f}" == "0.1333"
    assert normalize_betweenness(Fraction(3), 5) == Fraction(1, 2)
    np.testing.assert_allclose(normalize_betweenness(np.array([1.0, 2.0]), 4), [1 / 3, 2 / 3])
    with pytest.raises(UndefinedMetricError):
        normalize_betweenness(1.0, 2)


def test_betweenness_path_and_small_graph_warning():
    path = ThresholdGraph.from_edges("abcd", [("a", "b"), ("b", "c"), ("c", "d")])
    c = betweenness(path)
    assert list(c.b) == [0.0, 2.0, 2.0, 0.0]
    assert list(c.b_n) == pytest.approx([0, 2 / 3, 2 / 3, 0])
    exact = betweenness(path, exact=True)
    assert list(exact.b) == [0, 2, 2, 0] and exact.b_n[1] == Fraction(2, 3)
    with pytest.warns(UserWarning, match="undefined"):
        small = betweenness(ThresholdGraph.from_edges("ab", [("a", "b")]))
    assert small.normalization_undefined


def test_betweenness_matches_networkx(rng):
    for _ in range(20):
        g = random_graph(rng, 12, 0.3)
        ref = nx.betweenness_centrality(_nx(g), normalized=False)
        np.testing.assert_allclose(betweenness(g).b, [ref[i] for i in range(g.n)], atol=1e-9)


def test_exports(fixture_edm):
    g = build_graph(fixture_edm, 0.22)
    back = graph_from_json(graph_to_json(g, betweenness(g)))
    np.testing.assert_array_equal(back.adjacency, g.adjacency)
    np.testing.assert_array_equal(back.weights, g.weights)
    doc = json.loads(graph_to_json(g, communities={t: 0 for t in g.tickers}))
    assert {n["community"] for n in doc["nodes"]} == {0}
    dot = graph_to_dot(g)
    assert dot.startswith("graph edm {") and dot.count(" -- ") == g.edge_count
    csv = ccdf_to_csv(degree_stats(g))
    assert csv.splitlines()[0] == "degree,survival"


def test_density_matches_counts(fixture_edm):
    g = build_graph(fixture_edm, 0.2)
    assert density(g) == density_from_counts(g.n, g.edge_count)
