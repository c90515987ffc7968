import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netpscore.errors import IntegrityError
from netpscore.exposure import ExposureMatrix, build_ntem, row_sums_by_level
from netpscore.influence import InfluenceGraph, build_influence, unit_centrality
from netpscore.panel import LEVELS, PanelFrame, Scheme, TreatmentAssignment


def graph_from_matrix(W, countries, year=0):
    W = np.asarray(W, dtype=float)
    return InfluenceGraph(tuple(countries), (year,), {year: W},
                          {year: np.ones(len(countries), dtype=bool)}, 0.5, 0.5)


def panel_for(countries, year=0):
    n = len(countries)
    return PanelFrame(country=np.array(countries, dtype=object), time=np.full(n, year),
                      covariates=np.zeros((n, 1)), reg=np.zeros(n), cont=np.zeros(n),
                      outcome=np.zeros(n))


def assign(labels):
    levels = LEVELS[Scheme.FOUR]
    return TreatmentAssignment([levels.index(v) for v in labels], levels, "LL")


def brute_force(W, codes, K):
    n = len(codes)
    G = np.zeros((n, K))
    for i in range(n):
        for j in range(n):
            if i != j and W[i, j] > 0:
                G[i, codes[j]] += W[i, j]
    return G


def test_hand_example():
    W = np.zeros((4, 4))
    for j, w in zip((1, 2, 3), (0.5, 0.3, 0.2)):
        W[0, j] = W[j, 0] = w
    G = build_ntem(graph_from_matrix(W, "ABCD"), assign(["LL", "HL", "HL", "LL"]),
                   panel_for(list("ABCD"))).G
    np.testing.assert_allclose(G[0], [0.2, 0.8, 0.0, 0.0])


def test_complete_unit_graph():
    W = np.ones((4, 4)) - np.eye(4)
    G = build_ntem(graph_from_matrix(W, "ABCD"), assign(["HH", "LL", "HL", "LH"]),
                   panel_for(list("ABCD"))).G
    np.testing.assert_array_equal(G[0], [1, 1, 1, 0])
    np.testing.assert_array_equal(row_sums_by_level(G), brute_force(W, [3, 0, 1, 2], 4).sum(0))


def test_zero_graph():
    g = build_influence(None, 0, 0, units=[(c, 0) for c in "ABC"])
    m = build_ntem(g, assign(["LL", "HL", "HH"]), panel_for(list("ABC")))
    assert m.is_zero
    np.testing.assert_array_equal(row_sums_by_level(m), 0)


def test_row_sums_by_level_small():
    np.testing.assert_array_equal(row_sums_by_level(np.array([[1, 2], [3, 4]])), [4, 6])


def test_misaligned():
    with pytest.raises(IntegrityError):
        build_ntem(graph_from_matrix(np.zeros((3, 3)), "ABC"), assign(["LL", "HL"]),
                   panel_for(list("ABC")))


def test_same_year_only(small_analysis):
    sim, panel, z, data = small_analysis
    # exposure of a unit only counts neighbours observed in its own year
    graph = build_influence(None, 0, 0, units=list(zip(panel.country, panel.time)))
    assert not build_ntem(graph, z, panel).G.any()
    t0 = panel.time == panel.time.min()
    G = data.ntem[t0]
    countries = list(panel.country[t0])
    W = sim.graph.slice(int(panel.time.min()))
    idx = [list(sim.graph.countries).index(c) for c in countries]
    np.testing.assert_allclose(G, brute_force(W[np.ix_(idx, idx)], z.codes[t0], 4), atol=1e-14)


@given(st.integers(0, 10_000), st.floats(0.1, 10))
@settings(max_examples=25, deadline=None)
def test_decomposition_and_linearity(seed, c):
    rng = np.random.default_rng(seed)
    n = 6
    W = rng.uniform(size=(n, n)) * (rng.uniform(size=(n, n)) < 0.7)
    W = np.triu(W, 1)
    W = W + W.T
    countries = [f"c{i}" for i in range(n)]
    graph = graph_from_matrix(W, countries)
    z = TreatmentAssignment(rng.integers(0, 4, n), LEVELS[Scheme.FOUR], "LL")
    panel = panel_for(countries)
    G = build_ntem(graph, z, panel).G
    np.testing.assert_allclose(G.sum(axis=1), unit_centrality(graph, panel.country, panel.time),
                               rtol=0, atol=1e-12)
    np.testing.assert_allclose(build_ntem(graph.scaled(c), z, panel).G, c * G, rtol=1e-15)
    np.testing.assert_allclose(G, brute_force(W, z.codes, 4), atol=1e-14)
    assert np.all(G >= 0)
    perm = rng.permutation(n)
    Wp = W[np.ix_(perm, perm)]
    Gp = build_ntem(graph_from_matrix(Wp, countries), z.take(perm), panel).G
    np.testing.assert_allclose(Gp, G[perm], atol=1e-14)


def test_to_frame():
    m = ExposureMatrix(np.array([[0.1, 0.2, 0.3, 0.4]]), LEVELS[Scheme.FOUR])
    df = m.to_frame(["A"], [2000])
    assert list(df.columns) == ["country", "year", "G_LL", "G_HL", "G_LH", "G_HH"]
