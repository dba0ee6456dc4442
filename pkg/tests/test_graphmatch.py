import cmath
import math

import numpy as np
import pytest

from pathid.errors import GraphError
from pathid.graphmatch import (
    WeightedGraph,
    fidelity,
    graph_vs_engine_crosscheck,
    herzog_graph,
    matching_sum,
    normalized_distribution,
    pair_amplitudes,
    pair_label,
    perfect_matchings,
    quad_amplitude,
    quad_interference_graph,
    si_fig8_graph,
)


def complete_graph(labels, weight=1.0):
    edges = []
    labels = list(labels)
    for i, u in enumerate(labels):
        for v in labels[i + 1 :]:
            edges.append((u, v, weight))
    return WeightedGraph.from_edges(labels, edges)


# -- enumeration --------------------------------------------------------------


def test_matchings_of_four_cycle():
    graph = WeightedGraph.from_edges(
        "abcd", [("a", "b", 1.0), ("c", "d", 1.0), ("a", "c", 1.0), ("b", "d", 1.0)]
    )
    assert perfect_matchings(graph) == [
        (("a", "b"), ("c", "d")),
        (("a", "c"), ("b", "d")),
    ]


def test_k4_has_three_matchings():
    assert len(perfect_matchings(complete_graph("abcd"))) == 3


def test_complete_graph_double_factorial_counts():
    # K_{2n} has (2n-1)!! perfect matchings
    expected = {2: 1, 4: 3, 6: 15, 8: 105}
    for size, count in expected.items():
        labels = [chr(ord("a") + i) for i in range(size)]
        assert len(perfect_matchings(complete_graph(labels))) == count


def test_isolated_vertex_means_no_matching():
    graph = WeightedGraph.from_edges("abcd", [("a", "b", 1.0)])
    assert perfect_matchings(graph) == []


def test_odd_vertex_count_errors():
    graph = WeightedGraph.from_edges("abc", [("a", "b", 1.0)])
    with pytest.raises(GraphError, match="even"):
        perfect_matchings(graph)


def test_graph_validation():
    with pytest.raises(GraphError, match="self-loop"):
        WeightedGraph(("a", "b"), {("a", "a"): 1.0})
    with pytest.raises(GraphError, match="unknown vertex"):
        WeightedGraph(("a", "b"), {("a", "z"): 1.0})
    with pytest.raises(GraphError, match="duplicate edge"):
        WeightedGraph(("a", "b"), {("a", "b"): 1.0, ("b", "a"): 2.0})
    with pytest.raises(GraphError, match="non-finite"):
        WeightedGraph(("a", "b"), {("a", "b"): complex(math.nan, 0.0)})


# -- amplitudes ---------------------------------------------------------------


def test_quad_amplitude_frustration():
    assert quad_amplitude(quad_interference_graph(math.pi)) == pytest.approx(0.0, abs=1e-14)
    assert quad_amplitude(quad_interference_graph(0.0)) == pytest.approx(2.0)


def test_quad_amplitude_with_dead_edge():
    graph = WeightedGraph.from_edges(
        "abcd", [("a", "b", 0.0), ("c", "d", 5.0), ("a", "c", 2.0), ("b", "d", 3.0)]
    )
    assert quad_amplitude(graph) == pytest.approx(6.0)


def test_quad_amplitude_needs_four_vertices():
    with pytest.raises(GraphError, match="4 vertices"):
        quad_amplitude(complete_graph("abcdef"))


def test_matching_sum_vertex_limit():
    with pytest.raises(GraphError, match="limited"):
        matching_sum(complete_graph([f"v{i}" for i in range(10)]))


def test_matching_sum_multilinearity():
    rng = np.random.default_rng(3)
    for _ in range(10):
        weights = {pair: complex(rng.normal(), rng.normal()) for pair in
                   [("a", "b"), ("c", "d"), ("a", "c"), ("b", "d"), ("a", "d"), ("b", "c")]}
        graph = WeightedGraph(("a", "b", "c", "d"), dict(weights))
        scale = complex(rng.normal(), rng.normal())
        scaled = dict(weights)
        scaled[("a", "b")] = scaled[("a", "b")] * scale
        direct = matching_sum(WeightedGraph(("a", "b", "c", "d"), scaled))
        # contribution of the matching containing ab scales; the others do not
        ab_term = weights[("a", "b")] * weights[("c", "d")]
        rest = matching_sum(graph) - ab_term
        assert direct == pytest.approx(rest + scale * ab_term, abs=1e-12)


def test_pair_amplitudes_single_edge():
    graph = WeightedGraph.from_edges("ab", [("a", "b", 0.3 + 0.4j)])
    assert pair_amplitudes(graph) == {"ab": 0.3 + 0.4j}


def test_pair_amplitudes_si_fig8():
    amps = pair_amplitudes(si_fig8_graph())
    mix = 1 / math.sqrt(2)
    assert amps["ab"] == pytest.approx((mix + cmath.exp(-1j * math.pi / 4)) / 2)
    assert amps["cd"] == pytest.approx((mix + cmath.exp(1j * math.pi / 4)) / 2)
    assert amps["ac"] == pytest.approx(1j * mix / 2)
    assert amps["bd"] == pytest.approx(1j * mix / 2)


def test_pair_label_is_sorted():
    assert pair_label("b", "a") == "ab"


# -- distributions -----------------------------------------------------------------


def test_normalized_distribution_si_fig8():
    dist = normalized_distribution(pair_amplitudes(si_fig8_graph()))
    assert dist.probabilities["ab"] == pytest.approx(5 / 12, abs=1e-12)
    assert dist.probabilities["cd"] == pytest.approx(5 / 12, abs=1e-12)
    assert dist.probabilities["ac"] == pytest.approx(1 / 12, abs=1e-12)
    assert dist.probabilities["bd"] == pytest.approx(1 / 12, abs=1e-12)
    assert sum(dist.probabilities.values()) == pytest.approx(1.0, abs=1e-12)


def test_normalized_distribution_trivial_cases():
    assert normalized_distribution({"ab": 2.0}).probabilities == {"ab": 1.0}
    equal = normalized_distribution({"ab": 1j, "cd": -1j, "ac": 1.0})
    assert all(p == pytest.approx(1 / 3) for p in equal.probabilities.values())
    with pytest.raises(GraphError, match="all-zero"):
        normalized_distribution({"ab": 0.0, "cd": 0.0})


def test_fidelity_examples():
    p = {"ab": 0.5, "cd": 0.5}
    assert fidelity(p, p) == pytest.approx(1.0)
    assert fidelity(p, {"ab": 1.0, "cd": 0.0}) == pytest.approx(math.sqrt(0.5))
    assert fidelity({"ab": 1.0, "cd": 0.0}, {"ab": 0.0, "cd": 1.0}) == 0.0
    with pytest.raises(GraphError, match="outcome sets"):
        fidelity(p, {"ab": 1.0})
    with pytest.raises(GraphError, match="not normalized"):
        fidelity(p, {"ab": 0.7, "cd": 0.7})


def test_fidelity_symmetry_and_identity():
    rng = np.random.default_rng(17)
    keys = ["ab", "cd", "ac", "bd"]
    for _ in range(20):
        raw_p = rng.uniform(0.01, 1.0, size=4)
        raw_q = rng.uniform(0.01, 1.0, size=4)
        p = dict(zip(keys, raw_p / raw_p.sum()))
        q = dict(zip(keys, raw_q / raw_q.sum()))
        assert fidelity(p, q) == pytest.approx(fidelity(q, p), abs=1e-12)
        assert fidelity(p, q) <= 1.0 + 1e-12
        assert fidelity(p, p) == pytest.approx(1.0, abs=1e-12)
        if max(abs(p[k] - q[k]) for k in keys) > 1e-3:
            assert fidelity(p, q) < 1.0  # F = 1 only for identical distributions


# -- engine cross-checks --------------------------------------------------------------


def test_crosscheck_herzog():
    assert graph_vs_engine_crosscheck(herzog_graph(0.0), "herzog2") < 1e-10


def test_crosscheck_si_fig8():
    assert graph_vs_engine_crosscheck(si_fig8_graph(), "graph-si8") < 1e-10


def test_crosscheck_quad_amplitude_phase_equal():
    from pathid.engine import build_scenario

    g, theta = 0.1, 0.9
    scenario = build_scenario("quad4-swap", g=g)
    state = scenario.evolve({"theta": theta}).state
    engine_amp = state.amplitude((1, 1, 1, 1, 0, 0)) / (g * g)
    assert engine_amp == pytest.approx(quad_amplitude(quad_interference_graph(theta)), abs=1e-10)


def test_crosscheck_detects_mismatched_graph():
    lopsided = WeightedGraph.from_edges(
        "abcd",
        [("a", "b", 1.0), ("c", "d", 1.0), ("a", "c", 0.1), ("b", "d", 0.1)],
    )
    assert graph_vs_engine_crosscheck(lopsided, "graph-si8") > 1e-2
