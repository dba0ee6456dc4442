"""Weighted graphs over detector paths and perfect-matching amplitudes.

Vertices are detector path labels and each edge is one pair source, its
complex weight carrying pump amplitude and phase.  A perfect matching is
one way for every detector to see exactly one photon, so the multi-photon
coincidence amplitude is the sum over perfect matchings of edge-weight
products, while the two-photon distribution comes from single edges.

Outcome labels are canonical sorted pair strings ("ab", never "ba").
Matching enumeration is brute force and restricted to at most 8 vertices;
the demonstrated instance class has 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import GraphError

Pair = tuple[str, str]

MAX_MATCHING_VERTICES = 8


def pair_label(u: str, v: str) -> str:
    return "".join(sorted((u, v)))


def _canonical_pair(u: str, v: str) -> Pair:
    a, b = sorted((u, v))
    return (a, b)


@dataclass
class WeightedGraph:
    vertices: tuple[str, ...]
    edges: dict[Pair, complex]

    def __post_init__(self):
        self.vertices = tuple(self.vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError(f"duplicate vertices: {self.vertices}")
        known = set(self.vertices)
        canonical: dict[Pair, complex] = {}
        for (u, v), weight in self.edges.items():
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            if u not in known or v not in known:
                raise GraphError(f"edge ({u}, {v}) references unknown vertex")
            key = _canonical_pair(u, v)
            if key in canonical:
                raise GraphError(f"duplicate edge {key}")
            w = complex(weight)
            if not (math.isfinite(w.real) and math.isfinite(w.imag)):
                raise GraphError(f"non-finite weight on edge {key}")
            canonical[key] = w
        self.edges = dict(sorted(canonical.items()))

    @classmethod
    def from_edges(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str, complex]]) -> "WeightedGraph":
        return cls(tuple(vertices), {(u, v): w for u, v, w in edges})

    def weight(self, u: str, v: str) -> complex:
        return self.edges.get(_canonical_pair(u, v), 0j)


def perfect_matchings(graph: WeightedGraph) -> list[tuple[Pair, ...]]:
    """All edge subsets covering every vertex exactly once, lexicographic order."""
    vertices = sorted(graph.vertices)
    if len(vertices) % 2 != 0:
        raise GraphError(f"perfect matchings need an even vertex count, got {len(vertices)}")
    edges = set(graph.edges)
    matchings: list[tuple[Pair, ...]] = []

    def extend(unmatched: list[str], chosen: tuple[Pair, ...]):
        if not unmatched:
            matchings.append(chosen)
            return
        first, rest = unmatched[0], unmatched[1:]
        for partner in rest:
            pair = _canonical_pair(first, partner)
            if pair in edges:
                extend([v for v in rest if v != partner], chosen + (pair,))

    extend(vertices, ())
    return matchings


def matching_sum(graph: WeightedGraph) -> complex:
    """Sum over perfect matchings of the product of edge weights."""
    if len(graph.vertices) > MAX_MATCHING_VERTICES:
        raise GraphError(f"matching sum limited to {MAX_MATCHING_VERTICES} vertices")
    total = 0j
    for matching in perfect_matchings(graph):
        product = 1 + 0j
        for pair in matching:
            product *= graph.edges[pair]
        total += product
    return total


def quad_amplitude(graph: WeightedGraph) -> complex:
    """Four-fold coincidence amplitude of a 4-vertex source graph."""
    if len(graph.vertices) != 4:
        raise GraphError(f"quad amplitude needs exactly 4 vertices, got {len(graph.vertices)}")
    return matching_sum(graph)


def pair_amplitudes(graph: WeightedGraph) -> dict[str, complex]:
    """First-order (single-edge) amplitudes keyed by canonical pair label."""
    return {pair_label(u, v): w for (u, v), w in graph.edges.items()}


@dataclass
class MatchingDistribution:
    probabilities: dict[str, float]
    normalized: bool = True

    def __post_init__(self):
        self.probabilities = dict(sorted(self.probabilities.items()))


def normalized_distribution(amplitudes: Mapping[str, complex]) -> MatchingDistribution:
    """p_i = |amp_i|^2 / sum_j |amp_j|^2."""
    weights = {k: abs(complex(v)) ** 2 for k, v in amplitudes.items()}
    total = sum(weights.values())
    if total == 0.0:
        raise GraphError("cannot normalize an all-zero amplitude set")
    return MatchingDistribution({k: w / total for k, w in weights.items()})


def fidelity(p: "MatchingDistribution | Mapping[str, float]",
             q: "MatchingDistribution | Mapping[str, float]") -> float:
    """Bhattacharyya overlap sum_i sqrt(p_i q_i) of two normalized distributions."""
    pd = p.probabilities if isinstance(p, MatchingDistribution) else dict(p)
    qd = q.probabilities if isinstance(q, MatchingDistribution) else dict(q)
    if set(pd) != set(qd):
        raise GraphError("fidelity needs matching outcome sets")
    for name, dist in (("p", pd), ("q", qd)):
        total = sum(dist.values())
        if abs(total - 1.0) > 1e-9:
            raise GraphError(f"distribution {name} is not normalized (sum={total!r})")
        if any(v < 0 for v in dist.values()):
            raise GraphError(f"distribution {name} has negative entries")
    return float(sum(math.sqrt(pd[k] * qd[k]) for k in sorted(pd)))


def graph_vs_engine_crosscheck(
    graph: WeightedGraph,
    scenario,
    bindings: Mapping[str, float] | None = None,
    **evolve_options,
) -> float:
    """L-infinity distance between graph and Fock-engine pair distributions.

    The scenario (name or Scenario) is evolved once; for every graph edge
    the engine probability of seeing exactly those two detectors fire (and
    the remaining graph vertices dark) is collected, normalized over the
    edge outcomes, and compared with the normalized graph distribution.
    """
    from .detection import DetectionPattern, probability
    from .engine import Scenario, build_scenario

    if not isinstance(scenario, Scenario):
        scenario = build_scenario(str(scenario))
    state = scenario.evolve(bindings, **evolve_options).state

    graph_dist = normalized_distribution(pair_amplitudes(graph))
    engine_raw: dict[str, float] = {}
    for (u, v) in graph.edges:
        constraints = {vertex: 0 for vertex in graph.vertices}
        constraints[u] = 1
        constraints[v] = 1
        engine_raw[pair_label(u, v)] = probability(state, DetectionPattern.of(constraints))
    total = sum(engine_raw.values())
    if total == 0.0:
        raise GraphError("engine produced zero probability on every graph outcome")
    worst = 0.0
    for label, p_graph in graph_dist.probabilities.items():
        worst = max(worst, abs(engine_raw[label] / total - p_graph))
    return worst


# -- canonical instances -----------------------------------------------------


def herzog_graph(phi: float = 0.0) -> WeightedGraph:
    """Two aligned sources collapsed onto one edge of weight 1 + e^{i phi}."""
    import cmath

    return WeightedGraph.from_edges("ab", [("a", "b", 1.0 + cmath.exp(1j * phi))])


def quad_interference_graph(theta: float = 0.0) -> WeightedGraph:
    """Four-source graph whose matching sum is e^{i theta} + 1."""
    import cmath

    half = cmath.exp(1j * theta / 2.0)
    return WeightedGraph.from_edges(
        "abcd",
        [("a", "b", half), ("c", "d", half), ("a", "c", 1.0), ("b", "d", 1.0)],
    )


def si_fig8_graph() -> WeightedGraph:
    """Mixer-dressed graph with second-layer phases -pi/4 and +pi/4.

    Direct edges (a,b) and (c,d) mix the straight-through mixer path with
    the phased second-layer source; the cross edges pick up the mixer's
    reflection phase i.
    """
    import cmath

    mix = 1.0 / math.sqrt(2.0)
    return WeightedGraph.from_edges(
        "abcd",
        [
            ("a", "b", (mix + cmath.exp(-1j * math.pi / 4.0)) / 2.0),
            ("c", "d", (mix + cmath.exp(1j * math.pi / 4.0)) / 2.0),
            ("a", "c", 1j * mix / 2.0),
            ("b", "d", 1j * mix / 2.0),
        ],
    )
