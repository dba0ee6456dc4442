"""Exact truncated Fock-space simulator for photon-pair source networks.

The package simulates interferometers in which several coherently pumped
pair sources share output paths, so that pair-creation amplitudes from
different sources interfere.  It provides two source models (a classical
pump truncated-exponential expansion and an exact quantized single-photon
pump), post-selection and coincidence analysis, sinusoidal fringe fitting,
and a weighted-graph perfect-matching view of the output distributions.
"""

from .detection import (
    CountPredicate,
    DetectionPattern,
    FringeFit,
    channel_efficiency,
    conditional_probability,
    db_to_eta,
    eta_to_db,
    fit_fringe,
    fringe_frequency_ratio,
    marginal_distribution,
    no_signalling_check,
    poisson_counts,
    probability,
    visibility,
)
from .elements import (
    BeamSplitter,
    CircuitElement,
    LossChannel,
    ModeSwap,
    PairSourceExactSPDC,
    PairSourcePerturbative,
    PhaseExpr,
    PhaseShifter,
    apply_element,
)
from .engine import (
    Circuit,
    EvolveResult,
    Scenario,
    SweepSpec,
    TruncationLeakWarning,
    build_scenario,
    evolve,
    scenario_names,
    sweep,
)
from .errors import (
    DegenerateDataError,
    EvolutionError,
    FileFormatError,
    GraphError,
    PathIdError,
)
from .fock import (
    DEFAULT_EPS_AMP,
    DEFAULT_N_MAX,
    FockState,
    ModeRegistry,
    StateVector,
    apply_annihilation,
    apply_creation,
    new_state,
    vacuum,
)
from .graphmatch import (
    MatchingDistribution,
    WeightedGraph,
    fidelity,
    graph_vs_engine_crosscheck,
    matching_sum,
    normalized_distribution,
    pair_amplitudes,
    pair_label,
    perfect_matchings,
    quad_amplitude,
    si_fig8_graph,
)

__version__ = "0.1.0"

__all__ = [
    "BeamSplitter",
    "Circuit",
    "CircuitElement",
    "CountPredicate",
    "DEFAULT_EPS_AMP",
    "DEFAULT_N_MAX",
    "DegenerateDataError",
    "DetectionPattern",
    "EvolutionError",
    "EvolveResult",
    "FileFormatError",
    "FockState",
    "FringeFit",
    "GraphError",
    "LossChannel",
    "MatchingDistribution",
    "ModeRegistry",
    "ModeSwap",
    "PairSourceExactSPDC",
    "PairSourcePerturbative",
    "PathIdError",
    "PhaseExpr",
    "PhaseShifter",
    "Scenario",
    "StateVector",
    "SweepSpec",
    "TruncationLeakWarning",
    "WeightedGraph",
    "apply_annihilation",
    "apply_creation",
    "apply_element",
    "build_scenario",
    "channel_efficiency",
    "conditional_probability",
    "db_to_eta",
    "eta_to_db",
    "evolve",
    "fidelity",
    "fit_fringe",
    "fringe_frequency_ratio",
    "graph_vs_engine_crosscheck",
    "marginal_distribution",
    "matching_sum",
    "new_state",
    "no_signalling_check",
    "normalized_distribution",
    "pair_amplitudes",
    "pair_label",
    "perfect_matchings",
    "poisson_counts",
    "probability",
    "quad_amplitude",
    "scenario_names",
    "si_fig8_graph",
    "sweep",
    "vacuum",
    "visibility",
]
