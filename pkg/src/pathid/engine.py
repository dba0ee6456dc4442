"""Circuits, parameterized evolution, phase sweeps and the scenario library.

A circuit is an ordered element sequence over one mode registry (the
layouts simulated here are feed-forward, so no DAG is needed).  Evolution
applies each element's closed-form action left to right on the sparse
state; ``method="dense"`` routes through the brute-force matrix
exponential oracle instead, which exists purely for cross-checks.

Scenario wiring conventions (shared by the chip-style builders):

* ``a, b, c, d`` are the four detector paths; ``bp, cp`` are the interior
  paths feeding the tunable mixer, whose outputs land in ``b`` and ``c``.
* First-layer sources emit into (a, bp) and (cp, d); second-layer sources
  emit directly into (a, b) and (c, d).
* ``theta2``/``theta3`` are single-photon phase shifters on ``cp``/``bp``;
  ``theta1`` (with trims ``theta4``/``theta5``) rides on the pump of the
  second layer and therefore enters pair amplitudes doubled, which is what
  produces the doubled fringe frequency.
* The four-crystal interference scenario exposes a master parameter
  ``theta`` mapped to ``theta1 = theta / 4``, so the post-selected
  four-photon amplitude is exactly ``g^2 (1 + e^{i theta})``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from . import elements as el
from .detection import DetectionPattern
from .errors import EvolutionError
from .fock import DEFAULT_EPS_AMP, DEFAULT_N_MAX, FockState, ModeRegistry, StateVector, new_state

# Fraction of the output norm that may silently leak past the photon cap
# before evolve() warns about it.
LEAK_WARN_FRACTION = 1e-6


class TruncationLeakWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Circuit:
    registry: ModeRegistry
    elements: tuple[el.CircuitElement, ...]
    model: str = "perturbative"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.model not in ("perturbative", "exact"):
            raise ValueError(f"unknown source model {self.model!r}")
        for position, item in enumerate(self.elements):
            for mode in el.element_modes(item):
                if mode not in self.registry:
                    raise ValueError(f"element {position} references unregistered mode {mode!r}")
            if self.model == "exact" and isinstance(item, el.PairSourcePerturbative):
                raise ValueError("perturbative source in an exact-model circuit")
            if self.model == "perturbative" and isinstance(item, el.PairSourceExactSPDC):
                raise ValueError("exact source in a perturbative-model circuit")

    def parameter_names(self) -> frozenset[str]:
        names: set[str] = set()
        for item in self.elements:
            names |= el.element_parameters(item)
        return frozenset(names)


@dataclass(frozen=True)
class SweepSpec:
    """Half-open grid over one named phase parameter, other bindings fixed."""

    parameter: str
    start: float
    stop: float
    points: int
    base: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("sweep needs at least 2 points")
        if not self.start < self.stop:
            raise ValueError("sweep needs start < stop")

    def values(self) -> list[float]:
        step = (self.stop - self.start) / self.points
        return [self.start + k * step for k in range(self.points)]


@dataclass
class EvolveResult:
    state: StateVector
    leaked_norm2: float
    truncation_drops: int


def evolve(
    circuit: Circuit,
    initial: FockState | Sequence[int],
    bindings: Mapping[str, float] | None = None,
    *,
    n_max: int = DEFAULT_N_MAX,
    eps_amp: float = DEFAULT_EPS_AMP,
    method: str = "closed",
) -> EvolveResult:
    """Left-to-right application of the circuit's elements to ``initial``.

    ``bindings`` must cover the circuit's named parameters exactly; the
    returned state is pruned and carries the truncation-leak report.
    """
    given = dict(bindings or {})
    required = circuit.parameter_names()
    missing = sorted(required - given.keys())
    if missing:
        raise EvolutionError(f"unbound parameters: {', '.join(missing)}")
    unknown = sorted(given.keys() - required)
    if unknown:
        raise EvolutionError(f"unknown parameters: {', '.join(unknown)}")

    if method == "dense":
        from . import oracle

        state = oracle.dense_evolve(circuit, initial, given, n_max=n_max, eps_amp=eps_amp)
        return EvolveResult(state=state, leaked_norm2=0.0, truncation_drops=0)
    if method != "closed":
        raise ValueError(f"unknown evolution method {method!r}")

    try:
        state = new_state(circuit.registry, initial, n_max=n_max, eps_amp=eps_amp)
    except ValueError as exc:
        raise EvolutionError(str(exc)) from exc
    for position, item in enumerate(circuit.elements):
        try:
            state = el.apply_element(state, item, given)
        except ValueError as exc:
            raise EvolutionError(f"element {position} ({type(item).__name__}): {exc}") from exc
    if state.leaked_norm2 > LEAK_WARN_FRACTION * max(state.norm2(), 1e-300):
        warnings.warn(
            f"truncation leak {state.leaked_norm2:.3e} exceeds {LEAK_WARN_FRACTION:.0e} "
            f"of the output norm (n_max={n_max})",
            TruncationLeakWarning,
            stacklevel=2,
        )
    return EvolveResult(state=state, leaked_norm2=state.leaked_norm2, truncation_drops=state.truncation_drops)


def sweep(
    circuit: Circuit,
    initial: FockState | Sequence[int],
    spec: SweepSpec,
    **evolve_options,
) -> list[tuple[float, StateVector]]:
    """One evolve per grid point, ordered by parameter value."""
    output = []
    for value in spec.values():
        bindings = dict(spec.base)
        bindings[spec.parameter] = value
        output.append((value, evolve(circuit, initial, bindings, **evolve_options).state))
    return output


# -- scenarios -------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """A wired circuit plus its input state, parameter defaults and patterns.

    ``master_bindings`` map convenience parameters onto circuit parameters
    (name -> {circuit parameter: coefficient}); ``resolve_bindings`` folds
    user bindings over the defaults through those mappings.
    """

    name: str
    description: str
    circuit: Circuit
    input_state: FockState
    default_bindings: Mapping[str, float]
    patterns: Mapping[str, DetectionPattern]
    master_bindings: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    sweep_parameter: str | None = None

    def resolve_bindings(self, user: Mapping[str, float] | None = None) -> dict[str, float]:
        full = dict(self.default_bindings)
        for key, value in (user or {}).items():
            if key in self.master_bindings:
                for parameter, coeff in self.master_bindings[key].items():
                    full[parameter] = coeff * float(value)
            elif key in full:
                full[key] = float(value)
            else:
                known = sorted(set(self.default_bindings) | set(self.master_bindings))
                raise EvolutionError(f"scenario {self.name!r} has no parameter {key!r} (known: {known})")
        return full

    def evolve(self, bindings: Mapping[str, float] | None = None, **evolve_options) -> EvolveResult:
        return evolve(self.circuit, self.input_state, self.resolve_bindings(bindings), **evolve_options)

    def sweep_values(
        self,
        parameter: str,
        values: Sequence[float],
        bindings: Mapping[str, float] | None = None,
        **evolve_options,
    ) -> list[tuple[float, StateVector]]:
        """Per-point evolve; the swept name may be a master parameter."""
        output = []
        for value in values:
            user = dict(bindings or {})
            user[parameter] = value
            result = evolve(self.circuit, self.input_state, self.resolve_bindings(user), **evolve_options)
            output.append((float(value), result.state))
        return output

    def sweep(
        self,
        parameter: str | None = None,
        start: float = 0.0,
        stop: float = 2.0 * math.pi,
        points: int = 24,
        bindings: Mapping[str, float] | None = None,
        **evolve_options,
    ) -> list[tuple[float, StateVector]]:
        parameter = parameter or self.sweep_parameter
        if parameter is None:
            raise EvolutionError(f"scenario {self.name!r} has no default sweep parameter")
        spec = SweepSpec(parameter, start, stop, points)
        return self.sweep_values(parameter, spec.values(), bindings, **evolve_options)


def _with_losses(
    labels: Sequence[str],
    elements: list,
    losses: Mapping[str, float] | None,
) -> tuple[ModeRegistry, list]:
    if not losses:
        return ModeRegistry(labels), elements
    extra = []
    tail = []
    for mode, eta in sorted(losses.items()):
        hidden = f"{mode}.loss"
        extra.append(hidden)
        tail.append(el.LossChannel(mode, eta, hidden))
    return ModeRegistry(tuple(labels) + tuple(extra)), elements + tail


def _herzog_scenario(name: str, sources: int, *, g: float = 0.1, order: int = 1,
                     losses: Mapping[str, float] | None = None) -> Scenario:
    elements: list = []
    if sources == 2:
        elements.append(el.PairSourcePerturbative("a", "b", g, "phi", order))
    elements.append(el.PairSourcePerturbative("a", "b", g, 0.0, order))
    registry, elements = _with_losses(["a", "b"], elements, losses)
    return Scenario(
        name=name,
        description=(
            "Two aligned pair sources on the same output paths; the pair "
            "amplitude is g (1 + e^{i phi})."
            if sources == 2
            else "Single pair source, reference for the factor-4 enhancement."
        ),
        circuit=Circuit(registry, tuple(elements)),
        input_state=FockState((0,) * len(registry)),
        default_bindings={"phi": 0.0} if sources == 2 else {},
        patterns={"ab": DetectionPattern.exact(a=1, b=1)},
        sweep_parameter="phi" if sources == 2 else None,
    )


_CHIP_MODES = ("a", "b", "c", "d", "bp", "cp")

_PAIR_PATTERNS = {
    "abcd": DetectionPattern.exact(a=1, b=1, c=1, d=1),
    "ab": DetectionPattern.exact(a=1, b=1, c=0, d=0),
    "ac": DetectionPattern.exact(a=1, b=0, c=1, d=0),
    "ad": DetectionPattern.exact(a=1, b=0, c=0, d=1),
    "bc": DetectionPattern.exact(a=0, b=1, c=1, d=0),
    "bd": DetectionPattern.exact(a=0, b=1, c=0, d=1),
    "cd": DetectionPattern.exact(a=0, b=0, c=1, d=1),
}


def _chip_layer_elements(g: float, order: int, mixer: Sequence, layer2_phases) -> list:
    phase_iii, phase_iv = layer2_phases
    return [
        el.PairSourcePerturbative("a", "bp", g, 0.0, order),   # source I
        el.PairSourcePerturbative("cp", "d", g, 0.0, order),   # source II
        el.PhaseShifter("bp", "theta3"),
        el.PhaseShifter("cp", "theta2"),
        *mixer,
        el.PairSourcePerturbative("a", "b", g, phase_iii, order),  # source III
        el.PairSourcePerturbative("c", "d", g, phase_iv, order),   # source IV
    ]


def _chip_scenario(name: str, mode: str, *, g: float = 0.1, order: int | None = None,
                   losses: Mapping[str, float] | None = None) -> Scenario:
    if mode == "pass":
        mixer = [el.ModeSwap("bp", "b"), el.ModeSwap("cp", "c")]
        order = 1 if order is None else order
        description = (
            "Mixer passes the interior paths straight through: two separate "
            "two-photon interferometers on (a, b) and (c, d)."
        )
        masters = {}
        sweep_parameter = "theta2"
    else:
        mixer = [el.ModeSwap("bp", "c"), el.ModeSwap("cp", "b")]
        order = 2 if order is None else order
        description = (
            "Mixer swaps the interior paths: four-photon events in the "
            "detectors come from exactly two source pairings, with "
            "amplitude g^2 (1 + e^{i theta}) under the master parameter "
            "theta = 4 theta1."
        )
        masters = {"theta": {"theta1": 0.25}}
        sweep_parameter = "theta"
    # Pump phases double because each pair creation consumes two pump photons.
    phase_iii = el.PhaseExpr.combination({"theta1": 2.0, "theta5": 2.0})
    phase_iv = el.PhaseExpr.combination({"theta1": 2.0, "theta4": 2.0})
    elements = _chip_layer_elements(g, order, mixer, (phase_iii, phase_iv))
    registry, elements = _with_losses(_CHIP_MODES, elements, losses)
    return Scenario(
        name=name,
        description=description,
        circuit=Circuit(registry, tuple(elements)),
        input_state=FockState((0,) * len(registry)),
        default_bindings={f"theta{i}": 0.0 for i in range(1, 6)},
        patterns=dict(_PAIR_PATTERNS),
        master_bindings=masters,
        sweep_parameter=sweep_parameter,
    )


def _si_eq10_scenario(name: str, *, g: float = 0.25) -> Scenario:
    registry = ModeRegistry(["p1", "p2", "a", "b", "c", "d"])
    elements = (
        el.PairSourceExactSPDC("p1", "a", "c", g),
        el.PairSourceExactSPDC("p2", "b", "d", g),
        el.PhaseShifter("p1", "theta"),
        el.PairSourceExactSPDC("p1", "a", "b", g),
        el.PairSourceExactSPDC("p2", "c", "d", g),
    )
    return Scenario(
        name=name,
        description=(
            "Two single-photon pumps drive four quantized-pump pair sources; "
            "the full expansion has eight terms and phase-independent "
            "marginals on {p2, c, d}."
        ),
        circuit=Circuit(registry, elements, model="exact"),
        input_state=FockState((1, 1, 0, 0, 0, 0)),
        default_bindings={"theta": 0.0},
        patterns={"abcd": DetectionPattern.exact(a=1, b=1, c=1, d=1)},
        sweep_parameter="theta",
    )


def _graph_si8_scenario(name: str, *, g: float = 0.1) -> Scenario:
    mixer = [
        el.BeamSplitter("bp", "cp", 0.5),
        el.ModeSwap("bp", "b"),
        el.ModeSwap("cp", "c"),
    ]
    elements = [
        el.PairSourcePerturbative("a", "bp", g, 0.0, 1),
        el.PairSourcePerturbative("cp", "d", g, 0.0, 1),
        el.PhaseShifter("bp", "theta3"),
        el.PhaseShifter("cp", "theta2"),
        *mixer,
        el.PairSourcePerturbative("a", "b", g, -math.pi / 4.0, 1),
        el.PairSourcePerturbative("c", "d", g, math.pi / 4.0, 1),
    ]
    registry = ModeRegistry(_CHIP_MODES)
    patterns = {k: v for k, v in _PAIR_PATTERNS.items() if k in ("ab", "ac", "bd", "cd")}
    return Scenario(
        name=name,
        description=(
            "Mixer as a 50:50 splitter with second-layer pump phases -pi/4 "
            "and +pi/4: the weighted-graph configuration whose pair "
            "distribution is (5/12, 5/12, 1/12, 1/12)."
        ),
        circuit=Circuit(registry, tuple(elements)),
        input_state=FockState((0,) * len(registry)),
        default_bindings={"theta2": 0.0, "theta3": 0.0},
        patterns=patterns,
        sweep_parameter=None,
    )


def _classical_mzi_scenario(name: str) -> Scenario:
    registry = ModeRegistry(["u", "v"])
    elements = (
        el.BeamSplitter("u", "v", 0.5),
        el.PhaseShifter("u", "theta"),
        el.BeamSplitter("u", "v", 0.5),
    )
    return Scenario(
        name=name,
        description="Single photon through a balanced interferometer; the classical single-pass fringe reference.",
        circuit=Circuit(registry, elements),
        input_state=FockState((1, 0)),
        default_bindings={"theta": 0.0},
        patterns={
            "u": DetectionPattern.exact(u=1, v=0),
            "v": DetectionPattern.exact(u=0, v=1),
        },
        sweep_parameter="theta",
    )


_SCENARIO_BUILDERS: dict[str, Callable[..., Scenario]] = {
    "herzog2": lambda **opt: _herzog_scenario("herzog2", 2, **opt),
    "herzog1": lambda **opt: _herzog_scenario("herzog1", 1, **opt),
    "chip-pass": lambda **opt: _chip_scenario("chip-pass", "pass", **opt),
    "quad4-swap": lambda **opt: _chip_scenario("quad4-swap", "swap", **opt),
    "si-eq10": lambda **opt: _si_eq10_scenario("si-eq10", **opt),
    "graph-si8": lambda **opt: _graph_si8_scenario("graph-si8", **opt),
    "classical-mzi": lambda **opt: _classical_mzi_scenario("classical-mzi", **opt),
}


def scenario_names() -> tuple[str, ...]:
    return tuple(sorted(_SCENARIO_BUILDERS))


def build_scenario(name: str, **options) -> Scenario:
    """Fully wired named scenario; options like g/order/losses where supported."""
    try:
        builder = _SCENARIO_BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r} (available: {', '.join(scenario_names())})") from None
    return builder(**options)
