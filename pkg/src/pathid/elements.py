"""Optical circuit elements and their action on sparse Fock states.

Conventions, pinned by the test suite:

* Beam splitter: ``a+ -> sqrt(t) a+ + i sqrt(1-t) b+`` and
  ``b+ -> i sqrt(1-t) a+ + sqrt(t) b+`` (reflection picks up ``i``);
  50:50 at ``t = 1/2``.
* Loss channel: a beam splitter with transmissivity ``eta`` coupling the
  signal mode to a hidden loss mode that starts in vacuum; detection later
  marginalizes the hidden mode instead of renormalizing mid-circuit.
* Perturbative pair source (classical pump): the truncated exponential
  ``sum_{j<=order} (gain e^{i pump_phase} a+ b+)^j / j!``.  Deliberately
  non-unitary; the pump phase sits in the gain factor because the chip
  drives phases through the pump laser.
* Exact pair source (quantized pump, single photon): closed-form rotation
  within each (pump, pair) ladder block,

      |1, na, nb> -> cos(mu)|1, na, nb> + sin(mu)|0, na+1, nb+1>,
      |0, na, nb> -> cos(nu)|0, na, nb> - sin(nu)|1, na-1, nb-1>,

  with ``mu = sqrt((na+1)(nb+1)) g`` and ``nu = sqrt(na nb) g``.  Requires
  pump occupation 0 or 1 on every populated basis state.

Phase-carrying fields accept a plain angle, a parameter name, or a
:class:`PhaseExpr` (an affine combination of named parameters), which is
how circuits defer phases to per-run bindings.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .fock import Occupation, StateVector


@dataclass(frozen=True)
class PhaseExpr:
    """Affine phase expression ``const + sum(coeff * parameter)`` in radians."""

    const: float = 0.0
    terms: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        merged: dict[str, float] = {}
        for name, coeff in self.terms:
            merged[str(name)] = merged.get(str(name), 0.0) + float(coeff)
        object.__setattr__(self, "const", float(self.const))
        object.__setattr__(self, "terms", tuple(sorted(merged.items())))

    @staticmethod
    def of(value: "PhaseLike") -> "PhaseExpr":
        if isinstance(value, PhaseExpr):
            return value
        if isinstance(value, str):
            return PhaseExpr(terms=((value, 1.0),))
        return PhaseExpr(const=float(value))

    @staticmethod
    def combination(terms: Mapping[str, float], const: float = 0.0) -> "PhaseExpr":
        return PhaseExpr(const=const, terms=tuple(terms.items()))

    def parameters(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.terms)

    def resolve(self, bindings: Mapping[str, float] | None = None) -> float:
        value = self.const
        for name, coeff in self.terms:
            if bindings is None or name not in bindings:
                raise ValueError(f"unbound parameter {name!r}")
            value += coeff * float(bindings[name])
        return value


PhaseLike = Union[float, int, str, PhaseExpr]


@dataclass(frozen=True)
class PhaseShifter:
    mode: str
    phase: PhaseLike

    def __post_init__(self):
        object.__setattr__(self, "phase", PhaseExpr.of(self.phase))


@dataclass(frozen=True)
class BeamSplitter:
    mode1: str
    mode2: str
    transmissivity: float = 0.5

    def __post_init__(self):
        if self.mode1 == self.mode2:
            raise ValueError("beam splitter needs two distinct modes")
        if not 0.0 <= self.transmissivity <= 1.0:
            raise ValueError(f"transmissivity {self.transmissivity} outside [0, 1]")


@dataclass(frozen=True)
class ModeSwap:
    mode1: str
    mode2: str

    def __post_init__(self):
        if self.mode1 == self.mode2:
            raise ValueError("swap needs two distinct modes")


@dataclass(frozen=True)
class LossChannel:
    mode: str
    efficiency: float
    loss_mode: str

    def __post_init__(self):
        if self.mode == self.loss_mode:
            raise ValueError("loss mode must differ from the signal mode")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency {self.efficiency} outside (0, 1]")


@dataclass(frozen=True)
class PairSourcePerturbative:
    mode_a: str
    mode_b: str
    gain: float
    pump_phase: PhaseLike = 0.0
    order: int = 2

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise ValueError("pair source needs two distinct modes")
        if self.gain < 0:
            raise ValueError("gain must be non-negative")
        if self.order < 1:
            raise ValueError("expansion order must be >= 1")
        object.__setattr__(self, "pump_phase", PhaseExpr.of(self.pump_phase))


@dataclass(frozen=True)
class PairSourceExactSPDC:
    pump_mode: str
    mode_a: str
    mode_b: str
    coupling: float

    def __post_init__(self):
        if len({self.pump_mode, self.mode_a, self.mode_b}) != 3:
            raise ValueError("exact pair source needs three distinct modes")


CircuitElement = Union[
    PhaseShifter,
    BeamSplitter,
    ModeSwap,
    LossChannel,
    PairSourcePerturbative,
    PairSourceExactSPDC,
]


def element_modes(element: CircuitElement) -> tuple[str, ...]:
    """All mode labels an element touches."""
    if isinstance(element, PhaseShifter):
        return (element.mode,)
    if isinstance(element, (BeamSplitter, ModeSwap)):
        return (element.mode1, element.mode2)
    if isinstance(element, LossChannel):
        return (element.mode, element.loss_mode)
    if isinstance(element, PairSourcePerturbative):
        return (element.mode_a, element.mode_b)
    if isinstance(element, PairSourceExactSPDC):
        return (element.pump_mode, element.mode_a, element.mode_b)
    raise TypeError(f"not a circuit element: {element!r}")


def element_parameters(element: CircuitElement) -> frozenset[str]:
    if isinstance(element, PhaseShifter):
        return element.phase.parameters()
    if isinstance(element, PairSourcePerturbative):
        return element.pump_phase.parameters()
    return frozenset()


# -- appliers ----------------------------------------------------------------


def apply_phase(state: StateVector, element: PhaseShifter,
                bindings: Mapping[str, float] | None = None) -> StateVector:
    """Multiply each basis state by exp(i theta n) for the target mode."""
    idx = state.registry.index_of(element.mode)
    theta = element.phase.resolve(bindings)

    def branches(occ: Occupation):
        yield occ, cmath.exp(1j * theta * occ[idx])

    return state.transformed(branches)


def _two_mode_split(state: StateVector, i1: int, i2: int, transmissivity: float) -> StateVector:
    """Shared beam-splitter expansion for BeamSplitter and LossChannel."""
    sqrt_t = math.sqrt(transmissivity)
    refl = 1j * math.sqrt(1.0 - transmissivity)

    def branches(occ: Occupation):
        n1, n2 = occ[i1], occ[i2]
        if n1 == 0 and n2 == 0:
            yield occ, 1.0
            return
        prefactor = 1.0 / math.sqrt(math.factorial(n1) * math.factorial(n2))
        for stay in range(n1 + 1):
            for cross in range(n2 + 1):
                na = stay + cross
                nb = n1 - stay + n2 - cross
                coeff = (
                    math.comb(n1, stay)
                    * math.comb(n2, cross)
                    * sqrt_t ** (stay + n2 - cross)
                    * refl ** (n1 - stay + cross)
                    * math.sqrt(math.factorial(na) * math.factorial(nb))
                    * prefactor
                )
                out = list(occ)
                out[i1] = na
                out[i2] = nb
                yield tuple(out), coeff

    return state.transformed(branches)


def apply_beamsplitter(state: StateVector, element: BeamSplitter,
                       bindings: Mapping[str, float] | None = None) -> StateVector:
    return _two_mode_split(
        state,
        state.registry.index_of(element.mode1),
        state.registry.index_of(element.mode2),
        element.transmissivity,
    )


def apply_swap(state: StateVector, element: ModeSwap,
               bindings: Mapping[str, float] | None = None) -> StateVector:
    """Exchange the occupation entries of the two modes in every basis state."""
    i1 = state.registry.index_of(element.mode1)
    i2 = state.registry.index_of(element.mode2)

    def branches(occ: Occupation):
        out = list(occ)
        out[i1], out[i2] = occ[i2], occ[i1]
        yield tuple(out), 1.0

    return state.transformed(branches)


def apply_loss(state: StateVector, element: LossChannel,
               bindings: Mapping[str, float] | None = None) -> StateVector:
    """Couple the signal mode to its hidden loss mode with transmissivity eta."""
    return _two_mode_split(
        state,
        state.registry.index_of(element.mode),
        state.registry.index_of(element.loss_mode),
        element.efficiency,
    )


def apply_pair_source_perturbative(state: StateVector, element: PairSourcePerturbative,
                                   bindings: Mapping[str, float] | None = None) -> StateVector:
    ia = state.registry.index_of(element.mode_a)
    ib = state.registry.index_of(element.mode_b)
    gamma = element.gain * cmath.exp(1j * element.pump_phase.resolve(bindings))

    def branches(occ: Occupation):
        yield occ, 1.0
        if gamma == 0:
            return
        na, nb = occ[ia], occ[ib]
        ladder = 1.0
        for j in range(1, element.order + 1):
            # (a+)^j on |n> carries sqrt((n+j)!/n!)
            ladder *= math.sqrt((na + j) * (nb + j))
            out = list(occ)
            out[ia] = na + j
            out[ib] = nb + j
            yield tuple(out), gamma**j / math.factorial(j) * ladder

    return state.transformed(branches)


def apply_pair_source_exact(state: StateVector, element: PairSourceExactSPDC,
                            bindings: Mapping[str, float] | None = None) -> StateVector:
    ip = state.registry.index_of(element.pump_mode)
    ia = state.registry.index_of(element.mode_a)
    ib = state.registry.index_of(element.mode_b)
    g = element.coupling

    def branches(occ: Occupation):
        pump, na, nb = occ[ip], occ[ia], occ[ib]
        if pump > 1:
            raise ValueError(
                f"pump occupation {pump} > 1 on {occ} (exact source needs a 0/1 pump)"
            )
        if pump == 1:
            mu = math.sqrt((na + 1) * (nb + 1)) * g
            yield occ, math.cos(mu)
            out = list(occ)
            out[ip], out[ia], out[ib] = 0, na + 1, nb + 1
            yield tuple(out), math.sin(mu)
        else:
            nu = math.sqrt(na * nb) * g
            if nu == 0.0:
                yield occ, 1.0
            else:
                yield occ, math.cos(nu)
                out = list(occ)
                out[ip], out[ia], out[ib] = 1, na - 1, nb - 1
                yield tuple(out), -math.sin(nu)

    return state.transformed(branches)


def apply_element(state: StateVector, element: CircuitElement,
                  bindings: Mapping[str, float] | None = None) -> StateVector:
    if isinstance(element, PhaseShifter):
        return apply_phase(state, element, bindings)
    if isinstance(element, BeamSplitter):
        return apply_beamsplitter(state, element, bindings)
    if isinstance(element, ModeSwap):
        return apply_swap(state, element, bindings)
    if isinstance(element, LossChannel):
        return apply_loss(state, element, bindings)
    if isinstance(element, PairSourcePerturbative):
        return apply_pair_source_perturbative(state, element, bindings)
    if isinstance(element, PairSourceExactSPDC):
        return apply_pair_source_exact(state, element, bindings)
    raise TypeError(f"not a circuit element: {element!r}")
