"""Post-selection, coincidence statistics, fringe fitting and efficiency analysis.

Probabilities are plain sums of squared amplitude moduli over the basis
states matched by a pattern; nothing is renormalized, so they live in
``[0, norm2]`` and respect whatever bookkeeping the source model uses.
Modes a pattern does not constrain (hidden loss modes in particular) are
marginalized by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import DegenerateDataError
from .fock import StateVector

PredicateSpec = "int | str | tuple[str, int] | CountPredicate"


@dataclass(frozen=True)
class CountPredicate:
    """Photon-count predicate for one mode: exactly-n, at-least-n or any."""

    kind: str
    value: int = 0

    _KINDS = ("eq", "ge", "any")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown predicate kind {self.kind!r}")
        if self.value < 0:
            raise ValueError("predicate count must be non-negative")

    @staticmethod
    def of(spec) -> "CountPredicate":
        if isinstance(spec, CountPredicate):
            return spec
        if isinstance(spec, int):
            return CountPredicate("eq", spec)
        if isinstance(spec, str) and spec == "any":
            return CountPredicate("any")
        if isinstance(spec, tuple) and len(spec) == 2:
            return CountPredicate(str(spec[0]), int(spec[1]))
        raise ValueError(f"cannot interpret count predicate {spec!r}")

    def matches(self, n: int) -> bool:
        if self.kind == "eq":
            return n == self.value
        if self.kind == "ge":
            return n >= self.value
        return True

    def intersect(self, other: "CountPredicate") -> "CountPredicate | None":
        """Conjunction of two predicates; None when unsatisfiable."""
        if self.kind == "any":
            return other
        if other.kind == "any":
            return self
        if self.kind == "eq" and other.kind == "eq":
            return self if self.value == other.value else None
        if self.kind == "ge" and other.kind == "ge":
            return CountPredicate("ge", max(self.value, other.value))
        eq, ge = (self, other) if self.kind == "eq" else (other, self)
        return eq if eq.value >= ge.value else None


@dataclass(frozen=True)
class DetectionPattern:
    """Per-mode count predicates; unconstrained modes are summed over."""

    constraints: tuple[tuple[str, CountPredicate], ...]

    def __post_init__(self):
        if not self.constraints:
            raise ValueError("pattern needs at least one constrained mode")
        normalized = tuple(sorted((m, CountPredicate.of(p)) for m, p in self.constraints))
        modes = [m for m, _ in normalized]
        if len(set(modes)) != len(modes):
            raise ValueError(f"mode constrained twice in pattern: {modes}")
        object.__setattr__(self, "constraints", normalized)

    @staticmethod
    def of(mapping: Mapping[str, "PredicateSpec"]) -> "DetectionPattern":
        return DetectionPattern(tuple((m, CountPredicate.of(p)) for m, p in mapping.items()))

    @staticmethod
    def exact(**counts: int) -> "DetectionPattern":
        return DetectionPattern.of(counts)

    def modes(self) -> tuple[str, ...]:
        return tuple(m for m, _ in self.constraints)

    def matches(self, registry, occ: Sequence[int]) -> bool:
        return all(pred.matches(occ[registry.index_of(m)]) for m, pred in self.constraints)

    def conjunction(self, other: "DetectionPattern") -> "DetectionPattern | None":
        """Merged pattern requiring both; None when jointly unsatisfiable."""
        merged = dict(self.constraints)
        for mode, pred in other.constraints:
            if mode in merged:
                joint = merged[mode].intersect(pred)
                if joint is None:
                    return None
                merged[mode] = joint
            else:
                merged[mode] = pred
        return DetectionPattern.of(merged)

    def __str__(self) -> str:
        parts = []
        for mode, pred in self.constraints:
            if pred.kind == "eq":
                parts.append(f"{mode}:{pred.value}")
            elif pred.kind == "ge":
                parts.append(f"{mode}:>={pred.value}")
            else:
                parts.append(f"{mode}:any")
        return ",".join(parts)


def probability(state: StateVector, pattern: DetectionPattern) -> float:
    """Sum of |amplitude|^2 over basis states matching the pattern."""
    registry = state.registry
    for mode in pattern.modes():
        registry.index_of(mode)
    total = 0.0
    for fock, amp in state.items():
        if pattern.matches(registry, fock.occ):
            total += abs(amp) ** 2
    return total


def conditional_probability(state: StateVector, pattern: DetectionPattern,
                            herald: DetectionPattern) -> float:
    """P(pattern | herald) = P(pattern and herald) / P(herald)."""
    herald_p = probability(state, herald)
    if herald_p == 0.0:
        raise ValueError("herald pattern has zero probability")
    joint = pattern.conjunction(herald)
    joint_p = 0.0 if joint is None else probability(state, joint)
    return joint_p / herald_p


def marginal_distribution(state: StateVector, modes: Sequence[str]) -> dict[tuple[int, ...], float]:
    """Probability distribution over occupation tuples of ``modes``."""
    if not modes:
        raise ValueError("marginal needs a non-empty mode subset")
    idx = [state.registry.index_of(m) for m in modes]
    dist: dict[tuple[int, ...], float] = {}
    for fock, amp in state.items():
        key = tuple(fock.occ[i] for i in idx)
        dist[key] = dist.get(key, 0.0) + abs(amp) ** 2
    return dict(sorted(dist.items()))


def no_signalling_check(circuit, initial, parameter: str, modes: Sequence[str],
                        grid_points: int = 16,
                        base_bindings: Mapping[str, float] | None = None,
                        **evolve_options) -> float:
    """Max L-infinity distance of the subset marginal from its phase=0 value.

    The marginal over ``modes`` is computed on a half-open [0, 2pi) grid of
    the named phase parameter and compared pointwise against the phase=0
    reference; for a no-signalling subset the result is numerically zero.
    """
    from .engine import evolve  # local import, engine depends on this module

    if parameter not in circuit.parameter_names():
        raise ValueError(f"circuit has no parameter {parameter!r}")

    def marginal_at(value: float):
        bindings = dict(base_bindings or {})
        bindings[parameter] = value
        result = evolve(circuit, initial, bindings, **evolve_options)
        return marginal_distribution(result.state, modes)

    reference = marginal_at(0.0)
    worst = 0.0
    for k in range(grid_points):
        value = 2.0 * math.pi * k / grid_points
        dist = marginal_at(value)
        keys = set(reference) | set(dist)
        for key in keys:
            worst = max(worst, abs(dist.get(key, 0.0) - reference.get(key, 0.0)))
    return worst


# -- fringe fitting ------------------------------------------------------------


@dataclass(frozen=True)
class FringeFit:
    """Result of fitting offset * (1 + V sin(pi (phi - phi_c) / T))."""

    visibility: float
    phi_c: float
    period: float
    offset: float
    residual_rms: float

    def evaluate(self, phase: float) -> float:
        return self.offset * (1.0 + self.visibility * math.sin(math.pi * (phase - self.phi_c) / self.period))


def fit_fringe(samples: Iterable[tuple[float, float]]) -> FringeFit:
    """Least-squares sinusoidal fringe fit with deterministic initialization.

    The model is ``A (1 + V sin(pi (phi - phi_c) / T))``.  Initialization
    scans a fixed grid of candidate frequencies, solving the linear
    least-squares problem in (offset, sin, cos) at each, then polishes all
    four parameters with scipy's Levenberg-Marquardt.  Raises
    :class:`DegenerateDataError` for inputs that cannot pin the model down
    (fewer than 5 samples, constant values, or a phase span below half the
    fitted period).
    """
    points = sorted((float(p), float(v)) for p, v in samples)
    if len(points) < 5:
        raise DegenerateDataError(f"need at least 5 samples, got {len(points)}")
    phases = np.array([p for p, _ in points])
    values = np.array([v for _, v in points])
    scale = max(1.0, float(np.max(np.abs(values))))
    if float(np.ptp(values)) <= 1e-12 * scale:
        raise DegenerateDataError("degenerate fringe data: samples are constant")
    span = float(phases[-1] - phases[0])
    if span <= 0.0:
        raise DegenerateDataError("degenerate fringe data: zero phase span")

    def linear_fit(omega: float):
        design = np.column_stack([np.ones_like(phases), np.sin(omega * phases), np.cos(omega * phases)])
        coef, _, _, _ = np.linalg.lstsq(design, values, rcond=None)
        sse = float(np.sum((values - design @ coef) ** 2))
        return coef, sse

    cycles = np.linspace(0.25, max(1.0, len(points) / 2.0), 512)
    candidates = 2.0 * math.pi * cycles / span
    best_omega, best_coef, best_sse = None, None, math.inf
    for omega in candidates:
        coef, sse = linear_fit(omega)
        if sse < best_sse:
            best_omega, best_coef, best_sse = float(omega), coef, sse

    def residuals(params):
        c0, c1, c2, omega = params
        return c0 + c1 * np.sin(omega * phases) + c2 * np.cos(omega * phases) - values

    solution = least_squares(residuals, x0=[*best_coef, best_omega], method="lm")
    c0, c1, c2, omega = solution.x
    omega = abs(float(omega))
    if c0 <= 0.0 or omega == 0.0:
        raise DegenerateDataError("fit collapsed to a non-positive offset or zero frequency")
    period = math.pi / omega
    if span < period:
        raise DegenerateDataError("phase span below half the fitted period")

    vis = float(math.hypot(c1, c2) / c0)
    phi_c = float(math.atan2(-c2, c1) / omega) % (2.0 * period)
    rms = float(np.sqrt(np.mean(residuals(solution.x) ** 2)))
    return FringeFit(visibility=vis, phi_c=phi_c, period=float(period), offset=float(c0), residual_rms=rms)


def visibility(d_max: float, d_min: float) -> float:
    """(d_max - d_min) / (d_max + d_min) of fitted extrema."""
    if d_min < 0 or d_max < d_min:
        raise ValueError("need d_max >= d_min >= 0")
    if d_max == 0.0:
        raise ValueError("visibility undefined for two zero extrema")
    return (d_max - d_min) / (d_max + d_min)


def fringe_frequency_ratio(fit_quantum: FringeFit, fit_classical: FringeFit) -> float:
    """Classical over quantum oscillation period (2 for pump-doubled fringes)."""
    if fit_quantum.period == 0.0:
        raise ValueError("quantum fit has zero period")
    return fit_classical.period / fit_quantum.period


# -- channel efficiencies ------------------------------------------------------


def channel_efficiency(coincidences: float, singles: float) -> float:
    """Heralding efficiency C/N from coincidence and singles counts."""
    if singles <= 0:
        raise ValueError("singles count must be positive")
    if coincidences < 0 or coincidences > singles:
        raise ValueError("coincidences must lie in [0, singles]")
    return coincidences / singles


def eta_to_db(eta: float) -> float:
    """10 log10(eta); negative for lossy channels."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    return 10.0 * math.log10(eta)


def db_to_eta(db: float) -> float:
    return 10.0 ** (db / 10.0)


# -- count simulation (demo pipeline only) --------------------------------------


def poisson_counts(probabilities: Sequence[float], shots: int, seed: int) -> list[int]:
    """Seeded Poisson samples with rate shots * probability per entry."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    rates = np.maximum(np.asarray(probabilities, dtype=float), 0.0) * shots
    return [int(c) for c in rng.poisson(rates)]
