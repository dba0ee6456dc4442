"""Sparse multimode Fock-state bookkeeping.

A :class:`ModeRegistry` fixes an ordered set of mode labels.  A
:class:`FockState` is one occupation vector over that ordering and a
:class:`StateVector` is a sparse complex superposition of them, truncated
at ``n_max`` total photons.  Amplitudes below ``eps_amp`` are pruned, and
every iteration over basis states runs in sorted occupation order so that
identical inputs produce bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

DEFAULT_N_MAX = 6
DEFAULT_EPS_AMP = 1e-12

Occupation = tuple[int, ...]


class ModeRegistry:
    """Ordered, frozen list of unique mode labels with label -> index lookup."""

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable[str]):
        self.labels: tuple[str, ...] = tuple(labels)
        if not self.labels:
            raise ValueError("registry needs at least one mode")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate mode labels: {self.labels}")
        self._index = {label: i for i, label in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, ModeRegistry) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    def __repr__(self) -> str:
        return f"ModeRegistry({list(self.labels)!r})"

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ValueError(f"unknown mode {label!r} (registry has {list(self.labels)})") from None

    def extended(self, extra: Iterable[str]) -> "ModeRegistry":
        """New registry with ``extra`` labels appended (used for loss modes)."""
        return ModeRegistry(self.labels + tuple(extra))


@dataclass(frozen=True, order=True, slots=True)
class FockState:
    """Occupation-number basis state; equality and hashing use the exact vector."""

    occ: Occupation

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occ)
        if any(n < 0 for n in occ):
            raise ValueError(f"negative occupation in {occ}")
        object.__setattr__(self, "occ", occ)

    @classmethod
    def from_counts(cls, registry: ModeRegistry, counts: Mapping[str, int]) -> "FockState":
        occ = [0] * len(registry)
        for label, n in counts.items():
            occ[registry.index_of(label)] = n
        return cls(tuple(occ))

    @property
    def total(self) -> int:
        return sum(self.occ)

    def __str__(self) -> str:
        return "|" + ",".join(str(n) for n in self.occ) + ">"


class StateVector:
    """Sparse map FockState -> complex amplitude with truncation bookkeeping.

    Instances are immutable by convention: every operation returns a new
    vector and carries forward the cumulative truncation counters
    (``truncation_drops`` components dropped, ``leaked_norm2`` their summed
    probability weight), so an evolution can report how much norm was lost
    to the photon-number cap.
    """

    __slots__ = ("registry", "n_max", "eps_amp", "truncation_drops", "leaked_norm2", "_amps")

    def __init__(
        self,
        registry: ModeRegistry,
        amplitudes: Mapping[FockState, complex] | None = None,
        *,
        n_max: int = DEFAULT_N_MAX,
        eps_amp: float = DEFAULT_EPS_AMP,
        truncation_drops: int = 0,
        leaked_norm2: float = 0.0,
    ):
        if n_max < 0:
            raise ValueError("n_max must be non-negative")
        if eps_amp < 0:
            raise ValueError("eps_amp must be non-negative")
        self.registry = registry
        self.n_max = int(n_max)
        self.eps_amp = float(eps_amp)
        self.truncation_drops = int(truncation_drops)
        self.leaked_norm2 = float(leaked_norm2)
        amps: dict[FockState, complex] = {}
        for state, amp in (amplitudes or {}).items():
            if not isinstance(state, FockState):
                state = FockState(tuple(state))
            if len(state.occ) != len(registry):
                raise ValueError(
                    f"occupation length {len(state.occ)} does not match registry size {len(registry)}"
                )
            if state.total > self.n_max:
                raise ValueError(f"state {state} exceeds photon cap n_max={self.n_max}")
            amps[state] = complex(amp)
        self._amps = amps

    # -- inspection --------------------------------------------------------

    def items(self) -> list[tuple[FockState, complex]]:
        """Entries sorted by occupation vector (deterministic order)."""
        return sorted(self._amps.items(), key=lambda kv: kv[0].occ)

    def amplitude(self, state: FockState | Occupation) -> complex:
        if not isinstance(state, FockState):
            state = FockState(tuple(state))
        return self._amps.get(state, 0j)

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self) -> Iterator[FockState]:
        return iter(sorted(self._amps, key=lambda s: s.occ))

    def __repr__(self) -> str:
        entries = ", ".join(f"{s}: {a:.4g}" for s, a in self.items()[:4])
        more = "" if len(self) <= 4 else f", ... ({len(self)} entries)"
        return f"StateVector({{{entries}{more}}})"

    # -- norms and inner products -------------------------------------------

    def norm2(self) -> float:
        """Sum of squared amplitude moduli."""
        return float(sum(abs(a) ** 2 for _, a in self.items()))

    def normalize(self) -> "StateVector":
        n2 = self.norm2()
        if n2 == 0.0:
            raise ValueError("cannot normalize the zero vector")
        scale = 1.0 / math.sqrt(n2)
        return self._replace_amps({s: a * scale for s, a in self.items()})

    def inner(self, other: "StateVector") -> complex:
        """<self|other>, conjugate-linear in the first argument."""
        if self.registry != other.registry:
            raise ValueError("inner product requires matching registries")
        small, large = (self, other) if len(self) <= len(other) else (other, self)
        acc = 0j
        for state, _ in small.items():
            acc += self.amplitude(state).conjugate() * other.amplitude(state)
        return acc

    # -- structural operations ----------------------------------------------

    def prune(self, eps_amp: float | None = None) -> "StateVector":
        """Drop entries with |amplitude| below the prune threshold."""
        eps = self.eps_amp if eps_amp is None else float(eps_amp)
        return self._replace_amps({s: a for s, a in self.items() if abs(a) >= eps})

    def transformed(
        self,
        branches: Callable[[Occupation], Iterable[tuple[Occupation, complex]]],
    ) -> "StateVector":
        """Apply a basis-state transformation and re-accumulate amplitudes.

        ``branches`` maps an occupation tuple to (occupation, factor)
        contributions.  Contributions over the photon cap are dropped and
        recorded in the truncation counters; the result is pruned.
        """
        acc: dict[FockState, complex] = {}
        drops = self.truncation_drops
        leaked = self.leaked_norm2
        for state, amp in self.items():
            for occ, factor in branches(state.occ):
                if factor == 0:
                    continue
                contribution = amp * factor
                if sum(occ) > self.n_max:
                    drops += 1
                    leaked += abs(contribution) ** 2
                    continue
                key = FockState(occ)
                acc[key] = acc.get(key, 0j) + contribution
        amps = {s: a for s, a in acc.items() if abs(a) >= self.eps_amp}
        return StateVector(
            self.registry,
            amps,
            n_max=self.n_max,
            eps_amp=self.eps_amp,
            truncation_drops=drops,
            leaked_norm2=leaked,
        )

    def _replace_amps(self, amps: Mapping[FockState, complex]) -> "StateVector":
        return StateVector(
            self.registry,
            amps,
            n_max=self.n_max,
            eps_amp=self.eps_amp,
            truncation_drops=self.truncation_drops,
            leaked_norm2=self.leaked_norm2,
        )


def new_state(
    registry: ModeRegistry,
    initial: FockState | Occupation | Mapping[str, int],
    *,
    n_max: int = DEFAULT_N_MAX,
    eps_amp: float = DEFAULT_EPS_AMP,
) -> StateVector:
    """Single-entry state with amplitude 1 on ``initial``."""
    if isinstance(initial, Mapping):
        initial = FockState.from_counts(registry, initial)
    elif not isinstance(initial, FockState):
        initial = FockState(tuple(initial))
    return StateVector(registry, {initial: 1.0 + 0j}, n_max=n_max, eps_amp=eps_amp)


def vacuum(registry: ModeRegistry, *, n_max: int = DEFAULT_N_MAX, eps_amp: float = DEFAULT_EPS_AMP) -> StateVector:
    return new_state(registry, (0,) * len(registry), n_max=n_max, eps_amp=eps_amp)


def apply_creation(state: StateVector, mode: str) -> StateVector:
    """Ladder raise on one mode: |n> -> sqrt(n+1)|n+1>, over-cap entries dropped."""
    idx = state.registry.index_of(mode)

    def branches(occ: Occupation):
        out = list(occ)
        out[idx] += 1
        yield tuple(out), math.sqrt(occ[idx] + 1)

    return state.transformed(branches)


def apply_annihilation(state: StateVector, mode: str) -> StateVector:
    """Ladder lower on one mode: |n> -> sqrt(n)|n-1>, vacuum entries vanish."""
    idx = state.registry.index_of(mode)

    def branches(occ: Occupation):
        if occ[idx] == 0:
            return
        out = list(occ)
        out[idx] -= 1
        yield tuple(out), math.sqrt(occ[idx])

    return state.transformed(branches)
