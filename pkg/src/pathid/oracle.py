"""Dense matrix-exponential reference evolution.

Brute-force cross-check for the sparse closed-form path: every element is
turned into an explicit matrix over the full truncated occupation basis
(its generator exponentiated with scipy where one exists) and applied to a
dense vector.  Orders of magnitude slower than the production path; used
by tests and the verification suite only.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np
from scipy.linalg import expm

from . import elements as el
from .fock import FockState, ModeRegistry, Occupation, StateVector


def truncated_basis(n_modes: int, n_max: int) -> list[Occupation]:
    """All occupation tuples with total photon number <= n_max, sorted."""
    states: list[Occupation] = []

    def extend(prefix: tuple[int, ...], remaining: int):
        if len(prefix) == n_modes:
            states.append(prefix)
            return
        for n in range(remaining + 1):
            extend(prefix + (n,), remaining - n)

    extend((), n_max)
    states.sort()
    return states


def creation_matrix(basis: list[Occupation], index: Mapping[Occupation, int], mode: int) -> np.ndarray:
    dim = len(basis)
    n_max = max(sum(occ) for occ in basis)
    mat = np.zeros((dim, dim), dtype=complex)
    for occ, col in index.items():
        if sum(occ) + 1 > n_max:
            continue
        out = list(occ)
        out[mode] += 1
        mat[index[tuple(out)], col] = math.sqrt(occ[mode] + 1)
    return mat


def element_matrix(
    element: el.CircuitElement,
    registry: ModeRegistry,
    basis: list[Occupation],
    index: Mapping[Occupation, int],
    bindings: Mapping[str, float] | None = None,
) -> np.ndarray:
    """Dense matrix of one element over the truncated basis."""
    dim = len(basis)

    def create(label: str) -> np.ndarray:
        return creation_matrix(basis, index, registry.index_of(label))

    if isinstance(element, el.PhaseShifter):
        theta = element.phase.resolve(bindings)
        occ_idx = registry.index_of(element.mode)
        return np.diag(np.exp(1j * theta * np.array([occ[occ_idx] for occ in basis])))

    if isinstance(element, el.ModeSwap):
        i1, i2 = registry.index_of(element.mode1), registry.index_of(element.mode2)
        mat = np.zeros((dim, dim), dtype=complex)
        for occ, col in index.items():
            out = list(occ)
            out[i1], out[i2] = occ[i2], occ[i1]
            mat[index[tuple(out)], col] = 1.0
        return mat

    if isinstance(element, (el.BeamSplitter, el.LossChannel)):
        if isinstance(element, el.BeamSplitter):
            m1, m2, t = element.mode1, element.mode2, element.transmissivity
        else:
            m1, m2, t = element.mode, element.loss_mode, element.efficiency
        a_dag, b_dag = create(m1), create(m2)
        xi = math.acos(math.sqrt(t))
        gen = 1j * xi * (a_dag @ b_dag.conj().T + b_dag @ a_dag.conj().T)
        return expm(gen)

    if isinstance(element, el.PairSourcePerturbative):
        import cmath

        gamma = element.gain * cmath.exp(1j * element.pump_phase.resolve(bindings))
        return expm(gamma * create(element.mode_a) @ create(element.mode_b))

    if isinstance(element, el.PairSourceExactSPDC):
        a_dag, b_dag = create(element.mode_a), create(element.mode_b)
        pump = create(element.pump_mode).conj().T
        raise_pair = a_dag @ b_dag @ pump
        gen = element.coupling * (raise_pair - raise_pair.conj().T)
        return expm(gen)

    raise TypeError(f"not a circuit element: {element!r}")


def dense_evolve(
    circuit,
    initial: FockState | Occupation,
    bindings: Mapping[str, float] | None = None,
    *,
    n_max: int,
    eps_amp: float,
) -> StateVector:
    """Evolve through every element using dense matrices; returns a sparse view."""
    registry: ModeRegistry = circuit.registry
    basis = truncated_basis(len(registry), n_max)
    index = {occ: i for i, occ in enumerate(basis)}
    occ0 = initial.occ if isinstance(initial, FockState) else tuple(initial)
    vec = np.zeros(len(basis), dtype=complex)
    vec[index[occ0]] = 1.0
    for element in circuit.elements:
        vec = element_matrix(element, registry, basis, index, bindings) @ vec
    amps = {
        FockState(occ): complex(vec[i])
        for occ, i in index.items()
        if abs(vec[i]) >= eps_amp
    }
    return StateVector(registry, amps, n_max=n_max, eps_amp=eps_amp)
