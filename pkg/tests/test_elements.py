import cmath
import math

import numpy as np
import pytest

from pathid import elements as el
from pathid import oracle
from pathid.fock import FockState, ModeRegistry, StateVector, new_state, vacuum


@pytest.fixture
def ab():
    return ModeRegistry(["a", "b"])


def random_two_mode_state(rng, registry, n_max=4):
    amps = {}
    for _ in range(4):
        occ = (int(rng.integers(0, 3)), int(rng.integers(0, 2)))
        amps[FockState(occ)] = complex(rng.normal(), rng.normal())
    return StateVector(registry, amps, n_max=n_max).normalize()


def dense_apply(element, registry, state, n_max):
    """Reference application through the dense oracle matrices."""
    basis = oracle.truncated_basis(len(registry), n_max)
    index = {occ: i for i, occ in enumerate(basis)}
    vec = np.zeros(len(basis), dtype=complex)
    for fock, amp in state.items():
        vec[index[fock.occ]] = amp
    vec = oracle.element_matrix(element, registry, basis, index) @ vec
    return {occ: vec[i] for occ, i in index.items() if abs(vec[i]) > 1e-14}


# -- phase shifter -------------------------------------------------------------


def test_phase_pi_on_single_photon(ab):
    state = el.apply_phase(new_state(ab, (1, 0)), el.PhaseShifter("a", math.pi))
    assert state.amplitude((1, 0)) == pytest.approx(-1.0)


def test_phase_on_vacuum(ab):
    state = el.apply_phase(vacuum(ab), el.PhaseShifter("a", 1.234))
    assert state.amplitude((0, 0)) == pytest.approx(1.0)


def test_phase_doubles_on_two_photons(ab):
    # n=2 doubles the phase: the mechanism behind multiple fringe cycles per cycle
    state = el.apply_phase(new_state(ab, (2, 0)), el.PhaseShifter("a", math.pi / 2))
    assert state.amplitude((2, 0)) == pytest.approx(-1.0)


def test_phase_parameter_binding(ab):
    shifter = el.PhaseShifter("a", "theta")
    state = el.apply_phase(new_state(ab, (1, 0)), shifter, {"theta": math.pi})
    assert state.amplitude((1, 0)) == pytest.approx(-1.0)
    with pytest.raises(ValueError, match="unbound"):
        el.apply_phase(new_state(ab, (1, 0)), shifter, {})


def test_phase_expr_combination():
    expr = el.PhaseExpr.combination({"theta1": 2.0, "theta5": 2.0})
    assert expr.resolve({"theta1": 0.3, "theta5": 0.1}) == pytest.approx(0.8)
    assert expr.parameters() == {"theta1", "theta5"}


# -- beam splitter --------------------------------------------------------------


def test_beamsplitter_identity_at_full_transmission(ab):
    state = el.apply_beamsplitter(new_state(ab, (1, 1)), el.BeamSplitter("a", "b", 1.0))
    assert state.amplitude((1, 1)) == pytest.approx(1.0)
    assert len(state) == 1


def test_beamsplitter_single_photon_convention(ab):
    state = el.apply_beamsplitter(new_state(ab, (1, 0)), el.BeamSplitter("a", "b", 0.5))
    assert state.amplitude((1, 0)) == pytest.approx(1 / math.sqrt(2))
    assert state.amplitude((0, 1)) == pytest.approx(1j / math.sqrt(2))


def test_beamsplitter_hong_ou_mandel(ab):
    state = el.apply_beamsplitter(new_state(ab, (1, 1)), el.BeamSplitter("a", "b", 0.5))
    assert state.amplitude((1, 1)) == pytest.approx(0.0, abs=1e-12)
    assert state.amplitude((2, 0)) == pytest.approx(1j / math.sqrt(2))
    assert state.amplitude((0, 2)) == pytest.approx(1j / math.sqrt(2))


def test_beamsplitter_matches_dense_oracle(ab):
    rng = np.random.default_rng(11)
    for _ in range(10):
        t = float(rng.uniform(0, 1))
        state = random_two_mode_state(rng, ab)
        sparse = el.apply_beamsplitter(state, el.BeamSplitter("a", "b", t))
        dense = dense_apply(el.BeamSplitter("a", "b", t), ab, state, n_max=4)
        keys = {f.occ for f, _ in sparse.items()} | set(dense)
        for occ in keys:
            assert sparse.amplitude(occ) == pytest.approx(dense.get(occ, 0j), abs=1e-12)


def test_beamsplitter_preserves_photon_number_and_norm(ab):
    rng = np.random.default_rng(5)
    for _ in range(10):
        state = random_two_mode_state(rng, ab)
        out = el.apply_beamsplitter(state, el.BeamSplitter("a", "b", float(rng.uniform(0, 1))))
        assert out.norm2() == pytest.approx(1.0, abs=1e-12)
        totals_in = {f.total for f, _ in state.items()}
        totals_out = {f.total for f, _ in out.items()}
        assert totals_out <= totals_in


def test_beamsplitter_validation():
    with pytest.raises(ValueError):
        el.BeamSplitter("a", "a", 0.5)
    with pytest.raises(ValueError):
        el.BeamSplitter("a", "b", 1.5)


# -- swap -----------------------------------------------------------------------


def test_swap_moves_occupations():
    registry = ModeRegistry(["a", "b", "c", "d"])
    state = el.apply_swap(new_state(registry, (1, 1, 0, 0)), el.ModeSwap("b", "c"))
    assert state.amplitude((1, 0, 1, 0)) == pytest.approx(1.0)


def test_double_swap_is_identity(ab):
    swap = el.ModeSwap("a", "b")
    state = el.apply_swap(el.apply_swap(new_state(ab, (2, 1)), swap), swap)
    assert state.amplitude((2, 1)) == pytest.approx(1.0)


def test_swap_on_symmetric_state(ab):
    sym = StateVector(ab, {FockState((1, 0)): 0.5, FockState((0, 1)): 0.5})
    out = el.apply_swap(sym, el.ModeSwap("a", "b"))
    assert out.amplitude((1, 0)) == pytest.approx(0.5)
    assert out.amplitude((0, 1)) == pytest.approx(0.5)


# -- loss ------------------------------------------------------------------------


def test_loss_identity_at_full_efficiency():
    registry = ModeRegistry(["a", "a.loss"])
    state = el.apply_loss(new_state(registry, (1, 0)), el.LossChannel("a", 1.0, "a.loss"))
    assert state.amplitude((1, 0)) == pytest.approx(1.0)


def test_loss_splits_single_photon():
    registry = ModeRegistry(["a", "a.loss"])
    eta = 0.7
    state = el.apply_loss(new_state(registry, (1, 0)), el.LossChannel("a", eta, "a.loss"))
    assert abs(state.amplitude((1, 0))) == pytest.approx(math.sqrt(eta))
    assert abs(state.amplitude((0, 1))) == pytest.approx(math.sqrt(1 - eta))
    assert state.norm2() == pytest.approx(1.0)


def test_loss_plumbs_decibel_channel():
    # -13.2 dB channel efficiency
    eta = 10 ** (-13.2 / 10)
    assert eta == pytest.approx(0.0479, abs=5e-5)
    registry = ModeRegistry(["a", "a.loss"])
    state = el.apply_loss(new_state(registry, (1, 0)), el.LossChannel("a", eta, "a.loss"))
    assert abs(state.amplitude((1, 0))) ** 2 == pytest.approx(eta)


def test_loss_validation():
    with pytest.raises(ValueError):
        el.LossChannel("a", 0.0, "a.loss")
    with pytest.raises(ValueError):
        el.LossChannel("a", 0.5, "a")


# -- perturbative pair source -----------------------------------------------------


def test_perturbative_first_order_on_vacuum(ab):
    g = 0.2
    src = el.PairSourcePerturbative("a", "b", g, 0.0, order=1)
    state = el.apply_pair_source_perturbative(vacuum(ab), src)
    assert state.amplitude((0, 0)) == pytest.approx(1.0)
    assert state.amplitude((1, 1)) == pytest.approx(g)
    assert len(state) == 2


def test_perturbative_zero_gain_is_identity(ab):
    src = el.PairSourcePerturbative("a", "b", 0.0, 0.0, order=3)
    state = el.apply_pair_source_perturbative(new_state(ab, (1, 0)), src)
    assert state.items() == [(FockState((1, 0)), 1.0 + 0j)]


def test_perturbative_second_order_coefficient(ab):
    # |2,2> coefficient is g^2: the 1/2! cancels the sqrt(2) ladder factors
    g = 0.3
    src = el.PairSourcePerturbative("a", "b", g, 0.0, order=2)
    state = el.apply_pair_source_perturbative(vacuum(ab), src)
    assert state.amplitude((2, 2)) == pytest.approx(g * g)


def test_perturbative_agrees_with_matrix_exponential(ab):
    # truncated expansion matches expm of the gain operator to O(g^{k+1})
    g, order = 0.3, 2
    src = el.PairSourcePerturbative("a", "b", g, 0.0, order=order)
    state = el.apply_pair_source_perturbative(vacuum(ab, n_max=8), src)
    dense = dense_apply(src, ab, vacuum(ab, n_max=8), n_max=8)
    keys = {f.occ for f, _ in state.items()} | set(dense)
    worst = max(abs(state.amplitude(occ) - dense.get(occ, 0j)) for occ in keys)
    assert worst < 2 * g ** (order + 1)


def test_perturbative_pump_phase_in_gain(ab):
    src = el.PairSourcePerturbative("a", "b", 0.1, "phi", order=1)
    state = el.apply_pair_source_perturbative(vacuum(ab), src, {"phi": math.pi / 2})
    assert state.amplitude((1, 1)) == pytest.approx(0.1j)


def test_perturbative_validation():
    with pytest.raises(ValueError):
        el.PairSourcePerturbative("a", "a", 0.1)
    with pytest.raises(ValueError):
        el.PairSourcePerturbative("a", "b", 0.1, 0.0, order=0)


# -- exact pair source --------------------------------------------------------------


@pytest.fixture
def pab():
    return ModeRegistry(["p", "a", "b"])


def test_exact_source_pumps_vacuum(pab):
    g = 0.3
    src = el.PairSourceExactSPDC("p", "a", "b", g)
    state = el.apply_pair_source_exact(new_state(pab, (1, 0, 0)), src)
    assert state.amplitude((1, 0, 0)) == pytest.approx(math.cos(g))
    assert state.amplitude((0, 1, 1)) == pytest.approx(math.sin(g))


def test_exact_source_fixes_true_vacuum(pab):
    src = el.PairSourceExactSPDC("p", "a", "b", 1.3)
    state = el.apply_pair_source_exact(new_state(pab, (0, 0, 0)), src)
    assert state.items() == [(FockState((0, 0, 0)), 1.0 + 0j)]


def test_exact_source_annihilation_branch(pab):
    g = 0.3
    src = el.PairSourceExactSPDC("p", "a", "b", g)
    state = el.apply_pair_source_exact(new_state(pab, (0, 1, 1)), src)
    assert state.amplitude((0, 1, 1)) == pytest.approx(math.cos(g))
    assert state.amplitude((1, 0, 0)) == pytest.approx(-math.sin(g))


def test_exact_source_rejects_double_pump(pab):
    src = el.PairSourceExactSPDC("p", "a", "b", 0.3)
    with pytest.raises(ValueError, match="pump occupation"):
        el.apply_pair_source_exact(new_state(pab, (2, 0, 0)), src)


def test_exact_source_is_unitary_on_valid_states(pab):
    rng = np.random.default_rng(23)
    src = el.PairSourceExactSPDC("p", "a", "b", 0.4)
    for _ in range(25):
        amps = {}
        for _ in range(4):
            occ = (int(rng.integers(0, 2)), int(rng.integers(0, 3)), int(rng.integers(0, 3)))
            amps[FockState(occ)] = complex(rng.normal(), rng.normal())
        state = StateVector(pab, amps, n_max=8).normalize()
        out = el.apply_pair_source_exact(state, src)
        assert out.norm2() == pytest.approx(1.0, abs=1e-12)


def test_exact_source_validation():
    with pytest.raises(ValueError):
        el.PairSourceExactSPDC("p", "p", "b", 0.3)


# -- dispatch --------------------------------------------------------------------


def test_apply_element_dispatch(ab):
    state = el.apply_element(new_state(ab, (1, 0)), el.PhaseShifter("a", math.pi))
    assert state.amplitude((1, 0)) == pytest.approx(-1.0)
    with pytest.raises(TypeError):
        el.apply_element(new_state(ab, (1, 0)), "not an element")


def test_element_modes_and_parameters():
    src = el.PairSourcePerturbative("a", "b", 0.1, "phi")
    assert el.element_modes(src) == ("a", "b")
    assert el.element_parameters(src) == {"phi"}
    assert el.element_parameters(el.ModeSwap("a", "b")) == frozenset()
