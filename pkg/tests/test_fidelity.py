import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qnetgate.dynamics import network_propagator
from qnetgate.fidelity import (
    GateTarget,
    avg_fidelity,
    avg_fidelity_unitary,
    fidelity_variance,
    finite_difference_gradient,
    grad_avg_fidelity,
    grad_state_fidelity,
    sample_haar_state,
    sample_haar_states,
    state_fidelities,
    state_fidelity,
)
from qnetgate.gates import pauli_x_gate, sqrt_swap
from qnetgate.network import AncillaState, Coupling, Field, NetworkSpec
from qnetgate.presets import get_preset, toffoli_topdown_spec

KET0 = np.array([1, 0], dtype=complex)


def toy_spec():
    return NetworkSpec(1, (0,), (), (), (Field(0, "x", "h_x_1"),))


def test_exact_channel_gives_one():
    spec = toy_spec()
    ident = GateTarget("id", np.eye(2))
    assert state_fidelity(spec, [0.0], KET0, ident) == pytest.approx(1, abs=1e-12)
    assert avg_fidelity(spec, [0.0], ident) == pytest.approx(1, abs=1e-12)
    # h = pi implements X up to a global phase
    assert avg_fidelity(spec, [np.pi], pauli_x_gate()) == pytest.approx(1, abs=1e-12)


def test_identity_channel_against_x():
    spec = toy_spec()
    assert state_fidelity(spec, [0.0], KET0, pauli_x_gate()) == pytest.approx(0, abs=1e-12)
    assert avg_fidelity(spec, [0.0], pauli_x_gate()) == pytest.approx(1 / 3, abs=1e-12)


def test_input_validation():
    spec = toy_spec()
    with pytest.raises(ValueError):
        state_fidelity(spec, [0.0], np.array([1, 1]), pauli_x_gate())
    with pytest.raises(ValueError):
        state_fidelity(spec, [0.0], np.ones(4) / 2, pauli_x_gate())
    with pytest.raises(ValueError):
        avg_fidelity(spec, [0.0], sqrt_swap())


def test_toffoli_preset_state_fidelities():
    pre = get_preset("toffoli")
    states = sample_haar_states(8, 100, np.random.default_rng(0))
    f = state_fidelities(pre.spec, pre.params, states, pre.target)
    assert f.min() >= 0.999
    assert np.all(f <= 1 + 1e-10)


def test_toy_closed_form():
    spec = toy_spec()
    for h in np.linspace(-7, 7, 15):
        assert state_fidelity(spec, [h], KET0, pauli_x_gate()) == pytest.approx(np.sin(h / 2) ** 2, abs=1e-12)
        g = grad_state_fidelity(spec, [h], KET0, pauli_x_gate())
        assert g[0] == pytest.approx(np.sin(h / 2) * np.cos(h / 2), abs=1e-12)


def test_gradient_vanishes_at_perfect_fidelity():
    pre = get_preset("remote-sqswap")
    psi = sample_haar_state(4, np.random.default_rng(2))
    assert np.max(np.abs(grad_state_fidelity(pre.spec, pre.params, psi, pre.target))) < 1e-8
    assert np.max(np.abs(grad_avg_fidelity(pre.spec, pre.params, pre.target))) < 1e-8


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12)


@given(st.integers(0, 2**32 - 1))
def test_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    spec = get_preset("toffoli").spec  # trainable ancilla angles included
    target = get_preset("toffoli").target
    p = rng.uniform(-10, 10, spec.num_params)
    psi = sample_haar_state(8, rng)
    g = grad_state_fidelity(spec, p, psi, target)
    fd = finite_difference_gradient(lambda q: state_fidelity(spec, q, psi, target), p)
    assert _rel(g, fd) < 1e-6
    g = grad_avg_fidelity(spec, p, target)
    fd = finite_difference_gradient(lambda q: avg_fidelity(spec, q, target), p)
    assert _rel(g, fd) < 1e-6


def test_gradient_with_multi_qubit_trainable_ancilla():
    rng = np.random.default_rng(4)
    spec = NetworkSpec(4, (0, 3), (1, 2), (Coupling((0, 1), "xx", "a"), Coupling((1, 3), "zz", "b"),
                                           Coupling((2, 3), "yy", "c"), Coupling((0, 2), "xz", "d")),
                       ancilla_trainable=True)
    p = rng.standard_normal(spec.num_params)
    g = grad_avg_fidelity(spec, p, sqrt_swap())
    fd = finite_difference_gradient(lambda q: avg_fidelity(spec, q, sqrt_swap()), p)
    assert _rel(g, fd) < 1e-6


def test_grad_avg_near_stationary_at_toffoli_optimum():
    pre = get_preset("toffoli")
    g, f = grad_avg_fidelity(pre.spec, pre.params, pre.target, return_value=True)
    assert np.linalg.norm(g) < 1e-3
    assert f == pytest.approx(avg_fidelity(pre.spec, pre.params, pre.target), abs=1e-14)


def test_gradient_chain_rule_under_rescaling():
    rng = np.random.default_rng(9)
    spec = toffoli_topdown_spec()
    target = get_preset("toffoli").target
    p = rng.uniform(-3, 3, spec.num_params)
    g = grad_avg_fidelity(spec, p, target)
    h = 1e-6
    ds = (avg_fidelity(spec, (1 + h) * p, target) - avg_fidelity(spec, (1 - h) * p, target)) / (2 * h)
    assert ds == pytest.approx(g @ p, abs=1e-8)


def test_global_phase_invariance_and_unitary_formula():
    rng = np.random.default_rng(1)
    spec = NetworkSpec(2, (0, 1), (), (Coupling((0, 1), "xy", "a"), Coupling((0, 1), "zz", "b")),
                       (Field(1, "x", "c"),))
    p = rng.uniform(-4, 4, 3)
    tgt = sqrt_swap()
    shifted = GateTarget("shifted", np.exp(0.77j) * tgt.U)
    assert abs(avg_fidelity(spec, p, tgt) - avg_fidelity(spec, p, shifted)) < 1e-12
    V = network_propagator(spec, p)
    assert abs(avg_fidelity(spec, p, tgt) - avg_fidelity_unitary(V, tgt.U)) < 1e-10


def test_haar_sampling():
    rng = np.random.default_rng(11)
    assert abs(np.linalg.norm(sample_haar_state(8, rng)) - 1) < 1e-12
    n, dim = 100_000, 8
    p0 = np.abs(sample_haar_states(dim, n, rng)[:, 0]) ** 2
    # |<0|psi>|^2 ~ Beta(1, dim-1): variance (dim-1) / (dim^2 (dim+1))
    sigma = np.sqrt((dim - 1) / (dim**2 * (dim + 1)) / n)
    assert abs(p0.mean() - 1 / dim) < 3 * sigma


def test_monte_carlo_mean_matches_average():
    rng = np.random.default_rng(2)
    spec = toffoli_topdown_spec()
    target = get_preset("toffoli").target
    p = rng.uniform(-10, 10, spec.num_params)
    rep = fidelity_variance(spec, p, target, 10_000, seed=5)
    se = np.sqrt(rep.sample_variance / rep.num_samples)
    assert abs(rep.sample_mean - rep.f_bar) < 3 * se


def test_fidelity_variance_examples():
    spec = toy_spec()
    rep = fidelity_variance(spec, [np.pi], pauli_x_gate(), 200, seed=1)
    assert rep.sample_variance < 1e-20
    pre = get_preset("toffoli")
    v0 = fidelity_variance(pre.spec, pre.params, pre.target, 500, seed=3)
    v1 = fidelity_variance(pre.spec, pre.params + 0.5, pre.target, 500, seed=3)
    assert v0.sample_variance < v1.sample_variance
    assert v1.f_bar < 0.99 and v1.sample_variance > 0
    again = fidelity_variance(pre.spec, pre.params, pre.target, 500, seed=3)
    assert again == v0


def test_variance_vanishes_for_exact_gates():
    for name in ("remote-sqswap", "remote-direct", "fredkin"):
        pre = get_preset(name)
        rep = fidelity_variance(pre.spec, pre.params, pre.target, 300, seed=0)
        assert rep.f_bar > 1 - 1e-6
        assert rep.sample_variance < 1e-12


def test_explicit_ancilla_argument():
    pre = get_preset("fredkin")
    a = AncillaState.basis(0)
    assert avg_fidelity(pre.spec, pre.params, pre.target, a) == avg_fidelity(pre.spec, pre.params, pre.target)
    with pytest.raises(ValueError):
        avg_fidelity(get_preset("toffoli").spec, get_preset("toffoli").params, pre.target, a)
