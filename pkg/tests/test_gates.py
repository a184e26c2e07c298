import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from qnetgate.gates import (
    custom_gate,
    fredkin,
    gate_from_json,
    gate_log,
    pauli_x_gate,
    sqrt_swap,
    swap_matrix,
    toffoli,
)
from qnetgate.operators import is_unitary, pauli_matrix

from conftest import random_unitary


def basis(i, dim=8):
    e = np.zeros(dim)
    e[i] = 1
    return e


def test_toffoli_action():
    U = toffoli().U
    assert np.allclose(U @ basis(0b110), basis(0b111))
    assert np.allclose(U @ basis(0b101), basis(0b101))
    assert np.allclose(U @ U, np.eye(8))


def test_fredkin_action():
    U = fredkin().U
    assert np.allclose(U @ basis(0b110), basis(0b101))
    assert np.allclose(U @ basis(0b010), basis(0b010))
    assert np.allclose(U @ U, np.eye(8))


def test_sqrt_swap_squares_to_swap():
    U = sqrt_swap().U
    assert np.allclose(U @ U, swap_matrix(2, 0, 1))
    assert np.allclose(U[[0, 3]][:, [0, 3]], np.eye(2))


def test_swap_matrix_exchanges_sites():
    S = swap_matrix(3, 0, 2)
    assert np.allclose(S @ basis(0b100), basis(0b001))
    assert np.allclose(S @ basis(0b110), basis(0b011))
    X = pauli_matrix("X")
    assert np.allclose(S @ np.kron(np.kron(X, np.eye(2)), np.eye(2)) @ S, pauli_matrix("IIX"))


@pytest.mark.parametrize("factory", [toffoli, fredkin, sqrt_swap, pauli_x_gate])
def test_library_gates_unitary_and_symmetric(factory):
    g = factory()
    assert is_unitary(g.U, atol=1e-12)
    for S in g.symmetries:
        assert np.max(np.abs(S @ g.U - g.U @ S)) < 1e-10
    K = gate_log(g).matrix()
    assert np.max(np.abs(expm(1j * K) - g.U)) < 1e-9


def test_gate_log_examples():
    assert np.allclose(gate_log(np.eye(4)).matrix(), 0)
    X = pauli_matrix("X")
    K = gate_log(pauli_x_gate()).matrix()
    assert np.allclose(K, np.pi * (np.eye(2) - X) / 2)
    minus = np.array([1, -1]) / np.sqrt(2)
    P = np.kron(np.diag([0, 0, 0, 1]), np.outer(minus, minus))
    L = gate_log(toffoli())
    assert np.allclose(L.matrix(), np.pi * P)
    assert np.max(np.abs(expm(1j * np.pi * P) - toffoli().U)) < 1e-12
    assert np.isclose(L.traceless.trace_normalized(), 0)
    assert np.all(L.phases > -np.pi) and np.all(L.phases <= np.pi)


@given(st.integers(0, 2**32 - 1))
def test_gate_log_reconstructs_random_unitaries(seed):
    U = random_unitary(np.random.default_rng(seed), 8)
    K = gate_log(U).matrix()
    assert np.max(np.abs(K - K.conj().T)) < 1e-12
    assert np.max(np.abs(expm(1j * K) - U)) < 1e-9


def test_custom_gate_validation():
    with pytest.raises(ValueError, match=r"max\|U\^dag U - I\| = 3\.000e\+00"):
        custom_gate(np.diag([1.0, 2.0]))
    with pytest.raises(ValueError, match="power of two"):
        custom_gate(np.eye(3))
    near = np.eye(2) * (1 + 1e-10)
    g = custom_gate(near)
    assert is_unitary(g.U, atol=1e-14)


def test_gate_from_json(tmp_path):
    U = sqrt_swap().U
    doc = [[[z.real, z.imag] for z in row] for row in U]
    path = tmp_path / "sq.json"
    path.write_text(json.dumps(doc))
    g = gate_from_json(path)
    assert g.name == "sq"
    assert np.allclose(g.U, U)
    with pytest.raises(ValueError):
        gate_from_json([[1, 2], [3, 4]])
