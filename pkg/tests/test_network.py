import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qnetgate.gates import swap_matrix
from qnetgate.network import (
    AncillaState,
    ConfigError,
    Coupling,
    Field,
    NetworkSpec,
    assemble_hamiltonian,
    check_symmetry,
    from_physical_units,
    load_spec,
    spec_from_dict,
    spec_to_dict,
    term_derivative,
    to_physical_units,
)
from qnetgate.presets import TOFFOLI_VALUES, toffoli_spec, toffoli_topdown_spec


def two_qubit_zz():
    return NetworkSpec(2, (0, 1), (), (Coupling((0, 1), "zz", "J"),))


def test_single_zz_term():
    H = assemble_hamiltonian(two_qubit_zz(), [np.pi])
    assert np.allclose(H.dense, np.pi * np.diag([1, -1, -1, 1]) / 4)


def test_zero_parameters_give_zero_operator():
    spec = toffoli_spec()
    p = np.zeros(spec.num_params)
    assert assemble_hamiltonian(spec, p).coeffs == {}


def test_toffoli_coefficients_follow_reference_values():
    spec = toffoli_spec()
    H = assemble_hamiltonian(spec, spec.params_from_dict(TOFFOLI_VALUES)).coeffs
    v = TOFFOLI_VALUES
    want = {
        "ZZII": v["J_zz_12"] / 4,
        "ZIZI": v["J_zz_13"] / 4, "IZZI": v["J_zz_13"] / 4, "IIZI": v["J_zz_13"] / 2,
        "ZIIZ": v["J_zz_14"] / 4, "IZIZ": v["J_zz_14"] / 4,
        "IIXX": v["J_xx_34"] / 4,
        "ZIII": v["h_z_1"] / 2, "IZII": v["h_z_1"] / 2,
        "IIIZ": v["h_z_4"] / 2, "IIXI": v["h_x_3"] / 2, "IIIX": v["h_x_4"] / 2,
    }
    assert H.keys() == want.keys()
    for k in want:
        assert H[k] == pytest.approx(want[k], abs=1e-14)
    assert assemble_hamiltonian(spec, spec.params_from_dict(TOFFOLI_VALUES)).dense.shape == (16, 16)


def test_term_derivative_examples():
    assert term_derivative(two_qubit_zz(), "J").coeffs == {"ZZ": 0.25}
    spec = NetworkSpec(3, (0, 1, 2), (), (Coupling((0, 2), "zz", "g"), Coupling((1, 2), "zz", "g")))
    assert term_derivative(spec, "g").coeffs == {"ZIZ": 0.25, "IZZ": 0.25}
    with pytest.raises(KeyError):
        term_derivative(spec, "nope")


@given(st.integers(0, 2**32 - 1))
def test_hamiltonian_is_linear_and_two_local(seed):
    rng = np.random.default_rng(seed)
    spec = toffoli_topdown_spec()
    a, b = rng.uniform(-10, 10, 2)
    l1, l2 = rng.uniform(-10, 10, (2, spec.num_params))
    lhs = assemble_hamiltonian(spec, a * l1 + b * l2).dense
    rhs = a * assemble_hamiltonian(spec, l1).dense + b * assemble_hamiltonian(spec, l2).dense
    assert np.max(np.abs(lhs - rhs)) < 1e-12
    total = sum(l1[i] * term_derivative(spec, g).dense for i, g in enumerate(spec.groups))
    assert np.max(np.abs(total - assemble_hamiltonian(spec, l1).dense)) < 1e-12
    assert assemble_hamiltonian(spec, l1).max_weight <= 2
    assert np.allclose(spec.hamiltonian_matrix(l1), assemble_hamiltonian(spec, l1).dense)


def test_check_symmetry_examples():
    S = swap_matrix(3, 0, 1)
    assert check_symmetry(toffoli_spec(), S)
    untied = NetworkSpec(4, (0, 1, 2), (3,), (Coupling((0, 2), "zz", "J_13"), Coupling((1, 2), "zz", "J_23")),
                         ancilla_state=AncillaState.basis(0))
    assert not check_symmetry(untied, S)
    assert check_symmetry(toffoli_topdown_spec(), np.eye(8))
    with pytest.raises(ValueError):
        check_symmetry(toffoli_spec(), np.eye(4))


@given(st.integers(0, 2**32 - 1))
def test_symmetry_commutes_with_hamiltonian(seed):
    from qnetgate.operators import embed_matrix

    rng = np.random.default_rng(seed)
    spec = toffoli_spec(trainable_ancilla=False)
    S = embed_matrix(swap_matrix(3, 0, 1), spec.register, spec.num_qubits)
    H = spec.hamiltonian_matrix(rng.uniform(-10, 10, spec.num_params))
    assert np.max(np.abs(S @ H - H @ S)) < 1e-10


def test_unit_conversion():
    assert to_physical_units(-8.940, 60e-9) == pytest.approx(-149.0)
    assert abs(to_physical_units(-8.940, 60e-9) / -149.2 - 1) < 2e-3
    assert to_physical_units(15.06, 60e-9) == pytest.approx(251.0)
    assert to_physical_units(0.0, 1e-6) == 0
    with pytest.raises(ValueError):
        to_physical_units(1.0, 0)


@given(st.floats(-100, 100), st.floats(1e-9, 1e-6))
def test_unit_conversion_round_trip(v, t):
    back = from_physical_units(to_physical_units(v, t), t)
    assert back == pytest.approx(v, rel=1e-12, abs=1e-300)


def test_invariants_rejected():
    with pytest.raises(ConfigError):
        Coupling((1, 1), "zz", "g")
    with pytest.raises(ConfigError):
        NetworkSpec(2, (0, 1), (), (Coupling((0, 1), "zx", "a"), Coupling((1, 0), "xz", "b")))
    with pytest.raises(ConfigError):
        NetworkSpec(2, (0, 1), (), (Coupling((0, 1), "zz", "a"), Coupling((0, 1), "zz", "a")))
    with pytest.raises(ConfigError):
        NetworkSpec(2, (0,), (0,))
    with pytest.raises(ConfigError):
        NetworkSpec(3, (0, 1), ())
    # distinct axes on the same pair are different terms
    NetworkSpec(2, (0, 1), (), (Coupling((0, 1), "zx", "a"), Coupling((1, 0), "zx", "b")))


def test_parameter_vector_checks():
    spec = toffoli_spec()
    assert spec.num_params == 10
    assert spec.param_names[-2:] == ("eta", "xi")
    with pytest.raises(ValueError):
        spec.check_params(np.zeros(9))
    with pytest.raises(ValueError):
        spec.check_params([np.nan] + [0] * 9)


def test_ancilla_state_gauge_and_angles():
    a = AncillaState(np.array([-1j, 0]))
    assert np.allclose(a.amplitudes, [1, 0])
    s = AncillaState.from_angles(0.3, 0.7)
    assert np.allclose(s.amplitudes, [np.cos(0.3), np.exp(0.7j) * np.sin(0.3)])
    assert AncillaState(np.array([2.0, 0])) == AncillaState.basis(0)
    sing = AncillaState.singlet()
    assert np.allclose(sing.amplitudes, np.array([0, 1, -1, 0]) / np.sqrt(2))


@given(st.integers(0, 2**32 - 1))
def test_multi_ancilla_amplitude_derivatives(seed):
    rng = np.random.default_rng(seed)
    spec = NetworkSpec(3, (0,), (1, 2), (Coupling((0, 1), "xx", "a"),), ancilla_trainable=True)
    p = rng.standard_normal(spec.num_params)
    psi, d = spec.ancilla_vector(p)
    assert np.isclose(np.linalg.norm(psi), 1)
    h = 1e-6
    for k in range(spec.num_params - spec.num_groups):
        e = np.zeros(spec.num_params)
        e[spec.num_groups + k] = h
        fd = (spec.ancilla_vector(p + e)[0] - spec.ancilla_vector(p - e)[0]) / (2 * h)
        assert np.allclose(fd, d[k], atol=1e-6)


def test_untied_spec_matches_tied_hamiltonian():
    spec = toffoli_spec()
    p = spec.params_from_dict(TOFFOLI_VALUES)
    loose = spec.untied()
    assert loose.num_groups == 12
    assert np.allclose(loose.hamiltonian_matrix(spec.untied_params(p)), spec.hamiltonian_matrix(p))


def test_json_round_trip(tmp_path):
    spec = toffoli_spec(trainable_ancilla=False)
    doc = spec_to_dict(spec)
    back = spec_from_dict(json.loads(json.dumps(doc)))
    p = np.arange(spec.num_params, dtype=float)
    assert np.allclose(back.hamiltonian_matrix(p), spec.hamiltonian_matrix(p))
    assert back.ancilla_state == spec.ancilla_state
    path = tmp_path / "net.json"
    path.write_text(json.dumps(doc))
    assert load_spec(path).groups == spec.groups


def test_json_errors_name_the_field():
    doc = spec_to_dict(toffoli_spec(trainable_ancilla=False))
    doc["couplings"][2]["colour"] = "red"
    with pytest.raises(ConfigError) as err:
        spec_from_dict(doc)
    assert err.value.path == "network.couplings[2]"
    doc = spec_to_dict(toffoli_spec(trainable_ancilla=False))
    doc["fields"][0]["axis"] = "w"
    with pytest.raises(ConfigError, match=r"fields\[0\]"):
        spec_from_dict(doc)
    with pytest.raises(ConfigError, match="num_qubits"):
        spec_from_dict({"register": [0]})
    with pytest.raises(ConfigError, match="angle form"):
        spec_from_dict({"num_qubits": 3, "register": [0], "ancillae": [1, 2],
                        "ancilla_state": {"eta": 0.1}})


def test_json_angle_form():
    spec = spec_from_dict({
        "num_qubits": 2, "register": [0], "ancillae": [1],
        "couplings": [{"sites": [0, 1], "axes": "xx", "group": "J"}],
        "ancilla_state": {"eta": 0.4, "xi": 0.2},
    })
    assert spec.ancilla_state == AncillaState.from_angles(0.4, 0.2)
