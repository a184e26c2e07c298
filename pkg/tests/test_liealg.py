import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qnetgate.gates import gate_log, pauli_x_gate, toffoli
from qnetgate.liealg import (
    AlgebraBasis,
    bottom_up,
    closure,
    contains,
    membership_residual,
    necessary_condition,
)
from qnetgate.network import Field, NetworkSpec
from qnetgate.operators import HermitianOperator, embed, hs_inner
from qnetgate.presets import toffoli_operator_set, toffoli_spec

from conftest import random_hermitian


def op(label, c=1.0):
    return HermitianOperator.from_pauli(label, c)


def ccnot_generator():
    return embed(gate_log(toffoli()).K, [0, 1, 2], 4)


def test_small_closures():
    assert closure([op("X")]).dimension == 1
    b = closure([op("X"), op("Z")])
    assert b.dimension == 3
    assert contains(b, op("Y"))
    assert not contains(closure([op("X")]), op("Z"))
    with pytest.raises(ValueError):
        closure([])
    with pytest.raises(ValueError):
        closure([op("X"), op("XX")])


def test_basis_is_orthonormal():
    b = closure(list(toffoli_operator_set().values()))
    G = np.array([[hs_inner(x, y) for y in b.elements] for x in b.elements])
    assert np.max(np.abs(G - np.eye(b.dimension))) < 1e-9
    assert b.dimension <= 4**4
    assert len(b.provenance) == b.dimension


def test_toffoli_operator_set_membership():
    ops = toffoli_operator_set()
    assert "O_6" not in ops and len(ops) == 8
    assert contains(closure(list(ops.values())), ccnot_generator())
    without = [v for k, v in ops.items() if k != "O_8"]
    assert not contains(closure(without), ccnot_generator())


def test_operator_set_matches_spec_generators():
    spec = toffoli_spec()
    gens = [spec.generator(g) for g in spec.groups]
    ops = list(toffoli_operator_set().values())
    # each tied generator is a fixed multiple of one listed operator
    for g, o in zip(gens, ops):
        ratio = hs_inner(g, o) / hs_inner(o, o)
        assert np.allclose((g - o * ratio).vector(), 0)


def test_closure_independent_of_order_and_idempotent():
    ops = list(toffoli_operator_set().values())
    d = closure(ops).dimension
    rng = np.random.default_rng(0)
    for _ in range(3):
        perm = rng.permutation(len(ops))
        assert closure([ops[i] for i in perm]).dimension == d
    b = closure(ops)
    assert closure(b.elements).dimension == d
    for g in ops:
        assert contains(b, g)


@given(st.integers(0, 2**32 - 1))
def test_su2_embeddings_have_dimension_three(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    # random rotation of (X, Z) on a random site, scaled
    site = int(rng.integers(n))
    a, b = rng.standard_normal(2)
    x = HermitianOperator(n, {"".join("X" if k == site else "I" for k in range(n)): a,
                              "".join("Y" if k == site else "I" for k in range(n)): b})
    z = HermitianOperator(n, {"".join("Z" if k == site else "I" for k in range(n)): 1.0})
    assert closure([x, z]).dimension == 3


@given(st.integers(0, 2**32 - 1))
def test_generators_always_contained(seed):
    rng = np.random.default_rng(seed)
    gens = [HermitianOperator.from_matrix(random_hermitian(rng, 4)) for _ in range(2)]
    b = closure(gens)
    for g in gens:
        assert membership_residual(b, g) < 1e-8
    # two generic generators on 2 qubits produce su(4) plus possibly the identity
    assert b.dimension in (15, 16)


def test_identity_component_ignored():
    b = closure([op("X")])
    assert contains(b, op("X") + op("I", 5.0))
    assert contains(b, op("I", 2.0))
    with pytest.raises(ValueError):
        membership_residual(b, op("XX"))


def test_necessary_condition_examples():
    spec = toffoli_spec()
    rep = necessary_condition(spec, toffoli())
    assert rep.passed and rep.dimension == 39 and rep.residual < 1e-8
    rep = necessary_condition(spec.with_groups_removed(["h_x_3"]), toffoli())
    assert not rep.passed and rep.residual > 0.1
    toy = NetworkSpec(1, (0,), (), (), (Field(0, "x", "h"),))
    assert necessary_condition(toy, pauli_x_gate()).passed
    doc = json.loads(rep.to_json())
    assert set(doc) >= {"passed", "algebra_dimension", "residual", "branch", "caveat", "steps"}
    assert "principal" in doc["branch"]


def test_bottom_up_examples():
    spec = toffoli_spec()
    base = spec.with_groups_removed(["h_x_3"])
    out, rep = bottom_up([[Field(2, "x", "h_x_3")]], base, toffoli())
    assert rep.passed and "h_x_3" in out.groups
    assert [s["dimension"] for s in rep.log] == [28, 39]
    same, rep = bottom_up([[Field(2, "x", "h_x_3")]], spec, toffoli())
    assert same is spec and rep.passed and len(rep.log) == 1
    toy = NetworkSpec(1, (0,), (), (), (Field(0, "z", "h"),))
    out, rep = bottom_up([], toy, pauli_x_gate())
    assert out is toy and not rep.passed


def test_empty_basis_residual():
    assert membership_residual(AlgebraBasis(1), op("X")) == 1.0
