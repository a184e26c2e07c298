"""Dynamical Lie algebra of a network and the implementability necessary condition.

A static Hamiltonian ``H = sum_j lambda_j O_j`` can only generate ``U`` if
``log U`` (mod identity) lies in the real Lie algebra spanned by the
``O_j`` and their repeated commutators. The test is necessary, not
sufficient, and it checks ``U_Q x 1_A``: ancilla-dependent implementations
``sum_n U_n x |A_n><A_n|`` are not excluded by a failure.

Everything runs on Pauli-coefficient vectors; dense matrices are never formed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fidelity import GateTarget
from .gates import GateLog, gate_log
from .network import NetworkSpec, term_derivative
from .operators import HermitianOperator, comm_h, embed

__all__ = [
    "AlgebraBasis",
    "LieReport",
    "closure",
    "contains",
    "membership_residual",
    "necessary_condition",
    "bottom_up",
    "INDEPENDENCE_TOL",
    "MEMBERSHIP_RTOL",
]

INDEPENDENCE_TOL = 1e-10
MEMBERSHIP_RTOL = 1e-8


@dataclass
class AlgebraBasis:
    """Orthonormal (under ``hs_inner``) basis of a real operator algebra."""

    num_qubits: int
    elements: list[HermitianOperator] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)
    _vectors: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.elements)

    def matrix(self) -> np.ndarray:
        """Basis vectors as rows, shape ``(dimension, 4**num_qubits)``."""
        if not self._vectors:
            return np.zeros((0, 4**self.num_qubits))
        return np.array(self._vectors)

    def try_add(self, op: HermitianOperator, origin: str) -> bool:
        """Gram-Schmidt ``op`` against the basis; keep it if independent."""
        if op.num_qubits != self.num_qubits:
            raise ValueError("dimension mismatch")
        v = op.vector()
        scale = max(1.0, float(np.linalg.norm(v)))
        for _ in range(2):  # re-orthogonalize once for stability
            for b in self._vectors:
                v = v - (b @ v) * b
        norm = float(np.linalg.norm(v))
        if norm < INDEPENDENCE_TOL * scale:
            return False
        v = v / norm
        self._vectors.append(v)
        self.elements.append(HermitianOperator.from_vector(self.num_qubits, v))
        self.provenance.append(origin)
        return True


def closure(generators: Sequence[HermitianOperator], names: Sequence[str] | None = None) -> AlgebraBasis:
    """Span of ``generators`` closed under ``i[., .]``."""
    gens = list(generators)
    if not gens:
        raise ValueError("closure needs at least one generator")
    n = gens[0].num_qubits
    if any(g.num_qubits != n for g in gens):
        raise ValueError("generators act on different numbers of qubits")
    names = list(names) if names is not None else [f"g{k}" for k in range(len(gens))]
    basis = AlgebraBasis(n)
    for g, name in zip(gens, names):
        basis.try_add(g, name)
    frontier = list(range(basis.dimension))
    while frontier:
        added = []
        for i in frontier:
            j = 0
            while j < basis.dimension:  # includes elements added during this pass
                if i != j:
                    c = comm_h(basis.elements[i], basis.elements[j])
                    if c.coeffs and basis.try_add(c, f"[{i},{j}]"):
                        added.append(basis.dimension - 1)
                j += 1
        frontier = added
    return basis


def membership_residual(basis: AlgebraBasis, K: HermitianOperator) -> float:
    """Relative residual of the traceless part of ``K`` outside the traceless span."""
    if K.num_qubits != basis.num_qubits:
        raise ValueError("dimension mismatch")
    k = K.traceless().vector()
    knorm = float(np.linalg.norm(k))
    if knorm == 0:
        return 0.0
    B = basis.matrix().copy()
    if B.shape[0] == 0:
        return 1.0
    B[:, 0] = 0.0  # drop identity components (index 0 is "II...I")
    x, *_ = np.linalg.lstsq(B.T, k, rcond=None)
    return float(np.linalg.norm(B.T @ x - k) / knorm)


def contains(basis: AlgebraBasis, K: HermitianOperator) -> bool:
    return membership_residual(basis, K) < MEMBERSHIP_RTOL


@dataclass
class LieReport:
    passed: bool
    dimension: int
    residual: float
    branch: str = GateLog.branch
    caveat: str = (
        "necessary condition only; tests log(U_Q) x 1_A, so ancilla-dependent "
        "implementations are not excluded by a failure"
    )
    generators: list[str] = field(default_factory=list)
    log: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "algebra_dimension": self.dimension,
            "residual": self.residual,
            "branch": self.branch,
            "caveat": self.caveat,
            "generators": self.generators,
            "steps": self.log,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def _target_generator(spec: NetworkSpec, target: GateTarget) -> HermitianOperator:
    if target.dim != spec.register_dim:
        raise ValueError("target does not match the register")
    return embed(gate_log(target).K, spec.register, spec.num_qubits)


def necessary_condition(spec: NetworkSpec, target: GateTarget) -> LieReport:
    K = _target_generator(spec, target)
    gens = [term_derivative(spec, g) for g in spec.groups]
    if not gens:
        res = membership_residual(AlgebraBasis(spec.num_qubits), K)
        return LieReport(res < MEMBERSHIP_RTOL, 0, res, generators=[])
    basis = closure(gens, spec.groups)
    res = membership_residual(basis, K)
    return LieReport(res < MEMBERSHIP_RTOL, basis.dimension, res, generators=list(spec.groups))


def bottom_up(candidates: Sequence[Sequence], base_spec: NetworkSpec, target: GateTarget):
    """Greedily add candidate term groups until the necessary condition holds.

    ``candidates`` is an ordered list; each entry is a sequence of
    :class:`~qnetgate.network.Coupling`/``Field`` terms forming one new group.
    Returns ``(spec, report)``; ``report.log`` records the algebra dimension
    and residual after every step. Parameter training is left to the trainer.
    """
    spec = base_spec
    report = necessary_condition(spec, target)
    log = [{"step": 0, "added": None, "dimension": report.dimension, "residual": report.residual}]
    for k, terms in enumerate(candidates, start=1):
        if report.passed:
            break
        spec = spec.with_terms_added(list(terms))
        report = necessary_condition(spec, target)
        groups = sorted({t.group for t in terms})
        log.append({"step": k, "added": groups, "dimension": report.dimension,
                    "residual": report.residual})
    report.log = log
    return spec, report
