"""Target gates and their principal logarithms.

Register basis ordering follows :mod:`qnetgate.operators`: register site 0 is
the most significant bit, so ``|110>`` is index 6.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.linalg import schur

from .fidelity import GateTarget
from .operators import HermitianOperator, max_abs

__all__ = [
    "toffoli",
    "fredkin",
    "sqrt_swap",
    "pauli_x_gate",
    "swap_matrix",
    "permutation_gate",
    "custom_gate",
    "gate_from_json",
    "gate_log",
    "GateLog",
    "UNITARITY_TOL",
]

UNITARITY_TOL = 1e-8


def permutation_gate(dim: int, swaps: list[tuple[int, int]]) -> np.ndarray:
    U = np.eye(dim, dtype=complex)
    for a, b in swaps:
        U[[a, b]] = U[[b, a]]
    return U


def swap_matrix(num_qubits: int, i: int, j: int) -> np.ndarray:
    """Unitary exchanging sites ``i`` and ``j`` of ``num_qubits`` qubits."""
    order = list(range(num_qubits))
    order[i], order[j] = order[j], order[i]
    dim = 2**num_qubits
    # permute only the output (row) factors of the identity
    t = np.eye(dim, dtype=complex).reshape((2,) * (2 * num_qubits))
    return t.transpose(order + list(range(num_qubits, 2 * num_qubits))).reshape(dim, dim)


def toffoli() -> GateTarget:
    """CCNOT with controls on register sites 0, 1 and target on site 2."""
    return GateTarget("toffoli", permutation_gate(8, [(6, 7)]), (swap_matrix(3, 0, 1),))


def fredkin() -> GateTarget:
    """CSWAP with control on register site 0 swapping sites 1 and 2."""
    return GateTarget("fredkin", permutation_gate(8, [(5, 6)]), (swap_matrix(3, 1, 2),))


def sqrt_swap() -> GateTarget:
    U = np.eye(4, dtype=complex)
    U[1, 1] = U[2, 2] = (1 + 1j) / 2
    U[1, 2] = U[2, 1] = (1 - 1j) / 2
    return GateTarget("sqrt_swap", U, (swap_matrix(2, 0, 1),))


def pauli_x_gate() -> GateTarget:
    return GateTarget("x", np.array([[0, 1], [1, 0]], dtype=complex))


def custom_gate(matrix, name: str = "custom") -> GateTarget:
    """Validate an arbitrary matrix as a target gate.

    Raises ``ValueError`` quoting the measured ``max|U^dag U - I|`` when the
    deviation from unitarity reaches ``UNITARITY_TOL``.
    """
    U = np.asarray(matrix, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"gate matrix must be square, got shape {U.shape}")
    dim = U.shape[0]
    if dim < 2 or dim & (dim - 1):
        raise ValueError(f"gate dimension {dim} is not a power of two")
    dev = max_abs(U.conj().T @ U - np.eye(dim))
    if dev >= UNITARITY_TOL:
        raise ValueError(f"gate is not unitary: max|U^dag U - I| = {dev:.3e}")
    # project onto the nearest unitary so downstream checks at 1e-10 hold
    W, _, Vh = np.linalg.svd(U)
    return GateTarget(name, W @ Vh)


def gate_from_json(source, name: str | None = None) -> GateTarget:
    """Load a gate from a JSON 2-D array of ``[re, im]`` pairs (row-major).

    ``source`` is a path or an already-parsed nested list.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        with open(path) as fh:
            data = json.load(fh)
        name = name or path.stem
    else:
        data = source
    try:
        U = np.array([[complex(re, im) for re, im in row] for row in data])
    except (TypeError, ValueError):
        raise ValueError("gate file must be a 2-D array of [re, im] pairs") from None
    return custom_gate(U, name or "custom")


class GateLog:
    """Hermitian ``K`` with ``exp(iK) = U`` on the principal branch.

    Eigenphases lie in ``(-pi, pi]``; an eigenvalue ``-1`` maps to ``+pi``.
    """

    branch = "principal: eigenphases in (-pi, pi], -1 -> +pi"

    def __init__(self, K: HermitianOperator, phases: np.ndarray):
        self.K = K
        self.phases = phases
        self.traceless = K.traceless()

    def matrix(self) -> np.ndarray:
        return self.K.dense


def gate_log(target) -> GateLog:
    U = target.U if isinstance(target, GateTarget) else np.asarray(target, dtype=complex)
    T, Z = schur(U, output="complex")
    lam = np.diag(T)
    phases = np.angle(lam)
    phases[phases <= -np.pi + 1e-12] = np.pi
    K = (Z * phases) @ Z.conj().T
    K = (K + K.conj().T) / 2
    return GateLog(HermitianOperator.from_matrix(K), phases)
