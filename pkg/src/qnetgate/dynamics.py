"""Exact propagation of a static network and the reduced channel on the register.

Sign convention: the propagator is ``U = exp(-i H)`` (unit time). This is
the convention under which both the remote-logic sqrt(SWAP) family and the
Toffoli network reproduce their reported fidelities; the bundled Toffoli
preset stores its ancilla phase in this convention (see ``presets``).

The channel acting on the register is

    E[rho] = Tr_A[ U (rho x |a><a|) U^dag ] = sum_k K_k rho K_k^dag,
    K_k = (1 x <k|) U (1 x |a>),

with register sites ordered before ancilla sites.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .network import AncillaState, NetworkSpec
from .operators import HermitianOperator, is_hermitian, max_abs, permute_sites

__all__ = [
    "EigenSystem",
    "Superoperator",
    "eig_hermitian",
    "propagator",
    "propagator_derivative",
    "network_propagator",
    "kraus_operators",
    "apply_channel",
    "superoperator",
    "factorization_check",
    "operator_schmidt_values",
    "DEGENERACY_TOL",
]

DEGENERACY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def _as_matrix(H) -> np.ndarray:
    if isinstance(H, HermitianOperator):
        return H.dense
    return np.asarray(H, dtype=complex)


def eig_hermitian(H) -> EigenSystem:
    """Spectral decomposition with ascending eigenvalues."""
    m = _as_matrix(H)
    if not is_hermitian(m, atol=1e-12 * max(1.0, max_abs(m))):
        raise ValueError("eig_hermitian requires a Hermitian matrix")
    w, V = np.linalg.eigh(m)
    return EigenSystem(w, V)


def propagator(H, eig: EigenSystem | None = None) -> np.ndarray:
    """``exp(-i H)``."""
    es = eig if eig is not None else eig_hermitian(H)
    V = es.eigenvectors
    return (V * np.exp(-1j * es.eigenvalues)) @ V.conj().T


def _divided_differences(w: np.ndarray) -> np.ndarray:
    """``Gamma_ab`` such that ``d exp(-iH) = V (M o Gamma) V^dag``."""
    ew = np.exp(-1j * w)
    dw = w[:, None] - w[None, :]
    degenerate = np.abs(dw) < DEGENERACY_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = (ew[:, None] - ew[None, :]) / np.where(degenerate, 1.0, dw)
    diag = -1j * np.broadcast_to(ew[:, None], gamma.shape)
    return np.where(degenerate, diag, gamma)


def propagator_derivative(H, dH, eig: EigenSystem | None = None) -> np.ndarray:
    """Directional derivative of ``lambda -> exp(-i H(lambda))`` along ``dH``.

    ``dH`` may be a single matrix or a stack ``(G, d, d)``; the output has the
    same leading shape.
    """
    es = eig if eig is not None else eig_hermitian(H)
    V = es.eigenvectors
    dHm = _as_matrix(dH)
    if dHm.shape[-2:] != V.shape:
        raise ValueError(f"dimension mismatch: {dHm.shape} vs {V.shape}")
    gamma = _divided_differences(es.eigenvalues)
    M = V.conj().T @ dHm @ V
    return V @ (M * gamma) @ V.conj().T


def _register_order(spec: NetworkSpec) -> list[int]:
    return list(spec.register) + list(spec.ancillae)


def network_propagator(spec: NetworkSpec, params, ordered: bool = True) -> np.ndarray:
    """Propagator of the assembled Hamiltonian.

    With ``ordered`` the tensor factors are arranged register-first (the
    layout used by the channel); otherwise the global site order is kept.
    """
    U = propagator(spec.hamiltonian_matrix(params))
    return permute_sites(U, _register_order(spec)) if ordered else U


def _kraus_from_unitary(U: np.ndarray, psi_a: np.ndarray, dq: int) -> np.ndarray:
    da = psi_a.size
    U4 = U.reshape(dq, da, dq, da)
    return np.einsum("iakb,b->aik", U4, psi_a)


def kraus_operators(spec: NetworkSpec, params, ancilla: AncillaState | None = None) -> np.ndarray:
    """Kraus operators of the register channel, shape ``(d_A, D, D)``."""
    p = spec.check_params(params)
    psi_a, _ = spec.ancilla_vector(p, ancilla)
    U = network_propagator(spec, p)
    return _kraus_from_unitary(U, psi_a, spec.register_dim)


def _check_density(rho, dim: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"register state must be {dim}x{dim}, got {rho.shape}")
    return rho


def apply_channel(spec: NetworkSpec, params, rho, ancilla: AncillaState | None = None) -> np.ndarray:
    """Evolve ``rho`` on the register together with the ancillae and trace them out."""
    rho = _check_density(rho, spec.register_dim)
    K = kraus_operators(spec, params, ancilla)
    return np.einsum("aij,jk,alk->il", K, rho, K.conj())


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Channel matrix elements ``E[i, j, k, l] = <i| E[|k><l|] |j>``."""

    tensor: np.ndarray

    @property
    def dim(self) -> int:
        return self.tensor.shape[0]

    def apply(self, rho) -> np.ndarray:
        return np.einsum("ijkl,kl->ij", self.tensor, rho)

    def choi(self) -> np.ndarray:
        """Choi matrix ``sum_kl |k><l| x E[|k><l|]``, indices ``(k i), (l j)``."""
        d = self.dim
        return self.tensor.transpose(2, 0, 3, 1).reshape(d * d, d * d)

    def trace_deviation(self) -> float:
        """Max-abs deviation of ``sum_i E[i, i, k, l]`` from ``delta_kl``."""
        return max_abs(np.einsum("iikl->kl", self.tensor) - np.eye(self.dim))

    def min_choi_eigenvalue(self) -> float:
        c = self.choi()
        return float(np.linalg.eigvalsh((c + c.conj().T) / 2).min())


def superoperator(spec: NetworkSpec, params, ancilla: AncillaState | None = None) -> Superoperator:
    """Superoperator of the register channel, assembled from its Kraus operators."""
    K = kraus_operators(spec, params, ancilla)
    return Superoperator(np.einsum("aik,ajl->ijkl", K, K.conj()))


def factorization_check(U, split: tuple[Sequence[int], Sequence[int]], rtol: float = 1e-6):
    """Test whether ``U`` factorizes as ``U_Q x V_A`` across ``split = (Q, A)``.

    Returns ``(ok, U_Q, V_A)`` from the leading operator-Schmidt term, with
    ``U_Q`` scaled to be unitary and its first nonzero entry real positive.
    ``ok`` requires the second operator-Schmidt value to be below ``rtol``
    times the first; :func:`operator_schmidt_values` gives the full spectrum.
    """
    U = np.asarray(U, dtype=complex)
    q, a = list(split[0]), list(split[1])
    n = U.shape[0].bit_length() - 1
    if sorted(q + a) != list(range(n)) or not q or 2**n != U.shape[0]:
        raise ValueError(f"invalid split {split} for a {U.shape[0]}-dimensional operator")
    s, A, B = _schmidt(U, q, a)
    ok = bool(s[1] < rtol * s[0]) if s.size > 1 else True
    dq = 2 ** len(q)
    UQ = A * np.sqrt(dq)
    VA = B * s[0] / np.sqrt(dq)
    flat = UQ.ravel()
    nz = np.flatnonzero(np.abs(flat) > 1e-12)[0]
    phase = np.exp(-1j * np.angle(flat[nz]))
    return ok, UQ * phase, VA / phase


def _schmidt(U, q, a):
    dq, da = 2 ** len(q), 2 ** len(a)
    W = permute_sites(U, q + a).reshape(dq, da, dq, da)
    R = W.transpose(0, 2, 1, 3).reshape(dq * dq, da * da)
    u, s, vh = np.linalg.svd(R)
    return s, u[:, 0].reshape(dq, dq), vh[0].reshape(da, da)


def operator_schmidt_values(U, split) -> np.ndarray:
    """Operator-Schmidt coefficients of ``U`` across ``split``, descending."""
    return _schmidt(np.asarray(U, dtype=complex), list(split[0]), list(split[1]))[0]
