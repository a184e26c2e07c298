"""State fidelity, average gate fidelity and their parameter gradients.

For a register of dimension ``D`` and target ``U``::

    F_psi = <psi| U^dag E[|psi><psi|] U |psi>
    F_bar = 1/(D+1) + sum_{ijkl} U*_{ik} E^{ij,kl} U_{jl} / (D(D+1))

The contraction in ``F_bar`` equals ``sum_k |Tr(U^dag K_k)|^2`` over the Kraus
operators of the channel, which is the form used for gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    _kraus_from_unitary,
    _register_order,
    eig_hermitian,
    propagator,
    propagator_derivative,
    superoperator,
)
from .network import AncillaState, NetworkSpec
from .operators import is_unitary, max_abs, permute_sites

__all__ = [
    "GateTarget",
    "FidelityReport",
    "state_fidelity",
    "state_fidelities",
    "avg_fidelity",
    "avg_fidelity_unitary",
    "grad_state_fidelity",
    "grad_avg_fidelity",
    "finite_difference_gradient",
    "sample_haar_state",
    "fidelity_variance",
    "FD_STEP",
]

FD_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class GateTarget:
    """Target unitary on the register plus optional symmetry operators."""

    name: str
    U: np.ndarray
    symmetries: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self):
        U = np.asarray(self.U, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[0] & (U.shape[0] - 1):
            raise ValueError(f"target must be a square power-of-two matrix, got {U.shape}")
        if not is_unitary(U, atol=1e-10):
            raise ValueError(f"target {self.name!r} is not unitary")
        syms = tuple(np.asarray(S, dtype=complex) for S in self.symmetries)
        for S in syms:
            if max_abs(U @ S - S @ U) >= 1e-10:
                raise ValueError(f"declared symmetry does not commute with {self.name!r}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "symmetries", syms)

    @property
    def dim(self) -> int:
        return self.U.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1


@dataclass(frozen=True)
class FidelityReport:
    f_bar: float
    sample_mean: float
    sample_variance: float
    num_samples: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "f_bar": self.f_bar,
            "sample_mean": self.sample_mean,
            "sample_variance": self.sample_variance,
            "num_samples": self.num_samples,
            "seed": self.seed,
        }


def _check_target(spec: NetworkSpec, target: GateTarget):
    if target.dim != spec.register_dim:
        raise ValueError(
            f"target acts on {target.dim} dims but the register has {spec.register_dim}"
        )


def _check_state(psi, dim: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != dim:
        raise ValueError(f"state has dimension {psi.size}, expected {dim}")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ValueError("input state is not normalized")
    return psi


class _Channel:
    """Propagator, Kraus operators and (optionally) their parameter derivatives."""

    def __init__(self, spec: NetworkSpec, params, ancilla: AncillaState | None, derivs: bool):
        self.spec = spec
        p = spec.check_params(params)
        order = _register_order(spec)
        psi_a, dpsi_a = spec.ancilla_vector(p, ancilla)
        H = spec.hamiltonian_matrix(p)
        es = eig_hermitian(H)
        U = permute_sites(propagator(H, es), order)
        dq = spec.register_dim
        self.K = _kraus_from_unitary(U, psi_a, dq)
        self.dK = None
        if derivs:
            rows = []
            if spec.num_groups:
                dU = propagator_derivative(H, spec.generator_stack, es)
                for g in range(spec.num_groups):
                    rows.append(_kraus_from_unitary(permute_sites(dU[g], order), psi_a, dq))
            for d in dpsi_a:
                rows.append(_kraus_from_unitary(U, d, dq))
            self.dK = np.array(rows) if rows else np.zeros((0,) + self.K.shape, dtype=complex)


def state_fidelities(spec: NetworkSpec, params, states, target: GateTarget,
                     ancilla: AncillaState | None = None) -> np.ndarray:
    """``F_psi`` for each row of ``states`` (shape ``(S, D)``)."""
    _check_target(spec, target)
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    for s in states:
        _check_state(s, spec.register_dim)
    K = _Channel(spec, params, ancilla, derivs=False).K
    out_states = states @ target.U.T
    amps = np.einsum("si,aij,sj->sa", out_states.conj(), K, states)
    return np.sum(np.abs(amps) ** 2, axis=1)


def state_fidelity(spec: NetworkSpec, params, psi, target: GateTarget,
                   ancilla: AncillaState | None = None) -> float:
    return float(state_fidelities(spec, params, np.asarray(psi)[None], target, ancilla)[0])


def grad_state_fidelity(spec: NetworkSpec, params, psi, target: GateTarget,
                        ancilla: AncillaState | None = None, return_value: bool = False):
    """Exact gradient of ``F_psi`` with respect to all free parameters."""
    _check_target(spec, target)
    psi = _check_state(psi, spec.register_dim)
    ch = _Channel(spec, params, ancilla, derivs=True)
    phi = target.U @ psi
    c = np.einsum("i,aij,j->a", phi.conj(), ch.K, psi)
    dc = np.einsum("i,gaij,j->ga", phi.conj(), ch.dK, psi)
    grad = 2 * np.real(dc @ c.conj())
    if return_value:
        return grad, float(np.sum(np.abs(c) ** 2))
    return grad


def _fbar_from_overlap(total: float, D: int) -> float:
    return 1 / (D + 1) + total / (D * (D + 1))


def avg_fidelity(spec: NetworkSpec, params, target: GateTarget,
                 ancilla: AncillaState | None = None) -> float:
    """Exact Haar-averaged fidelity from the channel superoperator."""
    _check_target(spec, target)
    E = superoperator(spec, params, ancilla).tensor
    U = target.U
    total = np.einsum("ik,ijkl,jl->", U.conj(), E, U).real
    return float(_fbar_from_overlap(total, target.dim))


def avg_fidelity_unitary(V, U) -> float:
    """``(D + |Tr(U^dag V)|^2) / (D (D+1))`` for a unitary channel ``V``."""
    V, U = np.asarray(V), np.asarray(U)
    D = U.shape[0]
    return float((D + abs(np.trace(U.conj().T @ V)) ** 2) / (D * (D + 1)))


def grad_avg_fidelity(spec: NetworkSpec, params, target: GateTarget,
                      ancilla: AncillaState | None = None, return_value: bool = False):
    """Exact gradient of ``F_bar`` with respect to all free parameters."""
    _check_target(spec, target)
    ch = _Channel(spec, params, ancilla, derivs=True)
    Ud = target.U.conj().T
    t = np.einsum("ki,aik->a", Ud, ch.K)
    dt = np.einsum("ki,gaik->ga", Ud, ch.dK)
    D = target.dim
    grad = 2 * np.real(dt @ t.conj()) / (D * (D + 1))
    if return_value:
        return grad, float(_fbar_from_overlap(np.sum(np.abs(t) ** 2), D))
    return grad


def finite_difference_gradient(f, params, step: float = FD_STEP) -> np.ndarray:
    """Central finite differences of a scalar function of a parameter vector."""
    p = np.asarray(params, dtype=float)
    out = np.empty(p.size)
    for k in range(p.size):
        e = np.zeros_like(p)
        e[k] = step
        out[k] = (f(p + e) - f(p - e)) / (2 * step)
    return out


def sample_haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state: a normalized vector of i.i.d. complex Gaussians."""
    if dim < 1:
        raise ValueError("dim must be positive")
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def sample_haar_states(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return np.array([sample_haar_state(dim, rng) for _ in range(count)])


def fidelity_variance(spec: NetworkSpec, params, target: GateTarget, num_samples: int = 1000,
                      seed: int = 0, ancilla: AncillaState | None = None) -> FidelityReport:
    """Sample mean and (unbiased) variance of ``F_psi`` over Haar states."""
    if num_samples < 2:
        raise ValueError("num_samples must be at least 2")
    rng = np.random.default_rng(seed)
    states = sample_haar_states(spec.register_dim, num_samples, rng)
    f = state_fidelities(spec, params, states, target, ancilla)
    return FidelityReport(
        f_bar=avg_fidelity(spec, params, target, ancilla),
        sample_mean=float(f.mean()),
        sample_variance=float(f.var(ddof=1)),
        num_samples=num_samples,
        seed=seed,
    )


def sampled_fidelities(spec: NetworkSpec, params, target: GateTarget, num_samples: int,
                       seed: int, ancilla: AncillaState | None = None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    states = sample_haar_states(spec.register_dim, num_samples, rng)
    return state_fidelities(spec, params, states, target, ancilla)


def probe_states(dim: int, count: int, seed: int) -> np.ndarray:
    """Fixed Haar probe states used by landscape sweeps."""
    return sample_haar_states(dim, count, np.random.default_rng(seed))

