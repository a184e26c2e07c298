"""N-qubit operator algebra on the Pauli-string basis.

Basis ordering: computational basis ``|q_0 q_1 ... q_{N-1}>`` with site 0 the
most significant tensor factor. A Pauli string is written as a label such as
``"XIZI"`` where character ``k`` acts on site ``k``.

Internally a string is also encoded as a pair of bit masks ``(x, z)`` with
``P(x, z) = i^{|x & z|} X^x Z^z``, so that products reduce to XORs plus a
phase computed from popcounts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "PAULI_MATRICES",
    "PauliString",
    "HermitianOperator",
    "pauli_matrix",
    "hs_inner",
    "comm_h",
    "partial_trace",
    "embed",
    "embed_matrix",
    "pauli_labels",
    "permute_sites",
    "is_unitary",
    "is_hermitian",
    "max_abs",
]

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_XZ_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_FROM_BITS = {v: k for k, v in _XZ_BITS.items()}
_PAULI_STACK = np.stack([PAULI_MATRICES[a] for a in "IXYZ"])

COEFF_TOL = 1e-14


def max_abs(a) -> float:
    """Max-abs entry norm, the comparison norm used throughout the package."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(m, atol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and max_abs(m - m.conj().T) < atol


def is_unitary(m, atol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return max_abs(m.conj().T @ m - np.eye(m.shape[0])) < atol


def _num_qubits_of_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-site Pauli matrices, e.g. ``PauliString("ZZI")``."""

    label: str

    def __post_init__(self):
        label = self.label.upper()
        if not label or any(c not in _XZ_BITS for c in label):
            raise ValueError(f"invalid Pauli label {self.label!r}")
        object.__setattr__(self, "label", label)

    @classmethod
    def from_sites(cls, num_qubits: int, axes: Mapping[int, str]) -> "PauliString":
        chars = ["I"] * num_qubits
        for site, axis in axes.items():
            if not 0 <= site < num_qubits:
                raise ValueError(f"site {site} out of range for {num_qubits} qubits")
            chars[site] = axis.upper()
        return cls("".join(chars))

    @property
    def num_qubits(self) -> int:
        return len(self.label)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.label)

    @property
    def bits(self) -> tuple[int, int]:
        x = z = 0
        for c in self.label:
            bx, bz = _XZ_BITS[c]
            x = (x << 1) | bx
            z = (z << 1) | bz
        return x, z

    def matrix(self) -> np.ndarray:
        return pauli_matrix(self)

    def __str__(self) -> str:
        return self.label


def pauli_matrix(p: PauliString | str) -> np.ndarray:
    """Dense matrix of a Pauli string (Kronecker product in site order)."""
    label = p.label if isinstance(p, PauliString) else PauliString(p).label
    out = np.ones((1, 1), dtype=complex)
    for c in label:
        out = np.kron(out, PAULI_MATRICES[c])
    return out


def _label_from_bits(x: int, z: int, n: int) -> str:
    return "".join(
        _FROM_BITS[((x >> (n - 1 - k)) & 1, (z >> (n - 1 - k)) & 1)] for k in range(n)
    )


def _popcount(a: int) -> int:
    return int(a).bit_count()


@lru_cache(maxsize=1 << 16)
def _pauli_product(p: str, q: str) -> tuple[complex, str]:
    """Return ``(phase, r)`` with ``P_p P_q = phase * P_r``."""
    n = len(p)
    x1, z1 = PauliString(p).bits
    x2, z2 = PauliString(q).bits
    x3, z3 = x1 ^ x2, z1 ^ z2
    e = (_popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x3 & z3)
         + 2 * _popcount(z1 & x2)) % 4
    return 1j**e, _label_from_bits(x3, z3, n)


def _coefficients_from_dense(m: np.ndarray) -> np.ndarray:
    n = _num_qubits_of_dim(m.shape[0])
    t = np.asarray(m, dtype=complex).reshape((2,) * (2 * n))
    # move to (i_0, j_0, i_1, j_1, ...) and contract each pair with the Pauli stack
    order = [a for k in range(n) for a in (k, n + k)]
    t = t.transpose(order)
    for _ in range(n):
        # leading pair (i, j) belongs to the next site; Tr(P m) uses P[j, i]
        t = np.tensordot(_PAULI_STACK, t, axes=([2, 1], [0, 1]))
        t = np.moveaxis(t, 0, -1)
    return t / 2**n


@dataclass(frozen=True)
class HermitianOperator:
    """Hermitian operator stored as real coefficients over Pauli strings.

    ``coeffs`` maps a Pauli label (length ``num_qubits``) to its real
    coefficient. The dense matrix is materialized lazily.
    """

    num_qubits: int
    coeffs: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        clean = {}
        for label, c in self.coeffs.items():
            label = PauliString(label).label
            if len(label) != self.num_qubits:
                raise ValueError(f"label {label!r} does not have {self.num_qubits} sites")
            c = float(np.real(c))
            if not np.isfinite(c):
                raise ValueError(f"non-finite coefficient for {label}")
            if abs(c) > COEFF_TOL:
                clean[label] = clean.get(label, 0.0) + c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def zero(cls, num_qubits: int) -> "HermitianOperator":
        return cls(num_qubits, {})

    @classmethod
    def from_pauli(cls, label: str, coeff: float = 1.0) -> "HermitianOperator":
        return cls(len(label), {label: coeff})

    @classmethod
    def from_matrix(cls, m, atol: float = 1e-12) -> "HermitianOperator":
        m = np.asarray(m, dtype=complex)
        if not is_hermitian(m, atol=max(atol, 1e-12 * max(1.0, max_abs(m)))):
            raise ValueError("matrix is not Hermitian")
        n = _num_qubits_of_dim(m.shape[0])
        c = _coefficients_from_dense(m)
        labels = ["".join(t) for t in _product_labels(n)]
        vals = c.real.ravel()
        return cls(n, {l: v for l, v in zip(labels, vals) if abs(v) > COEFF_TOL})

    @classmethod
    def from_vector(cls, num_qubits: int, vec) -> "HermitianOperator":
        """Inverse of :meth:`vector` (index order of :func:`pauli_labels`)."""
        labels = pauli_labels(num_qubits)
        return cls(num_qubits, {l: v for l, v in zip(labels, vec) if abs(v) > COEFF_TOL})

    @cached_property
    def dense(self) -> np.ndarray:
        m = np.zeros((2**self.num_qubits,) * 2, dtype=complex)
        for label, c in self.coeffs.items():
            m += c * pauli_matrix(label)
        return m

    def vector(self) -> np.ndarray:
        """Coefficients as a dense real vector of length ``4**num_qubits``."""
        v = np.zeros(4**self.num_qubits)
        for label, c in self.coeffs.items():
            v[_label_index(label)] = c
        return v

    @property
    def max_weight(self) -> int:
        return max((PauliString(l).weight for l in self.coeffs), default=0)

    def trace_normalized(self) -> float:
        """``Tr(op) / 2^N``, i.e. the identity coefficient."""
        return self.coeffs.get("I" * self.num_qubits, 0.0)

    def traceless(self) -> "HermitianOperator":
        ident = "I" * self.num_qubits
        return HermitianOperator(self.num_qubits, {l: c for l, c in self.coeffs.items() if l != ident})

    def norm(self) -> float:
        """Norm induced by :func:`hs_inner`."""
        return float(np.sqrt(sum(c * c for c in self.coeffs.values())))

    def _check(self, other: "HermitianOperator"):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        if other.num_qubits != self.num_qubits:
            raise ValueError(f"dimension mismatch: {self.num_qubits} vs {other.num_qubits} qubits")

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        self._check(other)
        out = dict(self.coeffs)
        for l, c in other.coeffs.items():
            out[l] = out.get(l, 0.0) + c
        return HermitianOperator(self.num_qubits, out)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        return self + (-1.0) * other

    def __neg__(self) -> "HermitianOperator":
        return (-1.0) * self

    def __mul__(self, scalar: float) -> "HermitianOperator":
        scalar = float(scalar)
        return HermitianOperator(self.num_qubits, {l: scalar * c for l, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __repr__(self) -> str:
        terms = " + ".join(f"{c:.6g}*{l}" for l, c in sorted(self.coeffs.items()))
        return f"HermitianOperator({self.num_qubits}, {terms or '0'})"


def _product_labels(n: int):
    import itertools

    return itertools.product("IXYZ", repeat=n)


def pauli_labels(num_qubits: int) -> list[str]:
    """All Pauli labels in the canonical vector order (I, X, Y, Z per site)."""
    return ["".join(t) for t in _product_labels(num_qubits)]


_INDEX = {"I": 0, "X": 1, "Y": 2, "Z": 3}


def _label_index(label: str) -> int:
    idx = 0
    for c in label:
        idx = 4 * idx + _INDEX[c]
    return idx


def hs_inner(a: HermitianOperator, b: HermitianOperator) -> float:
    """Normalized Hilbert-Schmidt inner product ``Tr(a b) / 2^N``."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    small, big = (a, b) if len(a.coeffs) <= len(b.coeffs) else (b, a)
    return float(sum(c * big.coeffs.get(l, 0.0) for l, c in small.coeffs.items()))


def comm_h(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
    """Hermitized commutator ``i (ab - ba)``, computed on Pauli coefficients.

    Two Pauli strings either commute (no contribution) or anticommute, in
    which case ``i[P, Q] = 2i * P Q`` is a real multiple of a Pauli string.
    """
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    out: dict[str, float] = {}
    for p, cp in a.coeffs.items():
        for q, cq in b.coeffs.items():
            phase, r = _pauli_product(p, q)
            if phase.real != 0:  # commuting pair: P Q = +-Q P with real phase
                continue
            val = (2j * phase).real * cp * cq
            out[r] = out.get(r, 0.0) + val
    return HermitianOperator(a.num_qubits, out)


def permute_sites(m: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of an operator.

    The returned matrix has new site ``k`` equal to old site ``order[k]``.
    """
    m = np.asarray(m)
    n = _num_qubits_of_dim(m.shape[0])
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} sites")
    t = m.reshape((2,) * (2 * n))
    t = t.transpose(order + [n + k for k in order])
    return t.reshape(m.shape)


def partial_trace(rho, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on the ``keep`` sites (kept in ascending order)."""
    rho = np.asarray(rho)
    n = _num_qubits_of_dim(rho.shape[0])
    keep = sorted(set(keep))
    if any(not 0 <= k < n for k in keep):
        raise ValueError(f"site set {keep} invalid for {n} qubits")
    drop = [k for k in range(n) if k not in keep]
    t = permute_sites(rho, keep + drop)
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    return np.einsum("iaja->ij", t.reshape(dk, dd, dk, dd))


def embed(op: HermitianOperator, sites: Sequence[int], total_sites: int) -> HermitianOperator:
    """Place ``op`` (acting on ``len(sites)`` qubits) on ``sites`` of a larger system."""
    sites = list(sites)
    if len(sites) != op.num_qubits:
        raise ValueError("number of sites does not match the operator")
    if len(set(sites)) != len(sites) or any(not 0 <= s < total_sites for s in sites):
        raise ValueError(f"invalid site subset {sites} for {total_sites} sites")
    out = {}
    for label, c in op.coeffs.items():
        chars = ["I"] * total_sites
        for s, ch in zip(sites, label):
            chars[s] = ch
        out["".join(chars)] = c
    return HermitianOperator(total_sites, out)


def embed_matrix(m, sites: Sequence[int], total_sites: int) -> np.ndarray:
    """Dense version of :func:`embed` for arbitrary (e.g. unitary) matrices."""
    m = np.asarray(m, dtype=complex)
    k = _num_qubits_of_dim(m.shape[0])
    sites = list(sites)
    if len(sites) != k or len(set(sites)) != k or any(not 0 <= s < total_sites for s in sites):
        raise ValueError(f"invalid site subset {sites} for {total_sites} sites")
    rest = [s for s in range(total_sites) if s not in sites]
    full = np.kron(m, np.eye(2 ** len(rest)))
    # full is ordered (sites..., rest...); bring it back to 0..N-1
    order = sites + rest
    inverse = [order.index(s) for s in range(total_sites)]
    return permute_sites(full, inverse)
