"""Qubit-network declaration and Hamiltonian assembly.

The Hamiltonian is

    H = sum_{couplings} J^{ab}_{nm} s^a_n s^b_m / 4 + sum_{fields} h^a_n s^a_n / 2

with all time dependence absorbed into the couplings (unit evolution time).
Terms are grouped into *tie groups*; each group is one free parameter and a
term contributes ``mult * value`` to its own coefficient. Tie groups encode
symmetry constraints such as two controls coupling equally to a target, or
cross-type ties like ``h^z_3 = J^{zz}_{13}``.

Sites are 0-based everywhere in code and files. Group names used by the
bundled presets follow the 1-based qubit labels of the original networks
(``J_zz_12`` couples sites 0 and 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .operators import HermitianOperator, PauliString, embed_matrix

__all__ = [
    "ConfigError",
    "Coupling",
    "Field",
    "AncillaState",
    "NetworkSpec",
    "assemble_hamiltonian",
    "term_derivative",
    "check_symmetry",
    "to_physical_units",
    "from_physical_units",
    "load_spec",
    "spec_from_dict",
    "spec_to_dict",
]

COUPLING_FACTOR = 0.25
FIELD_FACTOR = 0.5
_AXES = "xyz"


class ConfigError(ValueError):
    """Malformed network/config document. ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class Coupling:
    sites: tuple[int, int]
    axes: str
    group: str
    mult: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        object.__setattr__(self, "axes", self.axes.lower())
        if len(self.sites) != 2:
            raise ConfigError("coupling needs exactly two sites")
        if self.sites[0] == self.sites[1]:
            raise ConfigError(f"coupling sites must differ, got {self.sites}")
        if len(self.axes) != 2 or any(a not in _AXES for a in self.axes):
            raise ConfigError(f"invalid coupling axes {self.axes!r}")

    def key(self) -> tuple:
        (n, m), (a, b) = self.sites, self.axes
        return (n, m, a, b) if n < m else (m, n, b, a)

    def label(self, num_qubits: int) -> str:
        n, m = self.sites
        return PauliString.from_sites(num_qubits, {n: self.axes[0], m: self.axes[1]}).label

    @property
    def factor(self) -> float:
        return COUPLING_FACTOR


@dataclass(frozen=True)
class Field:
    site: int
    axis: str
    group: str
    mult: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "site", int(self.site))
        object.__setattr__(self, "axis", self.axis.lower())
        if self.axis not in _AXES or len(self.axis) != 1:
            raise ConfigError(f"invalid field axis {self.axis!r}")

    def key(self) -> tuple:
        return (self.site, self.axis)

    def label(self, num_qubits: int) -> str:
        return PauliString.from_sites(num_qubits, {self.site: self.axis}).label

    @property
    def factor(self) -> float:
        return FIELD_FACTOR


@dataclass(frozen=True, eq=False)
class AncillaState:
    """Pure state of the ancillae, global phase fixed.

    The first amplitude with modulus above 1e-12 is made real and
    nonnegative, so equal states compare equal.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).ravel()
        dim = a.size
        if dim < 1 or dim & (dim - 1):
            raise ConfigError(f"ancilla dimension {dim} is not a power of two")
        norm = np.linalg.norm(a)
        if not np.isfinite(norm) or norm == 0:
            raise ConfigError("ancilla state must be a nonzero finite vector")
        a = a / norm
        nz = np.flatnonzero(np.abs(a) > 1e-12)[0]
        a = a * np.exp(-1j * np.angle(a[nz]))
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_angles(cls, eta: float, xi: float) -> "AncillaState":
        """``cos(eta)|0> + e^{i xi} sin(eta)|1>`` for a single ancilla."""
        return cls(angle_state(eta, xi))

    @classmethod
    def basis(cls, index: int, num_qubits: int = 1) -> "AncillaState":
        a = np.zeros(2**num_qubits)
        a[index] = 1
        return cls(a)

    @classmethod
    def singlet(cls) -> "AncillaState":
        return cls(np.array([0, 1, -1, 0]) / np.sqrt(2))

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __eq__(self, other):
        if not isinstance(other, AncillaState):
            return NotImplemented
        return self.amplitudes.shape == other.amplitudes.shape and np.allclose(
            self.amplitudes, other.amplitudes, atol=1e-12
        )

    def __repr__(self):
        return f"AncillaState({np.round(self.amplitudes, 6).tolist()})"


def angle_state(eta: float, xi: float) -> np.ndarray:
    return np.array([np.cos(eta), np.exp(1j * xi) * np.sin(eta)])


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """Qubit graph, allowed terms and their tie groups.

    Free parameters are ordered as :attr:`groups`, followed by the ancilla
    parameters when ``ancilla_trainable`` is set: ``(eta, xi)`` for a single
    ancilla, otherwise the real and imaginary parts of the unnormalized
    amplitude vector with the imaginary part of the first one dropped.
    """

    num_qubits: int
    register: tuple[int, ...]
    ancillae: tuple[int, ...] = ()
    couplings: tuple[Coupling, ...] = ()
    fields: tuple[Field, ...] = ()
    ancilla_trainable: bool = False
    ancilla_state: AncillaState | None = None
    group_order: tuple[str, ...] | None = None

    def __post_init__(self):
        n = int(self.num_qubits)
        if n < 1:
            raise ConfigError("num_qubits must be positive", "num_qubits")
        reg, anc = tuple(int(s) for s in self.register), tuple(int(s) for s in self.ancillae)
        object.__setattr__(self, "register", reg)
        object.__setattr__(self, "ancillae", anc)
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "fields", tuple(self.fields))
        if not reg:
            raise ConfigError("register must be nonempty", "register")
        if set(reg) & set(anc):
            raise ConfigError("register and ancillae overlap", "ancillae")
        if len(set(reg)) != len(reg) or len(set(anc)) != len(anc):
            raise ConfigError("duplicate site in register/ancillae")
        if sorted(reg + anc) != list(range(n)):
            raise ConfigError(f"register and ancillae must cover sites 0..{n - 1}", "register")
        seen = set()
        for i, c in enumerate(self.couplings):
            if any(not 0 <= s < n for s in c.sites):
                raise ConfigError(f"site out of range in {c.sites}", f"couplings[{i}]")
            k = ("c",) + c.key()
            if k in seen:
                raise ConfigError(f"duplicate coupling {c.sites} {c.axes}", f"couplings[{i}]")
            seen.add(k)
        for i, f in enumerate(self.fields):
            if not 0 <= f.site < n:
                raise ConfigError(f"site {f.site} out of range", f"fields[{i}]")
            k = ("f",) + f.key()
            if k in seen:
                raise ConfigError(f"duplicate field {f.site} {f.axis}", f"fields[{i}]")
            seen.add(k)
        used = []
        for t in self.terms:
            if t.group not in used:
                used.append(t.group)
        if self.group_order is not None:
            order = tuple(self.group_order)
            if set(order) != set(used) or len(order) != len(used):
                raise ConfigError(f"group_order {order} does not match term groups {used}")
            object.__setattr__(self, "group_order", order)
        else:
            object.__setattr__(self, "group_order", tuple(used))
        if self.ancilla_state is not None and self.ancilla_state.num_qubits != len(anc):
            raise ConfigError("ancilla state dimension does not match the ancillae", "ancilla_state")
        if self.ancilla_trainable and not anc:
            raise ConfigError("trainable ancilla state requires ancillae", "ancilla_state")

    # -- structure -------------------------------------------------------
    @property
    def terms(self) -> tuple:
        return self.couplings + self.fields

    @property
    def groups(self) -> tuple[str, ...]:
        return self.group_order

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def ancilla_param_names(self) -> tuple[str, ...]:
        if not self.ancilla_trainable:
            return ()
        if len(self.ancillae) == 1:
            return ("eta", "xi")
        d = 2 ** len(self.ancillae)
        names = ["anc_re_0"]
        for k in range(1, d):
            names += [f"anc_re_{k}", f"anc_im_{k}"]
        return tuple(names)

    @property
    def param_names(self) -> tuple[str, ...]:
        return self.groups + self.ancilla_param_names

    @property
    def num_params(self) -> int:
        return len(self.param_names)

    @property
    def register_dim(self) -> int:
        return 2 ** len(self.register)

    @property
    def ancilla_dim(self) -> int:
        return 2 ** len(self.ancillae)

    def group_index(self, group: str) -> int:
        try:
            return self.groups.index(group)
        except ValueError:
            raise KeyError(f"unknown tie group {group!r}; known: {list(self.groups)}") from None

    def members(self, group: str) -> list:
        self.group_index(group)
        return [t for t in self.terms if t.group == group]

    # -- parameters ------------------------------------------------------
    def check_params(self, params) -> np.ndarray:
        p = np.asarray(params, dtype=float).ravel()
        if p.size != self.num_params:
            raise ValueError(f"expected {self.num_params} parameters {self.param_names}, got {p.size}")
        if not np.all(np.isfinite(p)):
            raise ValueError("non-finite parameter")
        return p

    def params_from_dict(self, values: Mapping[str, float], default: float | None = None) -> np.ndarray:
        unknown = set(values) - set(self.param_names)
        if unknown:
            raise ConfigError(f"unknown parameters {sorted(unknown)}", "params")
        out = []
        for name in self.param_names:
            if name in values:
                out.append(float(values[name]))
            elif default is not None:
                out.append(float(default))
            else:
                raise ConfigError(f"missing parameter {name!r}", "params")
        return np.array(out)

    def params_to_dict(self, params) -> dict[str, float]:
        p = self.check_params(params)
        return {k: float(v) for k, v in zip(self.param_names, p)}

    def ancilla_vector(self, params, ancilla: AncillaState | None = None):
        """Ancilla ket for ``params`` and its derivatives w.r.t. ancilla parameters.

        Returns ``(psi, dpsi)`` where ``dpsi`` has one row per ancilla
        parameter (empty unless the state is trainable).
        """
        if not self.ancillae:
            return np.ones(1, dtype=complex), np.zeros((0, 1), dtype=complex)
        if not self.ancilla_trainable:
            state = ancilla if ancilla is not None else self.ancilla_state
            if state is None:
                raise ValueError("network has ancillae but no ancilla state was given")
            if state.num_qubits != len(self.ancillae):
                raise ValueError("ancilla state dimension does not match the ancillae")
            return state.amplitudes.copy(), np.zeros((0, self.ancilla_dim), dtype=complex)
        if ancilla is not None:
            raise ValueError("ancilla state is trainable; it is taken from the parameters")
        tail = np.asarray(params, dtype=float)[self.num_groups:]
        if len(self.ancillae) == 1:
            eta, xi = tail
            psi = angle_state(eta, xi)
            d_eta = np.array([-np.sin(eta), np.exp(1j * xi) * np.cos(eta)])
            d_xi = np.array([0, 1j * np.exp(1j * xi) * np.sin(eta)])
            return psi, np.array([d_eta, d_xi])
        d = self.ancilla_dim
        c = np.zeros(d, dtype=complex)
        c[0] = tail[0]
        c[1:] = tail[1::2] + 1j * tail[2::2]
        r = np.linalg.norm(c)
        psi = c / r
        rows = []
        for k in range(d):
            e = np.zeros(d)
            e[k] = 1
            rows.append(e / r - c * c[k].real / r**3)
            if k:
                rows.append(1j * e / r - c * c[k].imag / r**3)
        return psi, np.array(rows)

    def ancilla_for(self, params, ancilla: AncillaState | None = None) -> AncillaState | None:
        if not self.ancillae:
            return None
        return AncillaState(self.ancilla_vector(params, ancilla)[0])

    # -- operators ---------------------------------------------------------
    def generator(self, group: str) -> HermitianOperator:
        out: dict[str, float] = {}
        for t in self.members(group):
            label = t.label(self.num_qubits)
            out[label] = out.get(label, 0.0) + t.factor * t.mult
        return HermitianOperator(self.num_qubits, out)

    @cached_property
    def generator_stack(self) -> np.ndarray:
        """Dense ``dH/dlambda_g`` for all groups, shape ``(G, 2^N, 2^N)``."""
        dim = 2**self.num_qubits
        out = np.zeros((self.num_groups, dim, dim), dtype=complex)
        for g, name in enumerate(self.groups):
            out[g] = self.generator(name).dense
        return out

    def hamiltonian_matrix(self, params) -> np.ndarray:
        p = self.check_params(params)
        if not self.num_groups:
            return np.zeros((2**self.num_qubits,) * 2, dtype=complex)
        return np.tensordot(p[: self.num_groups], self.generator_stack, axes=1)

    def term_coefficients(self, params) -> list[tuple[Any, float]]:
        """Per-term coefficient (``J`` or ``h`` value) for ``params``."""
        p = self.check_params(params)
        return [(t, t.mult * p[self.group_index(t.group)]) for t in self.terms]

    def physical_units(self) -> list[tuple[str, tuple]]:
        """Independently tunable hardware elements, as ``(group, key)`` pairs.

        A unit is one coupling (all axes between a pair of sites) or one local
        field (all axes on a site) within a tie group. Fabrication errors act
        on units, not on the tie groups that encode design symmetries.
        """
        units: list[tuple[str, tuple]] = []
        for t in self.terms:
            key = (t.group, ("c", tuple(sorted(t.sites))) if isinstance(t, Coupling) else ("f", t.site))
            if key not in units:
                units.append(key)
        return units

    def _unit_of(self, t) -> tuple[str, tuple]:
        return (t.group, ("c", tuple(sorted(t.sites))) if isinstance(t, Coupling) else ("f", t.site))

    def untied(self) -> "NetworkSpec":
        """Same network with every physical unit promoted to its own group.

        Group names are ``<group>@<sites>``; see :meth:`untied_params` for the
        matching parameter vector.
        """
        names = {u: f"{u[0]}@{'-'.join(str(s) for s in np.atleast_1d(u[1][1]))}"
                 for u in self.physical_units()}
        scale = self._unit_scales()
        couplings = tuple(
            Coupling(c.sites, c.axes, names[self._unit_of(c)], c.mult / scale[self._unit_of(c)])
            for c in self.couplings
        )
        fields = tuple(
            Field(f.site, f.axis, names[self._unit_of(f)], f.mult / scale[self._unit_of(f)])
            for f in self.fields
        )
        return NetworkSpec(
            self.num_qubits, self.register, self.ancillae, couplings, fields,
            self.ancilla_trainable, self.ancilla_state,
            tuple(names[u] for u in self.physical_units()),
        )

    def _unit_scales(self) -> dict:
        # a unit whose terms share one multiplier is parameterized by its coefficient
        scale = {}
        for t in self.terms:
            u = self._unit_of(t)
            if u not in scale:
                scale[u] = t.mult
            elif scale[u] != t.mult:
                scale[u] = None
        return {u: (1.0 if m is None or m == 0 else m) for u, m in scale.items()}

    def untied_params(self, params) -> np.ndarray:
        p = self.check_params(params)
        scale = self._unit_scales()
        vals = [scale[u] * p[self.group_index(u[0])] for u in self.physical_units()]
        return np.concatenate([vals, p[self.num_groups:]])

    def with_groups_removed(self, groups: Sequence[str]) -> "NetworkSpec":
        drop = set(groups)
        for g in drop:
            self.group_index(g)
        order = tuple(g for g in self.groups if g not in drop)
        return NetworkSpec(
            self.num_qubits, self.register, self.ancillae,
            tuple(c for c in self.couplings if c.group not in drop),
            tuple(f for f in self.fields if f.group not in drop),
            self.ancilla_trainable, self.ancilla_state, order,
        )

    def with_terms_added(self, terms: Sequence) -> "NetworkSpec":
        couplings = self.couplings + tuple(t for t in terms if isinstance(t, Coupling))
        fields = self.fields + tuple(t for t in terms if isinstance(t, Field))
        order = list(self.groups)
        for t in terms:
            if t.group not in order:
                order.append(t.group)
        return NetworkSpec(
            self.num_qubits, self.register, self.ancillae, couplings, fields,
            self.ancilla_trainable, self.ancilla_state, tuple(order),
        )

    def with_ancilla(self, state: AncillaState | None, trainable: bool = False) -> "NetworkSpec":
        return NetworkSpec(
            self.num_qubits, self.register, self.ancillae, self.couplings, self.fields,
            trainable, state, self.groups,
        )


def assemble_hamiltonian(spec: NetworkSpec, params) -> HermitianOperator:
    """Hamiltonian for the free parameters ``params`` as Pauli coefficients."""
    p = spec.check_params(params)
    out: dict[str, float] = {}
    for t, coeff in spec.term_coefficients(p):
        label = t.label(spec.num_qubits)
        out[label] = out.get(label, 0.0) + t.factor * coeff
    return HermitianOperator(spec.num_qubits, out)


def term_derivative(spec: NetworkSpec, group: str) -> HermitianOperator:
    """``dH/dlambda`` for one tie group (independent of ``lambda``)."""
    return spec.generator(group)


def check_symmetry(spec: NetworkSpec, S, atol: float = 1e-10) -> bool:
    """True iff ``S`` on the register (identity on ancillae) commutes with every group generator."""
    S = np.asarray(S, dtype=complex)
    if S.shape != (spec.register_dim, spec.register_dim):
        raise ValueError(f"symmetry must be {spec.register_dim}x{spec.register_dim}, got {S.shape}")
    full = embed_matrix(S, spec.register, spec.num_qubits)
    for G in spec.generator_stack:
        if np.max(np.abs(full @ G - G @ full), initial=0.0) >= atol:
            return False
    return True


def to_physical_units(values, gate_time: float):
    """Dimensionless couplings to MHz for a gate time in seconds."""
    if not gate_time > 0:
        raise ValueError("gate_time must be positive")
    return np.asarray(values, dtype=float) / (gate_time * 1e6)


def from_physical_units(values_mhz, gate_time: float):
    if not gate_time > 0:
        raise ValueError("gate_time must be positive")
    return np.asarray(values_mhz, dtype=float) * (gate_time * 1e6)


# -- JSON documents ----------------------------------------------------------

_SPEC_KEYS = {"num_qubits", "register", "ancillae", "couplings", "fields", "ancilla_state", "groups"}
_COUPLING_KEYS = {"sites", "axes", "group", "mult"}
_FIELD_KEYS = {"site", "axis", "group", "mult"}
_ANCILLA_KEYS = {"trainable", "eta", "xi", "amplitudes"}


def _reject_unknown(doc: Mapping, allowed: set, path: str):
    if not isinstance(doc, Mapping):
        raise ConfigError("expected an object", path)
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}", path)


def _require(doc: Mapping, key: str, path: str):
    if key not in doc:
        raise ConfigError(f"missing required key {key!r}", path)
    return doc[key]


def _parse_ancilla(doc: Mapping, n_anc: int, path: str) -> tuple[bool, AncillaState | None]:
    _reject_unknown(doc, _ANCILLA_KEYS, path)
    trainable = bool(doc.get("trainable", False))
    has_angles = "eta" in doc or "xi" in doc
    if has_angles and "amplitudes" in doc:
        raise ConfigError("give either eta/xi or amplitudes, not both", path)
    state = None
    try:
        if has_angles:
            if n_anc != 1:
                raise ConfigError("angle form requires exactly one ancilla", path)
            state = AncillaState.from_angles(float(doc.get("eta", 0.0)), float(doc.get("xi", 0.0)))
        elif "amplitudes" in doc:
            amps = [complex(*a) if isinstance(a, (list, tuple)) else complex(a) for a in doc["amplitudes"]]
            state = AncillaState(np.array(amps))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), path) from None
    return trainable, state


def spec_from_dict(doc: Mapping) -> NetworkSpec:
    """Parse a network document (unknown keys are rejected)."""
    _reject_unknown(doc, _SPEC_KEYS, "network")
    n = _require(doc, "num_qubits", "network")
    if not isinstance(n, int):
        raise ConfigError("num_qubits must be an integer", "network.num_qubits")
    couplings, fields = [], []
    for i, c in enumerate(doc.get("couplings", [])):
        path = f"network.couplings[{i}]"
        _reject_unknown(c, _COUPLING_KEYS, path)
        try:
            couplings.append(Coupling(tuple(_require(c, "sites", path)), _require(c, "axes", path),
                                      str(_require(c, "group", path)), float(c.get("mult", 1.0))))
        except ConfigError as exc:
            raise ConfigError(str(exc), path) from None
    for i, f in enumerate(doc.get("fields", [])):
        path = f"network.fields[{i}]"
        _reject_unknown(f, _FIELD_KEYS, path)
        try:
            fields.append(Field(_require(f, "site", path), _require(f, "axis", path),
                                str(_require(f, "group", path)), float(f.get("mult", 1.0))))
        except ConfigError as exc:
            raise ConfigError(str(exc), path) from None
    ancillae = tuple(doc.get("ancillae", ()))
    trainable, state = False, None
    if "ancilla_state" in doc:
        trainable, state = _parse_ancilla(doc["ancilla_state"], len(ancillae), "network.ancilla_state")
    groups = tuple(doc["groups"]) if "groups" in doc else None
    try:
        return NetworkSpec(n, tuple(_require(doc, "register", "network")), ancillae,
                           tuple(couplings), tuple(fields), trainable, state, groups)
    except ConfigError as exc:
        raise ConfigError(str(exc), exc.path and f"network.{exc.path}" or "network") from None


def spec_to_dict(spec: NetworkSpec) -> dict:
    doc: dict[str, Any] = {
        "num_qubits": spec.num_qubits,
        "register": list(spec.register),
        "ancillae": list(spec.ancillae),
        "couplings": [
            {"sites": list(c.sites), "axes": c.axes, "group": c.group, "mult": c.mult}
            for c in spec.couplings
        ],
        "fields": [
            {"site": f.site, "axis": f.axis, "group": f.group, "mult": f.mult} for f in spec.fields
        ],
        "groups": list(spec.groups),
    }
    if spec.ancillae:
        anc: dict[str, Any] = {"trainable": spec.ancilla_trainable}
        if spec.ancilla_state is not None:
            anc["amplitudes"] = [[a.real, a.imag] for a in spec.ancilla_state.amplitudes]
        doc["ancilla_state"] = anc
    return doc


def load_spec(path: str | Path) -> NetworkSpec:
    with open(path) as fh:
        return spec_from_dict(json.load(fh))
