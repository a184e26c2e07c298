"""Learning the couplings: stochastic ascent on F_psi, then deterministic refinement of F_bar.

Every random choice derives from ``TrainConfig.rng_seed`` through
:class:`numpy.random.SeedSequence`, so a run is reproducible bit for bit.
Wall-clock time is kept out of the serialized trace for that reason.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Mapping, Sequence

import numpy as np

from .fidelity import (
    GateTarget,
    avg_fidelity,
    grad_avg_fidelity,
    grad_state_fidelity,
    probe_states,
    sample_haar_state,
    state_fidelities,
)
from .network import AncillaState, ConfigError, NetworkSpec

__all__ = [
    "TrainConfig",
    "TrainTrace",
    "TrainResult",
    "PerturbSpec",
    "PerturbResult",
    "SweepResult",
    "sgd_run",
    "refine",
    "train",
    "perturb_study",
    "sweep",
    "random_initial_params",
]


@dataclass(frozen=True)
class TrainConfig:
    eps0: float = 0.3
    L: int = 1
    switch_threshold: float = 0.95
    target_fbar: float = 1 - 1e-6
    max_sgd_iters: int = 5000
    max_refine_iters: int = 2000
    num_restarts: int = 10
    init_range: tuple[float, float] = (-10.0, 10.0)
    rng_seed: int = 0
    checkpoint_every: int = 50
    refine_step: float = 0.1
    grad_tol: float = 1e-9
    min_step: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "init_range", tuple(float(x) for x in self.init_range))
        if not self.eps0 > 0:
            raise ConfigError("eps0 must be positive", "train.eps0")
        if not 0 < self.switch_threshold < self.target_fbar <= 1:
            raise ConfigError("need 0 < switch_threshold < target_fbar <= 1", "train.switch_threshold")
        if self.L < 1:
            raise ConfigError("L must be at least 1", "train.L")
        for name in ("max_sgd_iters", "max_refine_iters", "num_restarts"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative", f"train.{name}")
        if self.checkpoint_every < 1:
            raise ConfigError("checkpoint_every must be at least 1", "train.checkpoint_every")
        lo, hi = self.init_range
        if len(self.init_range) != 2 or not lo < hi:
            raise ConfigError("init_range must be [low, high] with low < high", "train.init_range")
        if not self.refine_step > 0:
            raise ConfigError("refine_step must be positive", "train.refine_step")

    def learning_rate(self, m: int) -> float:
        """``eps0 / sqrt(m)`` for iteration ``m >= 1``."""
        return self.eps0 / np.sqrt(m)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "TrainConfig":
        if not isinstance(doc, Mapping):
            raise ConfigError("expected an object", "train")
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}", "train")
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc), "train") from None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["init_range"] = list(self.init_range)
        return d


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    return x


@dataclass
class TrainTrace:
    param_names: list[str]
    config: dict
    restart: int = 0
    initial_params: list[float] = field(default_factory=list)
    sgd: list[dict] = field(default_factory=list)
    refine: list[dict] = field(default_factory=list)
    checkpoints: list[dict] = field(default_factory=list)
    final_params: list[float] = field(default_factory=list)
    final_fbar: float = float("nan")
    switched: bool = False
    status: str = "ok"
    wall_time: float = 0.0

    def checkpoint(self, stage: str, iteration: int, f_bar: float):
        self.checkpoints.append({"stage": stage, "iteration": iteration, "f_bar": float(f_bar)})

    def as_dict(self, include_timing: bool = False) -> dict:
        d = _clean(asdict(self))
        if not include_timing:
            d.pop("wall_time")
        return d

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.as_dict(include_timing), indent=1, sort_keys=True)

    def checkpoints_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["stage", "iteration", "f_bar"])
        for c in self.checkpoints:
            w.writerow([c["stage"], c["iteration"], repr(c["f_bar"])])
        return buf.getvalue()


@dataclass
class TrainResult:
    best: TrainTrace | None
    traces: list[TrainTrace]
    success: bool

    @property
    def final_fbar(self) -> float:
        return self.best.final_fbar if self.best is not None else float("nan")


def random_initial_params(spec: NetworkSpec, config: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    """Couplings uniform on ``init_range``; ancilla angles uniform on their natural range."""
    lo, hi = config.init_range
    p = rng.uniform(lo, hi, size=spec.num_groups)
    names = spec.ancilla_param_names
    if names == ("eta", "xi"):
        tail = np.array([rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)])
    else:
        tail = rng.standard_normal(len(names))
    return np.concatenate([p, tail])


def _new_trace(spec: NetworkSpec, config: TrainConfig, restart: int, p0) -> TrainTrace:
    return TrainTrace(list(spec.param_names), config.as_dict(), restart, [float(v) for v in p0])


def sgd_run(spec: NetworkSpec, target: GateTarget, config: TrainConfig,
            initial_params=None, ancilla: AncillaState | None = None,
            seed: np.random.SeedSequence | int | None = None, restart: int = 0) -> TrainTrace:
    """Stochastic gradient ascent on ``F_psi`` with ``eps_m = eps0 / sqrt(m)``.

    One iteration samples a Haar state (from its own recorded seed) and takes
    ``L`` gradient steps on it. ``F_bar`` is checkpointed at ``m = 0`` and every
    ``checkpoint_every`` iterations; the run stops once a checkpoint exceeds
    ``switch_threshold`` or after ``max_sgd_iters``.
    """
    t0 = time.perf_counter()
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(
        config.rng_seed if seed is None else seed)
    rng = np.random.default_rng(ss)
    p = (random_initial_params(spec, config, rng) if initial_params is None
         else spec.check_params(initial_params).copy())
    trace = _new_trace(spec, config, restart, p)
    fbar = avg_fidelity(spec, p, target, ancilla)
    trace.checkpoint("sgd", 0, fbar)
    m = 0
    while fbar <= config.switch_threshold and m < config.max_sgd_iters and spec.num_params:
        m += 1
        eps = config.learning_rate(m)
        state_seed = int(rng.integers(2**63))
        psi = sample_haar_state(spec.register_dim, np.random.default_rng(state_seed))
        f_before = None
        for _ in range(config.L):
            g, f = grad_state_fidelity(spec, p, psi, target, ancilla, return_value=True)
            if f_before is None:
                f_before = f
            if not np.all(np.isfinite(g)):
                trace.status = f"aborted: non-finite gradient at iteration {m}"
                break
            p = p + eps * g
        if trace.status != "ok":
            break
        f_after = float(state_fidelities(spec, p, psi[None], target, ancilla)[0])
        trace.sgd.append({"m": m, "eps": eps, "state_seed": state_seed,
                          "f_psi_before": f_before, "f_psi_after": f_after})
        if m % config.checkpoint_every == 0:
            fbar = avg_fidelity(spec, p, target, ancilla)
            trace.checkpoint("sgd", m, fbar)
    if trace.checkpoints[-1]["iteration"] != m and trace.status == "ok":
        fbar = avg_fidelity(spec, p, target, ancilla)
        trace.checkpoint("sgd", m, fbar)
    trace.switched = fbar > config.switch_threshold
    trace.final_params = [float(v) for v in p]
    trace.final_fbar = float(fbar)
    trace.wall_time = time.perf_counter() - t0
    return trace


def refine(spec: NetworkSpec, target: GateTarget, start_params, config: TrainConfig,
           ancilla: AncillaState | None = None, trace: TrainTrace | None = None) -> TrainTrace:
    """Gradient ascent on ``F_bar`` with a backtracking line search.

    A trial step ``p + s * grad`` is accepted only if it raises ``F_bar``;
    otherwise ``s`` is halved. After an accepted step ``s`` doubles, so the
    step adapts to the landscape's scale. ``F_bar`` never decreases.
    """
    t0 = time.perf_counter()
    p = spec.check_params(start_params).copy()
    if trace is None:
        trace = _new_trace(spec, config, 0, p)
    # every comparison uses the superoperator path, so the trace is exactly monotone
    f = avg_fidelity(spec, p, target, ancilla)
    g = grad_avg_fidelity(spec, p, target, ancilla)
    trace.checkpoint("refine", 0, f)
    s = config.refine_step
    it = 0
    reason = "max_refine_iters"
    while it < config.max_refine_iters:
        gnorm = float(np.linalg.norm(g))
        if gnorm < config.grad_tol:
            reason = "gradient norm below tolerance"
            break
        accepted = False
        while s >= config.min_step:
            trial = p + s * g
            f_trial = avg_fidelity(spec, trial, target, ancilla)
            if f_trial > f:
                accepted = True
                break
            s /= 2
        if not accepted:
            reason = "step below minimum"
            break
        it += 1
        p, f = trial, f_trial
        trace.refine.append({"iteration": it, "step": s, "grad_norm": gnorm, "f_bar": f})
        g = grad_avg_fidelity(spec, p, target, ancilla)
        s *= 2
    trace.checkpoint("refine", it, f)
    trace.final_params = [float(v) for v in p]
    trace.final_fbar = float(f)
    if trace.status == "ok":
        trace.status = f"ok: refine stopped ({reason})"
    trace.wall_time += time.perf_counter() - t0
    return trace


def train(spec: NetworkSpec, target: GateTarget, config: TrainConfig,
          ancilla: AncillaState | None = None, initial_params=None) -> TrainResult:
    """Restarted SGD followed by refinement; stops at the first success.

    Restart ``k`` draws from the ``k``-th child of ``SeedSequence(rng_seed)``.
    ``initial_params`` seeds only the first restart.
    """
    traces: list[TrainTrace] = []
    children = np.random.SeedSequence(config.rng_seed).spawn(config.num_restarts)
    for k, child in enumerate(children):
        p0 = initial_params if k == 0 else None
        tr = sgd_run(spec, target, config, p0, ancilla, seed=child, restart=k)
        if tr.switched and tr.status == "ok" and config.max_refine_iters > 0:
            tr = refine(spec, target, tr.final_params, config, ancilla, trace=tr)
        traces.append(tr)
        if tr.final_fbar >= config.target_fbar:
            break
    if not traces:
        return TrainResult(None, [], False)
    best = max(traces, key=lambda t: (t.final_fbar, -t.restart))
    return TrainResult(best, traces, bool(best.final_fbar >= config.target_fbar))


# -- robustness ----------------------------------------------------------------

@dataclass(frozen=True)
class PerturbSpec:
    """Additive errors ``lambda_k -> lambda_k + epsilon * r_k`` with ``r_k ~ U[0, 1]``.

    ``r_k`` is drawn per physical unit (one coupling or one local field), so
    terms tied together by design are perturbed independently.
    """

    epsilon: float
    num_draws: int = 200
    include_ancilla_angles: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ConfigError("epsilon must be non-negative", "perturb.epsilon")
        if self.num_draws < 1:
            raise ConfigError("num_draws must be at least 1", "perturb.num_draws")


@dataclass
class PerturbResult:
    spec: PerturbSpec
    units: list[str]
    f_bar: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.f_bar.mean())

    @property
    def min(self) -> float:
        return float(self.f_bar.min())

    @property
    def max(self) -> float:
        return float(self.f_bar.max())

    def summary(self) -> dict:
        return {"epsilon": self.spec.epsilon, "num_draws": self.spec.num_draws,
                "seed": self.spec.rng_seed, "include_ancilla_angles": self.spec.include_ancilla_angles,
                "units": self.units, "mean": self.mean, "min": self.min, "max": self.max}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["draw", "f_bar"])
        for k, v in enumerate(self.f_bar):
            w.writerow([k, repr(float(v))])
        return buf.getvalue()


def perturb_study(spec: NetworkSpec, target: GateTarget, params, ancilla: AncillaState | None,
                  pspec: PerturbSpec) -> PerturbResult:
    loose = spec.untied()
    base = spec.untied_params(params)
    n_units = loose.num_groups
    n_pert = n_units + (len(spec.ancilla_param_names) if pspec.include_ancilla_angles else 0)
    rng = np.random.default_rng(pspec.rng_seed)
    r = rng.uniform(0.0, 1.0, size=(pspec.num_draws, n_pert))
    out = np.empty(pspec.num_draws)
    for k in range(pspec.num_draws):
        p = base.copy()
        p[:n_pert] += pspec.epsilon * r[k]
        out[k] = avg_fidelity(loose, p, target, ancilla)
    return PerturbResult(pspec, list(loose.param_names[:n_pert]), out)


# -- landscape -----------------------------------------------------------------

@dataclass
class SweepResult:
    group: str
    grid: np.ndarray
    f_bar: np.ndarray
    f_psi: np.ndarray  # (len(grid), num_probes)

    def local_maxima(self) -> list[int]:
        """Interior grid indices where ``F_bar`` is strictly above both neighbours."""
        f = self.f_bar
        return [i for i in range(1, f.size - 1) if f[i] > f[i - 1] and f[i] > f[i + 1]]

    def argmax(self) -> int:
        return int(np.argmax(self.f_bar))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param_value", "f_bar"] + [f"f_psi_{k + 1}" for k in range(self.f_psi.shape[1])])
        for v, fb, row in zip(self.grid, self.f_bar, self.f_psi):
            w.writerow([repr(float(v)), repr(float(fb))] + [repr(float(x)) for x in row])
        return buf.getvalue()


def sweep(spec: NetworkSpec, target: GateTarget, params, ancilla: AncillaState | None,
          group: str, grid: Sequence[float], probe_count: int = 3, seed: int = 0) -> SweepResult:
    """Scan one parameter with all others fixed."""
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    if group not in spec.param_names:
        raise KeyError(f"unknown tie group {group!r}; known: {list(spec.param_names)}")
    j = spec.param_names.index(group)
    base = spec.check_params(params)
    probes = probe_states(spec.register_dim, probe_count, seed) if probe_count else None
    fb = np.empty(grid.size)
    fp = np.empty((grid.size, probe_count))
    for i, v in enumerate(grid):
        p = base.copy()
        p[j] = v
        fb[i] = avg_fidelity(spec, p, target, ancilla)
        if probe_count:
            fp[i] = state_fidelities(spec, p, probes, target, ancilla)
    return SweepResult(group, grid, fb, fp)
