"""Command-line front end: ``qnetgate {eval,train,sweep,perturb,liecheck,units}``.

Inputs are a bundled preset (``--preset``) and/or a JSON config (``--config``)::

    {
      "preset": "toffoli",                       # optional base
      "network": {...},                          # replaces the preset network
      "target": {"gate": "toffoli"} | {"matrix": [[[re, im], ...], ...]} | {"file": "u.json"},
      "params": {"J_zz_12": -8.94, ...},
      "train": {"eps0": 0.3, ...},
      "perturb": {"epsilon": 0.04, "num_draws": 200, ...},
      "sweep": {"group": "J_xx_34", "start": 0, "stop": 30, "step": 0.05, "probes": 3}
    }

``--set key=value`` edits the document: dotted keys address nested fields
(``train.eps0=0.5``); bare keys set a parameter or a preset option
(``xi=0``, ``n=2``). Values are parsed as JSON when possible.

Exit codes: 0 success, 1 usage or config error, 2 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np

from . import gates
from .dynamics import factorization_check, network_propagator, operator_schmidt_values
from .fidelity import GateTarget, avg_fidelity, fidelity_variance
from .liealg import necessary_condition
from .network import ConfigError, NetworkSpec, spec_from_dict, spec_to_dict, to_physical_units
from .presets import GATE_TIME, PRESETS, Preset, get_preset
from .trainer import PerturbSpec, TrainConfig, perturb_study, sweep, train

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2

_TOP_KEYS = {"preset", "network", "target", "params", "train", "perturb", "sweep"}
_NAMED_GATES = {
    "toffoli": gates.toffoli,
    "fredkin": gates.fredkin,
    "sqrt_swap": gates.sqrt_swap,
    "x": gates.pauli_x_gate,
}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


# -- config resolution ---------------------------------------------------------

@dataclass
class Job:
    spec: NetworkSpec
    params: np.ndarray
    target: GateTarget
    doc: dict
    preset: Preset | None = None
    options: dict = field(default_factory=dict)
    missing: list = field(default_factory=list)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: dict, sets: list[str]) -> dict:
    doc = json.loads(json.dumps(doc))
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}", "--set")
        key, raw = item.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError("empty key", "--set")
        path = key.split(".") if "." in key else ["params", key]
        node = doc
        for part in path[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"cannot descend into non-object at {part!r}", key)
            node = nxt
        node[path[-1]] = _parse_value(raw)
    return doc


def _target_from_doc(doc, base: GateTarget | None) -> GateTarget:
    if doc is None:
        if base is None:
            raise ConfigError("no target gate given", "target")
        return base
    if not isinstance(doc, dict) or len(doc) != 1:
        raise ConfigError("target must have exactly one of gate/matrix/file", "target")
    (kind, value), = doc.items()
    try:
        if kind == "gate":
            if value not in _NAMED_GATES:
                raise ConfigError(f"unknown gate {value!r}; known: {sorted(_NAMED_GATES)}", "target.gate")
            return _NAMED_GATES[value]()
        if kind == "matrix":
            return gates.gate_from_json(value)
        if kind == "file":
            return gates.gate_from_json(value)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc), f"target.{kind}") from None
    raise ConfigError(f"unknown target kind {kind!r}", "target")


def resolve(doc: dict) -> Job:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", "")
    extra = set(doc) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}", "")
    preset = None
    if "preset" in doc:
        try:
            preset = get_preset(doc["preset"])
        except KeyError as exc:
            raise ConfigError(exc.args[0], "preset") from None
    params_doc = dict(doc.get("params", {}))
    if preset is not None:
        opts = {k: params_doc.pop(k) for k in list(params_doc) if k in preset.options}
        if opts:
            try:
                preset = preset.with_overrides(opts)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc), "params") from None
    if "network" in doc:
        spec = spec_from_dict(doc["network"])
    elif preset is not None:
        spec = preset.spec
    else:
        raise ConfigError("give a preset or a network", "network")
    target = _target_from_doc(doc.get("target"), preset.target if preset else None)
    if target.dim != spec.register_dim:
        raise ConfigError(f"target acts on dimension {target.dim}, register has {spec.register_dim}", "target")
    values = preset.param_dict() if preset is not None and spec is preset.spec else {}
    unknown = set(params_doc) - set(spec.param_names)
    if unknown:
        raise ConfigError(f"unknown parameters {sorted(unknown)}; known: {list(spec.param_names)}", "params")
    for k, v in params_doc.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"parameter must be a number, got {v!r}", f"params.{k}")
        values[k] = float(v)
    missing = [n for n in spec.param_names if n not in values]
    params = None if missing else spec.params_from_dict(values)
    return Job(spec, params, target, doc, preset, dict(preset.options) if preset else {}, missing)


def _require_params(job: Job) -> np.ndarray:
    if job.params is None:
        raise ConfigError(f"missing parameters {job.missing}", "params")
    return job.params


def load_config(args) -> dict:
    doc: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                              str(args.config)) from None
        except OSError as exc:
            raise ConfigError(str(exc), str(args.config)) from None
    if args.preset:
        doc = {**doc, "preset": args.preset}
    return apply_overrides(doc, args.set or [])


# -- output --------------------------------------------------------------------

def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _report(args, job: Job, body: dict) -> dict:
    return {
        "command": args.command,
        "version": _version(),
        "seed": args.seed,
        "config": job.doc,
        "network": spec_to_dict(job.spec),
        "target": job.target.name,
        "params": job.spec.params_to_dict(job.params) if job.params is not None else None,
        **body,
    }


def _emit(args, name: str, text: str) -> Path:
    out = Path(args.out) / name
    write_atomic(out, text)
    return out


def _results(args, job: Job, body: dict):
    _emit(args, "results.json", json.dumps(_report(args, job, body), indent=2, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x)}")


# -- commands ------------------------------------------------------------------

def cmd_eval(args, job: Job) -> int:
    p = _require_params(job)
    fbar = avg_fidelity(job.spec, p, job.target)
    rep = fidelity_variance(job.spec, p, job.target, args.samples, args.seed or 0)
    body = {"f_bar": fbar, "sampled": rep.as_dict()}
    print(f"F_bar = {fbar:.10f}")
    print(f"F_psi over {rep.num_samples} Haar states: mean {rep.sample_mean:.6f}, "
          f"variance {rep.sample_variance:.3e}")
    if job.spec.ancillae:
        U = network_propagator(job.spec, p, ordered=False)
        split = (list(job.spec.register), list(job.spec.ancillae))
        ok, UQ, _ = factorization_check(U, split)
        s = operator_schmidt_values(U, split)
        tgt = job.target.U
        k = np.flatnonzero(np.abs(tgt.ravel()) > 1e-12)[0]
        aligned = tgt * np.exp(-1j * np.angle(tgt.ravel()[k]))
        dist = float(np.max(np.abs(UQ - aligned)))
        body["factorization"] = {"rank_one": ok, "schmidt_ratio": float(s[1] / s[0]) if s.size > 1 else 0.0,
                                 "max_abs_UQ_minus_target": dist}
        print(f"factorization Q|A: {'rank 1' if ok else 'entangling'} "
              f"(s2/s1 = {body['factorization']['schmidt_ratio']:.2e}, |U_Q - U| = {dist:.2e})")
    _results(args, job, body)
    return EXIT_OK


def cmd_train(args, job: Job) -> int:
    tdoc = dict(job.doc.get("train", {}))
    if args.seed is not None:
        tdoc["rng_seed"] = args.seed
    config = TrainConfig.from_dict(tdoc)
    result = train(job.spec, job.target, config)
    body = {"train_config": config.as_dict(), "success": result.success, "restarts_run": len(result.traces)}
    if result.best is None:
        print("no restarts configured: not converged")
        _results(args, job, body)
        return EXIT_NONCONVERGED
    best = result.best
    body.update({
        "final_fbar": best.final_fbar,
        "final_params": dict(zip(best.param_names, best.final_params)),
        "best_restart": best.restart,
        "wall_time": [t.wall_time for t in result.traces],
    })
    _emit(args, "trace.json", best.to_json() + "\n")
    _emit(args, "trace.csv", best.checkpoints_csv())
    _results(args, job, body)
    print(f"{'converged' if result.success else 'not converged'}: F_bar = {best.final_fbar:.10f} "
          f"(restart {best.restart}, {len(result.traces)} run)")
    for name, v in zip(best.param_names, best.final_params):
        print(f"  {name:>12s} = {v: .6f}")
    return EXIT_OK if result.success else EXIT_NONCONVERGED


def cmd_sweep(args, job: Job) -> int:
    p = _require_params(job)
    sdoc = dict(job.doc.get("sweep", {}))
    for key in ("group", "start", "stop", "step", "probes"):
        v = getattr(args, key)
        if v is not None:
            sdoc[key] = v
    extra = set(sdoc) - {"group", "start", "stop", "step", "probes"}
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}", "sweep")
    if "group" not in sdoc:
        raise ConfigError("sweep needs a group", "sweep.group")
    start, stop, step = (float(sdoc.get(k, d)) for k, d in (("start", 0.0), ("stop", 30.0), ("step", 0.05)))
    if step <= 0 or stop < start:
        raise ConfigError("need step > 0 and stop >= start", "sweep")
    grid = start + step * np.arange(int(np.floor((stop - start) / step + 1e-9)) + 1)
    try:
        res = sweep(job.spec, job.target, p, None, sdoc["group"], grid,
                    int(sdoc.get("probes", 3)), args.seed or 0)
    except KeyError as exc:
        raise ConfigError(exc.args[0], "sweep.group") from None
    _emit(args, "sweep.csv", res.to_csv())
    i = res.argmax()
    maxima = [{"value": float(res.grid[j]), "f_bar": float(res.f_bar[j])} for j in res.local_maxima()]
    _results(args, job, {"sweep": sdoc, "global_max": {"value": float(res.grid[i]), "f_bar": float(res.f_bar[i])},
                         "local_maxima": maxima})
    print(f"global max of F_bar at {res.group} = {res.grid[i]:.4f} (F_bar = {res.f_bar[i]:.6f})")
    for m in maxima:
        print(f"  local max at {m['value']:.4f}: F_bar = {m['f_bar']:.6f}")
    return EXIT_OK


def cmd_perturb(args, job: Job) -> int:
    p = _require_params(job)
    pdoc = dict(job.doc.get("perturb", {}))
    if args.eps is not None:
        pdoc["epsilon"] = args.eps
    if args.draws is not None:
        pdoc["num_draws"] = args.draws
    if args.include_ancilla:
        pdoc["include_ancilla_angles"] = True
    if args.seed is not None:
        pdoc["rng_seed"] = args.seed
    extra = set(pdoc) - {"epsilon", "num_draws", "include_ancilla_angles", "rng_seed"}
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}", "perturb")
    if "epsilon" not in pdoc:
        raise ConfigError("perturb needs epsilon (--eps)", "perturb.epsilon")
    try:
        pspec = PerturbSpec(**pdoc)
    except TypeError as exc:
        raise ConfigError(str(exc), "perturb") from None
    res = perturb_study(job.spec, job.target, p, None, pspec)
    _emit(args, "perturb.csv", res.to_csv())
    _results(args, job, {"perturb": res.summary()})
    print(f"eps = {pspec.epsilon}, {pspec.num_draws} draws over {len(res.units)} units: "
          f"mean F_bar = {res.mean:.6f} (min {res.min:.6f}, max {res.max:.6f})")
    return EXIT_OK


def cmd_liecheck(args, job: Job) -> int:
    spec = job.spec
    if args.drop:
        try:
            spec = spec.with_groups_removed(args.drop)
        except KeyError as exc:
            raise ConfigError(exc.args[0], "--drop") from None
    report = necessary_condition(spec, job.target)
    _emit(args, "liecheck.json", report.to_json() + "\n")
    _results(args, job, {"dropped": args.drop or [], "liecheck": report.as_dict()})
    print(f"{'PASS' if report.passed else 'FAIL'}: algebra dimension {report.dimension}, "
          f"residual {report.residual:.3e}")
    print(f"  log branch: {report.branch}")
    print(f"  note: {report.caveat}")
    return EXIT_OK


_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12}


def parse_time(text: str) -> float:
    m = re.fullmatch(r"\s*([0-9.eE+-]+)\s*([a-z]*)\s*", text)
    if not m:
        raise ConfigError(f"cannot parse time {text!r}", "--time")
    unit = m.group(2) or "s"
    if unit not in _TIME_UNITS:
        raise ConfigError(f"unknown time unit {unit!r}", "--time")
    try:
        value = float(m.group(1)) * _TIME_UNITS[unit]
    except ValueError:
        raise ConfigError(f"cannot parse time {text!r}", "--time") from None
    if value <= 0:
        raise ConfigError("time must be positive", "--time")
    return value


def cmd_units(args, job: Job) -> int:
    p = _require_params(job)
    t = parse_time(args.time) if args.time else GATE_TIME
    reported = job.preset.reported_mhz if job.preset is not None else {}
    rows = []
    print(f"{'parameter':>12s} {'value':>10s} {'MHz':>10s} {'reported':>10s} {'rel.dev':>9s}")
    for g in job.spec.groups:
        v = p[job.spec.group_index(g)]
        mhz = float(to_physical_units(v, t))
        ref = reported.get(g)
        dev = abs(mhz - ref) / abs(ref) if ref else None
        rows.append({"parameter": g, "value": float(v), "mhz": mhz, "reported_mhz": ref, "rel_dev": dev})
        print(f"{g:>12s} {v:10.4f} {mhz:10.3f} {'' if ref is None else f'{ref:10.3f}':>10s} "
              f"{'' if dev is None else f'{dev:9.2e}':>9s}")
    _results(args, job, {"gate_time": t, "units": rows})
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "train": cmd_train,
    "sweep": cmd_sweep,
    "perturb": cmd_perturb,
    "liecheck": cmd_liecheck,
    "units": cmd_units,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qnetgate", description="Design static qubit networks that implement gates.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--config", type=Path, help="JSON config document")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config entry")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("eval", parents=[common], help="evaluate F_bar and sampled F_psi")
    p.add_argument("--samples", type=int, default=1000)
    sub.add_parser("train", parents=[common], help="learn the couplings")
    p = sub.add_parser("sweep", parents=[common], help="1-D landscape scan")
    p.add_argument("--group")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--probes", type=int)
    p = sub.add_parser("perturb", parents=[common], help="robustness against coupling errors")
    p.add_argument("--eps", type=float)
    p.add_argument("--draws", type=int)
    p.add_argument("--include-ancilla", action="store_true")
    p = sub.add_parser("liecheck", parents=[common], help="Lie-algebra necessary condition")
    p.add_argument("--drop", action="append", metavar="GROUP")
    p = sub.add_parser("units", parents=[common], help="convert to MHz for a gate time")
    p.add_argument("--time", help="gate time, e.g. 60ns (default 60ns)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "eval" and args.samples < 2:
        print("error: --samples must be at least 2", file=sys.stderr)
        return EXIT_CONFIG
    try:
        doc = load_config(args)
        job = resolve(doc)
        return COMMANDS[args.command](args, job)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
