"""Static qubit networks that implement quantum gates, found by supervised learning."""

from types import ModuleType as _ModuleType

from .dynamics import (
    Superoperator,
    apply_channel,
    factorization_check,
    kraus_operators,
    network_propagator,
    operator_schmidt_values,
    propagator,
    propagator_derivative,
    superoperator,
)
from .fidelity import (
    GateTarget,
    avg_fidelity,
    fidelity_variance,
    grad_avg_fidelity,
    grad_state_fidelity,
    sample_haar_state,
    state_fidelity,
)
from .gates import custom_gate, fredkin, gate_log, sqrt_swap, toffoli
from .liealg import bottom_up, closure, contains, necessary_condition
from .network import (
    AncillaState,
    ConfigError,
    Coupling,
    Field,
    NetworkSpec,
    assemble_hamiltonian,
    load_spec,
    spec_from_dict,
    term_derivative,
    to_physical_units,
)
from .operators import HermitianOperator, PauliString, comm_h, hs_inner, partial_trace
from .presets import PRESETS, get_preset
from .trainer import PerturbSpec, TrainConfig, perturb_study, refine, sgd_run, sweep, train

__version__ = "0.1.0"

__all__ = [n for n, v in dict(globals()).items() if not n.startswith("_") and not isinstance(v, _ModuleType)]
