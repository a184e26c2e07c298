"""Toffoli gate from a four-qubit network with one ancilla.

Run with ``python demos/toffoli_tour.py``.
"""

import numpy as np

from qnetgate import get_preset, avg_fidelity, fidelity_variance, to_physical_units
from qnetgate.presets import GATE_TIME
from qnetgate.trainer import PerturbSpec, perturb_study, sweep

pre = get_preset("toffoli")
spec, params, target = pre.spec, pre.params, pre.target

# Learned couplings in dimensionless units and in MHz for a 60 ns gate
for name, value in zip(spec.param_names, params):
    if name in ("eta", "xi"):
        print(f"{name:>10s} {value:+.4f}")
    else:
        print(f"{name:>10s} {value:+9.4f}   {float(to_physical_units(value, GATE_TIME)):+8.2f} MHz")

print("average fidelity:", avg_fidelity(spec, params, target))
print("sampled variance:", fidelity_variance(spec, params, target, 1000, seed=0).sample_variance)

# The ancilla phase matters at the 1e-3 level
no_phase = params.copy()
no_phase[spec.param_names.index("xi")] = 0.0
print("with xi = 0:", avg_fidelity(spec, no_phase, target))

# Relative coupling errors, applied independently to each physical coupling
for eps in (0.04, 0.18):
    res = perturb_study(spec, target, params, None, PerturbSpec(eps, 200, rng_seed=7))
    print(f"eps = {eps}: mean {res.mean:.5f}, min {res.min:.5f} over {len(res.units)} couplings")

# One-dimensional slice through the landscape
grid = np.round(np.arange(0, 30 + 1e-9, 0.05), 10)
scan = sweep(spec, target, params, None, "J_xx_34", grid)
best = scan.argmax()
print(f"J_xx_34 scan: global max {scan.f_bar[best]:.6f} at {scan.grid[best]:.2f}")
for i in scan.local_maxima():
    if i != best:
        print(f"  local max {scan.f_bar[i]:.4f} at {scan.grid[i]:.2f}")
