"""Remote sqrt(SWAP) across a chain of always-on intermediate qubits.

Run with ``python demos/remote_sqrt_swap.py``.
"""

from qnetgate import avg_fidelity, get_preset
from qnetgate.presets import remote_sqswap_preset
from qnetgate.trainer import PerturbSpec, TrainConfig, perturb_study, train

# The analytic family is exact for any chain length and phase offset
for n in (1, 2):
    for alpha in (0.0, 1.0, 2.5):
        pre = remote_sqswap_preset(n, alpha)
        print(f"n = {n}, alpha = {alpha}: 1 - F_bar = {1 - avg_fidelity(pre.spec, pre.params, pre.target):.1e}")

# Mediated versus direct coupling under 50% relative coupling noise
four = get_preset("remote-sqswap")
two = get_preset("remote-direct")
for label, pre in (("mediated", four), ("direct", two)):
    res = perturb_study(pre.spec, pre.target, pre.params, None, PerturbSpec(0.5, 2000, rng_seed=0))
    print(f"{label:>8s}: mean {res.mean:.4f}, min {res.min:.4f}")

# Learning the mediated network from random couplings
result = train(four.spec, four.target, TrainConfig(num_restarts=20, rng_seed=0))
best = result.best
print(f"trained F_bar {best.final_fbar:.9f} after {len(result.traces)} restart(s), status {best.status}")
print({k: round(v, 4) for k, v in zip(best.param_names, best.final_params)})
