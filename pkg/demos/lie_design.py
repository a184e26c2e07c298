"""Using the Lie-algebra necessary condition to choose network terms.

Run with ``python demos/lie_design.py``.
"""

from qnetgate import toffoli
from qnetgate.gates import gate_log
from qnetgate.liealg import closure, membership_residual
from qnetgate.operators import embed
from qnetgate.presets import toffoli_operator_set

ops = toffoli_operator_set()
K = embed(gate_log(toffoli()).K, [0, 1, 2], 4)

basis = closure(list(ops.values()), list(ops))
print(f"all operators: dimension {basis.dimension}, residual {membership_residual(basis, K):.1e}")

# Dropping one operator at a time shows which ones the algebra cannot do without
for name in ops:
    rest = {k: v for k, v in ops.items() if k != name}
    b = closure(list(rest.values()), list(rest))
    print(f"without {name}: dimension {b.dimension:4d}, residual {membership_residual(b, K):.1e}")
