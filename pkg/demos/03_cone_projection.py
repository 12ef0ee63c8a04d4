"""Decomposing a queue matrix into congestion structure plus residual.

Queue mass that per-input and per-output congestion explains lives in the
cone spanned by row and column indicator matrices; the residual q_perp is
the part no port-level view accounts for.  In heavy traffic the residual
stays bounded while the structured part grows, which is the state-space
collapse the long runs measure.  This script shows the decomposition and
its invariants on small examples.

Run:  python demos/03_cone_projection.py
"""

import numpy as np

from switchsim import lyapunov_values, project_cone, project_subspace
from switchsim.geometry import project_cone_enumeration

np.set_printoptions(precision=4, suppress=True)

q = np.array([[1.0, 0.0], [0.0, 0.0]])
print(f"q =\n{q}")
print(f"subspace projection (signs unconstrained):\n{project_subspace(q)}")
dec = project_cone(q)
print(f"cone projection (nonnegative weights):\n{dec.q_par}")
print(f"residual q_perp:\n{dec.q_perp}")
print(f"<q_par, q_perp> = {(dec.q_par * dec.q_perp).sum():.2e}   "
      f"row weights = {dec.row_weights}, col weights = {dec.col_weights}\n")

rng = np.random.default_rng(7)
x = rng.uniform(-10, 10, size=(3, 3))
a = project_cone(x)
b = project_cone_enumeration(x)
print("random 3x3 vs exhaustive active-set oracle: "
      f"max difference {np.abs(a.q_par - b.q_par).max():.2e}")

print("\nPythagoras and idempotence on random matrices:")
for _ in range(3):
    x = rng.uniform(-20, 20, size=(4, 4))
    d = project_cone(x)
    total = np.linalg.norm(x) ** 2
    split = d.norm_par**2 + d.norm_perp**2
    again = project_cone(d.q_par)
    print(f"  ||q||^2 = {total:9.3f}  ||q_par||^2 + ||q_perp||^2 = {split:9.3f}"
          f"   re-projection moves {np.abs(again.q_par - d.q_par).max():.1e}")

v = lyapunov_values(np.array([[3, 1], [0, 2]], dtype=np.int64))
print(f"\nquadratic functionals of [[3,1],[0,2]]: "
      f"v1={v.v1:.0f} v2={v.v2:.0f} v3={v.v3:.0f} v4={v.v4:.1f} "
      f"(v4 = v1 + v2 - v3/n)")
