"""Semismooth Newton with selected Jacobian elements.

The motivating application: root-finding for nonsmooth systems such as
complementarity problems, where classical Jacobians do not exist at the
solution but generalized Jacobian elements do.
"""

import numpy as np

from dcjac import build_ncp, eval_F, load_problem, ncp_residual, solve

print("== piecewise-affine root ==")
F = load_problem({"n": 1, "m": 1, "components": [{"g": ["x1 - 1", "2*x1 - 2"]}]})
trace = solve(F, [37.0])
for k, s in enumerate(trace.steps):
    print(f"  iter {k}: x = {s.x[0]: .6f}  residual = {s.residual:.3e}")
print("status:", trace.status)

print()
print("== linear complementarity: x >= 0, Mx+q >= 0, x'(Mx+q) = 0 ==")
M = np.array([[2.0, 1.0], [1.0, 2.0]])
q = np.array([-3.0, -3.0])
ncp = build_ncp(M, q)
print("encoded componentwise min at (1,1):", eval_F(ncp, [1.0, 1.0]))
trace = solve(ncp, [0.0, 0.0])
for k, s in enumerate(trace.steps):
    print(f"  iter {k}: x = {s.x.round(8)}  residual = {s.residual:.3e}")
print("solution:", trace.solution, " complementarity residual:",
      ncp_residual(M, q, trace.solution))

print()
print("== failure modes are reported, not repaired ==")
flat = load_problem({"n": 1, "m": 1, "components": [{"g": ["1"]}]})
print("constant system:", solve(flat, [0.0]).status)
no_root = load_problem({"n": 1, "m": 1, "components": [{"g": ["x1^2 + 1"]}]})
print("rootless parabola:", solve(no_root, [0.001]).status)
