"""Radial-graph flows on the hemisphere and in the hyperbolic plane.

Outside flat space the solver represents curves as radial graphs r(y) over
the annulus (a, b) x S^1 of a warped product.  The slice of radius r has
curvature theta'/theta (cot r on the sphere, coth r in hyperbolic space),
and the expanding flow dr/dt = (1/F - 1/f) v grows a lower-barrier slice
onto the solution.
"""

import numpy as np

import curveflow as cf

# hemisphere: f = c s^(1-q) with the constant below the barrier threshold
b = np.pi / 4
space = cf.SpaceformConfig("sphere", annulus=(0.05, b))
c_max = cf.admissible_constant(space, phi_bounds=1.0, q=3.0, anchor_radius=b, n=1)
print("largest admissible constant at b:", c_max)

problem = cf.make_problem(space, cf.mean(1), cf.power_law(3.0, 0.5 * c_max, 1),
                          mode="expanding")
result = cf.run(problem, cf.RunOptions(tol=1e-7, grid=128, scheme="imex"))
r_star = 0.5 * np.arcsin(c_max)  # cot r = c sin^-2 r  <=>  sin 2r = 2c
print("hemisphere: converged", result.converged,
      "| radius error", np.max(np.abs(result.profile.values - r_star)),
      "| stayed inside annulus:", result.diagnostics["value_max_seen"] < b)

# hyperbolic plane: a decaying radial weight provides both barriers
data = cf.expression_data("4*exp(-1.2*(absx - 1))", n=1)
space = cf.SpaceformConfig("hyperbolic", annulus=(0.7, 3.0))
print("position concavity holds:", cf.check_position_concavity(data, space).holds)
problem = cf.make_problem(space, cf.mean(1), data, mode="expanding")
result = cf.run(problem, cf.RunOptions(tol=1e-7, grid=64, scheme="imex"))
r_star = float(result.profile.values.mean())
print("hyperbolic: converged", result.converged,
      "| residual", cf.residual(result.profile, problem)[0],
      "| coth(r*) - f(r*) =",
      np.cosh(r_star) / np.sinh(r_star) - 4 * np.exp(-1.2 * (r_star - 1)))

# de Sitter is kept for barrier arithmetic only; flows are rejected
c_ds = cf.admissible_constant(cf.SpaceformConfig("desitter", (1.0, 4.0)),
                              1.0, q=-1.0, anchor_radius=1.0, n=1)
print("de Sitter barrier constant:", c_ds, "=", "n sinh(1)/cosh(1)^3")
