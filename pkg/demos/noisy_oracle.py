"""Inexact oracles: the additive and multiplicative slack variants.

A bounded radial perturbation of size delta is added to the operator.  The
plain method has no guarantee here; the slack variants settle at a level
proportional to delta.
"""

import numpy as np

from revi import (DeltaConfig, make_synthetic_affine, solve_delta_additive,
                  solve_delta_multiplicative, uniform_bound, with_radial_noise)

mu, L = 1.0, 10.0
for delta in (0.0, 1e-3, 1e-2):
    _, clean = make_synthetic_affine(20, mu, L, seed=0)
    problem = with_radial_noise(clean, delta, seed=0) if delta else clean
    z0 = problem.geometry.center(problem.Q)
    cfg = DeltaConfig(L0=2 * L, mu=mu, max_iters=200, delta=delta)
    add = solve_delta_additive(problem, cfg, z0).metrics["bregman_to_solution"].values
    problem.oracle_counter = 0
    mult = solve_delta_multiplicative(problem, cfg, z0).metrics["bregman_to_solution"].values
    floor = uniform_bound(200, mu, L, mult[0], delta, "alg3")
    print(f"delta={delta:<6g} final V: additive {add[-1]:.3e}  multiplicative {mult[-1]:.3e}"
          f"  (limit for the latter {float(floor):.3e})")
