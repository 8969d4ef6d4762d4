"""Adaptive extragradient on a synthetic affine VI with a known solution.

Prints the distance to the solution next to the realized-L and uniform
bounds, the accepted L sequence and the step-test trial counts.
"""

import numpy as np

from revi import (AdaptiveConfig, make_synthetic_affine, solve_adaptive, theoretical_bound,
                  uniform_bound)
from revi.solvers import trial_budget_slack

mu, L, L0 = 1.0, 10.0, 20.0
inst, problem = make_synthetic_affine(20, mu, L, seed=0)
run = solve_adaptive(problem, AdaptiveConfig(L0=L0, mu=mu, max_iters=200),
                     problem.geometry.center(problem.Q))

V = run.metrics["bregman_to_solution"].values
prod = theoretical_bound(run.L, mu, V[0])
unif = uniform_bound(np.arange(len(V)), mu, L, V[0])

print(f"{'k':>4} {'V(z*, z_k)':>12} {'realized-L':>12} {'uniform':>12} {'L_k':>8}")
for k in (0, 1, 2, 5, 10, 25, 50, 100, 200):
    Lk = L0 if k == 0 else run.L[k - 1]
    print(f"{k:>4} {V[k]:12.4e} {prod[k]:12.4e} {unif[k]:12.4e} {Lk:8.3f}")

print(f"\nL never exceeds 2L: max L_k = {run.L.max():.3f}")
print(f"trials: total {run.total_trials}, mean {run.trials.mean():.3f}, "
      f"budget slack {trial_budget_slack(run, L, L0):.1f}")
print(f"operator calls: {run.oracle_calls[-1]} (iterations + trials)")
