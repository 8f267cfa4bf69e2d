"""
The zeta(2) limit of random assignment
======================================

Assign n jobs to n machines with iid exponential costs: the minimum total
cost converges to pi^2/6 = 1.6449... The same constant falls out of the
logistic fixed point of the cost recursion on the limit tree, through
the integral of the two-sample overshoot.
"""

import math

import numpy as np

from lwc.assignment import (
    logistic_cdf,
    logistic_rde_solve,
    pwit_greedy_matching,
    random_assignment_experiment,
    zeta2_integral,
)
from lwc.branching import pwit_sample

target = math.pi**2 / 6.0

for n in (10, 50, 200):
    mean, se = random_assignment_experiment(n, 60, np.random.default_rng(n))
    print(f"n={n:>3}: mean optimal cost {mean:.4f} +/- {se:.4f}")
print(f"pi^2/6 = {target:.4f}")

pool = logistic_rde_solve(np.random.default_rng(9), pool_size=10**5, sweeps=60)
print(f"\ncost recursion fixed point vs logistic cdf: KS {pool.kolmogorov:.4f}")
got = zeta2_integral(pool, pairs=10**6, rng=np.random.default_rng(10))
print(f"overshoot integral: {got:.4f} (exact {target:.4f}; +/- 0.01 at this pool size)")

rng = np.random.default_rng(17)
vals = [pwit_greedy_matching(pwit_sample(1, 15.0, rng)) for _ in range(2000)]
print(f"\ngreedy root edge on the limit tree: mean {np.mean(vals):.3f} (exact 1)")
