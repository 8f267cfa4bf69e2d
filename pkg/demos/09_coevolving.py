"""
Two regimes of exploration-driven growth
========================================

Arrivals pick a uniform vertex and walk a random number of steps toward
the root before attaching. When the mean step is below 1 the walk stays
local and the root's share of edges decays; above 1 the walks pile onto
the root and it keeps a positive fraction of all edges forever.
"""

import numpy as np

from lwc.generators import StepPmf, coevolving_tree

for p in (0.65, 0.35):
    step = StepPmf.geometric(p)
    label = "local" if step.mean <= 1.0 else "condensing"
    print(f"Geometric({p}) steps, mean {step.mean:.3f} ({label}):")
    for n in (10_000, 20_000, 40_000):
        fr = []
        for r in range(10):
            t = coevolving_tree(n, step, np.random.default_rng(1000 * r + n + int(100 * p)))
            fr.append(np.sum(np.asarray(t.parent) == 0) / (n - 1))
        print(f"  n={n:>6}: root edge fraction {np.mean(fr):.4f}")
    print()
print("the condensing fraction is already stable; the local one decays slowly to zero")
