"""
Growing trees in continuous time
================================

A uniform-attachment tree watched at the moments its population ticks up
is exactly a Yule process genealogy: stopping the pure-birth tree at
population 5 reproduces the attachment law of the discrete tree. The
total-variation gap between the two empirical history laws vanishes with
the number of replicas.
"""

from collections import Counter

import numpy as np

from lwc.branching import yule_sample
from lwc.generators import AttachmentFn, recursive_tree

reps = 20_000
yule = Counter(
    yule_sample(np.random.default_rng(i), stop_population=5).tree.parent
    for i in range(reps)
)
discrete = Counter(
    recursive_tree(5, AttachmentFn.constant(), np.random.default_rng(10**6 + i)).parent
    for i in range(reps)
)

keys = sorted(set(yule) | set(discrete), key=lambda k: -yule.get(k, 0))
print("attachment history        Yule      uniform")
for k in keys[:6]:
    print(f"{str(k):<22} {yule.get(k, 0) / reps:.5f}   {discrete.get(k, 0) / reps:.5f}")

tv = 0.5 * sum(abs(yule.get(k, 0) - discrete.get(k, 0)) / reps for k in keys)
print(f"\n{len(keys)} histories, total variation {tv:.4f}")
