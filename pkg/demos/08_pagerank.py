"""
PageRank tails on growing trees
===============================

On preferential-attachment trees the limiting PageRank of the root has a
power-law tail whose exponent differs from the degree exponent: with
affine weight k+2 and damping 1/2 the score tail is 3/2 while the degree
tail is 3, so PageRank is strictly heavier.
"""

import numpy as np

from lwc.generators import AttachmentFn, recursive_tree
from lwc.pagerank import (
    DirectedGraph,
    exponent_targets,
    limit_root_pagerank_sample,
    pagerank_linear,
    pagerank_path_counts,
    tail_exponent,
)

f = AttachmentFn.affine(1.0)

# on a finite tree the damped path-count sum is the exact linear solution
t = recursive_tree(200, f, np.random.default_rng(1))
g = DirectedGraph.from_tree(t)
gap = np.max(np.abs(pagerank_path_counts(g, 0.5).raw - pagerank_linear(g, 0.5).raw))
print(f"path-count vs linear solve on a 200-vertex tree: max gap {gap:.2e}")

rng = np.random.default_rng(34)
draws = np.array([limit_root_pagerank_sample(f, 0.5, 10**6, rng) for _ in range(20_000)])
est = tail_exponent(draws, rng=np.random.default_rng(35))
print(f"\nlimit root score tail exponent: {est.exponent:.2f} from {est.k_min} order stats")

t_big = recursive_tree(200_000, f, np.random.default_rng(5))
kids = np.bincount([p for p in t_big.parent if p >= 0], minlength=t_big.n)
deg = kids + 1
deg[t_big.root] = kids[t_big.root]
est_deg = tail_exponent(deg.astype(float), rng=np.random.default_rng(36))
print(f"degree tail exponent:           {est_deg.exponent:.2f}")

tg = exponent_targets(1.0, 0.5)
print(f"predicted pair: score {tg.pagerank}, degree {tg.degree}")
