"""
Sparse random graphs look like trees around a typical vertex
============================================================

A sparse Erdos-Renyi graph with mean degree 2 converges locally to a
Poisson(2) branching tree: the degree histogram approaches the Poisson
pmf, and the radius-1 neighborhood of a uniform vertex approaches the
law of a Poisson star.
"""

import math

import numpy as np

from lwc.generators import erdos_renyi
from lwc.graph_core import Graph, RootedGraph, canonical_code, empirical_neighborhoods

n, lam = 20_000, 2.0
g = erdos_renyi(n, lam, np.random.default_rng(1))

degs = np.fromiter((len(a) for a in g.adj), count=n, dtype=np.int64)
print("degree   empirical   Poisson(2)")
for k in range(8):
    pois = math.exp(-lam) * lam**k / math.factorial(k)
    print(f"{k:>6}   {np.mean(degs == k):.5f}     {pois:.5f}")

# radius-1 balls, keyed by a canonical code so isomorphic balls collapse
balls = empirical_neighborhoods(g, 1)


def star(d):
    return canonical_code(RootedGraph.from_graph(Graph.from_edges(d + 1, [(0, i + 1) for i in range(d)]), 0))


star_mass = sum(balls.prob(star(d)) for d in range(int(degs.max()) + 1))
print(f"\nfraction of radius-1 balls that are stars: {star_mass:.5f}")
print("(the rest contain a triangle through the center; their mass vanishes as n grows)")
