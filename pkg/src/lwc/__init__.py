"""Local limits of sparse random graphs.

Library for the quantitative side of local weak convergence: random graph
and tree generators, fringe decompositions of recursive trees, continuous
time branching embeddings, spectral distributions and their recursive
distributional equations, ferromagnetic Ising free energy on locally
tree-like graphs, the random assignment problem, and PageRank tail
exponents on preferential attachment trees.
"""

__version__ = "0.1.0"
