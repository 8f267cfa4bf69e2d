"""Shared test oracles: deliberately slow, independent implementations used
to pin down the fast library code."""

from __future__ import annotations

import itertools
import math

import numpy as np

from lwc.graph_core import Graph, RootedGraph, RootedTree


def mult_matrix(g: Graph) -> tuple[tuple[int, ...], ...]:
    m = [[0] * g.n for _ in range(g.n)]
    for u, neigh in enumerate(g.adj):
        for v in neigh:
            m[u][v] += 1
    return tuple(tuple(row) for row in m)


def brute_rooted_isomorphic(g1: RootedGraph, g2: RootedGraph) -> bool:
    """Root-preserving isomorphism by exhaustive permutation search (n <= 8)."""
    if g1.n != g2.n:
        return False
    n = g1.n
    assert n <= 8, "oracle is factorial; keep instances tiny"
    m1, m2 = mult_matrix(g1), mult_matrix(g2)
    others1 = [v for v in range(n) if v != g1.root]
    others2 = [v for v in range(n) if v != g2.root]
    for perm in itertools.permutations(others2):
        phi = {g1.root: g2.root}
        phi.update(zip(others1, perm))
        if all(
            m1[u][v] == m2[phi[u]][phi[v]] for u in range(n) for v in range(n)
        ):
            return True
    return False


def brute_canonical(g: RootedGraph) -> tuple:
    """Minimum multiplicity matrix over all root-fixing relabelings."""
    n = g.n
    assert n <= 7
    m = mult_matrix(g)
    others = [v for v in range(n) if v != g.root]
    best = None
    for perm in itertools.permutations(others):
        order = [g.root] + list(perm)
        key = tuple(m[order[i]][order[j]] for i in range(n) for j in range(n))
        if best is None or key < best:
            best = key
    return (n, best)


def random_tree(n: int, rng: np.random.Generator) -> RootedTree:
    """Uniform attachment tree on n vertices (vertex k picks a parent < k)."""
    parent = [-1] + [int(rng.integers(k)) for k in range(1, n)]
    return RootedTree(n=n, parent=tuple(parent))


def random_simple_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < p
    ]
    return Graph.from_edges(n, edges)


def random_multigraph(n: int, rng: np.random.Generator) -> Graph:
    """Small multigraph with parallel edges and loops."""
    edges = []
    for u in range(n):
        for v in range(u, n):
            k = int(rng.integers(0, 3))
            edges.extend([(u, v)] * k)
    return Graph.from_edges(n, edges)


def relabel(g: RootedGraph, perm: list[int]) -> RootedGraph:
    """Image of g under vertex relabeling v -> perm[v]."""
    lists: list[list[int]] = [[] for _ in range(g.n)]
    for u, neigh in enumerate(g.adj):
        for v in neigh:
            lists[perm[u]].append(perm[v])
    return RootedGraph(
        n=g.n,
        adj=tuple(tuple(sorted(l)) for l in lists),
        root=perm[g.root],
    )


def all_labeled_trees(n: int):
    """Every parent-array tree on vertices 0..n-1 rooted at 0."""
    if n == 1:
        yield RootedTree(n=1, parent=(-1,))
        return
    for parents in itertools.product(range(n), repeat=n - 1):
        arr = (-1,) + parents
        # acyclicity check
        ok = True
        for v in range(1, n):
            seen = set()
            u = v
            while u != 0:
                if u in seen:
                    ok = False
                    break
                seen.add(u)
                u = arr[u]
            if not ok:
                break
        if ok:
            yield RootedTree(n=n, parent=arr)


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and a cdf."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = cdf(x)
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))


def poisson_pmf(lam: float, kmax: int) -> np.ndarray:
    ks = np.arange(kmax + 1)
    logp = ks * math.log(lam) - lam - np.array([math.lgamma(k + 1) for k in ks])
    return np.exp(logp)
