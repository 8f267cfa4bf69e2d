"""PageRank on directed multigraphs: the defining linear system, the
path-count form it takes on offspring->parent trees, the limiting root score
sampled from a stopped branching process, and Hill tail-exponent estimation
for the resulting power laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .branching import ctbp_sample
from .errors import ValidationError
from .generators import AttachmentFn
from .graph_core import RootedTree

_RESIDUAL_CAP = 1e-10


@dataclass(frozen=True)
class DirectedGraph:
    """Directed multigraph as an ordered edge list; (u, v) means u links to v."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("need n >= 1")
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u}, {v}) out of range")

    @classmethod
    def from_edges(cls, n: int, edges) -> "DirectedGraph":
        return cls(n=n, edges=tuple((int(u), int(v)) for u, v in edges))

    @classmethod
    def from_tree(cls, t: RootedTree) -> "DirectedGraph":
        # each offspring links to its parent; the root is dangling
        par = np.asarray(t.parent)
        kids = np.flatnonzero(par >= 0)
        return cls(n=t.n, edges=tuple(zip(kids.tolist(), par[kids].tolist())))

    def out_degrees(self) -> np.ndarray:
        tails = [u for u, _ in self.edges]
        return np.bincount(tails, minlength=self.n) if tails else np.zeros(self.n, dtype=int)


@dataclass(frozen=True)
class PageRankScores:
    """Solution of r_v = (1-c)/n + c sum_{u->v} r_u / outdeg(u).

    raw sums to at most 1 (strictly less iff some vertex is dangling);
    normalized is n * raw, the scale with a nondegenerate limit law.
    """

    damping: float
    raw: np.ndarray
    normalized: np.ndarray
    residual: float

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ValidationError("damping must lie in (0, 1)")
        raw = np.asarray(self.raw, dtype=float)
        norm = np.asarray(self.normalized, dtype=float)
        n = raw.size
        if norm.shape != raw.shape:
            raise ValidationError("raw and normalized lengths differ")
        if not np.allclose(norm, n * raw, rtol=0.0, atol=1e-12):
            raise ValidationError("normalized must equal n * raw")
        floor = (1.0 - self.damping) / n
        if np.any(raw < floor - 1e-12):
            raise ValidationError("scores fall below the teleport floor (1-c)/n")
        if not self.residual <= _RESIDUAL_CAP:
            raise ValidationError(f"linear-system residual {self.residual} exceeds 1e-10")
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "normalized", norm)


def _check_damping(c: float) -> None:
    if not 0.0 < c < 1.0:
        raise ValidationError("damping must lie in (0, 1)")


def _edge_arrays(g: DirectedGraph):
    tails = np.array([u for u, _ in g.edges], dtype=np.intp)
    heads = np.array([v for _, v in g.edges], dtype=np.intp)
    dout = np.bincount(tails, minlength=g.n) if tails.size else np.zeros(g.n, dtype=int)
    # every tail has at least its own edge, so the division is safe
    weights = 1.0 / dout[tails] if tails.size else np.zeros(0)
    return tails, heads, weights


def _system_residual(r: np.ndarray, c: float, tails, heads, weights) -> float:
    n = r.size
    flow = np.bincount(heads, weights=r[tails] * weights, minlength=n)
    return float(np.max(np.abs((1.0 - c) / n + c * flow - r)))


def pagerank_linear(g: DirectedGraph, c: float) -> PageRankScores:
    """Fixed-point solve of the score system; dangling mass is not recycled,
    so the raw scores sum to less than 1 whenever a vertex has no out-link."""
    _check_damping(c)
    tails, heads, weights = _edge_arrays(g)
    n = g.n
    base = (1.0 - c) / n
    r = np.full(n, base)
    # the update contracts by factor c in max norm, so the gap certifies it
    for _ in range(100_000):
        nxt = base + c * np.bincount(heads, weights=r[tails] * weights, minlength=n)
        gap = float(np.max(np.abs(nxt - r)))
        r = nxt
        if gap <= 1e-13:
            break
    residual = _system_residual(r, c, tails, heads, weights)
    return PageRankScores(damping=c, raw=r, normalized=n * r, residual=residual)


def _parents_from_directed(g: DirectedGraph) -> np.ndarray:
    par = np.full(g.n, -1, dtype=np.intp)
    seen = np.zeros(g.n, dtype=bool)
    for u, v in g.edges:
        if seen[u]:
            raise ValidationError(f"vertex {u} has out-degree > 1; not an offspring->parent tree")
        seen[u] = True
        par[u] = v
    # with out-degrees <= 1 the only way to fail acyclicity is a directed cycle
    depth = np.full(g.n, -1, dtype=np.intp)
    for v in range(g.n):
        path = []
        w = v
        while w >= 0 and depth[w] < 0:
            path.append(w)
            w = par[w]
            if len(path) > g.n:
                raise ValidationError("directed cycle; not an offspring->parent tree")
        d = 0 if w < 0 else depth[w] + 1
        for u in reversed(path):
            depth[u] = d
            d += 1
    return par


def pagerank_path_counts(
    t: RootedTree | DirectedGraph, c: float, tol: float = 1e-13
) -> PageRankScores:
    """Score each vertex as (1-c)(1 + sum_l c^l P_l) with P_l its number of
    depth-l descendants, truncating once c^l drops below tol."""
    _check_damping(c)
    if not 0.0 < tol < 1.0:
        raise ValidationError("tol must lie in (0, 1)")
    g = DirectedGraph.from_tree(t) if isinstance(t, RootedTree) else t
    par = _parents_from_directed(g)
    n = g.n
    kids = np.flatnonzero(par >= 0)
    above = par[kids]
    levels = int(math.ceil(math.log(tol) / math.log(c)))
    counts = np.ones(n)
    score = np.ones(n)
    power = 1.0
    for _ in range(levels):
        counts = np.bincount(above, weights=counts[kids], minlength=n)
        if not counts.any():
            break
        power *= c
        score += power * counts
    raw = (1.0 - c) * score / n
    residual = _system_residual(raw, c, *_edge_arrays(g))
    return PageRankScores(damping=c, raw=raw, normalized=n * raw, residual=residual)


def root_score_from_tree(t: RootedTree, c: float) -> float:
    """(1-c) sum_v c^depth(v): the expected root cluster size under
    independent edge retention with probability c, times the teleport mass."""
    _check_damping(c)
    return (1.0 - c) * float(np.power(c, t.depths()).sum())


def limit_root_pagerank_sample(
    f: AttachmentFn, c: float, cap: int, rng: np.random.Generator
) -> float:
    """One draw of the limiting normalized root score: grow the branching
    genealogy of f to an independent Exp(Malthusian rate) horizon, then sum
    retention weights c^depth over its vertices (the percolation cluster's
    conditional mean, exact given the tree)."""
    _check_damping(c)
    sample = ctbp_sample(f, rng, cap=cap)
    return root_score_from_tree(sample.tree, c)


# ---------------------------------------------------------------------------
# tail exponents


@dataclass(frozen=True)
class TailEstimate:
    """Hill estimate at a stability-selected number of order statistics.

    power_law is False when no grid point passes the stability rule (the
    estimate then drifts with k, as it does for light tails)."""

    exponent: float
    k_min: int
    sample_count: int
    stderr: float
    power_law: bool = True

    def __post_init__(self):
        if not self.exponent > 0:
            raise ValidationError("tail exponent must be positive")
        if not self.stderr >= 0:
            raise ValidationError("stderr must be reported")


@dataclass(frozen=True)
class ExponentTargets:
    """Limit-theorem exponents for affine attachment with parameter beta:
    degree tail 2+beta and score tail (2+beta)/(1+(1+beta)c), the ratio of
    the plain and retention-thinned growth rates."""

    degree: float
    pagerank: float
    rate: float
    percolation_rate: float

    def __iter__(self):
        return iter((self.degree, self.pagerank))


def exponent_targets(beta: float, c: float) -> ExponentTargets:
    lam = 2.0 + beta
    lam_c = 1.0 + (1.0 + beta) * c
    return ExponentTargets(degree=lam, pagerank=lam / lam_c, rate=lam, percolation_rate=lam_c)


def hill_estimate(x: np.ndarray, k: int) -> float:
    """k / sum of log-excesses over the (k+1)-th largest value."""
    if not 1 <= k < x.size:
        raise ValidationError("need 1 <= k < number of positive samples")
    top = -np.partition(-x, k)[: k + 1]
    top.sort()
    if top[0] <= 0:
        raise ValidationError("the top k+1 order statistics must be positive")
    denom = float(np.log(top[1:]).sum() - k * math.log(top[0]))
    if denom <= 0.0:
        raise ValidationError("degenerate upper order statistics; no tail to fit")
    return k / denom


def tail_exponent(
    samples,
    k_min_grid=None,
    bootstrap: int = 50,
    rng: np.random.Generator | None = None,
) -> TailEstimate:
    """Hill estimator with the doubling stability rule: pick the smallest k
    whose estimate moves by under 5 percent when k is doubled; bootstrap the
    standard error at the selected k."""
    if isinstance(samples, PageRankScores):
        samples = samples.normalized
    x = np.asarray(samples, dtype=float)
    if x.size < 1000:
        raise ValidationError("need at least 1e3 samples")
    x = x[x > 0]
    if x.size < 1000:
        raise ValidationError("insufficient tail mass: under 1e3 positive samples")
    if k_min_grid is None:
        # start shallow: preasymptotic bias sets in quickly for discrete
        # power laws, and the doubling rule only ever walks deeper
        k = 100
        k_min_grid = []
        while 2 * k < x.size:
            k_min_grid.append(k)
            k *= 2
    grid = [int(k) for k in k_min_grid]
    if not grid or any(not 1 <= k < x.size // 2 for k in grid):
        raise ValidationError("k_min grid must satisfy 1 <= k < n/2")

    estimates = {k: hill_estimate(x, k) for k in grid}
    chosen = None
    for k in sorted(grid):
        doubled = estimates.get(2 * k)
        if doubled is None:
            doubled = hill_estimate(x, 2 * k)
        if abs(doubled - estimates[k]) < 0.05 * estimates[k]:
            chosen = k
            break
    plateau = chosen is not None
    if chosen is None:
        chosen = max(grid)

    if rng is None:
        rng = np.random.default_rng(0)
    boots = [
        hill_estimate(x[rng.integers(0, x.size, size=x.size)], chosen)
        for _ in range(bootstrap)
    ]
    stderr = float(np.std(boots, ddof=1)) if bootstrap > 1 else 0.0
    return TailEstimate(
        exponent=estimates[chosen],
        k_min=chosen,
        sample_count=int(x.size),
        stderr=stderr,
        power_law=plateau,
    )
