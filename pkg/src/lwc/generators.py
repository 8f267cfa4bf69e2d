"""Random graph and tree generators.

Every generator is a deterministic function of (parameters, generator state):
running it twice with generators seeded identically reproduces the output
byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .graph_core import Graph, RootedTree


# ---------------------------------------------------------------------------
# parameter types


@dataclass(frozen=True)
class DegreePmf:
    """Finite pmf over degrees 0..len(probs)-1."""

    probs: tuple[float, ...]

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=float)
        if arr.size == 0 or (arr < 0).any():
            raise ValidationError("degree pmf needs nonnegative entries")
        if abs(arr.sum() - 1.0) > 1e-12:
            raise ValidationError(f"degree pmf sums to {arr.sum()}, not 1")

    @classmethod
    def from_probs(cls, probs: Sequence[float]) -> "DegreePmf":
        arr = np.asarray(probs, dtype=float)
        return cls(tuple((arr / arr.sum()).tolist()))

    @classmethod
    def delta(cls, k: int) -> "DegreePmf":
        return cls(tuple([0.0] * k + [1.0]))

    @classmethod
    def poisson(cls, lam: float, cutoff: int = 40) -> "DegreePmf":
        ks = np.arange(cutoff + 1)
        logp = ks * math.log(lam) - lam - np.array([math.lgamma(k + 1.0) for k in ks])
        p = np.exp(logp)
        return cls.from_probs(p)

    @cached_property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probs)), self.probs))

    @cached_property
    def second_moment(self) -> float:
        return float(np.dot(np.arange(len(self.probs)) ** 2, self.probs))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(len(self.probs), size=size, p=np.asarray(self.probs))


@dataclass(frozen=True)
class AttachmentFn:
    """Positive weight f(k) given to a vertex with k children.

    The affine family f(k) = k + 1 + beta and the constant family carry tags
    so samplers can use O(1) updates instead of a weight index.
    """

    fn: Callable[[int], float]
    affine_beta: float | None = None
    constant_value: float | None = None

    @classmethod
    def constant(cls, value: float = 1.0) -> "AttachmentFn":
        if value <= 0:
            raise ValidationError("constant attachment weight must be positive")
        return cls(fn=lambda k: value, constant_value=value)

    @classmethod
    def affine(cls, beta: float) -> "AttachmentFn":
        if beta <= -1:
            raise ValidationError("affine attachment needs beta > -1")
        return cls(fn=lambda k: k + 1.0 + beta, affine_beta=beta)

    @classmethod
    def of(cls, fn: Callable[[int], float]) -> "AttachmentFn":
        return cls(fn=fn)

    def __call__(self, k: int) -> float:
        v = float(self.fn(k))
        if v <= 0:
            raise ValidationError(f"attachment weight f({k}) = {v} must be positive")
        return v


@dataclass(frozen=True)
class AttributeKernel:
    """Attribute pmf pi, positive affinity matrix kappa, and degree power gamma."""

    pi: tuple[float, ...]
    kappa: tuple[tuple[float, ...], ...]
    gamma: float = 1.0

    def __post_init__(self):
        s = len(self.pi)
        if abs(sum(self.pi) - 1.0) > 1e-12 or any(p < 0 for p in self.pi):
            raise ValidationError("attribute pmf must be nonnegative and sum to 1")
        if len(self.kappa) != s or any(len(row) != s for row in self.kappa):
            raise ValidationError("kappa must be s x s")
        if any(x <= 0 for row in self.kappa for x in row):
            raise ValidationError("kappa entries must be positive")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValidationError("gamma must lie in [0, 1]")

    @property
    def size(self) -> int:
        return len(self.pi)


@dataclass(frozen=True)
class StepPmf:
    """Law of the upward step count Z; either an explicit finite pmf or a
    geometric law on {0, 1, 2, ...} with success parameter p."""

    probs: tuple[float, ...] | None = None
    geometric_p: float | None = None

    def __post_init__(self):
        if (self.probs is None) == (self.geometric_p is None):
            raise ValidationError("give exactly one of probs / geometric_p")
        if self.probs is not None:
            if abs(sum(self.probs) - 1.0) > 1e-12 or any(p < 0 for p in self.probs):
                raise ValidationError("step pmf must be nonnegative and sum to 1")
        else:
            if not 0 < self.geometric_p <= 1:
                raise ValidationError("geometric parameter must lie in (0, 1]")

    @classmethod
    def geometric(cls, p: float) -> "StepPmf":
        return cls(geometric_p=p)

    @classmethod
    def from_probs(cls, probs: Sequence[float]) -> "StepPmf":
        return cls(probs=tuple(float(p) for p in probs))

    @property
    def mean(self) -> float:
        if self.geometric_p is not None:
            return (1.0 - self.geometric_p) / self.geometric_p
        return float(np.dot(np.arange(len(self.probs)), self.probs))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.geometric_p is not None:
            return rng.geometric(self.geometric_p, size=size) - 1
        return rng.choice(len(self.probs), size=size, p=np.asarray(self.probs))


# ---------------------------------------------------------------------------
# Erdos-Renyi


def _adjacency_from_edge_arrays(n: int, us: np.ndarray, vs: np.ndarray) -> Graph:
    """Fast Graph assembly; loops must not appear in (us, vs)."""
    ends = np.concatenate([us, vs])
    starts = np.concatenate([vs, us])
    order = np.lexsort((starts, ends))
    ends, starts = ends[order], starts[order]
    counts = np.bincount(ends, minlength=n)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    adj = tuple(
        tuple(int(x) for x in starts[offsets[v]:offsets[v + 1]]) for v in range(n)
    )
    return Graph(n=n, adj=adj)


def erdos_renyi(n: int, lam: float, rng: np.random.Generator) -> Graph:
    """Simple graph where each of the C(n,2) pairs is an edge w.p. lam/n.

    Pairs are visited by geometric skips, so the cost is linear in the number
    of edges rather than quadratic in n.
    """
    if n < 1:
        raise ValidationError("n must be positive")
    if lam < 0 or lam > n:
        raise ValidationError("lambda must lie in [0, n]")
    p = lam / n
    total = n * (n - 1) // 2
    if p == 0 or total == 0:
        return Graph(n=n, adj=tuple(() for _ in range(n)))
    if p >= 1:
        hit = np.arange(total, dtype=np.int64)
    else:
        hits = []
        pos = -1
        # draw skip blocks until the pair index range is exhausted
        block = max(256, int(1.2 * total * p) + 1)
        while pos < total:
            skips = rng.geometric(p, size=block)
            idx = pos + np.cumsum(skips)
            hits.append(idx[idx < total])
            if idx[-1] >= total:
                break
            pos = int(idx[-1])
            block = max(256, int(0.2 * total * p) + 1)
        hit = np.concatenate(hits) if hits else np.empty(0, dtype=np.int64)
    if hit.size == 0:
        return Graph(n=n, adj=tuple(() for _ in range(n)))
    # invert the row-major enumeration of pairs (i<j)
    offsets = np.cumsum(np.arange(n - 1, 0, -1, dtype=np.int64))
    starts = np.concatenate([[0], offsets[:-1]])
    i = np.searchsorted(offsets, hit, side="right")
    j = hit - starts[i] + i + 1
    return _adjacency_from_edge_arrays(n, i.astype(np.int64), j.astype(np.int64))


# ---------------------------------------------------------------------------
# configuration model


def configuration_model(
    degrees: Sequence[int] | None,
    rng: np.random.Generator,
    pmf: DegreePmf | None = None,
    n: int | None = None,
) -> Graph:
    """Multigraph on a degree sequence by sequential half-edge pairing.

    Either pass a realized degree sequence, or a pmf with n for iid draws
    (an odd total gets fixed by adding 1 to the last vertex's degree).
    Pairing repeatedly takes the smallest unpaired half-edge and matches it
    with a uniform choice among the others; loops and parallel edges stay.
    """
    if degrees is None:
        if pmf is None or n is None:
            raise ValidationError("need a degree sequence, or pmf together with n")
        degs = pmf.sample(rng, n).astype(np.int64)
        if degs.sum() % 2 == 1:
            degs[-1] += 1
    else:
        degs = np.asarray(degrees, dtype=np.int64)
        if (degs < 0).any():
            raise ValidationError("negative degree")
        if degs.sum() % 2 == 1:
            raise ValidationError("degree sum must be even")
    nv = len(degs)
    owner = np.repeat(np.arange(nv, dtype=np.int64), degs)
    l = owner.size
    # arr holds unpaired half-edge ids for uniform partner draws; pos tracks
    # each id's slot so removal is an O(1) swap
    arr = list(range(l))
    pos = list(range(l))
    cnt = l
    paired = [False] * l

    def remove(he: int) -> None:
        nonlocal cnt
        k = pos[he]
        last = arr[cnt - 1]
        arr[k] = last
        pos[last] = k
        cnt -= 1

    edges_u = []
    edges_v = []
    for he in range(l):
        if paired[he]:
            continue
        remove(he)
        j = int(rng.integers(cnt))
        mate = arr[j]
        remove(mate)
        paired[he] = paired[mate] = True
        edges_u.append(int(owner[he]))
        edges_v.append(int(owner[mate]))
    return Graph.from_edges(nv, list(zip(edges_u, edges_v)))


# ---------------------------------------------------------------------------
# recursive trees (uniform / preferential attachment)


class _Fenwick:
    """Prefix-sum tree for O(log n) weighted sampling and updates."""

    def __init__(self, capacity: int):
        self.tree = [0.0] * (capacity + 1)
        self.size = capacity

    def add(self, i: int, delta: float) -> None:
        i += 1
        while i <= self.size:
            self.tree[i] += delta
            i += i & (-i)

    def search(self, target: float) -> int:
        """Largest i with prefix_sum(i) <= target, returned as item index."""
        idx = 0
        bit = 1 << (self.size.bit_length())
        while bit:
            nxt = idx + bit
            if nxt <= self.size and self.tree[nxt] <= target:
                idx = nxt
                target -= self.tree[nxt]
            bit >>= 1
        return idx


def recursive_tree_parents(n: int, f: AttachmentFn, rng: np.random.Generator) -> np.ndarray:
    """Parent array of the recursive tree: vertex k joins vertex v < k with
    probability proportional to f(children(v))."""
    if n < 1:
        raise ValidationError("n must be positive")
    parents = np.empty(n, dtype=np.int64)
    parents[0] = -1
    if n == 1:
        return parents
    if f.constant_value is not None:
        # all weights equal: uniform parent
        u = rng.random(n - 1)
        parents[1:] = np.floor(u * np.arange(1, n)).astype(np.int64)
        return parents
    if f.affine_beta is not None:
        a = 1.0 + f.affine_beta
        u = rng.random(n - 1)
        # child weight units live in the attachment record itself: the parent
        # of vertex j contributes one unit each time it gains a child
        for k in range(1, n):
            total = (k - 1) + k * a
            x = u[k - 1] * total
            if x < k * a:
                parents[k] = int(x / a)
            else:
                parents[k] = parents[int(x - k * a) + 1]
        return parents
    weights = _Fenwick(n)
    children = np.zeros(n, dtype=np.int64)
    weights.add(0, f(0))
    total = f(0)
    for k in range(1, n):
        x = rng.random() * total
        v = min(weights.search(x), k - 1)
        parents[k] = v
        delta = f(int(children[v]) + 1) - f(int(children[v]))
        children[v] += 1
        weights.add(v, delta)
        weights.add(k, f(0))
        total += delta + f(0)
    return parents


def recursive_tree(n: int, f: AttachmentFn, rng: np.random.Generator) -> RootedTree:
    return RootedTree(n=n, parent=tuple(recursive_tree_parents(n, f, rng).tolist()))


# ---------------------------------------------------------------------------
# attribute-dependent preferential attachment


def attribute_tree(n: int, kernel: AttributeKernel, rng: np.random.Generator) -> RootedTree:
    """Growth with attribute affinities: the arrival draws its attribute from
    pi and joins vertex v with probability proportional to
    kappa(a(v), a(new)) * deg(v)^gamma, where the root's degree counter starts
    at 1 before any edge is present.
    """
    if n < 1:
        raise ValidationError("n must be positive")
    s = kernel.size
    marks = np.empty(n, dtype=np.int64)
    parents = np.empty(n, dtype=np.int64)
    parents[0] = -1
    marks[0] = rng.choice(s, p=np.asarray(kernel.pi))
    if n == 1:
        return RootedTree(n=1, parent=(-1,), marks=(int(marks[0]),))
    attr_draws = rng.random(n - 1)
    pick_draws = rng.random(n - 1)
    pi_cum = np.cumsum(kernel.pi)
    kappa = [list(row) for row in kernel.kappa]

    if kernel.gamma in (0.0, 1.0):
        # units[b] lists class-b vertices, once per degree unit when gamma=1
        # or once per vertex when gamma=0, so a uniform unit is a weighted draw
        units: list[list[int]] = [[] for _ in range(s)]
        units[marks[0]].append(0)  # root seeded with degree 1
        per_degree = kernel.gamma == 1.0
        for k in range(1, n):
            a_new = int(np.searchsorted(pi_cum, attr_draws[k - 1], side="right"))
            marks[k] = a_new
            col = [kappa[b][a_new] for b in range(s)]
            cum = np.cumsum([col[b] * len(units[b]) for b in range(s)])
            x = pick_draws[k - 1] * cum[-1]
            b = int(np.searchsorted(cum, x, side="right"))
            if b >= s or not units[b]:  # float boundary guard
                b = max(bb for bb in range(s) if units[bb])
            x_in = x - (cum[b - 1] if b else 0.0)
            v = units[b][min(int(x_in / col[b]), len(units[b]) - 1)]
            parents[k] = v
            if per_degree:
                units[marks[v]].append(v)
            units[a_new].append(k)
    else:
        deg = np.zeros(n)
        deg[0] = 1.0
        mk = marks  # alias
        for k in range(1, n):
            a_new = int(np.searchsorted(pi_cum, attr_draws[k - 1], side="right"))
            mk[k] = a_new
            col = np.array([kappa[b][a_new] for b in range(s)])
            w = col[mk[:k]] * deg[:k] ** kernel.gamma
            cum = np.cumsum(w)
            v = min(
                int(np.searchsorted(cum, pick_draws[k - 1] * cum[-1], side="right")),
                k - 1,
            )
            parents[k] = v
            deg[v] += 1.0
            deg[k] = 1.0
    return RootedTree(
        n=n, parent=tuple(parents.tolist()), marks=tuple(int(m) for m in marks)
    )


# ---------------------------------------------------------------------------
# co-evolving random walk attachment


def coevolving_tree(n: int, step: StepPmf, rng: np.random.Generator) -> RootedTree:
    """Each arrival picks a uniform existing vertex, walks Z steps toward the
    root (stopping there), and attaches at the endpoint. Starts from the edge
    v1 -> v0."""
    if n < 1:
        raise ValidationError("n must be positive")
    parents = np.full(n, -1, dtype=np.int64)
    if n >= 2:
        parents[1] = 0
    if n > 2:
        vs = rng.integers(0, np.arange(2, n))
        zs = step.sample(rng, n - 2)
        for k in range(2, n):
            v = int(vs[k - 2])
            z = int(zs[k - 2])
            while z > 0 and v != 0:
                v = int(parents[v])
                z -= 1
            parents[k] = v
    return RootedTree(n=n, parent=tuple(parents.tolist()))
