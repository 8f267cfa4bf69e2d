"""Ferromagnetic Ising models: exact small-graph Gibbs sums, exact tree
recursions, the local-field fixed point on unimodular trees, and the limiting
free energy functional, with Griffiths monotonicity checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .branching import size_biased
from .errors import NonConvergenceError, SizeCapError, ValidationError
from .generators import DegreePmf
from .graph_core import Graph, RootedTree

ENUM_CAP = 22
_CHUNK = 1 << 16
_ATANH_GUARD = 1.0 - 1e-15


@dataclass(frozen=True)
class IsingParams:
    """Inverse temperature and external field (uniform or per-vertex)."""

    beta: float
    field: float | tuple[float, ...] = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValidationError("only the ferromagnetic regime beta >= 0")
        if not np.isscalar(self.field):
            object.__setattr__(self, "field", tuple(float(b) for b in self.field))

    def field_vector(self, n: int) -> np.ndarray:
        if np.isscalar(self.field):
            return np.full(n, float(self.field))
        if len(self.field) != n:
            raise ValidationError("per-vertex field length must equal n")
        return np.array(self.field, dtype=float)

    def uniform_field(self) -> float:
        if not np.isscalar(self.field):
            raise ValidationError("this operation needs a uniform field")
        return float(self.field)


@dataclass(frozen=True)
class GibbsSummary:
    logZ: float
    phi: float
    magnetization: tuple[float, ...]
    pair_correlations: Mapping[tuple[int, int], float]
    boundary_condition: str

    def __post_init__(self):
        for m in self.magnetization:
            if abs(m) > 1.0 + 1e-9:
                raise ValidationError("magnetization outside [-1, 1]")
        for c in self.pair_correlations.values():
            if abs(c) > 1.0 + 1e-9:
                raise ValidationError("pair correlation outside [-1, 1]")


def _edge_arrays(g: Graph) -> tuple[np.ndarray, np.ndarray, int]:
    """Proper edges with multiplicity, plus the number of self-loops."""
    us, vs, loops = [], [], 0
    for v in range(g.n):
        for u in g.adj[v]:
            if u > v:
                us.append(v)
                vs.append(u)
            elif u == v:
                loops += 1
    return np.array(us, dtype=int), np.array(vs, dtype=int), loops // 2


def exact_gibbs(
    g: Graph,
    params: IsingParams,
    boundary: str | Iterable[int] = "free",
    pairs: Sequence[tuple[int, int]] = (),
) -> GibbsSummary:
    """Exact Gibbs summary by full enumeration (n <= 22).

    Runs in two passes over configuration blocks (max energy, then shifted
    exponential sums) so the reduction is stable and deterministic. A plus
    boundary clamps the given vertex set to +1. Each self-loop contributes
    the constant beta to every configuration's energy.
    """
    if g.n > ENUM_CAP:
        raise SizeCapError(f"exact enumeration capped at n = {ENUM_CAP}, got {g.n}")
    if isinstance(boundary, str):
        if boundary != "free":
            raise ValidationError(f"unknown boundary {boundary!r}")
        clamped: set[int] = set()
        label = "free"
    else:
        clamped = {int(v) for v in boundary}
        if any(v < 0 or v >= g.n for v in clamped):
            raise ValidationError("boundary set mentions vertices outside the graph")
        label = "plus"
    bvec = params.field_vector(g.n)
    us, vs, n_loops = _edge_arrays(g)
    free = [v for v in range(g.n) if v not in clamped]
    nf = len(free)
    pairs = [(min(u, v), max(u, v)) for u, v in pairs]

    def energies(lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        idx = np.arange(lo, hi, dtype=np.int64)
        spins = np.ones((hi - lo, g.n))
        for j, v in enumerate(free):
            spins[:, v] = ((idx >> j) & 1) * 2.0 - 1.0
        e = spins @ bvec
        if us.size:
            e += params.beta * np.einsum("ij,ij->i", spins[:, us], spins[:, vs])
        return e, spins

    total = 1 << nf
    emax = -math.inf
    for lo in range(0, total, _CHUNK):
        e, _ = energies(lo, min(lo + _CHUNK, total))
        emax = max(emax, float(e.max()))
    s0 = 0.0
    sx = np.zeros(g.n)
    sp = np.zeros(len(pairs))
    for lo in range(0, total, _CHUNK):
        e, spins = energies(lo, min(lo + _CHUNK, total))
        w = np.exp(e - emax)
        s0 += float(w.sum())
        sx += w @ spins
        for j, (u, v) in enumerate(pairs):
            sp[j] += float(np.sum(w * spins[:, u] * spins[:, v]))
    logz = emax + math.log(s0) + params.beta * n_loops
    return GibbsSummary(
        logZ=logz,
        phi=logz / g.n,
        magnetization=tuple(sx / s0),
        pair_correlations={pq: sp[j] / s0 for j, pq in enumerate(pairs)},
        boundary_condition=label,
    )


# ---------------------------------------------------------------------------
# tree recursions


def edge_field(beta: float, h):
    """Field transmitted through a single edge: atanh(tanh(beta) tanh(h))."""
    prod = np.clip(math.tanh(beta) * np.tanh(h), -_ATANH_GUARD, _ATANH_GUARD)
    return np.arctanh(prod)


def tree_local_fields(t: RootedTree, params: IsingParams):
    """Exact per-vertex fields on a tree with uniform external field.

    Bottom-up, h_v = B + sum over children of edge_field(beta, h_child) is
    the field of v in its own subtree; a downward cavity pass adds the
    parent-side contribution so tanh(total_field[v]) is the exact whole-tree
    magnetization of every vertex. Returns (subtree fields, total fields,
    root magnetization).
    """
    b = params.uniform_field()
    beta = params.beta
    order = t.topological_order()
    h = np.zeros(t.n)
    for v in reversed(order):
        h[v] = b + sum(edge_field(beta, h[c]) for c in t.children[v])
    up = np.zeros(t.n)  # parent-side field; 0 at the root
    for v in order:
        for c in t.children[v]:
            up[c] = edge_field(beta, up[v] + h[v] - edge_field(beta, h[c]))
    total = h + up
    return h, total, float(np.tanh(total[t.root]))


def pruning_check(t: RootedTree, params: IsingParams) -> float:
    """Max deviation between the exact (root, root-children) marginal and the
    star model with pruned-subtree fields at the leaves."""
    if t.n > 15:
        raise SizeCapError("pruning check enumerates subtrees; n <= 15")
    b = params.uniform_field()
    beta = params.beta
    h, _, _ = tree_local_fields(t, params)
    kids = list(t.children[t.root])
    verts = [t.root] + kids

    # exact joint marginal of (root, children) by direct enumeration
    bvec = params.field_vector(t.n)
    us, vs, _ = _edge_arrays(t.to_rooted_graph())
    idx = np.arange(1 << t.n, dtype=np.int64)
    spins = ((idx[:, None] >> np.arange(t.n)[None, :]) & 1) * 2.0 - 1.0
    e = spins @ bvec + beta * np.einsum("ij,ij->i", spins[:, us], spins[:, vs])
    w = np.exp(e - e.max())
    w /= w.sum()
    bits = ((spins[:, verts] + 1.0) / 2.0).astype(np.int64)
    conf = np.zeros(len(idx), dtype=np.int64)
    for j in range(len(verts)):
        conf |= bits[:, j] << j
    joint = np.bincount(conf, weights=w, minlength=1 << len(verts))

    # star with root field b and leaf fields h_i from the pruned subtrees
    star = np.empty(1 << len(verts))
    for c in range(1 << len(verts)):
        xr = ((c >> 0) & 1) * 2.0 - 1.0
        en = b * xr
        for j, kid in enumerate(kids):
            xc = ((c >> (j + 1)) & 1) * 2.0 - 1.0
            en += beta * xr * xc + h[kid] * xc
        star[c] = math.exp(en)
    star /= star.sum()
    return float(np.max(np.abs(joint - star)))


# ---------------------------------------------------------------------------
# the local-field fixed point


@dataclass
class SamplePool:
    """Real-valued pool of local fields with the diagnostics produced by the
    monotone two-start solve."""

    values: np.ndarray
    beta: float
    field: float
    degree_law: DegreePmf
    sweeps: int
    gap: float
    kolmogorov: float
    converged: bool = True


def _ks_tolerant(a: np.ndarray, b: np.ndarray, eps: float = 1e-9) -> float:
    """Kolmogorov distance that ignores value splits finer than eps, so a
    degenerate pool sitting a few ulps away from its twin reads as 0."""
    pts = np.union1d(a, b) + eps
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ising_rde_solve(
    p: DegreePmf,
    beta: float,
    B: float,
    rng: np.random.Generator,
    pool_size: int = 10**5,
    sweeps: int = 400,
    tol: float = 1e-12,
) -> SamplePool:
    """Population dynamics for Y = B + sum over K of edge_field(beta, Y_i),
    K the offspring count of a non-root vertex (size-biased law of p).

    Two pools start at the monotone extremes delta_B and a saturated field;
    their means sandwich the fixed point, and the solve settles when the
    sandwich gap falls to the Monte Carlo floor. The returned pool is the
    low start; the Kolmogorov distance between the two final pools, blind to
    splits finer than 1e-9, is reported as a uniqueness diagnostic.
    """
    if beta < 0 or B < 0:
        raise ValidationError("needs beta >= 0 and B >= 0")
    pb = size_biased(p)
    # tanh saturates at 50, so the first sweep maps the high pool to
    # B + K*beta, which dominates the fixed point for every K
    lo = np.full(pool_size, float(B))
    hi = np.full(pool_size, 50.0)

    def sweep(pool: np.ndarray) -> np.ndarray:
        ks = pb.sample(rng, pool_size)
        idx = rng.integers(0, pool_size, size=int(ks.sum()))
        contrib = edge_field(beta, pool[idx])
        cs = np.concatenate([[0.0], np.cumsum(contrib)])
        ends = np.cumsum(ks)
        return B + (cs[ends] - cs[ends - ks])

    for it in range(1, sweeps + 1):
        lo, hi = sweep(lo), sweep(hi)
        gap = abs(float(lo.mean()) - float(hi.mean()))
        floor = 3.0 * (float(lo.std()) + float(hi.std())) / math.sqrt(pool_size)
        if it >= 8 and gap <= max(tol, floor):
            ks = _ks_tolerant(np.sort(lo), np.sort(hi))
            return SamplePool(
                values=lo,
                beta=beta,
                field=B,
                degree_law=p,
                sweeps=it,
                gap=gap,
                kolmogorov=ks,
            )
    raise NonConvergenceError(
        f"monotone starts still {gap:.3g} apart after {sweeps} sweeps"
    )


def free_energy_limit(
    p: DegreePmf,
    beta: float,
    B: float,
    pool: SamplePool,
    samples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo of the limiting free energy density, returning (value, SE).

    phi = (mu/2) log cosh(beta)
        - (mu/2) E log[1 + tanh(beta) tanh(Y1) tanh(Y2)]
        + E log{ e^B prod(1 + tanh(beta) tanh(Y_i)) + e^-B prod(1 - ...) }
    with D ~ p draws inside the last product and Y fresh pool picks.
    """
    if not pool.converged:
        raise ValidationError("local-field pool did not converge")
    if pool.beta != beta or pool.field != B:
        raise ValidationError("pool was solved at different parameters")
    mu = p.mean
    theta = math.tanh(beta)
    vals = pool.values

    y1 = vals[rng.integers(0, vals.size, size=samples)]
    y2 = vals[rng.integers(0, vals.size, size=samples)]
    edge_term = np.log1p(theta * np.tanh(y1) * np.tanh(y2))

    ds = p.sample(rng, samples)
    idx = rng.integers(0, vals.size, size=int(ds.sum()))
    t = theta * np.tanh(vals[idx])
    ends = np.cumsum(ds)
    la = np.concatenate([[0.0], np.cumsum(np.log1p(t))])
    lb = np.concatenate([[0.0], np.cumsum(np.log1p(-t))])
    vertex_term = np.logaddexp(
        B + (la[ends] - la[ends - ds]), -B + (lb[ends] - lb[ends - ds])
    )

    value = (
        0.5 * mu * math.log(math.cosh(beta))
        - 0.5 * mu * float(edge_term.mean())
        + float(vertex_term.mean())
    )
    var = (0.5 * mu) ** 2 * float(edge_term.var()) + float(vertex_term.var())
    return value, math.sqrt(var / samples)


def root_magnetization(
    p: DegreePmf,
    beta: float,
    B: float,
    pool: SamplePool,
    samples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo of the limiting root magnetization
    E tanh(B + sum_{i<=D} xi(beta, Y_i)), D ~ p and Y fresh pool picks,
    returning (value, SE). The children use the size-biased pool law while
    the root degree is plain, hence the fresh D here."""
    if not pool.converged:
        raise ValidationError("local-field pool did not converge")
    if pool.beta != beta or pool.field != B:
        raise ValidationError("pool was solved at different parameters")
    vals = pool.values
    ds = p.sample(rng, samples)
    idx = rng.integers(0, vals.size, size=int(ds.sum()))
    contrib = edge_field(beta, vals[idx])
    cs = np.concatenate([[0.0], np.cumsum(contrib)])
    ends = np.cumsum(ds)
    m = np.tanh(B + (cs[ends] - cs[ends - ds]))
    se = float(m.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return float(m.mean()), se


# ---------------------------------------------------------------------------
# Griffiths monotonicity


@dataclass(frozen=True)
class GriffithsReport:
    checked: int
    violations: tuple[dict, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def griffiths_check(
    g: Graph,
    beta_grid: Sequence[float],
    B_grid: Sequence[float],
    tol: float = 1e-10,
) -> GriffithsReport:
    """Exact check that every <x_u> and <x_u x_v> is nonnegative and
    nondecreasing in beta and in B over the given grids."""
    if g.n > 15:
        raise SizeCapError("Griffiths check enumerates exactly; n <= 15")
    betas = sorted(float(b) for b in beta_grid)
    bs = sorted(float(b) for b in B_grid)
    if betas[0] < 0 or bs[0] < 0:
        raise ValidationError("Griffiths monotonicity needs beta, B >= 0")
    all_pairs = [(u, v) for u in range(g.n) for v in range(u + 1, g.n)]
    table: dict[tuple[int, int], dict[str, object]] = {}
    for i, beta in enumerate(betas):
        for j, b in enumerate(bs):
            s = exact_gibbs(g, IsingParams(beta=beta, field=b), pairs=all_pairs)
            table[i, j] = {"m": s.magnetization, "c": s.pair_correlations}
    violations: list[dict] = []
    checked = 0

    def scan(kind, u_or_pair, series, axis, fixed):
        nonlocal checked
        for a, b in zip(series, series[1:]):
            checked += 1
            if a < -tol:
                violations.append(
                    {"kind": kind, "where": u_or_pair, "axis": axis, "at": fixed,
                     "deficit": float(-a), "reason": "negative"}
                )
            if b - a < -tol:
                violations.append(
                    {"kind": kind, "where": u_or_pair, "axis": axis, "at": fixed,
                     "deficit": float(a - b), "reason": "decreasing"}
                )

    for j in range(len(bs)):
        for u in range(g.n):
            scan("magnetization", u, [table[i, j]["m"][u] for i in range(len(betas))], "beta", bs[j])
        for pq in all_pairs:
            scan("pair", pq, [table[i, j]["c"][pq] for i in range(len(betas))], "beta", bs[j])
    for i in range(len(betas)):
        for u in range(g.n):
            scan("magnetization", u, [table[i, j]["m"][u] for j in range(len(bs))], "B", betas[i])
        for pq in all_pairs:
            scan("pair", pq, [table[i, j]["c"][pq] for j in range(len(bs))], "B", betas[i])
    return GriffithsReport(checked=checked, violations=tuple(violations))
