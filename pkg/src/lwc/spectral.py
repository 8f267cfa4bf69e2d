"""Spectra of sparse graphs and their tree limits.

Empirical spectral distributions, Stieltjes transforms, the exact diagonal
resolvent of a tree via two cavity passes, a population-dynamics solver for
the limiting resolvent law of configuration-model graphs, and the explicit
density of the k-regular limit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .branching import size_biased
from .errors import NonConvergenceError, SizeCapError, ValidationError
from .generators import DegreePmf
from .graph_core import EmpiricalMeasure, Graph, RootedTree

EIGEN_CAP = 10**4


@dataclass(frozen=True)
class ComplexGridFn:
    """Complex function sampled on upper-half-plane points, constrained to
    the Herglotz class: |f(z)| <= 1/Im(z) and Im f(z) > 0."""

    grid: tuple[complex, ...]
    values: tuple[complex, ...]

    def __post_init__(self):
        if len(self.grid) != len(self.values):
            raise ValidationError("grid and values must align")
        for z, v in zip(self.grid, self.values):
            if z.imag <= 0:
                raise ValidationError("grid points need positive imaginary part")
            if abs(v) > 1.0 / z.imag + 1e-9:
                raise ValidationError("value violates the 1/Im(z) bound")
            if v.imag <= 0:
                raise ValidationError("values must keep a positive imaginary part")


@dataclass
class SpectralPool:
    """Sample pool approximating the limiting root-resolvent law on a grid."""

    grid: tuple[complex, ...]
    pool: np.ndarray  # shape (pool_size, len(grid))
    sweeps: tuple[int, ...]
    drift: tuple[float, ...]
    drift_history: tuple[tuple[float, ...], ...]

    def check_bounds(self) -> None:
        for j, z in enumerate(self.grid):
            col = self.pool[:, j]
            if np.any(np.abs(col) > 1.0 / z.imag + 1e-9):
                raise ValidationError(f"pool exceeds 1/Im(z) bound at {z}")
            if np.any(col.imag <= 0):
                raise ValidationError(f"pool left the upper half plane at {z}")


# ---------------------------------------------------------------------------
# dense spectra


def adjacency_matrix(g: Graph) -> np.ndarray:
    """Symmetric adjacency with multi-edge multiplicities; each self-loop
    adds 1 to the diagonal."""
    a = np.zeros((g.n, g.n))
    for v in range(g.n):
        for u in g.adj[v]:
            if u == v:
                a[v, v] += 0.5  # loop listed twice in the adjacency
            else:
                a[v, u] += 1.0
    return a


def eigenvalues_symmetric(g: Graph, cap: int = EIGEN_CAP) -> np.ndarray:
    """Ascending adjacency eigenvalues via symmetric tridiagonal reduction."""
    if g.n > cap:
        raise SizeCapError(f"eigenvalue solve capped at n = {cap}, got {g.n}")
    return np.linalg.eigvalsh(adjacency_matrix(g))


def esd(g: Graph, bin_width: float = 0.05, cap: int = EIGEN_CAP) -> EmpiricalMeasure:
    """Binned empirical spectral distribution, total mass 1."""
    lam = eigenvalues_symmetric(g, cap=cap)
    return EmpiricalMeasure.from_reals(lam, bin_width=bin_width).normalized()


def stieltjes_of_measure(m, z: complex) -> complex:
    """integral of 1/(lambda - z) against a measure (or eigenvalue list)."""
    if z.imag <= 0:
        raise ValidationError("Stieltjes transform needs Im z > 0")
    if isinstance(m, EmpiricalMeasure):
        norm = m.normalized()
        if norm.bin_width is not None:
            lam = np.array(
                [norm.bin_left(k) + 0.5 * norm.bin_width for k in norm.atoms]
            )
        else:
            lam = np.array([float(k) for k in norm.atoms])
        w = np.array(list(norm.atoms.values()))
    else:
        lam = np.asarray(m, dtype=float)
        w = np.full(lam.size, 1.0 / lam.size)
    return complex(np.sum(w / (lam - z)))


# ---------------------------------------------------------------------------
# tree resolvents


def resolvent_tree(t: RootedTree, z: complex) -> np.ndarray:
    """Diagonal of (A - zI)^(-1) for a tree, exactly, in two passes.

    Upward, each vertex aggregates its children's subtree root entries
    Y(c) = -1/(z + sum Y(grandchildren)); downward, the complement of each
    subtree enters through one cavity term from the parent side.
    """
    if z.imag <= 0:
        raise ValidationError("resolvent needs Im z > 0")
    order = t.topological_order()
    below = np.zeros(t.n, dtype=complex)  # sum over children of Y(child)
    ydown = np.zeros(t.n, dtype=complex)
    for v in reversed(order):
        ydown[v] = -1.0 / (z + below[v])
        p = t.parent[v]
        if p >= 0:
            below[p] += ydown[v]
    up = np.zeros(t.n, dtype=complex)  # cavity field from above; 0 at the root
    diag = np.empty(t.n, dtype=complex)
    for v in order:
        diag[v] = -1.0 / (z + below[v] + up[v])
        for c in t.children[v]:
            up[c] = -1.0 / (z + up[v] + below[v] - ydown[c])
    return diag


def regular_tree_cavity(k: int, z: complex) -> complex:
    """Root entry of the subtree resolvent on the infinite k-regular tree:
    the Im > 0 root of (k-1) Y^2 + z Y + 1 = 0."""
    if k < 2:
        raise ValidationError("regular branching needs k >= 2")
    disc = cmath.sqrt(z * z - 4.0 * (k - 1))
    for y in ((-z + disc) / (2.0 * (k - 1)), (-z - disc) / (2.0 * (k - 1))):
        if y.imag > 0:
            return y
    raise ValidationError("no upper-half-plane root; is Im z > 0?")


def regular_tree_stieltjes(k: int, z: complex) -> complex:
    """Stieltjes transform of the k-regular limiting spectral law."""
    return -1.0 / (z + k * regular_tree_cavity(k, z))


# ---------------------------------------------------------------------------
# the limiting resolvent law by population dynamics


def default_grid(ys=(1.0, 0.1, 0.01)) -> tuple[complex, ...]:
    xs = np.arange(-6.0, 6.0 + 1e-9, 0.1)
    return tuple(complex(x, y) for y in ys for x in xs)


def _solve_point(
    z: complex,
    pb: DegreePmf,
    pool_size: int,
    max_sweeps: int,
    tol: float,
    rng: np.random.Generator,
    window: int = 16,
) -> tuple[np.ndarray, int, float, list[float]]:
    pool = -1.0 / (z + 5.0 * rng.random(pool_size))
    drifts: list[float] = []
    for sweep in range(1, max_sweeps + 1):
        ds = pb.sample(rng, pool_size)
        idx = rng.integers(0, pool_size, size=int(ds.sum()))
        cs = np.concatenate([[0.0 + 0.0j], np.cumsum(pool[idx])])
        ends = np.cumsum(ds)
        sums = cs[ends] - cs[ends - ds]
        new = -1.0 / (z + sums)
        drifts.append(float(abs(new.mean() - pool.mean())))
        pool = new
        if sweep >= window:
            recent = drifts[-window:]
            floor = 2.0 * math.sqrt(2.0) * float(pool.std()) / math.sqrt(pool_size)
            if float(np.median(recent)) <= max(tol, floor):
                return pool, sweep, drifts[-1], drifts
    raise NonConvergenceError(
        f"population dynamics did not settle at z = {z} "
        f"after {max_sweeps} sweeps (last drift {drifts[-1]:.3g})"
    )


def spectral_rde_solve(
    p: DegreePmf,
    grid,
    rng: np.random.Generator,
    pool_size: int = 10**5,
    max_sweeps: int = 3000,
    tol: float = 1e-4,
) -> tuple[SpectralPool, tuple[complex, ...]]:
    """Solve the limiting resolvent fixed point on a grid and return the pool
    together with the Stieltjes transform estimate at each grid point.

    Each sweep redraws every pool member as -1/(z + sum of D* pool picks),
    D* size-biased; the estimate averages -1/(z + sum of D picks) with
    D ~ p. A drift (pool-mean change) falling to the Monte Carlo noise
    floor, or below tol, counts as settled. Grid points are independent and
    each uses its own child generator, so results do not depend on sweep
    interleaving.
    """
    grid = tuple(complex(z) for z in grid)
    for z in grid:
        if z.imag <= 0:
            raise ValidationError("grid needs Im z > 0")
    pb = size_biased(p)
    seeds = rng.integers(0, 2**63 - 1, size=2 * len(grid))
    pools = np.empty((pool_size, len(grid)), dtype=complex)
    sweeps, drifts, histories, s_out = [], [], [], []
    for j, z in enumerate(grid):
        sub = np.random.default_rng(int(seeds[2 * j]))
        pool, ns, dr, hist = _solve_point(z, pb, pool_size, max_sweeps, tol, sub)
        pools[:, j] = pool
        sweeps.append(ns)
        drifts.append(dr)
        histories.append(tuple(hist))
        fresh = np.random.default_rng(int(seeds[2 * j + 1]))
        ds = p.sample(fresh, pool_size)
        idx = fresh.integers(0, pool_size, size=int(ds.sum()))
        cs = np.concatenate([[0.0 + 0.0j], np.cumsum(pool[idx])])
        ends = np.cumsum(ds)
        sums = cs[ends] - cs[ends - ds]
        s_out.append(complex(np.mean(-1.0 / (z + sums))))
    sp = SpectralPool(
        grid=grid,
        pool=pools,
        sweeps=tuple(sweeps),
        drift=tuple(drifts),
        drift_history=tuple(histories),
    )
    sp.check_bounds()
    return sp, tuple(s_out)


# ---------------------------------------------------------------------------
# the k-regular closed form


def kesten_mckay_density(k: int, x) -> np.ndarray | float:
    """Density (k/2pi) sqrt(4(k-1) - x^2) / (k^2 - x^2) on |x| <= 2 sqrt(k-1)."""
    if k < 3:
        raise ValidationError("the closed-form density needs k >= 3")
    xs = np.asarray(x, dtype=float)
    out = np.zeros_like(xs)
    inside = np.abs(xs) <= 2.0 * math.sqrt(k - 1.0)
    xi = xs[inside]
    out[inside] = (
        k / (2.0 * math.pi) * np.sqrt(4.0 * (k - 1.0) - xi * xi) / (k * k - xi * xi)
    )
    return float(out) if np.isscalar(x) else out


def kesten_mckay_cdf(k: int, x) -> np.ndarray | float:
    """Distribution function of the k-regular spectral law via a fine
    trapezoid grid (plenty below the tolerances used against it)."""
    edge = 2.0 * math.sqrt(k - 1.0)
    grid = np.linspace(-edge, edge, 20001)
    dens = kesten_mckay_density(k, grid)
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(grid))])
    cdf /= cdf[-1]
    xs = np.asarray(x, dtype=float)
    out = np.interp(xs, grid, cdf, left=0.0, right=1.0)
    return float(out) if np.isscalar(x) else out


def stieltjes_invert(fn) -> np.ndarray:
    """Density readout (1/pi) Im s(x + iy); smoothing bias is O(y)."""
    values = np.asarray(fn.values if isinstance(fn, ComplexGridFn) else fn, dtype=complex)
    return values.imag / math.pi
