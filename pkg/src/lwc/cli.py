"""Reproducible experiment driver: every capability behind one seeded command.

Each subcommand assembles an ExperimentSpec from its flags (or from a JSON
config file whose keys are the flag names; explicit flags win), draws all
randomness from one master seed through named substreams, writes the declared
outputs, and prints a one-line summary. Exit codes: 0 on success, 2 on
invalid input, 3 on numeric non-convergence or a failed self check. The env
var LWC_THREADS caps replica workers; results do not depend on it.
"""

import argparse
import contextlib
import io
import itertools
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from lwc import spectral
from lwc.assignment import (
    CostMatrix,
    logistic_density,
    optimal_assignment,
    random_assignment_experiment,
    zeta2_integral,
)
from lwc.errors import NonConvergenceError, PopulationCapError, ValidationError
from lwc.fringe import FringeLaw, empirical_fringe, fringe_size_pmf, stationarity_residual
from lwc.generators import (
    AttachmentFn,
    AttributeKernel,
    DegreePmf,
    StepPmf,
    attribute_tree,
    coevolving_tree,
    configuration_model,
    erdos_renyi,
    recursive_tree,
)
from lwc.graph_core import (
    EmpiricalMeasure,
    RootedTree,
    read_edgelist,
    read_tree,
    tv_distance,
    write_edgelist,
    write_tree,
)
from lwc.ising import (
    IsingParams,
    exact_gibbs,
    free_energy_limit,
    ising_rde_solve,
    root_magnetization,
    tree_local_fields,
)
from lwc.pagerank import (
    DirectedGraph,
    exponent_targets,
    limit_root_pagerank_sample,
    pagerank_linear,
    pagerank_path_counts,
    tail_exponent,
)
from lwc.streams import replica_map, substream, summarize

_SELFTEST_SEED = 20260814
_LIMIT_CAP = 10**6

# parameter-map keys each subcommand accepts; anything else is rejected up
# front so a typo in a config file cannot silently fall back to a default
_PARAM_KEYS = {
    "generate": {"model", "n", "lambda", "degree_law", "beta", "pi", "kappa", "gamma", "p"},
    "fringe": {"model", "n", "k", "beta"},
    "spectrum": {"model", "n", "degree", "degree_law", "lambda", "bin_width"},
    "ising": {"degree_law", "beta", "field", "field_grid", "pool", "samples"},
    "assign": {"n"},
    "pagerank": {"model", "n", "c", "samples", "beta", "bin_width"},
    "rde": {"degree_law", "x", "y", "pool", "tol", "max_sweeps"},
    "selftest": set(),
}
_OUTPUT_KEYS = {
    "generate": {"out"},
    "fringe": {"out"},
    "spectrum": {"out_csv", "out_json"},
    "ising": {"out"},
    "assign": {"out"},
    "pagerank": {"out_hist", "out_tail"},
    "rde": {"out", "out_log"},
    "selftest": set(),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: subcommand, parameter map, master seed, replica count,
    and output paths keyed by flag name."""

    subcommand: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int | None = None
    replicas: int = 1
    outputs: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in _PARAM_KEYS:
            raise ValidationError(f"unknown subcommand {self.subcommand!r}")
        bad = set(self.params) - _PARAM_KEYS[self.subcommand]
        if bad:
            raise ValidationError(
                f"unknown parameters for {self.subcommand}: {', '.join(sorted(bad))}"
            )
        bad = set(self.outputs) - _OUTPUT_KEYS[self.subcommand]
        if bad:
            raise ValidationError(
                f"unknown outputs for {self.subcommand}: {', '.join(sorted(bad))}"
            )
        if self.seed is not None and not 0 <= int(self.seed) < 2**64:
            raise ValidationError("seed must fit in 64 unsigned bits")
        if self.replicas < 1:
            raise ValidationError("replicas must be >= 1")


def run(spec: ExperimentSpec) -> int:
    """Execute one experiment and return the process exit code."""
    try:
        if spec.seed is None and spec.subcommand != "selftest":
            raise ValidationError("a --seed is required for any stochastic run")
        code = _HANDLERS[spec.subcommand](spec)
    except (NonConvergenceError, PopulationCapError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0 if code is None else int(code)


# ---------------------------------------------------------------------------
# small shared plumbing


def _param(spec: ExperimentSpec, key: str, default: Any = None, required: bool = False) -> Any:
    val = spec.params.get(key, default)
    if required and val is None:
        flag = "--" + key.replace("_", "-")
        raise ValidationError(f"{spec.subcommand} needs {flag}")
    return val


def parse_degree_law(text: str) -> DegreePmf:
    """Degree-law grammar: "delta:K" or "poisson:MEAN"."""
    kind, _, arg = str(text).partition(":")
    try:
        if kind == "delta":
            return DegreePmf.delta(int(arg))
        if kind == "poisson":
            return DegreePmf.poisson(float(arg))
    except ValueError as e:
        raise ValidationError(f"bad degree-law argument in {text!r}") from e
    raise ValidationError(f"unknown degree law {text!r}; use delta:K or poisson:MEAN")


def _regular_degree(law_text: str | None) -> int | None:
    """The K of a "delta:K" law when K >= 3 (where the Kesten-McKay closed
    forms apply), else None."""
    if law_text is None or not str(law_text).startswith("delta:"):
        return None
    k = int(str(law_text).partition(":")[2])
    return k if k >= 3 else None


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(tok) for tok in str(text).split(",") if tok.strip())
    except ValueError as e:
        raise ValidationError(f"bad comma list {text!r}") from e
    if not vals:
        raise ValidationError(f"empty comma list {text!r}")
    return vals


def _parse_matrix(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_parse_floats(row) for row in str(text).split("/"))


def _dump_json(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def _write_csv(path: str, rows: Iterable[tuple[float, float]]) -> None:
    lines = ["x,value"] + [f"{x:.12g},{v:.12g}" for x, v in rows]
    _write(path, "\n".join(lines) + "\n")


def _attachment(model: str, beta: float) -> AttachmentFn:
    if model == "rrt":
        return AttachmentFn.constant()
    if model == "pa":
        return AttachmentFn.affine(beta)
    raise ValidationError(f"unknown tree model {model!r}; use rrt or pa")


# ---------------------------------------------------------------------------
# subcommand handlers


def _run_generate(spec: ExperimentSpec) -> None:
    model = _param(spec, "model", required=True)
    n = int(_param(spec, "n", required=True))
    out = spec.outputs.get("out")
    if out is None:
        raise ValidationError("generate needs --out")
    rng = substream(spec.seed, "generate", model)
    if model == "er":
        lam = float(_param(spec, "lambda", 2.0))
        g = erdos_renyi(n, lam, rng)
        write_edgelist(g, out)
        print(f"generate: er n={n} mean degree {2.0 * len(g.edges()) / n:.3f} -> {out}")
        return
    if model == "cm":
        p = parse_degree_law(_param(spec, "degree_law", required=True))
        g = configuration_model(None, rng, pmf=p, n=n)
        write_edgelist(g, out)
        print(f"generate: cm n={n} mean degree {2.0 * len(g.edges()) / n:.3f} -> {out}")
        return
    if model in ("rrt", "pa"):
        t = recursive_tree(n, _attachment(model, float(_param(spec, "beta", 0.0))), rng)
    elif model == "attr":
        kernel = AttributeKernel(
            pi=_parse_floats(_param(spec, "pi", "0.5,0.5")),
            kappa=_parse_matrix(_param(spec, "kappa", "2,1/1,2")),
            gamma=float(_param(spec, "gamma", 1.0)),
        )
        t = attribute_tree(n, kernel, rng)
    elif model == "coev":
        t = coevolving_tree(n, StepPmf.geometric(float(_param(spec, "p", 0.65))), rng)
    else:
        raise ValidationError(f"unknown model {model!r}")
    write_tree(t, out)
    print(f"generate: {model} tree n={n} height {int(t.depths().max())} -> {out}")


def _run_fringe(spec: ExperimentSpec) -> None:
    model = _param(spec, "model", required=True)
    n = int(_param(spec, "n", required=True))
    k = int(_param(spec, "k", required=True))
    if k < 0:
        raise ValidationError("k must be >= 0")
    rng = substream(spec.seed, "fringe", model)
    t = recursive_tree(n, _attachment(model, float(_param(spec, "beta", 0.0))), rng)
    out = spec.outputs.get("out")
    if k == 0:
        sizes = fringe_size_pmf(t)
        law = sizes.normalized()
        resid = stationarity_residual(FringeLaw.from_measure(empirical_fringe(t, 0)))
        if out is not None:
            _write(out, sizes.to_json(kind="fringe", model=model, n=n, depth=0, statistic="size"))
        if model == "rrt":
            # the uniform-attachment limit puts mass 1/(s(s+1)) on size s
            print("size  empirical  limit")
            gap = 0.0
            for s in range(1, 9):
                emp = law.atoms.get(s, 0.0)
                lim = 1.0 / (s * (s + 1.0))
                gap = max(gap, abs(emp - lim))
                print(f"{s:<4d}  {emp:.5f}    {lim:.5f}")
            print(
                f"fringe: max size-law gap on 1..8 = {gap:.5f}; "
                f"stationarity residual = {resid:.5f}"
            )
        else:
            print(
                f"fringe: P(size=1) = {law.atoms.get(1, 0.0):.5f}; "
                f"stationarity residual = {resid:.5f}"
            )
        return
    law = FringeLaw.from_measure(empirical_fringe(t, k))
    if out is not None:
        _write(out, law.to_json(model=model, n=n, depth=k))
    top = max(law.atoms.values())
    print(f"fringe: {len(law.atoms)} distinct depth-{k} codes; top mass = {top:.5f}")


def _run_spectrum(spec: ExperimentSpec) -> None:
    model = _param(spec, "model", required=True)
    n = int(_param(spec, "n", required=True))
    bin_width = float(_param(spec, "bin_width", 0.05))
    rng = substream(spec.seed, "spectrum", model)
    reg = None
    if model == "cm":
        deg = _param(spec, "degree")
        law_text = _param(spec, "degree_law")
        if deg is not None and law_text is not None:
            raise ValidationError("pass --degree or --degree-law, not both")
        if deg is not None:
            law_text = f"delta:{int(deg)}"
        if law_text is None:
            raise ValidationError("spectrum with model=cm needs --degree or --degree-law")
        g = configuration_model(None, rng, pmf=parse_degree_law(law_text), n=n)
        reg = _regular_degree(law_text)
    elif model == "er":
        g = erdos_renyi(n, float(_param(spec, "lambda", 2.0)), rng)
    else:
        raise ValidationError(f"unknown model {model!r}; use cm or er")
    evals = spectral.eigenvalues_symmetric(g)
    m = EmpiricalMeasure.from_reals(evals, bin_width=bin_width)
    ks = None
    if reg is not None:
        lam = np.sort(evals)
        cdf = spectral.kesten_mckay_cdf(reg, lam)
        steps = np.arange(1, lam.size + 1) / lam.size
        ks = float(max(np.max(np.abs(steps - cdf)), np.max(np.abs(cdf - (steps - 1.0 / lam.size)))))
    if "out_csv" in spec.outputs:
        rows = [
            ((key + 0.5) * bin_width, w / (m.total * bin_width))
            for key, w in sorted(m.atoms.items())
        ]
        _write_csv(spec.outputs["out_csv"], rows)
    if "out_json" in spec.outputs:
        meta = {"kind": "spectrum", "model": model, "n": n}
        if ks is not None:
            meta["ks_vs_kesten_mckay"] = ks
        _write(spec.outputs["out_json"], m.to_json(**meta))
    if ks is not None:
        print(f"spectrum: {evals.size} eigenvalues, KS vs Kesten-McKay = {ks:.4f}")
    else:
        print(
            f"spectrum: {evals.size} eigenvalues on "
            f"[{evals.min():.3f}, {evals.max():.3f}]"
        )


def _run_ising(spec: ExperimentSpec) -> None:
    p = parse_degree_law(_param(spec, "degree_law", required=True))
    beta = float(_param(spec, "beta", required=True))
    B = float(_param(spec, "field", 0.0))
    grid_text = _param(spec, "field_grid")
    grid = sorted(_parse_floats(grid_text)) if grid_text is not None else [B]
    pool_size = int(_param(spec, "pool", 10**5))
    samples = int(_param(spec, "samples", 10**5))
    mags, ses, pools = [], [], {}
    for i, b in enumerate(grid):
        pool = ising_rde_solve(p, beta, b, substream(spec.seed, "ising", "pool", i), pool_size=pool_size)
        m, se = root_magnetization(p, beta, b, pool, samples, substream(spec.seed, "ising", "mag", i))
        pools[b] = pool
        mags.append(m)
        ses.append(se)
    phi_pool = pools.get(B)
    if phi_pool is None:
        phi_pool = ising_rde_solve(p, beta, B, substream(spec.seed, "ising", "pool", "phi"), pool_size=pool_size)
    phi, phi_se = free_energy_limit(p, beta, B, phi_pool, samples, substream(spec.seed, "ising", "phi"))
    # magnetization must grow with the field; flag drops beyond noise
    violations = [
        i
        for i in range(len(grid) - 1)
        if mags[i + 1] - mags[i] < -3.0 * (ses[i] + ses[i + 1])
    ]
    if "out" in spec.outputs:
        doc = {
            "phi": phi,
            "se": phi_se,
            "magnetization": mags,
            "magnetization_se": ses,
            "violations": violations,
            "beta": beta,
            "field": B,
            "field_grid": list(grid),
        }
        _write(spec.outputs["out"], _dump_json(doc))
    print(
        f"ising: phi(beta={beta:g}, B={B:g}) = {phi:.6f} +/- {phi_se:.6f}; "
        f"monotonicity violations: {len(violations)}"
    )


def _run_assign(spec: ExperimentSpec) -> None:
    n = int(_param(spec, "n", required=True))
    vals = replica_map(
        lambda i, rng: random_assignment_experiment(n, 1, rng)[0],
        spec.replicas,
        spec.seed,
        "assign",
    )
    mean, se = summarize(vals)
    if spec.replicas < 2:
        se = 0.0
    target = math.pi**2 / 6.0
    if "out" in spec.outputs:
        doc = {"mean": mean, "se": se, "target": target, "n": n, "replicas": spec.replicas}
        _write(spec.outputs["out"], _dump_json(doc))
    print(f"assign: mean cost per row = {mean:.4f} +/- {se:.4f} (target pi^2/6 = {target:.6f})")


def _run_pagerank(spec: ExperimentSpec) -> None:
    model = _param(spec, "model", required=True)
    n = int(_param(spec, "n", required=True))
    c = float(_param(spec, "c", 0.5))
    samples = int(_param(spec, "samples", 10**4))
    beta = float(_param(spec, "beta", 1.0))
    bin_width = float(_param(spec, "bin_width", 0.1))
    f = _attachment(model, beta)
    t = recursive_tree(n, f, substream(spec.seed, "pagerank", "tree"))
    scores = pagerank_path_counts(t, c)
    if "out_hist" in spec.outputs:
        hist = EmpiricalMeasure.from_reals(scores.normalized, bin_width=bin_width)
        _write(
            spec.outputs["out_hist"],
            hist.to_json(kind="pagerank", model=model, n=n, damping=c),
        )
    draws = replica_map(
        lambda i, rng: limit_root_pagerank_sample(f, c, _LIMIT_CAP, rng),
        samples,
        spec.seed,
        "pagerank-limit",
    )
    est = tail_exponent(np.asarray(draws), rng=substream(spec.seed, "pagerank", "boot"))
    if model == "pa":
        targets = exponent_targets(beta, c)
        target_pagerank, target_degree = targets.pagerank, targets.degree
    else:
        # constant attachment: growth rate 1, retention-thinned rate c
        target_pagerank, target_degree = 1.0 / c, None
    if "out_tail" in spec.outputs:
        doc = {
            "exponent": est.exponent,
            "k_min": est.k_min,
            "sample_count": est.sample_count,
            "stderr": est.stderr,
            "power_law": est.power_law,
            "model": model,
            "damping": c,
            "target_pagerank": target_pagerank,
            "target_degree": target_degree,
        }
        _write(spec.outputs["out_tail"], _dump_json(doc))
    print(
        f"pagerank: score tail exponent = {est.exponent:.3f} +/- {est.stderr:.3f} "
        f"(target {target_pagerank:.3f})"
    )


def _run_rde(spec: ExperimentSpec) -> None:
    p = parse_degree_law(_param(spec, "degree_law", required=True))
    x = float(_param(spec, "x", 0.0))
    y = float(_param(spec, "y", 0.01))
    if y <= 0:
        raise ValidationError("y must be positive (spectra live on the real axis)")
    pool_size = int(_param(spec, "pool", 10**5))
    tol = float(_param(spec, "tol", 1e-4))
    max_sweeps = int(_param(spec, "max_sweeps", 3000))
    pool, svals = spectral.spectral_rde_solve(
        p,
        [complex(x, y)],
        substream(spec.seed, "rde"),
        pool_size=pool_size,
        max_sweeps=max_sweeps,
        tol=tol,
    )
    s = svals[0]
    dens = s.imag / math.pi
    if "out_log" in spec.outputs:
        lines = ["sweep,drift"] + [
            f"{i},{d:.12g}" for i, d in enumerate(pool.drift_history[0], start=1)
        ]
        _write(spec.outputs["out_log"], "\n".join(lines) + "\n")
    reg = _regular_degree(_param(spec, "degree_law"))
    km = float(spectral.kesten_mckay_density(reg, x)) if reg is not None else None
    if "out" in spec.outputs:
        doc = {
            "x": x,
            "y": y,
            "s_real": s.real,
            "s_imag": s.imag,
            "density": dens,
            "sweeps": pool.sweeps[0],
            "drift": pool.drift[0],
        }
        if km is not None:
            doc["kesten_mckay"] = km
        _write(spec.outputs["out"], _dump_json(doc))
    tail = f"; Kesten-McKay limit {km:.6f}" if km is not None else ""
    print(f"rde: spectral density {dens:.6f} at x={x:g} (y={y:g}){tail}")


# ---------------------------------------------------------------------------
# selftest: the fast subset of the regression battery


def _st_rng(*labels: str | int) -> np.random.Generator:
    return substream(_SELFTEST_SEED, "selftest", *labels)


def _st_random_tree(rng: np.random.Generator, n_max: int = 40) -> RootedTree:
    n = int(rng.integers(2, n_max + 1))
    parent = [-1] + [int(rng.integers(0, v)) for v in range(1, n)]
    return RootedTree(n=n, parent=tuple(parent))


def _check_measure_and_tree_io() -> None:
    m = EmpiricalMeasure.from_samples([3, 3, 5, 9, 9, 9])
    m2 = EmpiricalMeasure.from_json(m.to_json())
    assert tv_distance(m, m2) == 0.0 and m2.total == m.total, "measure roundtrip drifted"
    rng = _st_rng("io")
    t = _st_random_tree(rng, n_max=60)
    g = erdos_renyi(50, 2.0, rng)
    with tempfile.TemporaryDirectory() as tmp:
        tpath = os.path.join(tmp, "t.tree")
        write_tree(t, tpath)
        assert read_tree(tpath).parent == t.parent, "tree file roundtrip drifted"
        gpath = os.path.join(tmp, "g.edges")
        write_edgelist(g, gpath)
        g2 = read_edgelist(gpath)
        assert g2.n == g.n and sorted(g2.edges()) == sorted(g.edges()), "edge-list roundtrip drifted"


def _check_rrt_fringe_size_law() -> None:
    t = recursive_tree(30_000, AttachmentFn.constant(), _st_rng("rrt"))
    law = fringe_size_pmf(t).normalized()
    for s in range(1, 7):
        gap = abs(law.atoms.get(s, 0.0) - 1.0 / (s * (s + 1.0)))
        assert gap <= 0.01, f"size {s} off by {gap:.4f}"


def _check_kesten_mckay_constants() -> None:
    d0 = float(spectral.kesten_mckay_density(4, 0.0))
    want = math.sqrt(3.0) / (4.0 * math.pi)
    assert abs(d0 - want) <= 1e-12, f"density at 0 is {d0:.12f}, want {want:.12f}"
    c0 = float(spectral.kesten_mckay_cdf(4, 0.0))
    assert abs(c0 - 0.5) <= 1e-12, f"cdf at 0 is {c0:.12f}"
    edge = 2.0 * math.sqrt(3.0)
    xs = np.linspace(-edge, edge, 20_001)
    mass = float(np.trapezoid(spectral.kesten_mckay_density(4, xs), xs))
    assert abs(mass - 1.0) <= 1e-4, f"density mass {mass:.6f}"
    assert float(spectral.kesten_mckay_density(3, 2.9)) == 0.0, "mass outside the support"


def _check_regular_tree_cavity() -> None:
    for k in (3, 4, 7):
        for z in (1j, 0.5 + 0.5j, -2.0 + 0.1j):
            y = spectral.regular_tree_cavity(k, z)
            resid = abs((k - 1) * y * y + z * y + 1.0)
            assert resid <= 1e-12 and y.imag > 0, f"cavity residual {resid:.2e} at k={k}"


def _check_resolvent_vs_dense() -> None:
    rng = _st_rng("resolvent")
    for _ in range(20):
        t = _st_random_tree(rng)
        z = complex(rng.uniform(-2, 2), rng.uniform(0.2, 1.5))
        a = spectral.adjacency_matrix(t.to_rooted_graph())
        dense = np.linalg.inv(a - z * np.eye(t.n)).diagonal()
        gap = float(np.max(np.abs(spectral.resolvent_tree(t, z) - dense)))
        assert gap <= 1e-8, f"resolvent gap {gap:.2e}"


def _check_spectral_trace_identity() -> None:
    rng = _st_rng("trace")
    for _ in range(10):
        t = _st_random_tree(rng)
        z = complex(rng.uniform(-1, 1), rng.uniform(0.3, 1.5))
        lam = spectral.eigenvalues_symmetric(t.to_rooted_graph())
        gap = abs(spectral.resolvent_tree(t, z).mean() - spectral.stieltjes_of_measure(lam, z))
        assert gap <= 1e-8, f"trace identity gap {gap:.2e}"


def _check_ising_exact_enumeration() -> None:
    rng = _st_rng("ising")
    params = IsingParams(beta=0.35, field=0.2)
    for _ in range(15):
        t = _st_random_tree(rng, n_max=12)
        _, _, m_root = tree_local_fields(t, params)
        exact = exact_gibbs(t.to_rooted_graph(), params).magnetization[0]
        assert abs(m_root - exact) <= 1e-10, f"root magnetization off by {abs(m_root - exact):.2e}"


def _check_ising_free_spin_energy() -> None:
    p = DegreePmf.poisson(2.0)
    pool = ising_rde_solve(p, 0.0, 0.4, _st_rng("ising-pool"), pool_size=2000)
    phi, _ = free_energy_limit(p, 0.0, 0.4, pool, 4000, _st_rng("ising-phi"))
    want = math.log(2.0 * math.cosh(0.4))
    assert abs(phi - want) <= 1e-12, f"free-spin energy {phi:.12f}, want {want:.12f}"


def _check_assignment_brute_force() -> None:
    rng = _st_rng("assign-brute")
    for _ in range(10):
        costs = rng.exponential(size=(6, 6))
        got = optimal_assignment(CostMatrix(n=6, costs=costs)).total_cost
        best = min(sum(costs[r, p[r]] for r in range(6)) for p in itertools.permutations(range(6)))
        assert abs(got - best) <= 1e-12, "assignment beat by brute force"


def _check_assignment_finite_mean() -> None:
    rng = _st_rng("assign-mean")
    vals = [random_assignment_experiment(10, 1, rng)[0] for _ in range(300)]
    mean, se = summarize(vals)
    target = sum(1.0 / k**2 for k in range(1, 11))
    assert se < 0.05, f"standard error blew up: {se:.3f}"
    assert abs(mean - target) <= 5.0 * se, f"mean {mean:.4f} vs exact {target:.4f} (se {se:.4f})"


def _check_logistic_integral() -> None:
    assert logistic_density(0.0) == 0.25, "logistic density at 0"
    got = zeta2_integral()
    want = math.pi**2 / 6.0
    assert abs(got - want) <= 1e-4, f"integral {got:.6f}, want {want:.6f}"


def _check_pagerank_closed_forms() -> None:
    c = 0.85
    one = pagerank_linear(DirectedGraph(n=1, edges=()), c)
    assert abs(one.raw[0] - (1.0 - c)) <= 1e-12, "dangling singleton score"
    chain = pagerank_linear(DirectedGraph.from_edges(2, [(1, 0)]), c)
    assert abs(chain.normalized[0] - (1.0 - c) * (1.0 + c)) <= 1e-12, "two-vertex chain score"
    rng = _st_rng("pagerank")
    for _ in range(10):
        n = int(rng.integers(2, 26))
        edges = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < 0.15]
        g = DirectedGraph.from_edges(n, edges)
        got = pagerank_linear(g, c).raw
        m = np.zeros((n, n))
        for u, v in g.edges:
            m[v, u] += 1.0 / g.out_degrees()[u]
        dense = np.linalg.solve(np.eye(n) - c * m, np.full(n, (1.0 - c) / n))
        assert float(np.max(np.abs(got - dense))) <= 1e-10, "linear system solve drifted"
    t = _st_random_tree(rng, n_max=300)
    tree_scores = pagerank_path_counts(t, 0.5).raw
    lin_scores = pagerank_linear(DirectedGraph.from_tree(t), 0.5).raw
    assert float(np.max(np.abs(tree_scores - lin_scores))) <= 1e-10, "path counts vs linear"


def _check_tail_exponent_targets() -> None:
    for beta in (0.0, 1.0, 2.5):
        for c in (0.1, 0.5, 0.9):
            tg = exponent_targets(beta, c)
            assert abs(tg.degree - (2.0 + beta)) <= 1e-12
            assert abs(tg.pagerank * tg.percolation_rate - tg.rate) <= 1e-12, "rate ratio identity"


def _check_seed_required() -> None:
    with contextlib.redirect_stderr(io.StringIO()):
        code = run(ExperimentSpec(subcommand="assign", params={"n": 4}, seed=None, replicas=2))
    assert code == 2, f"missing seed gave exit {code}, want 2"


def _check_substream_determinism() -> None:
    a = substream(7, "x", 0).integers(0, 2**31, 4)
    b = substream(7, "x", 0).integers(0, 2**31, 4)
    other = substream(7, "x", 1).integers(0, 2**31, 4)
    assert np.array_equal(a, b) and not np.array_equal(a, other), "substream labels"
    saved = os.environ.get("LWC_THREADS")
    try:
        os.environ["LWC_THREADS"] = "1"
        serial = replica_map(lambda i, rng: float(rng.random()), 8, 11, "selftest")
        os.environ["LWC_THREADS"] = "4"
        threaded = replica_map(lambda i, rng: float(rng.random()), 8, 11, "selftest")
    finally:
        if saved is None:
            os.environ.pop("LWC_THREADS", None)
        else:
            os.environ["LWC_THREADS"] = saved
    assert serial == threaded, "replica results depend on the worker count"


_SELFTEST_CHECKS: tuple[tuple[str, Callable[[], None]], ...] = (
    ("measure-and-tree-io", _check_measure_and_tree_io),
    ("rrt-fringe-size-law", _check_rrt_fringe_size_law),
    ("kesten-mckay-constants", _check_kesten_mckay_constants),
    ("regular-tree-cavity", _check_regular_tree_cavity),
    ("resolvent-vs-dense", _check_resolvent_vs_dense),
    ("spectral-trace-identity", _check_spectral_trace_identity),
    ("ising-exact-enumeration", _check_ising_exact_enumeration),
    ("ising-free-spin-energy", _check_ising_free_spin_energy),
    ("assignment-brute-force", _check_assignment_brute_force),
    ("assignment-finite-mean", _check_assignment_finite_mean),
    ("logistic-integral", _check_logistic_integral),
    ("pagerank-closed-forms", _check_pagerank_closed_forms),
    ("tail-exponent-targets", _check_tail_exponent_targets),
    ("seed-required", _check_seed_required),
    ("substream-determinism", _check_substream_determinism),
)


def _run_selftest(spec: ExperimentSpec) -> int:
    failures = 0
    for name, check in _SELFTEST_CHECKS:
        start = time.perf_counter()
        try:
            check()
        except Exception as e:  # noqa: BLE001 - one broken check must not stop the rest
            failures += 1
            print(f"FAIL {name}: {e}")
        else:
            print(f"ok {name} ({time.perf_counter() - start:.2f}s)")
    total = len(_SELFTEST_CHECKS)
    print(f"selftest: {total - failures}/{total} checks passed")
    return 3 if failures else 0


_HANDLERS: Mapping[str, Callable[[ExperimentSpec], int | None]] = {
    "generate": _run_generate,
    "fringe": _run_fringe,
    "spectrum": _run_spectrum,
    "ising": _run_ising,
    "assign": _run_assign,
    "pagerank": _run_pagerank,
    "rde": _run_rde,
    "selftest": _run_selftest,
}


# ---------------------------------------------------------------------------
# argument parsing


def _add_generate_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--model", choices=["er", "cm", "rrt", "pa", "attr", "coev"], help="graph or tree model")
    sp.add_argument("--n", type=int, help="number of vertices")
    sp.add_argument("--lambda", type=float, help="er mean degree")
    sp.add_argument("--degree-law", help="cm degree law, delta:K or poisson:MEAN")
    sp.add_argument("--beta", type=float, help="pa affine attachment shift (k + 1 + beta)")
    sp.add_argument("--pi", help="attr attribute pmf as a comma list")
    sp.add_argument("--kappa", help="attr affinity matrix, rows joined by '/'")
    sp.add_argument("--gamma", type=float, help="attr degree power in [0, 1]")
    sp.add_argument("--p", type=float, help="coev geometric step parameter")
    sp.add_argument("--out", help="edge-list or tree file to write")


def _add_fringe_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--model", choices=["rrt", "pa"], help="tree model")
    sp.add_argument("--n", type=int, help="tree size")
    sp.add_argument("--k", type=int, help="fringe depth; 0 reports the subtree-size pmf")
    sp.add_argument("--beta", type=float, help="pa affine attachment shift")
    sp.add_argument("--out", help="fringe-law JSON to write")


def _add_spectrum_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--model", choices=["cm", "er"], help="graph model")
    sp.add_argument("--n", type=int, help="number of vertices")
    sp.add_argument("--degree", type=int, help="cm regular degree (shorthand for delta:K)")
    sp.add_argument("--degree-law", help="cm degree law, delta:K or poisson:MEAN")
    sp.add_argument("--lambda", type=float, help="er mean degree")
    sp.add_argument("--bin-width", type=float, help="histogram bin width (default 0.05)")
    sp.add_argument("--out-csv", help="density CSV to write")
    sp.add_argument("--out-json", help="spectrum measure JSON to write")


def _add_ising_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--degree-law", help="offspring law, delta:K or poisson:MEAN")
    sp.add_argument("--beta", type=float, help="inverse temperature (>= 0)")
    sp.add_argument("--field", type=float, help="external field for the free energy")
    sp.add_argument("--field-grid", help="comma list of fields for the magnetization sweep")
    sp.add_argument("--pool", type=int, help="population size for the field recursion")
    sp.add_argument("--samples", type=int, help="Monte Carlo draws per reported value")
    sp.add_argument("--out", help="report JSON to write")


def _add_assign_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--n", type=int, help="assignment size")
    sp.add_argument("--replicas", type=int, default=1, help="independent repetitions")
    sp.add_argument("--out", help="summary JSON to write")


def _add_pagerank_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--model", choices=["rrt", "pa"], help="tree model")
    sp.add_argument("--n", type=int, help="finite-tree size for the score histogram")
    sp.add_argument("--c", type=float, help="damping factor in (0, 1) (default 0.5)")
    sp.add_argument("--samples", type=int, help="draws of the limiting root score")
    sp.add_argument("--beta", type=float, help="pa affine attachment shift (default 1)")
    sp.add_argument("--bin-width", type=float, help="histogram bin width (default 0.1)")
    sp.add_argument("--out-hist", help="score histogram measure JSON to write")
    sp.add_argument("--out-tail", help="tail-estimate JSON to write")


def _add_rde_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--degree-law", help="degree law, delta:K or poisson:MEAN")
    sp.add_argument("--x", type=float, help="real part of the probe point (default 0)")
    sp.add_argument("--y", type=float, help="imaginary part, > 0 (default 0.01)")
    sp.add_argument("--pool", type=int, help="population size (default 100000)")
    sp.add_argument("--tol", type=float, help="drift tolerance (default 1e-4)")
    sp.add_argument("--max-sweeps", type=int, help="sweep cap before giving up")
    sp.add_argument("--out", help="result JSON to write")
    sp.add_argument("--out-log", help="convergence log (sweep,drift lines) to write")


def _add_selftest_args(sp: argparse.ArgumentParser) -> None:
    pass


_SUBCOMMANDS: tuple[tuple[str, Callable[[argparse.ArgumentParser], None], str], ...] = (
    ("generate", _add_generate_args, "sample a graph or tree and write it to disk"),
    ("fringe", _add_fringe_args, "empirical fringe law of a recursive tree"),
    ("spectrum", _add_spectrum_args, "eigenvalue histogram of a sampled graph"),
    ("ising", _add_ising_args, "limiting free energy and root magnetization"),
    ("assign", _add_assign_args, "random assignment cost, target pi^2/6"),
    ("pagerank", _add_pagerank_args, "score histogram and tail exponent"),
    ("rde", _add_rde_args, "spectral cavity fixed point at one probe point"),
    ("selftest", _add_selftest_args, "fast regression battery with fixed seeds"),
)


def build_parser(config: tuple[str, Mapping[str, Any]] | None = None) -> argparse.ArgumentParser:
    """The CLI parser; config, when given, supplies (subcommand, defaults)
    validated against that subcommand's flags."""
    parser = argparse.ArgumentParser(
        prog="lwc",
        description="seeded local-limit experiments",
        epilog="LWC_THREADS caps replica workers; outputs never depend on it.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    for name, add_args, help_text in _SUBCOMMANDS:
        sp = sub.add_parser(name, help=help_text, description=help_text)
        add_args(sp)
        if name != "selftest":
            sp.add_argument("--seed", type=int, help="master seed; all substreams derive from it")
        sp.add_argument("--config", help="JSON file of flag defaults; explicit flags win")
        if config is not None and config[0] == name:
            known = {action.dest for action in sp._actions}
            bad = set(config[1]) - known
            if bad:
                raise ValidationError(
                    f"unknown config keys for {name}: {', '.join(sorted(bad))}"
                )
            sp.set_defaults(**dict(config[1]))
    return parser


def _spec_from_namespace(ns: argparse.Namespace) -> ExperimentSpec:
    values = {k: v for k, v in vars(ns).items() if v is not None}
    sub = values.pop("subcommand")
    seed = values.pop("seed", None)
    replicas = int(values.pop("replicas", 1))
    values.pop("config", None)
    outputs = {k: str(values.pop(k)) for k in list(values) if k in _OUTPUT_KEYS.get(sub, set())}
    return ExperimentSpec(
        subcommand=sub,
        params=values,
        seed=None if seed is None else int(seed),
        replicas=replicas,
        outputs=outputs,
    )


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    if getattr(ns, "config", None):
        try:
            doc = json.loads(Path(ns.config).read_text())
            if not isinstance(doc, dict):
                raise ValidationError("config must be a JSON object of flag defaults")
            parser = build_parser(config=(ns.subcommand, doc))
        except (OSError, json.JSONDecodeError, ValidationError) as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        ns = parser.parse_args(argv)
    try:
        spec = _spec_from_namespace(ns)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
