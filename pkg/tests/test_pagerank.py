"""PageRank tests against independent oracles: dense linear solves, explicit
path counting by adjacency powers, a plain-Python Hill formula, and synthetic
tail calibration."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lwc.errors import PopulationCapError, ValidationError
from lwc.generators import AttachmentFn, recursive_tree
from lwc.graph_core import RootedTree
from lwc.pagerank import (
    DirectedGraph,
    ExponentTargets,
    PageRankScores,
    TailEstimate,
    exponent_targets,
    hill_estimate,
    limit_root_pagerank_sample,
    pagerank_linear,
    pagerank_path_counts,
    root_score_from_tree,
    tail_exponent,
)

import helpers


# ---------------------------------------------------------------------------
# oracles


def dense_pagerank(g: DirectedGraph, c: float) -> np.ndarray:
    # direct solve of (I - c M^T) r = (1-c)/n, M the out-degree-normalized
    # adjacency; independent of the module's fixed-point iteration
    n = g.n
    M = np.zeros((n, n))
    dout = g.out_degrees()
    for u, v in g.edges:
        M[u, v] += 1.0 / dout[u]
    return np.linalg.solve(np.eye(n) - c * M.T, np.full(n, (1.0 - c) / n))


def power_path_scores(t: RootedTree, c: float, levels: int = 80) -> np.ndarray:
    # R_v = (1-c)(1 + sum_l c^l column-sum of A^l), A the offspring->parent
    # adjacency; brute matrix powers, only for small n
    n = t.n
    A = np.zeros((n, n))
    for v, p in enumerate(t.parent):
        if p >= 0:
            A[v, p] = 1.0
    score = np.ones(n)
    Al = np.eye(n)
    for level in range(1, levels + 1):
        Al = Al @ A
        score += c**level * Al.sum(axis=0)
    return (1.0 - c) * score


def hill_plain(values, k: int) -> float:
    xs = sorted((float(v) for v in values), reverse=True)
    return k / sum(math.log(xs[i] / xs[k]) for i in range(k))


def random_digraph(rng, n_max=40) -> DirectedGraph:
    n = int(rng.integers(1, n_max))
    m = int(rng.integers(0, 4 * n))
    edges = [(int(rng.integers(0, n)), int(rng.integers(0, n))) for _ in range(m)]
    return DirectedGraph.from_edges(n, edges)


def two_sample_ks(a, b) -> float:
    a = np.sort(a)
    b = np.sort(b)
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


# ---------------------------------------------------------------------------
# types


class TestDirectedGraph:
    def test_edge_out_of_range(self):
        with pytest.raises(ValidationError):
            DirectedGraph.from_edges(2, [(0, 2)])

    def test_empty_graph_rejected(self):
        with pytest.raises(ValidationError):
            DirectedGraph.from_edges(0, [])

    def test_from_tree_points_at_parents(self):
        t = RootedTree(n=4, parent=(-1, 0, 0, 1))
        g = DirectedGraph.from_tree(t)
        assert set(g.edges) == {(1, 0), (2, 0), (3, 1)}
        assert list(g.out_degrees()) == [0, 1, 1, 1]

    def test_out_degrees_count_multiplicity(self):
        g = DirectedGraph.from_edges(3, [(0, 1), (0, 1), (0, 0)])
        assert list(g.out_degrees()) == [3, 0, 0]


class TestPageRankScores:
    def test_bad_damping(self):
        with pytest.raises(ValidationError):
            PageRankScores(damping=1.0, raw=np.ones(1), normalized=np.ones(1), residual=0.0)

    def test_large_residual_rejected(self):
        with pytest.raises(ValidationError):
            PageRankScores(
                damping=0.5, raw=np.ones(2) / 2, normalized=np.ones(2), residual=1e-8
            )

    def test_below_teleport_floor_rejected(self):
        with pytest.raises(ValidationError):
            PageRankScores(
                damping=0.5, raw=np.array([0.1, 0.9]), normalized=np.array([0.2, 1.8]),
                residual=0.0,
            )

    def test_normalized_must_match(self):
        with pytest.raises(ValidationError):
            PageRankScores(
                damping=0.5, raw=np.array([0.5, 0.5]), normalized=np.array([0.5, 0.5]),
                residual=0.0,
            )


# ---------------------------------------------------------------------------
# the linear system


class TestPageRankLinear:
    def test_single_vertex(self):
        s = pagerank_linear(DirectedGraph.from_edges(1, []), 0.85)
        assert s.raw[0] == pytest.approx(0.15, abs=1e-12)
        assert s.normalized[0] == pytest.approx(0.15, abs=1e-12)

    def test_child_root_pair(self):
        # solve the 2x2 system by hand: r_child = (1-c)/2, r_root = (1-c)(1+c)/2
        c = 0.85
        s = pagerank_linear(DirectedGraph.from_edges(2, [(1, 0)]), c)
        assert s.normalized[0] == pytest.approx((1 - c) * (1 + c), abs=1e-12)
        assert s.normalized[1] == pytest.approx(1 - c, abs=1e-12)

    def test_hub_with_leaves(self):
        c, k = 0.6, 9
        g = DirectedGraph.from_edges(k + 1, [(i, 0) for i in range(1, k + 1)])
        s = pagerank_linear(g, c)
        assert s.normalized[0] == pytest.approx((1 - c) * (1 + k * c), abs=1e-12)

    def test_matches_dense_solve(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            g = random_digraph(rng)
            c = float(rng.uniform(0.1, 0.95))
            s = pagerank_linear(g, c)
            assert np.max(np.abs(s.raw - dense_pagerank(g, c))) <= 1e-10

    def test_mass_conserved_without_dangling(self):
        # directed cycle: every vertex has an out-link, so raw sums to 1
        g = DirectedGraph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
        s = pagerank_linear(g, 0.7)
        assert float(s.raw.sum()) == pytest.approx(1.0, abs=1e-12)

    def test_dangling_leaks_mass(self):
        t = recursive_tree(100, AttachmentFn.constant(1.0), np.random.default_rng(1))
        s = pagerank_linear(DirectedGraph.from_tree(t), 0.7)
        assert float(s.raw.sum()) < 1.0 - 1e-4

    def test_bad_damping(self):
        g = DirectedGraph.from_edges(1, [])
        for c in (0.0, 1.0, -0.2, 1.7):
            with pytest.raises(ValidationError):
                pagerank_linear(g, c)


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_scores_respect_floor_and_total_mass(n, seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(0, 3 * n))
    g = DirectedGraph.from_edges(
        n, [(int(rng.integers(0, n)), int(rng.integers(0, n))) for _ in range(m)]
    )
    c = float(rng.uniform(0.05, 0.95))
    s = pagerank_linear(g, c)
    assert np.all(s.raw >= (1 - c) / n - 1e-12)
    dangling = int(np.sum(g.out_degrees() == 0))
    if dangling == 0:
        assert float(s.raw.sum()) == pytest.approx(1.0, abs=1e-9)
    else:
        # each dangling vertex withholds at least c * floor from the total
        assert float(s.raw.sum()) <= 1.0 - dangling * c * (1 - c) / n + 1e-9


# ---------------------------------------------------------------------------
# path counts on trees


class TestPathCounts:
    def test_leaf_score(self):
        t = RootedTree(n=3, parent=(-1, 0, 0))
        s = pagerank_path_counts(t, 0.85)
        assert s.normalized[1] == pytest.approx(0.15, abs=1e-12)

    def test_three_vertex_path(self):
        # paths into the root: one of length 1, one of length 2
        c = 0.85
        t = RootedTree(n=3, parent=(-1, 0, 1))
        s = pagerank_path_counts(t, c)
        assert s.normalized[0] == pytest.approx((1 - c) * (1 + c + c * c), abs=1e-12)

    def test_matches_matrix_powers(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            t = helpers.random_tree(int(rng.integers(1, 40)), rng)
            c = float(rng.uniform(0.1, 0.9))
            s = pagerank_path_counts(t, c, tol=1e-15)
            assert np.max(np.abs(s.normalized - power_path_scores(t, c))) <= 1e-10

    def test_matches_linear_solve_on_corpus(self):
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(200):
            n = int(rng.integers(2, 1001))
            t = recursive_tree(n, AttachmentFn.constant(1.0), rng)
            c = float(rng.choice([0.3, 0.85]))
            path = pagerank_path_counts(t, c, tol=1e-14)
            linear = pagerank_linear(DirectedGraph.from_tree(t), c)
            worst = max(worst, float(np.max(np.abs(path.raw - linear.raw))))
        assert worst <= 1e-10

    def test_out_degree_two_rejected(self):
        g = DirectedGraph.from_edges(3, [(0, 1), (0, 2)])
        with pytest.raises(ValidationError):
            pagerank_path_counts(g, 0.5)

    def test_cycle_rejected(self):
        g = DirectedGraph.from_edges(3, [(0, 1), (1, 2), (2, 0)])
        with pytest.raises(ValidationError):
            pagerank_path_counts(g, 0.5)

    def test_forest_agrees_with_linear(self):
        g = DirectedGraph.from_edges(5, [(1, 0), (2, 0), (4, 3)])
        s = pagerank_path_counts(g, 0.6, tol=1e-14)
        assert np.max(np.abs(s.raw - dense_pagerank(g, 0.6))) <= 1e-10

    def test_tree_and_digraph_inputs_agree(self):
        t = helpers.random_tree(20, np.random.default_rng(4))
        a = pagerank_path_counts(t, 0.7)
        b = pagerank_path_counts(DirectedGraph.from_tree(t), 0.7)
        assert np.array_equal(a.raw, b.raw)

    def test_bad_tol(self):
        t = RootedTree(n=1, parent=(-1,))
        for tol in (0.0, 1.0, -1e-3):
            with pytest.raises(ValidationError):
                pagerank_path_counts(t, 0.5, tol=tol)


# ---------------------------------------------------------------------------
# the limiting root score


class TestRootScore:
    def test_root_only(self):
        assert root_score_from_tree(RootedTree(n=1, parent=(-1,)), 0.3) == pytest.approx(0.7)

    def test_root_and_child(self):
        t = RootedTree(n=2, parent=(-1, 0))
        assert root_score_from_tree(t, 0.3) == pytest.approx(0.7 * 1.3, abs=1e-12)

    def test_depth_weights(self):
        t = RootedTree(n=4, parent=(-1, 0, 0, 1))
        c = 0.45
        assert root_score_from_tree(t, c) == pytest.approx(
            (1 - c) * (1 + 2 * c + c * c), abs=1e-12
        )

    def test_equals_path_count_root(self):
        # the depth sum and the root's path counts are the same quantity
        rng = np.random.default_rng(5)
        for _ in range(25):
            t = helpers.random_tree(int(rng.integers(1, 60)), rng)
            c = float(rng.uniform(0.1, 0.9))
            root = int(np.flatnonzero(np.asarray(t.parent) < 0)[0])
            s = pagerank_path_counts(t, c, tol=1e-15)
            assert root_score_from_tree(t, c) == pytest.approx(
                float(s.normalized[root]), abs=1e-10
            )


class TestLimitSampler:
    def test_deterministic(self):
        f = AttachmentFn.constant(1.0)
        a = limit_root_pagerank_sample(f, 0.5, 10**5, np.random.default_rng(6))
        b = limit_root_pagerank_sample(f, 0.5, 10**5, np.random.default_rng(6))
        assert a == b

    def test_bad_damping(self):
        with pytest.raises(ValidationError):
            limit_root_pagerank_sample(AttachmentFn.constant(1.0), 1.2, 100, np.random.default_rng(7))

    def test_cap_exceeded_raises(self):
        # seed 1 grows past two vertices before its horizon
        with pytest.raises(PopulationCapError):
            limit_root_pagerank_sample(
                AttachmentFn.constant(1.0), 0.5, 2, np.random.default_rng(1)
            )

    def test_mean_matches_finite_tree_scores(self):
        # both sides conserve mass up to the dangling root's leak
        f = AttachmentFn.constant(1.0)
        rng = np.random.default_rng(30)
        draws = np.array(
            [limit_root_pagerank_sample(f, 0.5, 10**6, rng) for _ in range(10**5)]
        )
        t = recursive_tree(10**5, f, np.random.default_rng(31))
        s = pagerank_linear(DirectedGraph.from_tree(t), 0.5)
        assert abs(float(draws.mean()) - float(s.normalized.mean())) <= 0.01

    def test_law_matches_finite_tree_scores(self):
        f = AttachmentFn.constant(1.0)
        rng = np.random.default_rng(32)
        draws = np.array(
            [limit_root_pagerank_sample(f, 0.3, 10**6, rng) for _ in range(10**5)]
        )
        t = recursive_tree(10**5, f, np.random.default_rng(33))
        s = pagerank_linear(DirectedGraph.from_tree(t), 0.3)
        assert two_sample_ks(draws, s.normalized) <= 0.02


# ---------------------------------------------------------------------------
# tail exponents


class TestHillEstimate:
    def test_matches_plain_formula(self):
        rng = np.random.default_rng(8)
        x = rng.pareto(1.5, 4000) + 1.0
        for k in (5, 50, 500):
            assert hill_estimate(x, k) == pytest.approx(hill_plain(x, k), rel=1e-12)

    def test_k_range_checked(self):
        x = np.ones(10) + np.arange(10)
        for k in (0, 10, 11):
            with pytest.raises(ValidationError):
                hill_estimate(x, k)

    def test_ties_at_top_rejected(self):
        with pytest.raises(ValidationError):
            hill_estimate(np.ones(100), 10)


class TestTailExponent:
    def test_pareto_calibration(self):
        rng = np.random.default_rng(0)
        x = rng.pareto(2.0, 10**5) + 1.0
        est = tail_exponent(x, rng=np.random.default_rng(10))
        assert est.power_law
        assert est.exponent == pytest.approx(2.0, abs=0.1)
        assert est.stderr > 0

    def test_exponential_is_not_a_power_law(self):
        x = np.random.default_rng(1).exponential(size=10**5)
        est = tail_exponent(x, rng=np.random.default_rng(11))
        assert not est.power_law

    def test_preferential_attachment_degrees(self):
        t = recursive_tree(10**6, AttachmentFn.affine(1.0), np.random.default_rng(5))
        par = np.asarray(t.parent)
        deg = (np.bincount(par[par >= 0], minlength=t.n) + (par >= 0)).astype(float)
        est = tail_exponent(deg, rng=np.random.default_rng(12))
        assert est.power_law
        assert est.exponent == pytest.approx(3.0, abs=0.3)

    def test_limit_scores_have_predicted_tail(self):
        f = AttachmentFn.affine(1.0)
        rng = np.random.default_rng(34)
        draws = np.array(
            [limit_root_pagerank_sample(f, 0.5, 10**6, rng) for _ in range(10**5)]
        )
        est = tail_exponent(draws, rng=np.random.default_rng(13))
        target = exponent_targets(1.0, 0.5).pagerank
        assert est.exponent == pytest.approx(target, abs=0.2)

    def test_accepts_scores_object(self):
        t = recursive_tree(2000, AttachmentFn.constant(1.0), np.random.default_rng(14))
        s = pagerank_linear(DirectedGraph.from_tree(t), 0.5)
        a = tail_exponent(s, rng=np.random.default_rng(15))
        b = tail_exponent(s.normalized, rng=np.random.default_rng(15))
        assert a == b

    def test_too_few_samples(self):
        with pytest.raises(ValidationError):
            tail_exponent(np.ones(999) + np.arange(999))

    def test_insufficient_positive_mass(self):
        x = np.concatenate([-np.ones(10**4), np.arange(1, 500)])
        with pytest.raises(ValidationError):
            tail_exponent(x)

    def test_custom_grid(self):
        rng = np.random.default_rng(16)
        x = rng.pareto(2.0, 10**4) + 1.0
        est = tail_exponent(x, k_min_grid=[200, 400], rng=np.random.default_rng(17))
        assert est.k_min in (200, 400)

    def test_bad_grid(self):
        x = np.random.default_rng(18).pareto(2.0, 2000) + 1.0
        for grid in ([], [0, 100], [1500]):
            with pytest.raises(ValidationError):
                tail_exponent(x, k_min_grid=grid)

    def test_estimate_validation(self):
        with pytest.raises(ValidationError):
            TailEstimate(exponent=-1.0, k_min=10, sample_count=100, stderr=0.1)
        with pytest.raises(ValidationError):
            TailEstimate(exponent=2.0, k_min=10, sample_count=100, stderr=-0.1)


class TestExponentTargets:
    def test_reference_point(self):
        assert tuple(exponent_targets(1.0, 0.5)) == (3.0, 1.5)

    def test_zero_beta(self):
        d, p = exponent_targets(0.0, 0.5)
        assert (d, p) == (2.0, pytest.approx(4.0 / 3.0, abs=1e-15))

    def test_small_damping_recovers_degree_exponent(self):
        t = exponent_targets(0.7, 1e-12)
        assert t.pagerank == pytest.approx(t.degree, abs=1e-10)

    def test_rate_ratio_identity(self):
        for beta in (-0.5, 0.0, 1.0, 2.5):
            for c in (0.1, 0.5, 0.9):
                t = exponent_targets(beta, c)
                assert t.pagerank == pytest.approx(t.rate / t.percolation_rate, abs=1e-12)
                assert t.rate == 2.0 + beta
                assert t.percolation_rate == pytest.approx(1.0 + (1.0 + beta) * c, abs=1e-15)
