"""Rooted graphs, balls, canonical codes, the LWC metric, measures, file IO."""

import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lwc.errors import SizeCapError, ValidationError
from lwc.graph_core import (
    CANONICAL_CAP,
    EmpiricalMeasure,
    Graph,
    RootedGraph,
    RootedTree,
    ball,
    canonical_code,
    component,
    empirical_neighborhoods,
    lwc_distance,
    parse_tree_code,
    read_edgelist,
    read_tree,
    rooted_isomorphic,
    standard_construction,
    tree_code,
    tv_distance,
    write_edgelist,
    write_tree,
)

import helpers


def rg(n, edges, root=0):
    g = Graph.from_edges(n, edges)
    return RootedGraph(n=g.n, adj=g.adj, root=root)


POINT = rg(1, [])
EDGE = rg(2, [(0, 1)])
PATH3 = rg(3, [(0, 1), (1, 2)])
PATH4 = rg(4, [(0, 1), (1, 2), (2, 3)])
TRIANGLE = rg(3, [(0, 1), (1, 2), (0, 2)])
STAR3 = rg(4, [(0, 1), (0, 2), (0, 3)])


# ---------------------------------------------------------------------------
# balls


def test_ball_radius1_on_path():
    b = ball(PATH3, 0, 1)
    assert b.n == 2 and b.root == 0
    assert rooted_isomorphic(b, EDGE)


def test_ball_radius0_is_point():
    for g in [PATH4, TRIANGLE, STAR3]:
        b = ball(g, 1, 0)
        assert b.n == 1 and b.adj == ((),)


def test_ball_on_4cycle_radius1_is_2star():
    c4 = rg(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    b = ball(c4, 0, 1)
    assert rooted_isomorphic(b, rg(3, [(0, 1), (0, 2)]))


def test_ball_monotone_and_saturates_at_component():
    rng = np.random.default_rng(5)
    for _ in range(30):
        g = helpers.random_simple_graph(9, 0.25, rng)
        v = int(rng.integers(g.n))
        prev = 0
        for r in range(10):
            b = ball(g, v, r)
            assert b.n >= prev
            prev = b.n
        assert ball(g, v, g.n).n == component(g, v).n


def test_ball_preserves_multiplicity():
    g = rg(3, [(0, 1), (0, 1), (1, 1), (1, 2)])
    b = ball(g, 0, 1)
    # vertex 1 is kept with the double edge and its loop
    assert b.adj[0].count(1) == 2
    assert b.adj[1].count(1) == 2  # the loop, listed twice


def test_ball_invalid_vertex():
    with pytest.raises(ValidationError):
        ball(PATH3, 7, 1)


# ---------------------------------------------------------------------------
# canonical codes


def test_star_relabelings_share_code():
    a = rg(4, [(0, 1), (0, 2), (0, 3)])
    b = rg(4, [(3, 0), (3, 1), (3, 2)], root=3)
    assert canonical_code(a) == canonical_code(b)


def test_path_root_position_distinguishes():
    end = rg(5, [(0, 1), (1, 2), (2, 3), (3, 4)], root=0)
    mid = rg(5, [(0, 1), (1, 2), (2, 3), (3, 4)], root=2)
    assert canonical_code(end) != canonical_code(mid)


def test_labeled_trees_on_4_vertices_fall_into_4_classes():
    trees = [t.to_rooted_graph() for t in helpers.all_labeled_trees(4)]
    codes = {canonical_code(t) for t in trees}
    classes = set()
    reps: list[RootedGraph] = []
    for t in trees:
        if not any(helpers.brute_rooted_isomorphic(t, r) for r in reps):
            reps.append(t)
    assert len(reps) == 4
    assert len(codes) == len(reps)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_code_equality_matches_brute_canonical_simple(n):
    """Exhaustive: every simple rooted graph on n <= 5 vertices."""
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        g = Graph.from_edges(n, edges)
        for root in range(n):
            rgr = RootedGraph(n=n, adj=g.adj, root=root)
            key = helpers.brute_canonical(rgr)
            code = canonical_code(rgr)
            seen = test_code_equality_matches_brute_canonical_simple.table.setdefault(
                key, code
            )
            assert seen == code, f"brute class {key} split by codes"
            back = test_code_equality_matches_brute_canonical_simple.codes.setdefault(
                code, key
            )
            assert back == key, f"code {code!r} merged two brute classes"


test_code_equality_matches_brute_canonical_simple.table = {}
test_code_equality_matches_brute_canonical_simple.codes = {}


def test_code_equality_matches_brute_on_random_6_vertex_graphs():
    rng = np.random.default_rng(11)
    graphs = []
    for _ in range(120):
        g = helpers.random_simple_graph(6, rng.uniform(0.15, 0.8), rng)
        graphs.append(RootedGraph(n=6, adj=g.adj, root=int(rng.integers(6))))
    for i in range(0, len(graphs) - 1, 2):
        g1, g2 = graphs[i], graphs[i + 1]
        assert (canonical_code(g1) == canonical_code(g2)) == helpers.brute_rooted_isomorphic(
            g1, g2
        )
    # relabeled copies must collide
    for g in graphs[:25]:
        perm = list(rng.permutation(g.n))
        assert canonical_code(helpers.relabel(g, perm)) == canonical_code(g)


def test_code_on_multigraphs_matches_brute():
    rng = np.random.default_rng(23)
    for _ in range(60):
        g = helpers.random_multigraph(4, rng)
        r1 = RootedGraph(n=g.n, adj=g.adj, root=int(rng.integers(g.n)))
        perm = list(rng.permutation(g.n))
        assert canonical_code(helpers.relabel(r1, perm)) == canonical_code(r1)
        h = helpers.random_multigraph(4, rng)
        r2 = RootedGraph(n=h.n, adj=h.adj, root=int(rng.integers(h.n)))
        assert (canonical_code(r1) == canonical_code(r2)) == helpers.brute_rooted_isomorphic(
            r1, r2
        )


def test_size_cap_on_general_graphs_only():
    n = CANONICAL_CAP + 2
    cyc = rg(n, [(i, (i + 1) % n) for i in range(n)])
    with pytest.raises(SizeCapError):
        canonical_code(cyc)
    # trees of the same size are fine
    path = rg(n, [(i, i + 1) for i in range(n - 1)])
    assert canonical_code(path).startswith(b"(")


def test_tree_code_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(50):
        t = helpers.random_tree(int(rng.integers(1, 40)), rng)
        code = tree_code(t)
        assert tree_code(parse_tree_code(code)) == code


@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_tree_code_agrees_with_graph_code_classes(n, seed):
    rng = np.random.default_rng(seed)
    t1 = helpers.random_tree(n, rng)
    t2 = helpers.random_tree(n, rng)
    same_as_trees = tree_code(t1) == tree_code(t2)
    same_as_graphs = canonical_code(t1.to_rooted_graph()) == canonical_code(
        t2.to_rooted_graph()
    )
    assert same_as_trees == same_as_graphs


# ---------------------------------------------------------------------------
# the metric


def test_distance_zero_iff_isomorphic():
    assert lwc_distance(PATH4, PATH4) == 0
    relabeled = rg(4, [(3, 2), (2, 1), (1, 0)], root=3)
    assert lwc_distance(PATH4, relabeled) == 0


def test_distance_point_vs_edge():
    # radius-0 balls agree, radius-1 balls differ: 1/(1+0) = 1
    assert lwc_distance(POINT, EDGE) == Fraction(1, 1)


def test_distance_path3_vs_path4_rooted_at_ends():
    # balls agree at radii 0..2 and differ at 3: 1/(1+2) = 1/3
    assert lwc_distance(PATH3, PATH4) == Fraction(1, 3)


def test_distance_symmetry_and_ultrametric_triangle():
    rng = np.random.default_rng(17)
    for _ in range(200):
        a = helpers.random_tree(int(rng.integers(1, 13)), rng).to_rooted_graph()
        b = helpers.random_tree(int(rng.integers(1, 13)), rng).to_rooted_graph()
        c = helpers.random_tree(int(rng.integers(1, 13)), rng).to_rooted_graph()
        dab, dba = lwc_distance(a, b), lwc_distance(b, a)
        assert dab == dba
        assert lwc_distance(a, c) <= lwc_distance(a, b) + lwc_distance(b, c)


# ---------------------------------------------------------------------------
# standard construction


def test_standard_construction_point_and_disjoint_edges():
    rng = np.random.default_rng(0)
    g1 = Graph.from_edges(1, [])
    assert standard_construction(g1, rng).n == 1
    g2 = Graph.from_edges(4, [(0, 1), (2, 3)])
    out = standard_construction(g2, rng)
    assert out.n == 2 and rooted_isomorphic(out, EDGE)


def test_standard_construction_component_frequency():
    # triangle plus isolated vertex: the point component appears w.p. 1/4
    g = Graph.from_edges(4, [(0, 1), (1, 2), (0, 2)])
    rng = np.random.default_rng(42)
    hits = sum(standard_construction(g, rng).n == 1 for _ in range(10_000))
    assert abs(hits / 10_000 - 0.25) <= 0.02


def test_standard_construction_empty_graph_rejected():
    with pytest.raises(ValidationError):
        standard_construction(Graph(n=0, adj=()), np.random.default_rng(0))


# ---------------------------------------------------------------------------
# measures


def test_tv_examples():
    m = EmpiricalMeasure.from_counts({"a": 3.0, "b": 1.0})
    assert tv_distance(m, m) == 0
    disjoint = EmpiricalMeasure.from_counts({"c": 2.0})
    assert tv_distance(m, disjoint) == 1
    p = EmpiricalMeasure.from_counts({"a": 0.75, "b": 0.25})
    q = EmpiricalMeasure.from_counts({"a": 0.25, "b": 0.75})
    assert abs(tv_distance(p, q) - 0.5) < 1e-15


def test_tv_metric_axioms_on_random_measures():
    rng = np.random.default_rng(9)
    keys = list("abcdefgh")
    mk = lambda: EmpiricalMeasure.from_counts(
        {k: float(w) for k, w in zip(keys, rng.random(len(keys)))}
    )
    for _ in range(200):
        a, b, c = mk(), mk(), mk()
        assert abs(tv_distance(a, b) - tv_distance(b, a)) < 1e-14
        assert tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-14
        assert tv_distance(a, a) < 1e-14


def test_tv_zero_total_rejected():
    z = EmpiricalMeasure.from_counts({})
    m = EmpiricalMeasure.from_counts({"a": 1.0})
    with pytest.raises(ValidationError):
        tv_distance(z, m)


def test_measure_total_consistency_enforced():
    with pytest.raises(ValidationError):
        EmpiricalMeasure(atoms={"a": 1.0}, total=2.0)


def test_real_binning_half_open():
    m = EmpiricalMeasure.from_reals([0.0, 0.049, 0.05, -0.01], bin_width=0.05)
    assert m.atoms[0] == 2.0  # [0, 0.05)
    assert m.atoms[1] == 1.0  # [0.05, 0.10)
    assert m.atoms[-1] == 1.0  # [-0.05, 0)
    assert m.bin_left(1) == pytest.approx(0.05)


def test_measure_json_round_trip():
    m = EmpiricalMeasure.from_counts({b"(())": 2.0, b"()": 1.0})
    back = EmpiricalMeasure.from_json(m.to_json())
    assert back.atoms == m.atoms and back.total == m.total
    r = EmpiricalMeasure.from_reals([0.1, 0.2, 0.21], bin_width=0.05)
    back = EmpiricalMeasure.from_json(r.to_json())
    assert back.atoms == r.atoms and back.bin_width == r.bin_width
    doc = json.loads(m.to_json(kind="fringe"))
    assert doc["kind"] == "fringe"
    assert set(doc) >= {"atoms", "total"}


def test_empirical_neighborhoods_small_cases():
    m0 = empirical_neighborhoods(PATH4, 0)
    assert len(m0.atoms) == 1 and abs(m0.total - 1) < 1e-12
    mt = empirical_neighborhoods(TRIANGLE, 1)
    assert len(mt.atoms) == 1
    m1 = empirical_neighborhoods(PATH4, 1)
    assert sorted(m1.atoms.values()) == [0.5, 0.5]
    assert abs(sum(m1.atoms.values()) - 1.0) < 1e-12


def test_empirical_neighborhoods_reports_offending_vertex():
    n = CANONICAL_CAP + 10
    cyc = Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
    with pytest.raises(SizeCapError, match="vertex"):
        empirical_neighborhoods(cyc, n)


# ---------------------------------------------------------------------------
# file IO


def test_edgelist_round_trip(tmp_path):
    g = rg(4, [(0, 1), (0, 1), (2, 2), (1, 3)], root=2)
    path = str(tmp_path / "g.edges")
    write_edgelist(g, path, root=g.root)
    back = read_edgelist(path)
    assert back.n == g.n and back.root == 2
    assert back.adj == g.adj


def test_tree_file_round_trip(tmp_path):
    t = RootedTree(
        n=4,
        parent=(-1, 0, 0, 2),
        marks=(1, 0, 1, 0),
        birth_times=(0.0, 0.5, 1.25, 2.0),
        edge_weights=(0.0, 0.3, 0.7, 0.1),
    )
    path = str(tmp_path / "t.tree")
    write_tree(t, path)
    back = read_tree(path, marks=True, birth_times=True, edge_weights=True)
    assert back.parent == t.parent
    assert back.marks == t.marks
    assert back.birth_times == t.birth_times
    assert back.edge_weights == t.edge_weights


@given(st.integers(1, 25), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_tree_file_round_trip_random(tmp_path_factory, n, seed):
    rng = np.random.default_rng(seed)
    t = helpers.random_tree(n, rng)
    path = str(tmp_path_factory.mktemp("trees") / "t.tree")
    write_tree(t, path)
    assert read_tree(path).parent == t.parent
