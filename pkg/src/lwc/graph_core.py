"""Rooted graphs and trees, neighborhood balls, canonical codes, the local
weak convergence metric, and empirical measures over shapes.

Conventions used throughout:

* Graphs are undirected multigraphs. The adjacency list of a vertex repeats
  a neighbor once per parallel edge, and lists the vertex itself twice per
  self-loop, so ``len(adj[v])`` is always the graph degree.
* Rooted isomorphism means an isomorphism mapping root to root. Two rooted
  graphs receive equal canonical codes iff such an isomorphism exists.
* The metric on rooted graphs is 1/(1+R), where R is the largest radius at
  which the two balls around the roots are root-isomorphic, and the distance
  is 0 when the graphs themselves are root-isomorphic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import SizeCapError, ValidationError

CANONICAL_CAP = 64  # general-graph canonicalization refuses past this size

CanonicalCode = bytes


# ---------------------------------------------------------------------------
# graph types


@dataclass(frozen=True)
class Graph:
    """Finite undirected multigraph with per-vertex sorted neighbor lists."""

    n: int
    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        lists: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u},{v}) out of range for n={n}")
            lists[u].append(v)
            if u == v:
                lists[u].append(v)  # a loop contributes 2 to its endpoint's degree
            else:
                lists[v].append(u)
        return cls(n=n, adj=tuple(tuple(sorted(l)) for l in lists))

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def edge_count(self) -> int:
        return sum(len(l) for l in self.adj) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Edge multiset, each edge once per multiplicity, endpoints sorted."""
        out = []
        for u, neigh in enumerate(self.adj):
            for v in neigh:
                if v > u:
                    out.append((u, v))
                elif v == u:
                    out.append((u, u))
        # each loop was listed twice in adj[u]
        loops = [(u, v) for (u, v) in out if u == v]
        non = [(u, v) for (u, v) in out if u != v]
        return sorted(non + loops[::2])

    def validate(self) -> None:
        for u, neigh in enumerate(self.adj):
            for v in neigh:
                if not 0 <= v < self.n:
                    raise ValidationError(f"neighbor {v} of {u} out of range")
            if self.adj[u].count(u) % 2 != 0:
                raise ValidationError(f"odd self-loop count at {u}")
        for u in range(self.n):
            for v in set(self.adj[u]):
                if v != u and self.adj[u].count(v) != self.adj[v].count(u):
                    raise ValidationError(f"asymmetric multiplicity on ({u},{v})")


@dataclass(frozen=True)
class RootedGraph(Graph):
    root: int = 0

    def __post_init__(self):
        if not 0 <= self.root < self.n:
            raise ValidationError(f"root {self.root} out of range for n={self.n}")

    @classmethod
    def from_graph(cls, g: Graph, root: int) -> "RootedGraph":
        return cls(n=g.n, adj=g.adj, root=root)


@dataclass(frozen=True)
class RootedTree:
    """Rooted tree as a parent array; the root's parent is -1.

    Optional parallel columns: integer marks, birth times (nondecreasing from
    parent to child), and weights on the edge to the parent.
    """

    n: int
    parent: tuple[int, ...]
    marks: tuple[int, ...] | None = None
    birth_times: tuple[float, ...] | None = None
    edge_weights: tuple[float, ...] | None = None
    children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    root: int = field(init=False, compare=False)

    def __post_init__(self):
        if len(self.parent) != self.n:
            raise ValidationError("parent array length != n")
        roots = [v for v, p in enumerate(self.parent) if p < 0]
        if len(roots) != 1:
            raise ValidationError(f"expected exactly one root, found {len(roots)}")
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for v, p in enumerate(self.parent):
            if p >= 0:
                if p >= self.n:
                    raise ValidationError(f"parent {p} of {v} out of range")
                kids[p].append(v)
        object.__setattr__(self, "children", tuple(tuple(sorted(k)) for k in kids))
        object.__setattr__(self, "root", roots[0])

    def depths(self) -> np.ndarray:
        """Depth of every vertex (root at 0)."""
        d = np.zeros(self.n, dtype=np.int64)
        order = self.topological_order()
        for v in order:
            p = self.parent[v]
            if p >= 0:
                d[v] = d[p] + 1
        return d

    def topological_order(self) -> list[int]:
        """Vertices ordered so every parent precedes its children."""
        order, stack = [], [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(self.children[v])
        return order

    def subtree_sizes(self) -> np.ndarray:
        sizes = np.ones(self.n, dtype=np.int64)
        for v in reversed(self.topological_order()):
            p = self.parent[v]
            if p >= 0:
                sizes[p] += sizes[v]
        return sizes

    def to_rooted_graph(self) -> RootedGraph:
        edges = [(v, p) for v, p in enumerate(self.parent) if p >= 0]
        g = Graph.from_edges(self.n, edges)
        return RootedGraph(n=g.n, adj=g.adj, root=self.root)


# ---------------------------------------------------------------------------
# balls and components


def ball(g: Graph, center: int, radius: int) -> RootedGraph:
    """Induced subgraph on vertices within graph distance `radius` of `center`,
    re-rooted at `center` with ids compacted to 0..m-1 (center -> 0).
    Edge multiplicities and loops are preserved."""
    if not 0 <= center < g.n:
        raise ValidationError(f"vertex {center} out of range")
    dist = {center: 0}
    frontier = [center]
    order = [center]
    d = 0
    while frontier and d < radius:
        d += 1
        nxt = []
        for u in frontier:
            for v in g.adj[u]:
                if v not in dist:
                    dist[v] = d
                    nxt.append(v)
                    order.append(v)
        frontier = nxt
    index = {v: i for i, v in enumerate(order)}
    lists: list[list[int]] = [[] for _ in order]
    for v in order:
        row = lists[index[v]]
        for w in g.adj[v]:
            if w in index:
                row.append(index[w])
    return RootedGraph(n=len(order), adj=tuple(tuple(sorted(l)) for l in lists), root=0)


def component(g: Graph, v: int) -> RootedGraph:
    """Connected component of v, rooted at v."""
    return ball(g, v, g.n)


def standard_construction(g: Graph, rng: np.random.Generator) -> RootedGraph:
    """Root the graph at a uniformly random vertex and keep its component."""
    if g.n < 1:
        raise ValidationError("empty graph")
    v = int(rng.integers(g.n))
    return component(g, v)


# ---------------------------------------------------------------------------
# canonical codes


def _is_tree_from_root(g: RootedGraph) -> bool:
    if g.edge_count() != g.n - 1:
        return False
    if any(u in g.adj[u] for u in range(g.n)):
        return False
    # acyclic + n-1 edges + all reachable from root <=> tree
    seen = {g.root}
    stack = [g.root]
    while stack:
        u = stack.pop()
        for v in g.adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == g.n


def _tree_code_from_children(children: Sequence[Sequence[int]], root: int) -> bytes:
    """Bottom-up sorted-children canonical string; iterative to spare the
    recursion limit on deep paths."""
    code: list[bytes | None] = [None] * len(children)
    stack: list[tuple[int, bool]] = [(root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            code[v] = b"(" + b"".join(sorted(code[c] for c in children[v])) + b")"
        else:
            stack.append((v, True))
            stack.extend((c, False) for c in children[v])
    return code[root]


def tree_code(t: RootedTree) -> CanonicalCode:
    return _tree_code_from_children(t.children, t.root)


def parse_tree_code(code: CanonicalCode) -> RootedTree:
    """Inverse of tree_code up to rooted isomorphism."""
    parents: list[int] = []
    stack: list[int] = []
    for ch in code:
        if ch == 0x28:  # '('
            parents.append(stack[-1] if stack else -1)
            stack.append(len(parents) - 1)
        elif ch == 0x29:  # ')'
            stack.pop()
        else:
            raise ValidationError("malformed tree code")
    if stack or not parents:
        raise ValidationError("malformed tree code")
    return RootedTree(n=len(parents), parent=tuple(parents))


def _rooted_tree_code_via_bfs(g: RootedGraph) -> bytes:
    children: list[list[int]] = [[] for _ in range(g.n)]
    seen = {g.root}
    queue = [g.root]
    while queue:
        u = queue.pop()
        for v in g.adj[u]:
            if v not in seen:
                seen.add(v)
                children[u].append(v)
                queue.append(v)
    return _tree_code_from_children(children, g.root)


def _multiplicity_matrix(g: Graph) -> list[list[int]]:
    m = [[0] * g.n for _ in range(g.n)]
    for u, neigh in enumerate(g.adj):
        for v in neigh:
            m[u][v] += 1
    return m  # m[v][v] is twice the loop count


def _refine(colors: list[int], adj: Sequence[Sequence[int]]) -> list[int]:
    n = len(colors)
    while True:
        keys = [
            (colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in range(n)
        ]
        ranking = {k: i for i, k in enumerate(sorted(set(keys)))}
        new = [ranking[k] for k in keys]
        if new == colors:
            return colors
        colors = new


def _certificate(order: list[int], mult: list[list[int]]) -> bytes:
    n = len(order)
    rows = []
    for i in range(n):
        oi = order[i]
        rows.append(",".join(str(mult[oi][order[j]]) for j in range(i + 1)))
    return ("G%d;" % n + ";".join(rows)).encode("ascii")


def _canon_search(colors: list[int], adj, mult) -> bytes:
    colors = _refine(colors, adj)
    n = len(colors)
    cells: dict[int, list[int]] = {}
    for v, c in enumerate(colors):
        cells.setdefault(c, []).append(v)
    target = None
    for c in sorted(cells):
        if len(cells[c]) > 1:
            target = cells[c]
            break
    if target is None:
        order = sorted(range(n), key=lambda v: colors[v])
        return _certificate(order, mult)
    best: bytes | None = None
    for v in target:
        split = [c * 2 + 1 for c in colors]
        split[v] = colors[v] * 2
        cand = _canon_search(split, adj, mult)
        if best is None or cand < best:
            best = cand
    return best


def canonical_code(g: RootedGraph) -> CanonicalCode:
    """Byte string equal for two rooted graphs iff they are root-isomorphic.

    Trees get a bottom-up sorted-children code with no size cap. General
    graphs go through color refinement seeded by (distance from root, degree,
    loop count), with backtracking over the first unresolved cell; capped at
    CANONICAL_CAP vertices.
    """
    if _is_tree_from_root(g):
        return _rooted_tree_code_via_bfs(g)
    if g.n > CANONICAL_CAP:
        raise SizeCapError(
            f"general-graph canonicalization capped at {CANONICAL_CAP} vertices, got {g.n}"
        )
    mult = _multiplicity_matrix(g)
    dist = [g.n + 1] * g.n  # unreachable vertices share a sentinel distance
    dist[g.root] = 0
    frontier = [g.root]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in g.adj[u]:
                if dist[v] > g.n:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    init_keys = [
        (dist[v], len(g.adj[v]), mult[v][v]) for v in range(g.n)
    ]
    ranking = {k: i for i, k in enumerate(sorted(set(init_keys)))}
    colors = [ranking[k] for k in init_keys]
    return _canon_search(colors, g.adj, mult)


def rooted_isomorphic(g1: RootedGraph, g2: RootedGraph) -> bool:
    return canonical_code(g1) == canonical_code(g2)


# ---------------------------------------------------------------------------
# the local weak convergence metric


def lwc_distance(g1: RootedGraph, g2: RootedGraph) -> Fraction:
    """1/(1+R) with R the largest radius at which the root balls are
    root-isomorphic; 0 when the rooted graphs are isomorphic outright.

    Radius-0 balls always agree, so the result lies in {0} U (0, 1]."""
    r = 0
    prev_sizes = (-1, -1)
    while True:
        b1, b2 = ball(g1, g1.root, r), ball(g2, g2.root, r)
        if canonical_code(b1) != canonical_code(b2):
            # balls agreed at r-1 and differ at r
            return Fraction(1, r)
        sizes = (b1.n, b2.n)
        if sizes == prev_sizes:
            return Fraction(0)  # both saturated while still agreeing
        prev_sizes = sizes
        r += 1


# ---------------------------------------------------------------------------
# empirical measures


def _key_sort_token(key: Any) -> tuple:
    if isinstance(key, bytes):
        return (0, key)
    if isinstance(key, str):
        return (1, key.encode("utf8"))
    return (2, float(key))


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted atoms over hashable keys (canonical codes, integers, or real
    bins). Real samples are binned into half-open windows [i*w, (i+1)*w)."""

    atoms: Mapping[Any, float]
    total: float
    bin_width: float | None = None

    @classmethod
    def from_counts(cls, counts: Mapping[Any, float], bin_width: float | None = None) -> "EmpiricalMeasure":
        total = float(sum(counts.values()))
        return cls(atoms=dict(counts), total=total, bin_width=bin_width)

    @classmethod
    def from_samples(cls, keys: Iterable[Any]) -> "EmpiricalMeasure":
        counts: dict[Any, float] = {}
        for k in keys:
            counts[k] = counts.get(k, 0.0) + 1.0
        return cls.from_counts(counts)

    @classmethod
    def from_reals(cls, values: Iterable[float], bin_width: float = 0.05) -> "EmpiricalMeasure":
        vals = np.asarray(list(values), dtype=float)
        idx = np.floor(vals / bin_width).astype(np.int64)
        keys, counts = np.unique(idx, return_counts=True)
        return cls.from_counts(
            {int(k): float(c) for k, c in zip(keys, counts)}, bin_width=bin_width
        )

    def __post_init__(self):
        s = float(sum(self.atoms.values()))
        if any(w < 0 for w in self.atoms.values()):
            raise ValidationError("negative atom weight")
        if abs(s - self.total) > 1e-9 * max(1.0, abs(s)):
            raise ValidationError(f"total {self.total} != sum of weights {s}")

    def normalized(self) -> "EmpiricalMeasure":
        if self.total <= 0:
            raise ValidationError("cannot normalize a zero-total measure")
        atoms = {k: w / self.total for k, w in self.atoms.items()}
        return EmpiricalMeasure(atoms=atoms, total=1.0, bin_width=self.bin_width)

    def prob(self, key: Any) -> float:
        if self.total <= 0:
            raise ValidationError("zero-total measure")
        return self.atoms.get(key, 0.0) / self.total

    def bin_left(self, key: int) -> float:
        if self.bin_width is None:
            raise ValidationError("measure has no real-valued binning")
        return key * self.bin_width

    def map_keys(self, fn) -> "EmpiricalMeasure":
        counts: dict[Any, float] = {}
        for k, w in self.atoms.items():
            k2 = fn(k)
            counts[k2] = counts.get(k2, 0.0) + w
        return EmpiricalMeasure.from_counts(counts, bin_width=None)

    def to_json(self, **metadata: Any) -> str:
        atoms = []
        for k in sorted(self.atoms, key=_key_sort_token):
            key_repr: Any
            if isinstance(k, bytes):
                key_repr = k.decode("ascii")
            elif isinstance(k, (int, np.integer)):
                key_repr = int(k)
            else:
                key_repr = float(k)
            atoms.append({"key": key_repr, "w": float(self.atoms[k])})
        doc: dict[str, Any] = {"atoms": atoms, "total": float(self.total)}
        if self.bin_width is not None:
            doc["bin_width"] = float(self.bin_width)
        doc.update(metadata)
        return json.dumps(doc, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "EmpiricalMeasure":
        doc = json.loads(text)
        bin_width = doc.get("bin_width")
        atoms: dict[Any, float] = {}
        for entry in doc["atoms"]:
            k = entry["key"]
            if isinstance(k, str):
                k = k.encode("ascii")
            elif isinstance(k, float) and k.is_integer() and bin_width is None:
                k = int(k)
            atoms[k] = float(entry["w"])
        return cls(atoms=atoms, total=float(doc["total"]), bin_width=bin_width)


def tv_distance(m1: EmpiricalMeasure, m2: EmpiricalMeasure) -> float:
    """Total variation distance after normalization: half the L1 gap over the
    union of supports."""
    p, q = m1.normalized(), m2.normalized()
    keys = set(p.atoms) | set(q.atoms)
    return 0.5 * sum(abs(p.atoms.get(k, 0.0) - q.atoms.get(k, 0.0)) for k in keys)


def empirical_neighborhoods(g: Graph, k: int) -> EmpiricalMeasure:
    """Uniform-vertex law of the canonical code of the radius-k ball."""
    if k < 0:
        raise ValidationError("radius must be nonnegative")
    counts: dict[bytes, float] = {}
    for v in range(g.n):
        try:
            code = canonical_code(ball(g, v, k))
        except SizeCapError as exc:
            raise SizeCapError(f"ball at vertex {v}: {exc}") from exc
        counts[code] = counts.get(code, 0.0) + 1.0
    m = EmpiricalMeasure.from_counts(counts)
    return m.normalized()


# ---------------------------------------------------------------------------
# file formats


def write_edgelist(g: Graph, path: str, root: int = 0) -> None:
    """Header "n m root", then one "u v" line per edge (per multiplicity)."""
    edges = g.edges()
    with open(path, "w") as fh:
        fh.write(f"{g.n} {len(edges)} {root}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def read_edgelist(path: str) -> RootedGraph:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValidationError("edge-list header must be 'n m root'")
        n, m, root = (int(x) for x in header)
        edges = []
        for _ in range(m):
            u, v = (int(x) for x in fh.readline().split())
            edges.append((u, v))
    g = Graph.from_edges(n, edges)
    return RootedGraph(n=g.n, adj=g.adj, root=root)


def write_tree(t: RootedTree, path: str) -> None:
    """Header "n", then n-1 lines "child parent [mark] [birth] [weight]",
    sorted by child id; optional columns appear when the tree carries them.
    When optional columns are present, an extra line with parent -1 carries
    the root's values."""
    extras = t.marks is not None or t.birth_times is not None or t.edge_weights is not None
    with open(path, "w") as fh:
        fh.write(f"{t.n}\n")
        for v in range(t.n):
            p = t.parent[v]
            if p < 0 and not extras:
                continue
            cols = [str(v), str(p)]
            if t.marks is not None:
                cols.append(str(t.marks[v]))
            if t.birth_times is not None:
                cols.append(repr(float(t.birth_times[v])))
            if t.edge_weights is not None:
                cols.append(repr(float(t.edge_weights[v])))
            fh.write(" ".join(cols) + "\n")


def read_tree(path: str, marks: bool = False, birth_times: bool = False,
              edge_weights: bool = False) -> RootedTree:
    extras = marks or birth_times or edge_weights
    with open(path) as fh:
        n = int(fh.readline())
        parent = [-1] * n
        mk = [0] * n if marks else None
        bt = [0.0] * n if birth_times else None
        ew = [0.0] * n if edge_weights else None
        for _ in range(n if extras else n - 1):
            cols = fh.readline().split()
            v, p = int(cols[0]), int(cols[1])
            parent[v] = p
            i = 2
            if marks:
                mk[v] = int(cols[i]); i += 1
            if birth_times:
                bt[v] = float(cols[i]); i += 1
            if edge_weights:
                ew[v] = float(cols[i]); i += 1
    return RootedTree(
        n=n,
        parent=tuple(parent),
        marks=tuple(mk) if mk is not None else None,
        birth_times=tuple(bt) if bt is not None else None,
        edge_weights=tuple(ew) if ew is not None else None,
    )
