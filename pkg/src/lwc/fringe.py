"""Fringe and extended-fringe decompositions of rooted trees.

The fringe of a vertex v is the subtree below it; the depth-k stack around v
collects that subtree together with what each of the first k ancestors sees
when the branch leading down to v is removed. Empirical fringe measures,
the child-subtree count matrix Q, a stationarity residual for candidate
limit laws, and a sampler for the extended (stacked) law live here.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import ValidationError
from .graph_core import (
    CanonicalCode,
    EmpiricalMeasure,
    RootedTree,
    parse_tree_code,
    tree_code,
)

TRUNCATED_PREFIX = b"*"
STACK_SEP = b"|"


# ---------------------------------------------------------------------------
# stacks


@dataclass(frozen=True)
class FringeStack:
    """Trees (t_0, ..., t_h): t_0 the fringe at the chosen vertex, t_i rooted
    at its i-th ancestor with the branch through the (i-1)-th removed.
    truncated marks a request for more levels than the vertex has ancestors.
    """

    trees: tuple[RootedTree, ...]
    truncated: bool = False

    def __post_init__(self):
        if not self.trees:
            raise ValidationError("a fringe stack holds at least one tree")

    @property
    def depth(self) -> int:
        return len(self.trees) - 1

    def code(self) -> CanonicalCode:
        body = STACK_SEP.join(tree_code(t) for t in self.trees)
        return TRUNCATED_PREFIX + body if self.truncated else body

    def reassemble(self) -> RootedTree:
        """Glue the stack back together: the root of each level becomes the
        parent of the previous level's root."""
        parents = list(self.trees[0].parent)
        root = self.trees[0].root
        for level in self.trees[1:]:
            offset = len(parents)
            parents[root] = offset + level.root
            parents.extend(p + offset if p >= 0 else -1 for p in level.parent)
            root = offset + level.root
        return RootedTree(n=len(parents), parent=tuple(parents))

    def monotone(self) -> tuple[RootedTree, ...]:
        """Nested view: the i-th entry is the union of levels 0..i, i.e. the
        full subtree hanging from the i-th ancestor."""
        return tuple(
            FringeStack(trees=self.trees[: i + 1]).reassemble()
            for i in range(len(self.trees))
        )


def stack_code_components(code: CanonicalCode) -> tuple[tuple[CanonicalCode, ...], bool]:
    truncated = code.startswith(TRUNCATED_PREFIX)
    body = code[1:] if truncated else code
    return tuple(body.split(STACK_SEP)), truncated


def extract_subtree(t: RootedTree, v: int, exclude: int | None = None) -> RootedTree:
    """Subtree of t below v (as a new tree rooted at index 0), optionally
    removing the branch through the child `exclude`."""
    if not 0 <= v < t.n:
        raise ValidationError(f"vertex {v} not in tree")
    index = {v: 0}
    parents = [-1]
    queue = [v]
    while queue:
        u = queue.pop()
        for c in t.children[u]:
            if u == v and c == exclude:
                continue
            index[c] = len(parents)
            parents.append(index[u])
            queue.append(c)
    marks = None
    if t.marks is not None:
        inv = sorted(index, key=index.get)
        marks = tuple(t.marks[w] for w in inv)
    return RootedTree(n=len(parents), parent=tuple(parents), marks=marks)


def fringe_decompose(t: RootedTree, v: int, k: int) -> FringeStack:
    """Depth-k fringe stack about v; levels past the root are truncated and
    flagged rather than invented."""
    if not 0 <= v < t.n:
        raise ValidationError(f"vertex {v} not in tree")
    if k < 0:
        raise ValidationError("k must be nonnegative")
    trees = [extract_subtree(t, v)]
    cur = v
    levels = 0
    while levels < k and t.parent[cur] >= 0:
        par = t.parent[cur]
        trees.append(extract_subtree(t, par, exclude=cur))
        cur = par
        levels += 1
    return FringeStack(trees=tuple(trees), truncated=levels < k)


# ---------------------------------------------------------------------------
# code-level helpers (stacks at scale never materialize trees)


def children_codes(code: CanonicalCode) -> list[CanonicalCode]:
    """Top-level child subtree codes of a tree code."""
    if not (code.startswith(b"(") and code.endswith(b")")):
        raise ValidationError("malformed tree code")
    out = []
    depth = 0
    start = 0
    for i in range(1, len(code) - 1):
        if code[i] == 0x28:
            if depth == 0:
                start = i
            depth += 1
        else:
            depth -= 1
            if depth == 0:
                out.append(code[start : i + 1])
    if depth != 0:
        raise ValidationError("malformed tree code")
    return out


def all_subtree_codes(t: RootedTree) -> list[CanonicalCode]:
    """Per-vertex fringe codes in one bottom-up pass."""
    codes: list[CanonicalCode | None] = [None] * t.n
    for v in reversed(t.topological_order()):
        codes[v] = b"(" + b"".join(sorted(codes[c] for c in t.children[v])) + b")"
    return codes


def _stack_code_at(
    t: RootedTree, v: int, k: int, codes: list[CanonicalCode]
) -> CanonicalCode:
    parts = [codes[v]]
    cur = v
    levels = 0
    while levels < k and t.parent[cur] >= 0:
        par = t.parent[cur]
        sibling = sorted(codes[c] for c in t.children[par] if c != cur)
        parts.append(b"(" + b"".join(sibling) + b")")
        cur = par
        levels += 1
    body = STACK_SEP.join(parts)
    return TRUNCATED_PREFIX + body if levels < k else body


def empirical_fringe(t: RootedTree, k: int) -> EmpiricalMeasure:
    """Uniform-vertex distribution of depth-k fringe stack codes."""
    if k < 0:
        raise ValidationError("k must be nonnegative")
    codes = all_subtree_codes(t)
    if k == 0:
        return EmpiricalMeasure.from_samples(codes)
    return EmpiricalMeasure.from_samples(
        _stack_code_at(t, v, k, codes) for v in range(t.n)
    )


def fringe_size_pmf(t: RootedTree) -> EmpiricalMeasure:
    """Distribution of |fringe(v)| over a uniform vertex v."""
    sizes = t.subtree_sizes()
    return EmpiricalMeasure.from_samples(int(s) for s in sizes)


def subtree_count_Q(s: RootedTree, t: RootedTree) -> int:
    """Number of root children of s whose subtree is root-isomorphic to t."""
    target = tree_code(t)
    codes = all_subtree_codes(s)
    return sum(1 for c in s.children[s.root] if codes[c] == target)


# ---------------------------------------------------------------------------
# fringe laws


@dataclass(frozen=True, eq=False)
class FringeLaw:
    """Probability over fringe codes, stored code -> mass."""

    atoms: Mapping[CanonicalCode, float]
    source: str = "empirical"

    def __post_init__(self):
        if not self.atoms:
            raise ValidationError("empty fringe law")
        s = float(sum(self.atoms.values()))
        if abs(s - 1.0) > 1e-9:
            raise ValidationError(f"fringe law mass {s} is not 1")
        if any(w < 0 for w in self.atoms.values()):
            raise ValidationError("negative mass")

    @classmethod
    def from_measure(cls, m: EmpiricalMeasure, source: str = "empirical") -> "FringeLaw":
        norm = m.normalized()
        return cls(atoms=dict(norm.atoms), source=source)

    @classmethod
    def from_samples(cls, codes: Iterable[CanonicalCode], source: str = "empirical") -> "FringeLaw":
        return cls.from_measure(EmpiricalMeasure.from_samples(codes), source=source)

    def prob(self, code: CanonicalCode) -> float:
        return self.atoms.get(code, 0.0)

    def sample_codes(self, rng: np.random.Generator, size: int) -> list[CanonicalCode]:
        keys = sorted(self.atoms)
        p = np.array([self.atoms[k] for k in keys])
        idx = rng.choice(len(keys), size=size, p=p / p.sum())
        return [keys[i] for i in idx]

    def to_json(self, **metadata: Any) -> str:
        m = EmpiricalMeasure.from_counts(dict(self.atoms))
        return m.to_json(kind="fringe", source=self.source, **metadata)

    @classmethod
    def from_json(cls, text: str) -> "FringeLaw":
        doc = json.loads(text)
        if doc.get("kind") != "fringe":
            raise ValidationError("not a fringe law document")
        m = EmpiricalMeasure.from_json(text)
        return cls.from_measure(m, source=doc.get("source", "empirical"))


def stationarity_residual(law: FringeLaw, support_cap: int = 6) -> float:
    """L1 gap between the law and its one-step child-subtree flow, restricted
    to atoms with at most support_cap vertices. Zero means stationary on the
    tested support."""
    small = {c for c in law.atoms if c.count(b"(") <= support_cap}
    flow: dict[CanonicalCode, float] = {c: 0.0 for c in small}
    for code, mass in law.atoms.items():
        if mass == 0.0:
            continue
        for child in children_codes(code):
            if child in flow:
                flow[child] += mass
    return float(sum(abs(flow[c] - law.atoms[c]) for c in small))


def extended_fringe_sampler(
    law: FringeLaw,
    depth: int,
    rng: np.random.Generator,
    count: int | None = None,
) -> FringeStack | list[FringeStack]:
    """Draw depth-deep stacks from the extended law built over `law`.

    A draw picks a tree from the law biased by its number of depth-`depth`
    vertices, then reads the stack off a uniform such vertex. In the
    monotone (nested-union) view the result lands on (t_0, ..., t_depth)
    with probability proportional to law(t_depth) * prod_i Q(t_i, t_{i-1});
    no rejection is involved.
    """
    if depth < 0:
        raise ValidationError("depth must be nonnegative")
    codes = sorted(law.atoms)
    trees = [parse_tree_code(c) for c in codes]
    deep: list[np.ndarray] = []
    weights = np.empty(len(codes))
    for i, t in enumerate(trees):
        vs = np.flatnonzero(t.depths() == depth)
        deep.append(vs)
        weights[i] = law.atoms[codes[i]] * vs.size
    total = weights.sum()
    if total <= 0:
        raise ValidationError(
            f"law has no mass on trees of depth >= {depth}: no valid unwrap"
        )
    n_draws = 1 if count is None else count
    picks = rng.choice(len(codes), size=n_draws, p=weights / total)
    out = []
    for i in picks:
        v = int(deep[i][rng.integers(deep[i].size)])
        out.append(fringe_decompose(trees[i], v, depth))
    return out[0] if count is None else out
