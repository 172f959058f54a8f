"""Partial alignment of sparse graphs by neighbourhood tree matching.

Two aligners are provided.  :func:`ntma` matches ``(i, u)`` when two
disjoint pairs of neighbours ``(j, v)``, ``(j', v')`` both have "dangling"
trees (the trees hanging below them, away from ``i`` and ``u``) whose
depth ``d-1`` matching weight exceeds ``gamma**(d-1)``.  :func:`ntma2`
keeps pairs whose depth-``d`` weight exceeds ``gamma**d`` and is maximal in
both its row and its column, then drops every conflicting pair.

Weights for all vertex pairs are computed at once by the oriented-edge
dynamic program of :mod:`ntma.weights`; for pairs whose two depth-``d``
balls are acyclic this is exactly the weight of the extracted neighbourhood
trees.  ``engine="per-pair"`` extracts those trees explicitly instead and is
kept as a slow reference.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .lap import lap_level
from .structures import Graph, RootedTree
from .weights import _RecursiveWeights, edge_weight_levels, node_weights, weight_root

VARIANTS = ("ntma", "ntma2")


@dataclass(frozen=True)
class MatchSet:
    """Candidate pairs ``(i, u)``: ``i`` a vertex of G1, ``u`` a vertex of G2."""

    pairs: tuple[tuple[int, int], ...] = ()

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]]) -> "MatchSet":
        """Sorted, duplicate-free match set."""
        return cls(tuple(sorted({(int(i), int(u)) for i, u in pairs})))

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: object) -> bool:
        return pair in set(self.pairs)


@dataclass(frozen=True)
class NtmaParams:
    d: int
    gamma: float
    variant: str = "ntma"

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        min_d = 2 if self.variant == "ntma" else 1
        if self.d < min_d:
            raise ValueError(f"{self.variant} needs depth d >= {min_d}")


@dataclass(frozen=True)
class AlignScore:
    n: int
    correct: int
    mismatched_nodes: int

    @property
    def correct_fraction(self) -> float:
        return self.correct / self.n if self.n else 0.0

    @property
    def err_fraction(self) -> float:
        return self.mismatched_nodes / self.n if self.n else 0.0

    def as_dict(self) -> dict[str, float]:
        return {"correct_fraction": self.correct_fraction, "err_fraction": self.err_fraction}


def default_depth(n: int, lam: float, variant: str = "ntma") -> int:
    """``floor(c log n)`` with ``c log lam = 1/4``, floored at the variant's minimum depth."""
    floor_d = 2 if variant == "ntma" else 1
    if lam <= 1 or n < 2:
        return floor_d
    return max(floor_d, int(math.log(n) / (4 * math.log(lam))))


# ------------------------------------------------------- neighbourhoods


def _check_vertex(g: Graph, v: int) -> None:
    if not 0 <= v < g.n:
        raise ValueError(f"vertex {v} out of range for n={g.n}")


def _bfs(g: Graph, v: int, d: int) -> tuple[dict[int, int], dict[int, int]]:
    """Distances and BFS parents of all vertices within distance ``d`` of ``v``."""
    dist = {v: 0}
    parent = {v: -1}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if dist[x] == d:
            continue
        for y in g.adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                parent[y] = x
                queue.append(y)
    return dist, parent


def bfs_layers(g: Graph, v: int, d: int) -> list[frozenset[int]]:
    """Spheres ``S(v, t)`` of vertices at distance exactly ``t``, for ``t = 0..d``."""
    _check_vertex(g, v)
    dist, _ = _bfs(g, v, d)
    layers: list[set[int]] = [set() for _ in range(d + 1)]
    for x, t in dist.items():
        layers[t].add(x)
    return [frozenset(layer) for layer in layers]


def has_cycle_within(g: Graph, v: int, d: int) -> bool:
    """Whether the subgraph induced by the ball of radius ``d`` around ``v`` has a cycle.

    The ball is connected, so it is a tree iff it has one edge fewer than
    vertices.
    """
    _check_vertex(g, v)
    dist, _ = _bfs(g, v, d)
    edges2 = sum(1 for x in dist for y in g.adj[x] if y in dist)
    return edges2 // 2 > len(dist) - 1


def acyclic_mask(g: Graph, d: int) -> np.ndarray:
    """Boolean array: ball of radius ``d`` around each vertex is a tree."""
    return np.array([not has_cycle_within(g, v, d) for v in range(g.n)], dtype=bool)


def extract_tree(g: Graph, v: int, d: int, return_labels: bool = False):
    """BFS tree of the radius-``d`` ball around ``v``, rooted at ``v``.

    Node ``k`` of the tree is graph vertex ``labels[k]``; with
    ``return_labels`` the pair ``(tree, labels)`` is returned.
    """
    _check_vertex(g, v)
    if has_cycle_within(g, v, d):
        raise ValueError(f"the radius-{d} ball around {v} contains a cycle")
    dist, parent = _bfs(g, v, d)
    labels = sorted(dist, key=lambda x: (dist[x], x))
    pos = {x: k for k, x in enumerate(labels)}
    tree = RootedTree(np.array([pos[parent[x]] if parent[x] >= 0 else -1 for x in labels]))
    return (tree, labels) if return_labels else tree


# ---------------------------------------------------------------- NTMA


def _pair_mask(g1: Graph, g2: Graph, d: int) -> np.ndarray:
    return np.outer(acyclic_mask(g1, d), acyclic_mask(g2, d))


def _vertex_csr(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    indptr, _ = g.csr
    return indptr, np.arange(indptr[-1], dtype=np.int64)


def _ntma_graph(g1: Graph, g2: Graph, d: int, gamma: float) -> MatchSet:
    threshold = gamma ** (d - 1)
    (w,) = edge_weight_levels(g1, g2, d)  # last level is W_{d-1}
    above = (w > threshold).astype(np.int64)
    # a size-2 matching among above-threshold neighbour pairs <=> value >= 2
    two = lap_level(above, *_vertex_csr(g1), *_vertex_csr(g2)) >= 2
    ok = two & _pair_mask(g1, g2, d)
    return MatchSet(tuple(zip(*(a.tolist() for a in np.nonzero(ok)))))


def _ntma_per_pair(g1: Graph, g2: Graph, d: int, gamma: float) -> MatchSet:
    threshold = gamma ** (d - 1)
    ok1 = acyclic_mask(g1, d)
    ok2 = acyclic_mask(g2, d)
    trees2 = {u: extract_tree(g2, u, d) for u in range(g2.n) if ok2[u] and g2.degree(u) >= 2}
    pairs = []
    for i in range(g1.n):
        if not ok1[i] or g1.degree(i) < 2:
            continue
        t1 = extract_tree(g1, i, d)
        for u, t2 in trees2.items():
            rec = _RecursiveWeights(t1, t2)
            kids1, kids2 = t1.children[t1.root], t2.children[t2.root]
            above = np.array(
                [[int(rec.edge(d - 1, j, t1.root, v, t2.root) > threshold) for v in kids2] for j in kids1],
                dtype=np.int64,
            )
            if _has_two_matching(above):
                pairs.append((i, u))
    return MatchSet(tuple(pairs))


def _has_two_matching(b: np.ndarray) -> bool:
    """Two true entries in distinct rows and distinct columns (checked directly)."""
    rows, cols = np.nonzero(b)
    for a in range(rows.size):
        for c in range(a + 1, rows.size):
            if rows[a] != rows[c] and cols[a] != cols[c]:
                return True
    return False


def ntma(g1: Graph, g2: Graph, params: NtmaParams, engine: str = "graph") -> MatchSet:
    """Neighbourhood Tree Matching: all ``(i, u)`` passing the dangling-trees test.

    A pair qualifies when the radius-``d`` balls around ``i`` and ``u`` are
    trees and there are neighbours ``j != j'`` of ``i`` and ``v != v'`` of
    ``u`` with ``W_{d-1}(j <- i, v <- u)`` and ``W_{d-1}(j' <- i, v' <- u)``
    both above ``gamma**(d-1)``.  The result may map a vertex to several
    partners; see :func:`dedupe`.
    """
    if params.variant != "ntma":
        raise ValueError("ntma() needs variant 'ntma'")
    if engine == "graph":
        return _ntma_graph(g1, g2, params.d, params.gamma)
    if engine == "per-pair":
        return _ntma_per_pair(g1, g2, params.d, params.gamma)
    raise ValueError(f"unknown engine {engine!r}")


def unrolled_tree(g: Graph, v: int, d: int) -> RootedTree:
    """Tree of non-backtracking walks of length ``<= d`` from ``v``.

    Equal to :func:`extract_tree` when the radius-``d`` ball is a tree;
    otherwise every cycle is unrolled.  This is the tree the weight
    recursion sees when run directly on the graph.
    """
    _check_vertex(g, v)
    parent = [-1]
    level = [(v, -1, 0)]  # (vertex, vertex it came from, tree node id)
    for _ in range(d):
        nxt = []
        for x, back, node in level:
            for y in g.adj[x]:
                if y != back:
                    parent.append(node)
                    nxt.append((y, x, len(parent) - 1))
        level = nxt
    return RootedTree(np.array(parent, dtype=np.int64))


def ntma2_weights(g1: Graph, g2: Graph, d: int, engine: str = "graph", acyclic_only: bool = False) -> np.ndarray:
    """``W_d(i, u)`` for all vertex pairs.

    Weights are those of the non-backtracking neighbourhood trees; with
    ``acyclic_only`` pairs where either radius-``d`` ball has a cycle get 0.
    """
    mask = _pair_mask(g1, g2, d) if acyclic_only else np.ones((g1.n, g2.n), dtype=bool)
    if engine == "graph":
        (w,) = edge_weight_levels(g1, g2, d)
        return np.where(mask, node_weights(g1, g2, w), 0)
    if engine == "per-pair":
        out = np.zeros((g1.n, g2.n), dtype=np.int64)
        trees2 = [unrolled_tree(g2, u, d) for u in range(g2.n)]
        for i in range(g1.n):
            if not mask[i].any():
                continue
            t1 = unrolled_tree(g1, i, d)
            for u, t2 in enumerate(trees2):
                if mask[i, u]:
                    out[i, u] = weight_root(t1, t2, d)
        return out
    raise ValueError(f"unknown engine {engine!r}")


def ntma2(
    g1: Graph, g2: Graph, params: NtmaParams, engine: str = "graph", acyclic_only: bool = False
) -> MatchSet:
    """Row-and-column-maximum variant, pruned to an injective matching.

    Selects ``(i, u)`` with ``W_d(i, u) > gamma**d`` that attains (ties
    allowed) both the maximum of row ``i`` and of column ``u``, then removes
    every row and column holding more than one selected pair.
    """
    if params.variant != "ntma2":
        raise ValueError("ntma2() needs variant 'ntma2'")
    w = ntma2_weights(g1, g2, params.d, engine, acyclic_only)
    if w.size == 0:
        return MatchSet()
    sel = (
        (w > params.gamma**params.d)
        & (w == w.max(axis=1, keepdims=True))
        & (w == w.max(axis=0, keepdims=True))
    )
    return dedupe(zip(*(a.tolist() for a in np.nonzero(sel))))


def align(g1: Graph, g2: Graph, params: NtmaParams, engine: str = "graph") -> MatchSet:
    """Dispatch on ``params.variant``."""
    if params.variant == "ntma":
        return ntma(g1, g2, params, engine)
    return ntma2(g1, g2, params, engine)


# ------------------------------------------------------ dedup & scoring


def dedupe(s: Iterable[tuple[int, int]]) -> MatchSet:
    """Keep the pairs whose first and second coordinates each occur exactly once."""
    pairs = list(s)
    first: dict[int, int] = {}
    second: dict[int, int] = {}
    for i, u in pairs:
        first[i] = first.get(i, 0) + 1
        second[u] = second.get(u, 0) + 1
    return MatchSet.of((i, u) for i, u in pairs if first[i] == 1 and second[u] == 1)


def score(s: Iterable[tuple[int, int]], sigma: Sequence[int], n: int) -> AlignScore:
    """Count correct pairs ``u = sigma[i]`` and vertices with at least one wrong partner."""
    correct = 0
    wrong: set[int] = set()
    for i, u in s:
        if not (0 <= i < n and 0 <= u < n):
            raise ValueError(f"pair ({i}, {u}) out of range for n={n}")
        if sigma[i] == u:
            correct += 1
        else:
            wrong.add(i)
    return AlignScore(n, correct, len(wrong))
