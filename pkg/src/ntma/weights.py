"""Matching weights between rooted trees.

``W_d(T, T')`` is the largest number of depth-``d`` leaves of a tree whose
leaves all sit at depth ``d`` and which embeds, root and parent preserving,
into both ``T`` and ``T'``.  It satisfies a one-step recursion: the weight of
a pair of nodes at depth ``d`` is the optimal assignment, between their
children, of the depth ``d-1`` weights of the child pairs.

Three interchangeable engines compute the root weight:

``"dp"``
    bottom-up, level by level, after pruning both trees and collapsing
    isomorphic subtrees (default; scales to trees with ~1e5 nodes)
``"rec"``
    memoized top-down recursion over oriented edges
``"brute"``
    definition-level enumeration of common subtrees (tiny trees only)

:func:`build_weight_table` runs the full dynamic program over every pair of
oriented edges, which is also what graph alignment uses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lap import assignment_value, lap_level
from .random_models import prune_rd
from .structures import Graph, RootedTree

ENGINES = ("dp", "rec", "brute")

BRUTE_MAX_NODES = 14


# ------------------------------------------------------------ shape DP


def _shape_levels(t: RootedTree, d: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """CSR child lists of distinct subtree shapes, per depth ``0..d-1``.

    ``t`` must already be pruned (every leaf at depth ``d``).  Entry ``k``
    describes the shape classes at depth ``k``; its indices point into the
    classes at depth ``k+1``.  Depth ``d`` has a single class (the leaf).
    """
    depth = t.depth
    parent = t.parent
    cls = np.zeros(t.n, dtype=np.int64)
    levels: list[tuple[np.ndarray, np.ndarray]] = [None] * d  # type: ignore[list-item]
    for k in range(d - 1, -1, -1):
        kids = np.flatnonzero(depth == k + 1)
        # group children by parent, sort child classes within each group
        order = np.lexsort((cls[kids], parent[kids]))
        kids = kids[order]
        par = parent[kids]
        ccls = cls[kids].tolist()
        nodes = np.flatnonzero(depth == k)
        bounds = np.searchsorted(par, nodes, side="left")
        ends = np.searchsorted(par, nodes, side="right")
        table: dict[tuple[int, ...], int] = {}
        ptr = [0]
        idx: list[int] = []
        for v, lo, hi in zip(nodes.tolist(), bounds.tolist(), ends.tolist()):
            key = tuple(ccls[lo:hi])
            c = table.get(key)
            if c is None:
                c = len(table)
                table[key] = c
                idx.extend(key)
                ptr.append(len(idx))
            cls[v] = c
        levels[k] = (np.array(ptr, dtype=np.int64), np.array(idx, dtype=np.int64))
    return levels


def _weight_root_dp(t1: RootedTree, t2: RootedTree, d: int) -> int:
    p1, p2 = prune_rd(t1, d), prune_rd(t2, d)
    if p1.is_empty or p2.is_empty:
        return 0
    if d == 0:
        return 1
    lv1, lv2 = _shape_levels(p1, d), _shape_levels(p2, d)
    w = np.ones((1, 1), dtype=np.int64)
    for k in range(d - 1, -1, -1):
        w = lap_level(w, lv1[k][0], lv1[k][1], lv2[k][0], lv2[k][1])
    return int(w[0, 0])


# ------------------------------------------------------- recursive engine


class _RecursiveWeights:
    """Memoized recursion ``W_k(i <- j, u <- v)`` on two trees seen as graphs.

    ``j = -1`` (resp. ``v = -1``) stands for "no excluded neighbour", which
    turns the edge weight into the node weight ``W_k(i, u)``.
    """

    def __init__(self, t1: RootedTree, t2: RootedTree) -> None:
        self.adj1 = t1.as_graph().adj
        self.adj2 = t2.as_graph().adj
        self._edge = lru_cache(maxsize=None)(self._compute)

    def _compute(self, k: int, i: int, j: int, u: int, v: int) -> int:
        if k == 0:
            return 1
        e = [x for x in self.adj1[i] if x != j]
        f = [y for y in self.adj2[u] if y != v]
        if not e or not f:
            return 0
        sub = np.array([[self._edge(k - 1, x, i, y, u) for y in f] for x in e], dtype=np.int64)
        return assignment_value(sub)

    def edge(self, k: int, i: int, j: int, u: int, v: int) -> int:
        return self._edge(k, i, j, u, v)

    def node(self, k: int, i: int, u: int) -> int:
        return self._edge(k, i, -1, u, -1)


def _weight_root_rec(t1: RootedTree, t2: RootedTree, d: int) -> int:
    if t1.is_empty or t2.is_empty:
        return 0
    # the root weight only looks downward; the recursion through neighbours
    # of the root is exactly the children recursion
    return _RecursiveWeights(t1, t2).node(d, t1.root, t2.root)


# ---------------------------------------------------------- brute force


def _enumerate_shapes(t: RootedTree, d: int) -> list[tuple]:
    """Canonical shapes of every subtree of ``t`` rooted at the root whose leaves all sit at depth ``d``.

    A shape is a sorted tuple of child shapes; the leaf is ``()``.  Such a
    subtree is determined by a nonempty set of depth-``d`` nodes and their
    ancestors, so the enumeration runs over those sets.
    """
    leaves = np.flatnonzero(t.depth == d).tolist()
    parent = t.parent.tolist()
    shapes = set()
    for r in range(1, len(leaves) + 1):
        for chosen in itertools.combinations(leaves, r):
            kids: dict[int, set[int]] = {}
            for x in chosen:
                while parent[x] >= 0:
                    kids.setdefault(parent[x], set()).add(x)
                    x = parent[x]

            def shape(x: int) -> tuple:
                return tuple(sorted(shape(c) for c in kids.get(x, ())))

            shapes.add(shape(t.root))
    return list(shapes)


def _embeds(shape: tuple, t: RootedTree, node: int) -> bool:
    """Whether ``shape`` embeds into ``t`` with its root sent to ``node``."""
    kids = t.children[node]
    if len(shape) > len(kids):
        return False
    for image in itertools.permutations(kids, len(shape)):
        if all(_embeds(s, t, c) for s, c in zip(shape, image)):
            return True
    return False


def _leaf_count(shape: tuple) -> int:
    return 1 if not shape else sum(_leaf_count(s) for s in shape)


def brute_force_weight(t1: RootedTree, t2: RootedTree, d: int) -> int:
    """Matching weight straight from its definition, by enumeration.

    Every candidate tree (all leaves at depth ``d``) that embeds into ``t1``
    is enumerated, and the one with the most leaves that also embeds into
    ``t2`` wins.  No assignment solver is involved.  Limited to trees of at
    most ``BRUTE_MAX_NODES`` nodes.
    """
    if d < 0:
        raise ValueError("depth must be nonnegative")
    if t1.n > BRUTE_MAX_NODES or t2.n > BRUTE_MAX_NODES:
        raise ValueError(f"brute force is limited to trees of <= {BRUTE_MAX_NODES} nodes")
    if t1.is_empty or t2.is_empty:
        return 0
    best = 0
    for shape in _enumerate_shapes(t1, d):
        size = _leaf_count(shape)
        if size > best and _embeds(shape, t2, t2.root):
            best = size
    return best


# ------------------------------------------------------------ public API


def weight_root(t1: RootedTree, t2: RootedTree, d: int, engine: str = "dp") -> int:
    """Matching weight ``W_d`` of two rooted trees (0 if either misses depth ``d``)."""
    if d < 0:
        raise ValueError("depth must be nonnegative")
    if engine == "dp":
        return _weight_root_dp(t1, t2, d)
    if engine == "rec":
        return _weight_root_rec(t1, t2, d)
    if engine == "brute":
        return brute_force_weight(t1, t2, d)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def _check_edge(t: RootedTree, edge: tuple[int, int]) -> tuple[int, int]:
    a, b = int(edge[0]), int(edge[1])
    n = t.n
    if not (0 <= a < n and 0 <= b < n) or not (t.parent[a] == b or t.parent[b] == a):
        raise ValueError(f"({a}, {b}) is not an edge of the tree")
    return a, b


def weight_edge(
    t1: RootedTree,
    t2: RootedTree,
    d: int,
    edge1: tuple[int, int],
    edge2: tuple[int, int],
) -> int:
    """``W_d(i <- j, u <- v)`` for oriented edges ``edge1 = (j, i)`` and ``edge2 = (v, u)``.

    The weight looks at the tree reached through the edge: rooted at ``i``
    with the branch through ``j`` removed.
    """
    if d < 0:
        raise ValueError("depth must be nonnegative")
    j, i = _check_edge(t1, edge1)
    v, u = _check_edge(t2, edge2)
    return _RecursiveWeights(t1, t2).edge(d, i, j, u, v)


# ---------------------------------------------------------- edge tables


def _edge_structure(g: Graph) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Oriented-edge bookkeeping for ``g``.

    Returns ``(tail, head, cont_ptr, cont_idx)``.  Oriented edge ``e`` goes
    from ``tail[e]`` to ``head[e]``; its continuations (CSR) are the edges
    leaving ``head[e]`` other than the one going back to ``tail[e]``.
    """
    indptr, indices = g.csr
    deg = np.diff(indptr)
    tail = np.repeat(np.arange(g.n, dtype=np.int64), deg)
    head = indices
    cont_ptr = np.zeros(head.size + 1, dtype=np.int64)
    cont_ptr[1:] = np.cumsum(np.maximum(deg[head] - 1, 0))
    out = []
    for e in range(head.size):
        h, t = head[e], tail[e]
        out.extend(x for x in range(indptr[h], indptr[h + 1]) if indices[x] != t)
    return tail, head, cont_ptr, np.array(out, dtype=np.int64)


def edge_weight_levels(g1: Graph, g2: Graph, d: int, keep_all: bool = False) -> list[np.ndarray]:
    """Edge-pair weight matrices ``W_k`` for ``k = 0..d-1``.

    Row ``e`` / column ``f`` index oriented edges of ``g1`` / ``g2`` (ids as
    in :attr:`Graph.csr`); ``W_k[e, f]`` is the weight of the trees reached
    through ``e`` and ``f``, with non-backtracking walks standing in for tree
    paths.  On a pair of acyclic depth-``d`` neighbourhoods the values
    coincide with the tree weights.  Only level ``d-1`` is returned unless
    ``keep_all`` is set.
    """
    if d < 1:
        raise ValueError("depth must be at least 1")
    _, _, cp1, ci1 = _edge_structure(g1)
    _, _, cp2, ci2 = _edge_structure(g2)
    w = np.ones((cp1.size - 1, cp2.size - 1), dtype=np.int64)
    levels = [w]
    for _ in range(1, d):
        w = lap_level(w, cp1, ci1, cp2, ci2)
        levels = levels + [w] if keep_all else [w]
    return levels


def node_weights(g1: Graph, g2: Graph, edge_level: np.ndarray) -> np.ndarray:
    """``W_{k+1}(i, u)`` for every vertex pair from the edge level ``W_k``."""
    ip1, _ = g1.csr
    ip2, _ = g2.csr
    return lap_level(
        edge_level,
        ip1,
        np.arange(ip1[-1], dtype=np.int64),
        ip2,
        np.arange(ip2[-1], dtype=np.int64),
    )


@dataclass(frozen=True)
class WeightTable:
    """All matching weights of two trees up to depth ``depth``.

    ``levels[k][e, f]`` is ``W_k(i <- j, u <- v)`` for the oriented edges
    ``e = (j, i)`` of ``t1`` and ``f = (v, u)`` of ``t2`` (``k < depth``);
    ``node_entries[i, u]`` is ``W_depth(i, u)``.
    """

    depth: int
    edges1: np.ndarray
    edges2: np.ndarray
    levels: tuple[np.ndarray, ...]
    node_entries: np.ndarray

    def _edge_id(self, edges: np.ndarray, edge: tuple[int, int]) -> int:
        hit = np.flatnonzero((edges[:, 0] == edge[0]) & (edges[:, 1] == edge[1]))
        if hit.size == 0:
            raise KeyError(f"{edge} is not an oriented edge")
        return int(hit[0])

    def edge_weight(self, k: int, edge1: tuple[int, int], edge2: tuple[int, int]) -> int:
        """``W_k(i <- j, u <- v)`` with ``edge1 = (j, i)``, ``edge2 = (v, u)``."""
        return int(
            self.levels[k][self._edge_id(self.edges1, edge1), self._edge_id(self.edges2, edge2)]
        )

    def node_weight(self, i: int, u: int) -> int:
        return int(self.node_entries[i, u])


def build_weight_table(t1: RootedTree, t2: RootedTree, d: int) -> WeightTable:
    """Bottom-up dynamic program over every pair of oriented edges.

    Level 0 is all ones; each further level solves one assignment per edge
    pair from the previous level; the node weights ``W_d(i, u)`` come last.
    """
    if d < 1:
        raise ValueError("depth must be at least 1")
    g1, g2 = t1.as_graph(), t2.as_graph()
    levels = edge_weight_levels(g1, g2, d, keep_all=True)
    nodes = node_weights(g1, g2, levels[-1])
    tail1, head1, _, _ = _edge_structure(g1)
    tail2, head2, _, _ = _edge_structure(g2)
    return WeightTable(
        d,
        np.stack([tail1, head1], axis=1),
        np.stack([tail2, head2], axis=1),
        tuple(levels),
        nodes,
    )
