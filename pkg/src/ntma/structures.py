"""Immutable graph and rooted-tree containers shared by every module."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``adj[v]`` is the sorted tuple of neighbours of ``v``.  Build graphs with
    :meth:`from_edges`, which validates and normalises the edge list.
    """

    n: int
    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for a, b in edges:
            a, b = int(a), int(b)
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range for n={n}")
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if b in nbrs[a]:
                raise ValueError(f"duplicate edge ({min(a, b)}, {max(a, b)})")
            nbrs[a].add(b)
            nbrs[b].add(a)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    @classmethod
    def from_edge_array(cls, n: int, edges: np.ndarray) -> "Graph":
        """Fast path for trusted ``(m, 2)`` arrays of distinct pairs ``u < v``."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        bounds = np.searchsorted(src, np.arange(n + 1))
        dst_list = dst.tolist()
        adj = tuple(tuple(dst_list[bounds[v]:bounds[v + 1]]) for v in range(n))
        return cls(n, adj)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def edges(self) -> list[tuple[int, int]]:
        """Edges as sorted ``(u, v)`` pairs with ``u < v``."""
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.adj[u]
        k = int(np.searchsorted(nb, v)) if nb else 0
        return k < len(nb) and nb[k] == v

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with vertex ``v`` renamed ``perm[v]``."""
        perm = [int(p) for p in perm]
        return Graph.from_edges(self.n, ((perm[a], perm[b]) for a, b in self.edges()))

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)``; position ``e`` in ``indices`` is the oriented edge id."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adj])
        indices = np.fromiter(
            (w for a in self.adj for w in a), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, self.adj))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class CorrelatedPair:
    g1: Graph
    g2: Graph
    sigma: tuple[int, ...]


class TreeError(ValueError):
    """Raised when a parent array does not describe a rooted tree."""


@dataclass(frozen=True, eq=False)
class RootedTree:
    """Finite rooted tree stored as a parent array (``-1`` marks the root).

    The empty tree has no nodes.  Children lists and depths are derived
    lazily and cached.
    """

    parent: np.ndarray

    def __post_init__(self) -> None:
        parent = np.array(self.parent, dtype=np.int64).reshape(-1)
        parent.setflags(write=False)
        object.__setattr__(self, "parent", parent)
        n = parent.size
        if n == 0:
            return
        roots = np.flatnonzero(parent == -1)
        if roots.size != 1:
            raise TreeError(f"not a tree: expected one root, found {roots.size}")
        if ((parent < -1) | (parent >= n)).any():
            raise TreeError("not a tree: parent id out of range")
        # depth computation doubles as the acyclicity check
        if (self.depth < 0).any():
            raise TreeError("not a tree: parent array contains a cycle")

    @classmethod
    def empty(cls) -> "RootedTree":
        return cls(np.zeros(0, dtype=np.int64))

    @classmethod
    def from_children(cls, children: Sequence[Sequence[int]]) -> "RootedTree":
        parent = [-1] * len(children)
        for v, cs in enumerate(children):
            for c in cs:
                parent[c] = v
        return cls(np.array(parent, dtype=np.int64))

    @property
    def n(self) -> int:
        return int(self.parent.size)

    @property
    def is_empty(self) -> bool:
        return self.parent.size == 0

    @cached_property
    def root(self) -> int:
        if self.is_empty:
            raise TreeError("the empty tree has no root")
        return int(np.flatnonzero(self.parent == -1)[0])

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for v, p in enumerate(self.parent.tolist()):
            if p >= 0:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def depth(self) -> np.ndarray:
        """Depth of every node; ``-1`` for nodes unreachable from the root."""
        depth = np.full(self.n, -1, dtype=np.int64)
        if self.n == 0:
            return depth
        root = int(np.flatnonzero(self.parent == -1)[0])
        depth[root] = 0
        queue = deque([root])
        kids = self.children
        while queue:
            v = queue.popleft()
            for c in kids[v]:
                depth[c] = depth[v] + 1
                queue.append(c)
        depth.setflags(write=False)
        return depth

    @property
    def height(self) -> int:
        """Largest node depth; ``-1`` for the empty tree."""
        return int(self.depth.max()) if self.n else -1

    def level_sizes(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=np.int64)
        return np.bincount(self.depth)

    def count_at_depth(self, d: int) -> int:
        return int(np.count_nonzero(self.depth == d))

    def as_graph(self) -> Graph:
        """Undirected view with the same node ids."""
        return Graph.from_edges(
            self.n, ((int(p), v) for v, p in enumerate(self.parent.tolist()) if p >= 0)
        )

    def bfs_relabel(self) -> "RootedTree":
        """Canonical id order: by depth, then by parent id, then by old id."""
        if self.is_empty:
            return self
        order = np.lexsort((np.arange(self.n), self.parent, self.depth))
        new_id = np.empty(self.n, dtype=np.int64)
        new_id[order] = np.arange(self.n)
        old_parent = self.parent[order]
        parent = np.where(old_parent >= 0, new_id[np.maximum(old_parent, 0)], -1)
        return RootedTree(parent)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RootedTree):
            return NotImplemented
        return np.array_equal(self.parent, other.parent)

    def __hash__(self) -> int:
        return hash(self.parent.tobytes())

    def __repr__(self) -> str:
        if self.is_empty:
            return "RootedTree(empty)"
        return f"RootedTree(n={self.n}, height={self.height})"


@dataclass(frozen=True)
class CorrelatedTreePair:
    """Two trees plus the identification of their intersection.

    ``shared`` maps node ids of ``t2`` to node ids of ``t1`` for every
    intersection node present in both (depth-capped) trees.  ``t2``'s root
    sits at depth ``delta`` of ``t1``; for the independent model ``shared``
    is empty and ``delta`` is ``-1``.
    """

    t1: RootedTree
    t2: RootedTree
    shared: dict[int, int]
    delta: int
    intersection: RootedTree | None = None
