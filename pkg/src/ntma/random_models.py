"""Seeded samplers for random graphs and Galton-Watson trees.

Every sampler takes an integer seed (or an explicit substream key) and is a
pure function of its arguments.  Randomness comes from numpy's counter-based
Philox generator keyed through :class:`numpy.random.SeedSequence`; the
stream for Monte-Carlo sample ``i`` under master seed ``s`` is
``substream(s, i)``, so samples can be drawn in any order or in parallel
without collisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .structures import CorrelatedPair, CorrelatedTreePair, Graph, RootedTree

SeedLike = int | Sequence[int]


def substream(seed: SeedLike, *path: int) -> np.random.Generator:
    """Philox generator for the stream ``(seed, *path)``."""
    if isinstance(seed, (int, np.integer)):
        key = [int(seed)]
    else:
        key = [int(s) for s in seed]
    for p in path:
        if p < 0:
            raise ValueError("stream indices must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key + list(path))))


def _as_rng(seed: SeedLike | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return substream(seed)


# ---------------------------------------------------------------- Poisson


@lru_cache(maxsize=256)
def _poisson_cdf(lam: float, positive: bool) -> np.ndarray:
    """CDF table for Poi(lam), optionally conditioned on being > 0.

    The table runs until the CDF reaches 1.0 in floating point, so inversion
    by sequential search over it is exact up to rounding.
    """
    if lam < 0:
        raise ValueError("Poisson rate must be nonnegative")
    if lam == 0:
        if positive:
            raise ValueError("Poi(0) cannot be conditioned to be positive")
        return np.ones(1)
    pmf = []
    p = math.exp(-lam)
    k = 0
    total = 0.0
    while True:
        pmf.append(p)
        total += p
        k += 1
        p *= lam / k
        if (k > lam and p < 1e-17) or k > 10_000:
            break
    pmf_arr = np.array(pmf)
    if positive:
        pmf_arr[0] = 0.0
    cdf = np.cumsum(pmf_arr) / pmf_arr.sum()
    cdf[-1] = 1.0
    return cdf


def poisson(rng: np.random.Generator, lam: float, size: int, positive: bool = False) -> np.ndarray:
    """Draw ``size`` Poisson variates by inversion (sequential search on the CDF)."""
    cdf = _poisson_cdf(float(lam), positive)
    if size == 0:
        return np.zeros(0, dtype=np.int64)
    u = rng.random(size)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


# ------------------------------------------------------------------ graphs


def _pair_from_index(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert ``k = v(v-1)/2 + u`` (``u < v``) for the colexicographic pair order."""
    v = ((1 + np.sqrt(1 + 8 * k.astype(np.float64))) // 2).astype(np.int64)
    # guard float rounding
    v = np.where(v * (v - 1) // 2 > k, v - 1, v)
    v = np.where((v + 1) * v // 2 <= k, v + 1, v)
    u = k - v * (v - 1) // 2
    return u, v


def _bernoulli_pairs(rng: np.random.Generator, n: int, p: float) -> np.ndarray:
    """Indices of unordered pairs kept independently with probability p (geometric skipping)."""
    total = n * (n - 1) // 2
    if p <= 0 or total == 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1:
        return np.arange(total, dtype=np.int64)
    chunks = []
    pos = -1
    batch = max(16, int(total * p * 1.1) + 16)
    while True:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        keep = idx[idx < total]
        chunks.append(keep)
        if keep.size < idx.size:
            break
        pos = int(idx[-1])
    return np.concatenate(chunks)


def _edges_from_indices(k: np.ndarray) -> np.ndarray:
    u, v = _pair_from_index(k)
    return np.stack([u, v], axis=1)


def sample_er(n: int, p: float, seed: SeedLike | np.random.Generator) -> Graph:
    """Erdős–Rényi graph: every unordered pair is an edge with probability ``p``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = _as_rng(seed)
    return Graph.from_edge_array(n, _edges_from_indices(_bernoulli_pairs(rng, n, p)))


def sample_erc(n: int, p: float, s: float, seed: SeedLike | np.random.Generator) -> CorrelatedPair:
    """Correlated Erdős–Rényi pair with a uniformly random planted relabeling.

    Each unordered pair is, independently, an edge of both aligned graphs
    with probability ``p*s``, of exactly one of them with probability
    ``p*(1-s)`` each, and of neither otherwise.  The second graph is then
    relabeled by ``sigma``: vertex ``i`` of the aligned copy becomes
    ``sigma[i]``.

    The union of the aligned graphs is drawn first as ER(n, p(2-s)); each
    union edge is then typed both/only-g1/only-g2 with probabilities
    proportional to ``s : 1-s : 1-s``.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= s <= 1.0):
        raise ValueError("p and s must lie in [0, 1]")
    if p * (2 - s) > 1 + 1e-12:
        raise ValueError(f"p(2-s) = {p * (2 - s):.4g} exceeds 1")
    rng = _as_rng(seed)
    union = _bernoulli_pairs(rng, n, min(1.0, p * (2 - s)))
    if s == 1.0:
        kind = np.zeros(union.size, dtype=np.int64)
    else:
        u = rng.random(union.size) * (2 - s)
        kind = np.where(u < s, 0, np.where(u < 1.0, 1, 2))
    e1 = _edges_from_indices(union[kind != 2])
    e2 = _edges_from_indices(union[kind != 1])
    sigma = rng.permutation(n).astype(np.int64)
    e2 = np.sort(sigma[e2], axis=1)
    return CorrelatedPair(
        Graph.from_edge_array(n, e1), Graph.from_edge_array(n, e2), tuple(sigma.tolist())
    )


def intersection_graph(pair: CorrelatedPair) -> Graph:
    """Edges present in ``g1`` and, after undoing ``sigma``, in ``g2``."""
    g2 = pair.g2
    sigma = pair.sigma
    return Graph.from_edges(
        pair.g1.n, ((a, b) for a, b in pair.g1.edges() if g2.has_edge(sigma[a], sigma[b]))
    )


# ------------------------------------------------------------------- trees


@dataclass(frozen=True)
class GWParams:
    """Parameters of the Galton-Watson tree-pair models.

    ``independent=True`` selects two independent GW(lam) trees; otherwise
    the correlated model with intersection GW(lam*s) and root separation
    ``delta`` (``delta=0`` shares the root).
    """

    lam: float
    s: float = 1.0
    delta: int = 0
    depth_cap: int = 10
    independent: bool = False

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError("s must lie in [0, 1]")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.depth_cap < 1:
            raise ValueError("depth_cap must be at least 1")
        if not self.independent and self.depth_cap < self.delta:
            raise ValueError("depth_cap must be at least delta")


class _TreeBuilder:
    """Accumulates a parent array while growing nodes level by level."""

    def __init__(self) -> None:
        self.parent: list[np.ndarray] = []
        self.size = 0

    def add(self, parents: np.ndarray) -> np.ndarray:
        ids = np.arange(self.size, self.size + parents.size, dtype=np.int64)
        self.parent.append(parents.astype(np.int64))
        self.size += parents.size
        return ids

    def tree(self) -> RootedTree:
        if not self.parent:
            return RootedTree.empty()
        return RootedTree(np.concatenate(self.parent))


def _spawn(builder: _TreeBuilder, nodes: np.ndarray, counts: np.ndarray) -> np.ndarray:
    return builder.add(np.repeat(nodes, counts))


def _grow_gw(
    rng: np.random.Generator,
    builder: _TreeBuilder,
    frontier: list[np.ndarray],
    start_depth: int,
    lam: float,
    cap: int,
) -> None:
    """Grow independent GW(lam) offspring below ``frontier[k]`` (nodes at depth start_depth+k)."""
    carry = np.zeros(0, dtype=np.int64)
    depth = start_depth
    k = 0
    while True:
        level = carry if k >= len(frontier) else np.concatenate([carry, frontier[k]])
        if depth >= cap or (level.size == 0 and k >= len(frontier)):
            return
        counts = poisson(rng, lam, level.size)
        carry = _spawn(builder, level, counts)
        depth += 1
        k += 1


def sample_gw(lam: float, depth_cap: int, seed: SeedLike | np.random.Generator) -> RootedTree:
    """A GW(lam) tree with Poisson offspring, generated down to ``depth_cap``."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if depth_cap < 0:
        raise ValueError("depth_cap must be nonnegative")
    rng = _as_rng(seed)
    b = _TreeBuilder()
    root = b.add(np.array([-1]))
    _grow_gw(rng, b, [root], 0, lam, depth_cap)
    return b.tree()


def sample_gw_pair(params: GWParams, seed: SeedLike | np.random.Generator) -> CorrelatedTreePair:
    """Sample a tree pair from GW(lam), GW(lam, s) or GW(lam, s, delta).

    Both trees are truncated at ``params.depth_cap``, measured from their own
    roots.  In the correlated model the first tree's root is joined to the
    second tree's root by a path of length ``delta``; every path node other
    than the last gets Poi(lam) extra children rooting GW(lam) subtrees.
    Intersection nodes get Poi(lam*s) shared children and, per side,
    Poi(lam*(1-s)) private children rooting GW(lam) subtrees.
    """
    rng = _as_rng(seed)
    lam, cap = params.lam, params.depth_cap
    if params.independent:
        t1 = sample_gw(lam, cap, rng)
        t2 = sample_gw(lam, cap, rng)
        return CorrelatedTreePair(t1, t2, {}, -1)

    delta, s = params.delta, params.s
    b1, b2, bx = _TreeBuilder(), _TreeBuilder(), _TreeBuilder()
    # path rho = p_0 .. p_delta = rho'
    path = [b1.add(np.array([-1]))]
    for _ in range(delta):
        path.append(b1.add(path[-1]))
    private1: list[np.ndarray] = []  # frontier of t1-only nodes, indexed by t1 depth - 1
    for k in range(delta):
        extra = poisson(rng, lam, 1)
        private1.append(_spawn(b1, path[k], extra))

    # intersection tree, level by level in t2 depth h
    shared_t1 = path[delta]
    shared_t2 = b2.add(np.array([-1]))
    shared_x = bx.add(np.array([-1]))
    shared_map = {int(shared_t2[0]): int(shared_t1[0])}
    private2: list[np.ndarray] = []
    h = 0
    while h < cap and shared_t2.size:
        m = shared_t2.size
        n_shared = poisson(rng, lam * s, m)
        n_priv1 = poisson(rng, lam * (1 - s), m)
        n_priv2 = poisson(rng, lam * (1 - s), m)
        in_t1 = delta + h + 1 <= cap
        new_t2 = _spawn(b2, shared_t2, n_shared)
        new_x = _spawn(bx, shared_x, n_shared)
        private2.append(_spawn(b2, shared_t2, n_priv2))
        if in_t1:
            # shared_t1 is aligned with shared_t2 while both are within cap
            new_t1 = _spawn(b1, shared_t1, n_shared)
            p1 = _spawn(b1, shared_t1, n_priv1)
            idx = delta + h
            while len(private1) <= idx:
                private1.append(np.zeros(0, dtype=np.int64))
            private1[idx] = np.concatenate([private1[idx], p1])
            shared_map.update(zip(new_t2.tolist(), new_t1.tolist()))
            shared_t1 = new_t1
        else:
            shared_t1 = np.zeros(0, dtype=np.int64)
        shared_t2 = new_t2
        shared_x = new_x
        h += 1

    _grow_gw(rng, b1, private1, 1, lam, cap)
    _grow_gw(rng, b2, private2, 1, lam, cap)
    return CorrelatedTreePair(b1.tree(), b2.tree(), shared_map, delta, bx.tree())


# ---------------------------------------------------------------- pruning


def prune_rd(t: RootedTree, d: int) -> RootedTree:
    """Keep exactly the nodes with a depth-``d`` descendant (including themselves).

    Equivalent to cutting everything below depth ``d`` and then repeatedly
    removing leaves shallower than ``d``.  Node ids are renumbered in
    breadth-first order; the empty tree is returned when nothing reaches
    depth ``d``.
    """
    if d < 0:
        raise ValueError("depth must be nonnegative")
    if t.is_empty:
        return t
    depth = t.depth
    parent = t.parent
    keep = depth == d
    if not keep.any():
        return RootedTree.empty()
    frontier = np.flatnonzero(keep)
    for _ in range(d):
        frontier = np.unique(parent[frontier])
        keep[frontier] = True
    ids = np.flatnonzero(keep)
    order = ids[np.lexsort((ids, depth[ids]))]
    new_id = np.full(t.n, -1, dtype=np.int64)
    new_id[order] = np.arange(order.size)
    old_parent = parent[order]
    new_parent = np.where(old_parent >= 0, new_id[np.maximum(old_parent, 0)], -1)
    return RootedTree(new_parent)


def extinction_prob(lam: float, d: int) -> float:
    """Probability that a GW(lam) tree has no node at depth ``d``.

    Iterates ``p_0 = 0``, ``p_k = exp(-lam * (1 - p_{k-1}))``.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if d < 0:
        raise ValueError("depth must be nonnegative")
    p = 0.0
    for _ in range(d):
        p = math.exp(-lam * (1.0 - p))
    return p


def conditioned_degree_law(lam: float, d: int, kmax: int) -> np.ndarray:
    """Root-degree probabilities ``q_{d,k}`` for ``k = 0..kmax`` of the conditioned tree."""
    if d < 1:
        raise ValueError("the root degree law is defined for d >= 1")
    rate = lam * (1.0 - extinction_prob(lam, d - 1))
    k = np.arange(kmax + 1)
    logpmf = -rate + k * math.log(rate) - np.array([math.lgamma(x + 1) for x in k])
    q = np.exp(logpmf) / (-math.expm1(-rate))
    q[0] = 0.0
    return q


def sample_conditioned_td(lam: float, d: int, seed: SeedLike | np.random.Generator) -> RootedTree:
    """Sample ``r_d`` of a GW(lam) tree conditioned to reach depth ``d``, directly.

    A node at depth ``k < d`` has a number of children drawn from the
    zero-truncated Poisson law with rate ``lam * (1 - p_{d-k-1})``, and each
    child roots an independent conditioned tree of height ``d-k-1``.  Every
    leaf sits at depth exactly ``d``.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if d < 0:
        raise ValueError("depth must be nonnegative")
    rng = _as_rng(seed)
    b = _TreeBuilder()
    level = b.add(np.array([-1]))
    for k in range(d):
        rate = lam * (1.0 - extinction_prob(lam, d - k - 1))
        counts = poisson(rng, rate, level.size, positive=True)
        level = _spawn(b, level, counts)
    return b.tree()
