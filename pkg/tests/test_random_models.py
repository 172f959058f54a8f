import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import INVARIANT_CASES, complete_tree, path_tree, trees
from ntma.random_models import (
    GWParams,
    conditioned_degree_law,
    extinction_prob,
    intersection_graph,
    poisson,
    prune_rd,
    sample_conditioned_td,
    sample_er,
    sample_erc,
    sample_gw,
    sample_gw_pair,
    substream,
)
from ntma.structures import RootedTree

seeds = st.integers(0, 2**32)


# --- Poisson sampler -------------------------------------------------


@pytest.mark.parametrize("lam", [0.3, 2.0, 7.5])
def test_poisson_moments(lam):
    x = poisson(substream(1, 0), lam, 200_000)
    assert abs(x.mean() - lam) < 5 * math.sqrt(lam / x.size)
    assert abs(x.var() - lam) < 0.05 * lam


def test_positive_poisson_has_no_zeros():
    x = poisson(substream(1, 1), 0.5, 50_000, positive=True)
    assert x.min() >= 1
    # mean of the zero-truncated law
    assert abs(x.mean() - 0.5 / (1 - math.exp(-0.5))) < 0.02


def test_poisson_zero_rate():
    assert poisson(substream(0), 0.0, 10).tolist() == [0] * 10


# --- Erdos-Renyi ------------------------------------------------------


def test_er_edge_count():
    n, p = 400, 0.05
    g = sample_er(n, p, 3)
    pairs = n * (n - 1) / 2
    assert abs(g.m - p * pairs) < 4 * math.sqrt(pairs * p * (1 - p))


def test_er_extremes():
    assert sample_er(6, 0.0, 1).m == 0
    assert sample_er(6, 1.0, 1).m == 15


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_er_rejects_bad_p(p):
    with pytest.raises(ValueError):
        sample_er(5, p, 0)


def test_erc_rejects_infeasible():
    with pytest.raises(ValueError, match="exceeds 1"):
        sample_erc(10, 0.9, 0.5, 0)


def test_erc_is_permuted_copy_when_s_is_one():
    pair = sample_erc(300, 4 / 300, 1.0, 11)
    sigma = pair.sigma
    assert sorted(sigma) == list(range(300))
    assert pair.g1.m == pair.g2.m
    for a, b in pair.g1.edges():
        assert pair.g2.has_edge(sigma[a], sigma[b])


def test_erc_s_zero_has_disjoint_edge_sets():
    pair = sample_erc(300, 5 / 300, 0.0, 12)
    assert intersection_graph(pair).m == 0


@settings(max_examples=30)
@given(seeds)
def test_erc_is_pure(seed):
    a, b = sample_erc(60, 0.05, 0.7, seed), sample_erc(60, 0.05, 0.7, seed)
    assert a.g1 == b.g1 and a.g2 == b.g2 and a.sigma == b.sigma


# --- Galton-Watson trees ----------------------------------------------


def test_gw_respects_depth_cap():
    t = sample_gw(3.0, 4, 5)
    assert t.height <= 4


def test_gw_zero_rate_is_a_root():
    assert sample_gw(0.0, 5, 0).n == 1


def test_gw_mean_generation_size():
    lam, d, trials = 1.8, 4, 4000
    sizes = [sample_gw(lam, d, substream(9, i)).count_at_depth(d) for i in range(trials)]
    # E Z_d = lam^d; generous bound on the Monte-Carlo error
    assert abs(np.mean(sizes) - lam**d) < 5 * np.std(sizes) / math.sqrt(trials)


@pytest.mark.parametrize(
    "kwargs",
    [dict(lam=-1), dict(lam=1, s=1.5), dict(lam=1, delta=-1), dict(lam=1, depth_cap=0), dict(lam=1, delta=5, depth_cap=3)],
)
def test_gw_params_validation(kwargs):
    with pytest.raises(ValueError):
        GWParams(**kwargs)


def _shared_is_common_subtree(pair):
    t1, t2 = pair.t1, pair.t2
    for v2, v1 in pair.shared.items():
        p2 = int(t2.parent[v2])
        if p2 < 0:
            continue
        assert pair.shared[p2] == t1.parent[v1]
        assert t2.depth[v2] + pair.delta == t1.depth[v1]


@settings(max_examples=INVARIANT_CASES)
@given(seeds, st.sampled_from([0.0, 0.4, 0.9, 1.0]))
def test_shared_nodes_form_common_rooted_subtree(seed, s):
    pair = sample_gw_pair(GWParams(2.0, s, 0, 5), seed)
    assert pair.shared[pair.t2.root] == pair.t1.root
    _shared_is_common_subtree(pair)


@settings(max_examples=50)
@given(seeds, st.integers(1, 4))
def test_delta_model_places_second_root_on_a_path(seed, delta):
    pair = sample_gw_pair(GWParams(2.0, 0.8, delta, 6), seed)
    rho2 = pair.shared[pair.t2.root]
    assert pair.t1.depth[rho2] == delta
    _shared_is_common_subtree(pair)
    assert pair.t1.height <= 6 and pair.t2.height <= 6


def test_s_one_delta_zero_gives_identical_trees():
    pair = sample_gw_pair(GWParams(2.0, 1.0, 0, 5), 4)
    assert pair.t1.level_sizes().tolist() == pair.t2.level_sizes().tolist()
    assert len(pair.shared) == pair.t1.n == pair.t2.n


def test_intersection_tree_matches_shared_map():
    pair = sample_gw_pair(GWParams(2.5, 0.6, 0, 5), 8)
    assert pair.intersection.n == len(pair.shared)


@settings(max_examples=50)
@given(seeds, st.booleans())
def test_gw_pair_is_pure(seed, independent):
    params = GWParams(1.7, 0.8, 0, 5, independent)
    a, b = sample_gw_pair(params, seed), sample_gw_pair(params, seed)
    assert a.t1 == b.t1 and a.t2 == b.t2 and a.shared == b.shared


# --- pruning and the conditioned tree ----------------------------------


def test_prune_path_with_side_branch():
    # 0-1-2-3 plus a short branch 0-4
    t = RootedTree(np.array([-1, 0, 1, 2, 0]))
    r = prune_rd(t, 3)
    assert r.parent.tolist() == [-1, 0, 1, 2]
    assert prune_rd(t, 4).is_empty


def test_prune_complete_tree_is_identity():
    t = complete_tree(2, 3)
    assert prune_rd(t, 3) == t


@settings(max_examples=INVARIANT_CASES)
@given(trees(max_nodes=25), st.integers(0, 8))
def test_prune_is_idempotent(t, d):
    once = prune_rd(t, d)
    assert prune_rd(once, d) == once


@settings(max_examples=INVARIANT_CASES)
@given(trees(max_nodes=25, allow_empty=True), st.integers(0, 8))
def test_prune_nonempty_iff_depth_reached(t, d):
    r = prune_rd(t, d)
    assert (not r.is_empty) == (t.count_at_depth(d) > 0)
    if not r.is_empty:
        # every leaf of r_d sits at depth d
        leaves = [v for v, kids in enumerate(r.children) if not kids]
        assert all(r.depth[v] == d for v in leaves)
        assert r.count_at_depth(d) == t.count_at_depth(d)


def test_extinction_values():
    assert extinction_prob(1.5, 0) == 0.0
    assert extinction_prob(1.5, 1) == pytest.approx(math.exp(-1.5))
    assert extinction_prob(1.5, 2) == pytest.approx(math.exp(-1.5 * (1 - math.exp(-1.5))))


@pytest.mark.parametrize("lam", [0.5, 1.0, 1.5, 3.0])
def test_extinction_monotone_and_fixed_point(lam):
    ps = [extinction_prob(lam, d) for d in range(2000)]
    assert all(a <= b for a, b in zip(ps, ps[1:]))
    if lam != 1.0:  # convergence at criticality is only O(1/d)
        x = ps[-1]
        assert abs(x - math.exp(-lam * (1 - x))) < 1e-12


def test_extinction_rejects_nonpositive_rate():
    with pytest.raises(ValueError):
        extinction_prob(0.0, 3)


def test_conditioned_degree_law_is_a_distribution():
    q = conditioned_degree_law(1.5, 4, 60)
    assert q[0] == 0.0
    assert q.sum() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100)
@given(seeds, st.integers(0, 6))
def test_conditioned_tree_reaches_exact_depth(seed, d):
    t = sample_conditioned_td(1.5, d, seed)
    assert t.height == d
    assert prune_rd(t, d) == t.bfs_relabel()
