import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ntma.lap import assignment_value, brute_force_assignment, lap_level, solve_max_assignment


def matrices(max_rows=7, max_cols=7, max_entry=20):
    shapes = st.tuples(st.integers(0, max_rows), st.integers(0, max_cols))
    return shapes.flatmap(lambda s: arrays(np.int64, s, elements=st.integers(0, max_entry)))


def _check_mapping(w, res):
    k, l = w.shape
    assert len(res.mapping) == min(k, l)
    rows = [i for i, _ in res.mapping]
    cols = [j for _, j in res.mapping]
    assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
    assert rows == sorted(rows)
    assert sum(int(w[i, j]) for i, j in res.mapping) == res.value


def test_small_example():
    res = solve_max_assignment([[1, 2], [3, 4]])
    assert res.value == 5
    assert res.mapping == ((0, 0), (1, 1))


def test_rectangular_picks_best_column():
    res = solve_max_assignment([[1, 9, 3]])
    assert res == brute_force_assignment([[1, 9, 3]])
    assert res.mapping == ((0, 1),) and res.value == 9


def test_tall_matrix():
    w = np.array([[1], [7], [3]])
    assert solve_max_assignment(w).mapping == ((1, 0),)


def test_empty_matrix():
    assert solve_max_assignment(np.zeros((0, 3))).value == 0
    assert solve_max_assignment(np.zeros((2, 0))).mapping == ()


@pytest.mark.parametrize("w, msg", [([[-1, 2]], "nonnegative"), ([[0.5]], "integers"), ([1, 2], "two-dimensional")])
def test_rejects_bad_input(w, msg):
    with pytest.raises(ValueError, match=msg):
        solve_max_assignment(w)


def test_brute_force_size_limit():
    with pytest.raises(ValueError, match="limited"):
        brute_force_assignment(np.zeros((9, 9), dtype=int))


@settings(max_examples=1000)
@given(matrices())
def test_matches_brute_force(w):
    res, ref = solve_max_assignment(w), brute_force_assignment(w)
    assert res.value == ref.value
    # the tie-break is the same lexicographic rule in both
    assert res.mapping == ref.mapping
    _check_mapping(w, res)


@settings(max_examples=200)
@given(matrices(), st.randoms(use_true_random=False))
def test_value_invariant_under_permutation(w, rnd):
    rows = list(range(w.shape[0]))
    cols = list(range(w.shape[1]))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    assert assignment_value(w[np.ix_(rows, cols)]) == assignment_value(w)


@settings(max_examples=200)
@given(matrices(max_rows=6, max_cols=6), st.data())
def test_value_monotone_in_entries(w, data):
    if w.size == 0:
        return
    i = data.draw(st.integers(0, w.shape[0] - 1))
    j = data.draw(st.integers(0, w.shape[1] - 1))
    bumped = w.copy()
    bumped[i, j] += data.draw(st.integers(1, 10))
    assert assignment_value(bumped) >= assignment_value(w)


def test_large_instance_against_scipy_and_timing():
    # scipy is used here only as an independent cross-check
    from scipy.optimize import linear_sum_assignment

    rng = np.random.default_rng(0)
    w = rng.integers(0, 1000, size=(64, 64))
    assignment_value(w)  # compile outside the timed region
    t0 = time.perf_counter()
    val = assignment_value(w)
    elapsed = time.perf_counter() - t0
    r, c = linear_sum_assignment(w, maximize=True)
    assert val == int(w[r, c].sum())
    assert elapsed < 0.01


def test_lap_level_batches_submatrices():
    prev = np.arange(12, dtype=np.int64).reshape(3, 4)
    # row groups {0,1}, {2}; column groups {0,3}, {}, {1,2}
    ptr1, idx1 = np.array([0, 2, 3]), np.array([0, 1, 2])
    ptr2, idx2 = np.array([0, 2, 2, 4]), np.array([0, 3, 1, 2])
    out = lap_level(prev, ptr1, idx1, ptr2, idx2)
    for a in range(2):
        rows = idx1[ptr1[a]:ptr1[a + 1]]
        for b in range(3):
            cols = idx2[ptr2[b]:ptr2[b + 1]]
            assert out[a, b] == brute_force_assignment(prev[np.ix_(rows, cols)]).value
