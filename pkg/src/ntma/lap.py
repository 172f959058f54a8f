"""Maximum-sum injective assignment on small nonnegative integer matrices.

The solver core is a Hungarian (Kuhn-Munkres) algorithm with dual
potentials, compiled with numba.  :func:`lap_level` applies it to a whole
batch of submatrices at once; it is the inner loop of every matching-weight
recursion in the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numba
import numpy as np

# skip numba's probe of the (too old) system TBB
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

BRUTE_FORCE_LIMIT = 8

_INF = np.int64(1) << np.int64(60)


@dataclass(frozen=True)
class AssignmentResult:
    mapping: tuple[tuple[int, int], ...]
    value: int


@numba.njit(cache=True)
def _hungarian(cost, n, m, row_to_col):
    """Minimum-cost assignment of all ``n`` rows of ``cost[:n, :m]`` (``n <= m``)."""
    u = np.zeros(n + 1, np.int64)
    v = np.zeros(m + 1, np.int64)
    p = np.zeros(m + 1, np.int64)
    way = np.zeros(m + 1, np.int64)
    minv = np.empty(m + 1, np.int64)
    used = np.empty(m + 1, np.bool_)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = _INF
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = _INF
            j1 = 0
            for j in range(1, m + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    for j in range(1, m + 1):
        if p[j] != 0:
            row_to_col[p[j] - 1] = j - 1


@numba.njit(cache=True)
def _max_value(w, k, l, scratch, assign):
    """Optimal value over full-size injections for ``w[:k, :l]``.

    ``scratch`` must be at least ``max(k,l) x max(k,l)`` and ``assign`` at
    least ``min(k,l)`` long.
    """
    if k == 0 or l == 0:
        return 0
    if k == 1:
        best = w[0, 0]
        for j in range(1, l):
            if w[0, j] > best:
                best = w[0, j]
        return best
    if l == 1:
        best = w[0, 0]
        for i in range(1, k):
            if w[i, 0] > best:
                best = w[i, 0]
        return best
    if k == 2 and l == 2:
        a = w[0, 0] + w[1, 1]
        b = w[0, 1] + w[1, 0]
        return a if a > b else b
    # cost = max_entry - w, laid out with rows <= cols
    top = w[0, 0]
    for i in range(k):
        for j in range(l):
            if w[i, j] > top:
                top = w[i, j]
    if k <= l:
        for i in range(k):
            for j in range(l):
                scratch[i, j] = top - w[i, j]
        _hungarian(scratch, k, l, assign)
        total = 0
        for i in range(k):
            total += w[i, assign[i]]
        return total
    for j in range(l):
        for i in range(k):
            scratch[j, i] = top - w[i, j]
    _hungarian(scratch, l, k, assign)
    total = 0
    for j in range(l):
        total += w[assign[j], j]
    return total


@numba.njit(cache=True)
def _matrix_value(w):
    k, l = w.shape
    s = max(k, l)
    return _max_value(w, k, l, np.empty((s, s), np.int64), np.empty(s, np.int64))


@numba.njit(parallel=True, cache=True)
def lap_level(prev, ptr1, idx1, ptr2, idx2):
    """One level of a matching-weight recursion.

    ``out[a, b]`` is the optimal assignment value of the submatrix
    ``prev[idx1[ptr1[a]:ptr1[a+1]]][:, idx2[ptr2[b]:ptr2[b+1]]]``; rows of
    the output are independent and computed in parallel.
    """
    n1 = ptr1.size - 1
    n2 = ptr2.size - 1
    out = np.zeros((n1, n2), np.int64)
    deg2 = 0
    for b in range(n2):
        if ptr2[b + 1] - ptr2[b] > deg2:
            deg2 = ptr2[b + 1] - ptr2[b]
    for a in numba.prange(n1):
        lo1 = ptr1[a]
        k = ptr1[a + 1] - lo1
        if k == 0:
            continue
        s = max(k, deg2)
        sub = np.empty((k, max(deg2, 1)), np.int64)
        scratch = np.empty((s, s), np.int64)
        assign = np.empty(s, np.int64)
        for b in range(n2):
            lo2 = ptr2[b]
            l = ptr2[b + 1] - lo2
            if l == 0:
                continue
            for i in range(k):
                r = idx1[lo1 + i]
                for j in range(l):
                    sub[i, j] = prev[r, idx2[lo2 + j]]
            out[a, b] = _max_value(sub, k, l, scratch, assign)
    return out


def _as_matrix(w) -> np.ndarray:
    arr = np.asarray(w)
    if arr.size == 0:
        arr = arr.reshape(arr.shape if arr.ndim == 2 else (0, 0))
    if arr.ndim != 2:
        raise ValueError("weight matrix must be two-dimensional")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("weights must be integers")
    arr = arr.astype(np.int64)
    if (arr < 0).any():
        raise ValueError("weights must be nonnegative")
    return arr


def assignment_value(w) -> int:
    """Optimal value of a maximum-sum full-size injection (no mapping, no checks beyond shape)."""
    arr = np.ascontiguousarray(w, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        return 0
    return int(_matrix_value(arr))


def solve_max_assignment(w) -> AssignmentResult:
    """Maximum-sum injective assignment of a ``k x l`` nonnegative integer matrix.

    The returned mapping has ``min(k, l)`` pairs sorted by row.  Among all
    optimal mappings the lexicographically smallest pair list is returned:
    rows are fixed in increasing order, each to the smallest column (or,
    when rows outnumber columns, left unassigned last) that keeps the
    optimum reachable.
    """
    arr = _as_matrix(w)
    k, l = arr.shape
    if k == 0 or l == 0:
        return AssignmentResult((), 0)
    best = int(_matrix_value(arr))
    rows = list(range(k))
    cols = list(range(l))
    mapping: list[tuple[int, int]] = []
    gained = 0
    need = min(k, l)
    for r in range(k):
        if len(mapping) == need:
            break
        rest_rows = [x for x in rows if x > r]
        # if no column works, row r stays unassigned (only when k > l)
        for c in cols:
            rest_cols = [y for y in cols if y != c]
            rest = need - len(mapping) - 1
            if rest > min(len(rest_rows), len(rest_cols)):
                continue
            sub = arr[np.ix_(rest_rows, rest_cols)] if rest else np.zeros((0, 0), np.int64)
            if gained + int(arr[r, c]) + assignment_value(sub) == best:
                mapping.append((r, c))
                gained += int(arr[r, c])
                cols = rest_cols
                break
    return AssignmentResult(tuple(mapping), best)


def brute_force_assignment(w) -> AssignmentResult:
    """Exhaustive search over all full-size injections; same contract as the solver."""
    arr = _as_matrix(w)
    k, l = arr.shape
    if min(k, l) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to min(k, l) <= {BRUTE_FORCE_LIMIT}")
    if k == 0 or l == 0:
        return AssignmentResult((), 0)
    best_val = -1
    best_map: tuple[tuple[int, int], ...] = ()
    if k <= l:
        candidates = (
            tuple(zip(range(k), cols)) for cols in itertools.permutations(range(l), k)
        )
    else:
        candidates = (
            tuple(sorted(zip(rows, range(l)))) for rows in itertools.permutations(range(k), l)
        )
    for mp in candidates:
        val = sum(int(arr[i, j]) for i, j in mp)
        if val > best_val or (val == best_val and mp < best_map):
            best_val, best_map = val, mp
    return AssignmentResult(best_map, best_val)
