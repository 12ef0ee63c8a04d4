"""Maximum-weight bipartite matching on integer queue matrices.

max_weight_matching runs an O(n^3) shortest-augmenting-path assignment
solver on exact Python integers, then extracts the lexicographically
smallest maximizer from the tight-edge graph of the optimal potentials.
Complementary slackness makes that extraction sound: a permutation is
maximum-weight iff every edge it uses is tight.

brute_force_matching enumerates all n! permutations with the same
tie-break order and exists purely as an independent oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, TooLarge

BRUTE_FORCE_MAX_N = 8


@dataclass
class MatchResult:
    """A full permutation schedule and its exact weight <q, schedule>."""

    schedule: np.ndarray
    weight: int

    @property
    def perm(self) -> tuple[int, ...]:
        """Column served by each row."""
        return tuple(int(j) for j in self.schedule.argmax(axis=1))


def schedule_weight(q, s) -> int:
    """Exact inner product <q, s>."""
    q = np.asarray(q, dtype=np.int64)
    s = np.asarray(s, dtype=np.int64)
    if q.shape != s.shape:
        raise DimensionMismatch(f"queue shape {q.shape} != schedule shape {s.shape}")
    return int((q * s).sum())


def _assignment_duals(cost: list[list[int]]) -> tuple[list[int], list[int]]:
    """Optimal dual potentials (u, v) for the min-cost assignment on `cost`.

    Shortest augmenting path with potentials, all arithmetic on Python
    ints.  At return u[i] + v[j] <= cost[i][j] for all i, j, with equality
    on the edges of some optimal assignment.
    """
    n = len(cost)
    INF = None  # sentinel: larger than everything
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)      # p[j]: row matched to column j (1-based, 0 = free)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv: list = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if minv[j] is None or cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if delta is None or minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    return u[1:], v[1:]


def _has_perfect_matching(adj: list[list[int]], n_rows: int, n_cols: int) -> bool:
    """Kuhn's algorithm on an adjacency list (rows -> candidate columns)."""
    match_col = [-1] * n_cols

    def try_row(i: int, seen: list[bool]) -> bool:
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_col[j] < 0 or try_row(match_col[j], seen):
                    match_col[j] = i
                    return True
        return False

    for i in range(n_rows):
        if not try_row(i, [False] * n_cols):
            return False
    return True


def _lex_smallest_perfect_matching(tight: np.ndarray) -> list[int]:
    """Lexicographically smallest perfect matching within a tight-edge graph.

    Fixes rows in order, trying the smallest admissible column whose
    removal still leaves the remaining rows perfectly matchable.
    """
    n = tight.shape[0]
    perm: list[int] = []
    used_cols: set[int] = set()
    for i in range(n):
        rest_rows = list(range(i + 1, n))
        for j in range(n):
            if j in used_cols or not tight[i, j]:
                continue
            remaining_cols = [c for c in range(n) if c not in used_cols and c != j]
            col_index = {c: k for k, c in enumerate(remaining_cols)}
            adj = [[col_index[c] for c in range(n)
                    if tight[r, c] and c in col_index] for r in rest_rows]
            if _has_perfect_matching(adj, len(rest_rows), len(remaining_cols)):
                perm.append(j)
                used_cols.add(j)
                break
        else:  # no admissible column: tight graph lost feasibility (cannot happen)
            raise AssertionError("tight-edge graph has no perfect matching")
    return perm


def max_weight_value(q) -> int:
    """The maximum matching weight alone, without extracting a schedule.

    The optimal dual potentials already carry the value (the assignment
    is perfect and every matched edge is tight), which makes this several
    times cheaper than max_weight_matching for larger n.
    """
    q = np.asarray(q, dtype=np.int64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise DimensionMismatch(f"queue matrix must be square, got shape {q.shape}")
    n = q.shape[0]
    cost = [[-int(q[i, j]) for j in range(n)] for i in range(n)]
    u, v = _assignment_duals(cost)
    return -(sum(u) + sum(v))


def max_weight_matching(q) -> MatchResult:
    """Permutation schedule maximizing <q, s>, ties broken lexicographically.

    Exact for any integer matrix (weights never pass through floats).
    Among all maximizers, the returned permutation reads smallest as the
    sequence (column of row 0, column of row 1, ...).
    """
    q = np.asarray(q, dtype=np.int64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise DimensionMismatch(f"queue matrix must be square, got shape {q.shape}")
    n = q.shape[0]
    cost = [[-int(q[i, j]) for j in range(n)] for i in range(n)]
    u, v = _assignment_duals(cost)
    tight = np.array([[cost[i][j] == u[i] + v[j] for j in range(n)] for i in range(n)])
    perm = _lex_smallest_perfect_matching(tight)
    schedule = np.zeros((n, n), dtype=np.int64)
    schedule[np.arange(n), perm] = 1
    weight = sum(int(q[i, perm[i]]) for i in range(n))
    return MatchResult(schedule=schedule, weight=weight)


def brute_force_matching(q) -> MatchResult:
    """Exhaustive maximum over all n! permutations; oracle for the solver.

    Guarded at n <= 8.  Permutations are visited in lexicographic order
    and only strict improvements replace the incumbent, which reproduces
    max_weight_matching's tie-break exactly.
    """
    q = np.asarray(q, dtype=np.int64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise DimensionMismatch(f"queue matrix must be square, got shape {q.shape}")
    n = q.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        raise TooLarge(f"brute force enumerates n! permutations; n = {n} > {BRUTE_FORCE_MAX_N}")
    best_perm = None
    best_weight = None
    rows = range(n)
    for perm in itertools.permutations(range(n)):
        w = sum(int(q[i, perm[i]]) for i in rows)
        if best_weight is None or w > best_weight:
            best_weight = w
            best_perm = perm
    schedule = np.zeros((n, n), dtype=np.int64)
    schedule[np.arange(n), best_perm] = 1
    return MatchResult(schedule=schedule, weight=int(best_weight))


@lru_cache(maxsize=8)
def permutation_table(n: int) -> tuple[np.ndarray, tuple[tuple[int, ...], ...]]:
    """All n x n permutation matrices, flattened, in lexicographic order.

    Returns (table, perms) with table of shape (n!, n*n) int64.  Taking
    the first argmax of table @ q.ravel() reproduces the lexicographic
    tie-break of max_weight_matching; the simulator's hot loop relies on
    that.  Guarded at n <= 8 to bound the factorial blow-up.
    """
    if n > BRUTE_FORCE_MAX_N:
        raise TooLarge(f"permutation table would hold {n}! rows; n = {n} > {BRUTE_FORCE_MAX_N}")
    perms = tuple(itertools.permutations(range(n)))
    table = np.zeros((len(perms), n * n), dtype=np.int64)
    for k, perm in enumerate(perms):
        for i, j in enumerate(perm):
            table[k, i * n + j] = 1
    return table, perms
