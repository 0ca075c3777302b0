# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: ancestor weight propagation, selection scoring and
weighted parent draws."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

DEF LEVEL_CUTOFF = 30
DEF MAX_LEVEL = 64

cdef double[MAX_LEVEL] _LEVEL_TERM

_LEVEL_TERM[0] = 0.0
for _l in range(1, MAX_LEVEL):
    _LEVEL_TERM[_l] = 100.0 / 5.0 ** _l


def propagate(cnp.int64_t[::1] parent1, cnp.int64_t[::1] parent2,
              cnp.int64_t[::1] height, cnp.float64_t[::1] cum_weight,
              Py_ssize_t tip, cnp.float64_t[::1] table):
    """Credit every ancestor of `tip` within the level cutoff, once each."""
    cdef Py_ssize_t n = height.shape[0]
    visited_arr = np.zeros(n, dtype=np.uint8)
    stack_arr = np.empty(n, dtype=np.int64)
    cdef cnp.uint8_t[::1] visited = visited_arr
    cdef cnp.int64_t[::1] stack = stack_arr
    cdef Py_ssize_t top = 0
    cdef cnp.int64_t cur, par, diff
    cdef cnp.int64_t h_tip = height[tip]

    visited[tip] = 1
    stack[top] = tip
    top += 1
    while top > 0:
        top -= 1
        cur = stack[top]
        par = parent1[cur]
        if par >= 0 and visited[par] == 0:
            visited[par] = 1
            diff = h_tip - height[par]
            if diff < LEVEL_CUTOFF:
                cum_weight[par] += table[diff]
                stack[top] = par
                top += 1
        par = parent2[cur]
        if par >= 0 and visited[par] == 0:
            visited[par] = 1
            diff = h_tip - height[par]
            if diff < LEVEL_CUTOFF:
                cum_weight[par] += table[diff]
                stack[top] = par
                top += 1


def selection_scores(cnp.int64_t[::1] candidates, cnp.float64_t[::1] cum_weight,
                     cnp.int64_t[::1] height, cnp.float64_t[::1] age_factor,
                     cnp.int64_t max_height, double now_factor):
    """Tip-selection probability weight for each candidate parent:
    3*|15 - W| + 100/5**L - 1.5**(age/60), clamped at zero.

    The age term arrives factored as now_factor * age_factor[c] (both
    exponentials of AGE_RATE) so the inner loop stays multiplicative.
    """
    cdef Py_ssize_t m = candidates.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef Py_ssize_t i
    cdef cnp.int64_t c, level
    cdef double p
    for i in range(m):
        c = candidates[i]
        level = max_height - height[c] + 1
        if level >= MAX_LEVEL:
            level = MAX_LEVEL - 1
        p = 3.0 * fabs(15.0 - cum_weight[c]) + _LEVEL_TERM[level] \
            - now_factor * age_factor[c]
        # NaN (overflowed age term times underflowed factor) clamps to 0 here too
        out[i] = p if p > 0.0 else 0.0
    return out_arr


def pick_weighted(cnp.float64_t[::1] scores, double u):
    """First index whose running score sum exceeds u * total (u in [0, 1))."""
    cdef Py_ssize_t m = scores.shape[0]
    cdef double total = 0.0
    cdef double acc = 0.0
    cdef double target
    cdef Py_ssize_t i
    for i in range(m):
        total += scores[i]
    target = u * total
    for i in range(m):
        acc += scores[i]
        if acc > target:
            return i
    return m - 1
