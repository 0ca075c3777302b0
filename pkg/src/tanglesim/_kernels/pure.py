"""Numpy implementations of the hot kernels.

Fallback lane used when the compiled extension is unavailable (or when
TANGLESIM_PURE=1).  Both lanes credit each ancestor exactly once per new
tip, so cumulative weights are bit-identical across lanes; selection
scores agree to floating-point rounding.
"""

import math

import numpy as np

LEVEL_CUTOFF = 30  # level differences >= 30 contribute nothing

# 100 / 5**L underflows to irrelevance long before L=64
_MAX_LEVEL = 64
_LEVEL_TERM = np.zeros(_MAX_LEVEL)
_LEVEL_TERM[1:] = [100.0 / 5.0 ** l for l in range(1, _MAX_LEVEL)]
AGE_RATE = math.log(1.5) / 60.0


def propagate(parent1, parent2, height, cum_weight, tip, table):
    """Credit every ancestor of `tip` within the level cutoff, once each.

    `table[L]` is the round-weight contribution at level difference L;
    arrays must be sliced to the current transaction count.
    """
    n = height.shape[0]
    visited = np.zeros(n, dtype=bool)
    visited[tip] = True
    h_tip = height[tip]
    frontier = np.array([tip], dtype=np.int64)
    while frontier.size:
        nxt = np.concatenate((parent1[frontier], parent2[frontier]))
        nxt = nxt[nxt >= 0]
        nxt = np.unique(nxt)
        nxt = nxt[~visited[nxt]]
        if nxt.size == 0:
            break
        visited[nxt] = True
        diff = h_tip - height[nxt]
        in_range = diff < LEVEL_CUTOFF
        credit = nxt[in_range]
        cum_weight[credit] += table[diff[in_range]]
        # ancestors of an out-of-range node are strictly deeper: prune them
        frontier = credit


def selection_scores(candidates, cum_weight, height, age_factor, max_height, now_factor):
    """Tip-selection probability weight for each candidate parent:
    3*|15 - W| + 100/5**L - 1.5**(age/60), clamped at zero.

    The age term arrives factored as now_factor * age_factor[c] (both
    exponentials of AGE_RATE) so the inner loop stays multiplicative.
    """
    w = cum_weight[candidates]
    level = max_height - height[candidates] + 1
    p = 3.0 * np.abs(15.0 - w)
    p += _LEVEL_TERM[np.minimum(level, _MAX_LEVEL - 1)]
    p -= now_factor * age_factor[candidates]
    # where() instead of maximum(): an overflowed age term must clamp, not poison
    return np.where(p > 0.0, p, 0.0)


def pick_weighted(scores, u: float) -> int:
    """First index whose running score sum exceeds u * total (u in [0, 1))."""
    cum = np.cumsum(scores)
    k = int(np.searchsorted(cum, u * cum[-1], side="right"))
    return min(k, scores.shape[0] - 1)
