"""Pure-Python/numpy implementations of the hot kernels.

Used when the compiled ``_core`` extension is unavailable or when
``SPADIMO_PURE_PYTHON=1``. Contracts match ``_core.pyx`` exactly.
"""

import numpy as np

MAX_SWEEPS = 100


def _round_robin(m):
    """Pairings for one cyclic sweep of even m: m - 1 rounds of m / 2 disjoint pairs."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        half = m // 2
        top, bot = players[:half], players[half:][::-1]
        rounds.append((np.array(top), np.array(bot)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, tol=1e-12):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Each round rotates a full set of disjoint index pairs at once
    (round-robin ordering), so one sweep costs m - 1 vectorized updates.
    Returns unsorted ``(eigenvalues, eigenvectors, sweeps)``.
    """
    A = np.array(a, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V, 0
    norm = np.sqrt(np.sum(A * A))
    if norm == 0.0:
        return np.zeros(n), V, 0
    threshold = tol * norm
    offmask = ~np.eye(n, dtype=bool)
    m = n + (n % 2)
    rounds = _round_robin(m)
    sweeps = 0
    for sweeps in range(MAX_SWEEPS + 1):
        off = np.sqrt(np.sum(A * A * offmask))
        if off <= threshold or sweeps == MAX_SWEEPS:
            break
        for top, bot in rounds:
            keep = (top < n) & (bot < n)
            p, q = top[keep], bot[keep]
            apq = A[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = A[p, p], A[q, q]
            theta = (aqq - app) / (2.0 * apq)
            with np.errstate(over="ignore"):
                # theta**2 overflowing to inf gives t = 0, the correct limit
                t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            colp, colq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = colp * c - colq * s
            A[:, q] = colp * s + colq * c
            rowp, rowq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * rowp - s[:, None] * rowq
            A[q, :] = s[:, None] * rowp + c[:, None] * rowq
            A[p, q] = 0.0
            A[q, p] = 0.0

            vp, vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = vp * c - vq * s
            V[:, q] = vp * s + vq * c
    return A.diagonal().copy(), V, sweeps


def _weighted_high_median(values, weights):
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    idx = np.searchsorted(cum, cum[-1] / 2.0, side="right")
    return values[order[min(idx, len(order) - 1)]]


def _count_below(y, rows, trial, strict):
    """For each row i count j > i with y[j] - y[i] < trial (or <= when not strict)."""
    n = len(y)
    lo = rows + 1
    hi = np.full_like(rows, n)
    while True:
        open_ = lo < hi
        if not open_.any():
            break
        mid = (lo + hi) // 2
        idx = np.where(open_, mid, 0)
        d = y[idx] - y[rows]
        ok = (d < trial) if strict else (d <= trial)
        ok &= open_
        lo = np.where(ok, mid + 1, lo)
        hi = np.where(open_ & ~ok, mid, hi)
    return lo - (rows + 1)


def qn_order_statistic(y, k):
    """k-th smallest (1-based) of y[j] - y[i], j > i, for ascending sorted y.

    Matrix selection over rows of the sorted-difference table: each pass
    prunes the candidate ranges against a weighted median of row medians.
    Every comparison recomputes the same differences, so the result equals
    brute-force enumeration bit for bit.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    rows = np.arange(n - 1)
    left = rows + 1
    right = np.full(n - 1, n - 1)
    while True:
        width = right - left + 1
        live = width > 0
        remaining = int(width[live].sum())
        if remaining <= n:
            break
        r = rows[live]
        mid = (left[live] + right[live]) // 2
        trial = _weighted_high_median(y[mid] - y[r], width[live].astype(float))
        below = _count_below(y, rows, trial, strict=True)
        upto = _count_below(y, rows, trial, strict=False)
        if k <= below.sum():
            right = np.minimum(right, rows + below)
        elif k > upto.sum():
            left = np.maximum(left, rows + upto + 1)
        else:
            return float(trial)
    skipped = int((left - rows - 1).sum())
    cand = [y[left[i]:right[i] + 1] - y[i] for i in range(n - 1) if left[i] <= right[i]]
    cand = np.sort(np.concatenate(cand)) if cand else np.empty(0)
    return float(cand[k - skipped - 1])
