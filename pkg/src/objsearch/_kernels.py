"""Numeric hot loops: grid shortest paths and subset-DP path solvers.

Kernels are compiled with numba when available. Set ``OBJSEARCH_BACKEND=numpy``
to force the pure-Python/NumPy fallback, ``=numba`` to require numba (import
error if missing). The default (``auto``) uses numba when importable.
"""

import os

import numpy as np

_choice = os.environ.get("OBJSEARCH_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        "OBJSEARCH_BACKEND must be one of auto/numba/numpy, got %r" % _choice
    )

USING_NUMBA = False
if _choice in ("auto", "numba"):
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:
        if _choice == "numba":
            raise


def _jit(fn):
    if USING_NUMBA:
        return njit(cache=True)(fn)
    return fn


_SQRT2 = np.sqrt(2.0)


@_jit
def dijkstra_field(passable, sr, sc):
    """Single-source shortest paths on an 8-connected grid, in cell units.

    ``passable`` is a uint8 grid (1 = traversable). Straight steps cost 1,
    diagonal steps sqrt(2). Unreachable cells hold +inf.
    """
    h, w = passable.shape
    n = h * w
    dist = np.full(n, np.inf)
    done = np.zeros(n, np.uint8)
    # lazy-deletion binary heap; each cell pushed at most 8 times
    cap = 8 * n + 16
    heap_d = np.empty(cap)
    heap_i = np.empty(cap, np.int64)
    start = sr * w + sc
    dist[start] = 0.0
    heap_d[0] = 0.0
    heap_i[0] = start
    size = 1
    while size > 0:
        d0 = heap_d[0]
        u = heap_i[0]
        size -= 1
        heap_d[0] = heap_d[size]
        heap_i[0] = heap_i[size]
        i = 0
        while True:
            left = 2 * i + 1
            right = left + 1
            m = i
            if left < size and heap_d[left] < heap_d[m]:
                m = left
            if right < size and heap_d[right] < heap_d[m]:
                m = right
            if m == i:
                break
            heap_d[i], heap_d[m] = heap_d[m], heap_d[i]
            heap_i[i], heap_i[m] = heap_i[m], heap_i[i]
            i = m
        if done[u] == 1:
            continue
        done[u] = 1
        ur = u // w
        uc = u % w
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                vr = ur + dr
                vc = uc + dc
                if vr < 0 or vr >= h or vc < 0 or vc >= w:
                    continue
                if passable[vr, vc] == 0:
                    continue
                step = _SQRT2 if dr != 0 and dc != 0 else 1.0
                nd = d0 + step
                v = vr * w + vc
                if nd < dist[v]:
                    dist[v] = nd
                    j = size
                    heap_d[j] = nd
                    heap_i[j] = v
                    size += 1
                    while j > 0:
                        p = (j - 1) // 2
                        if heap_d[p] <= heap_d[j]:
                            break
                        heap_d[p], heap_d[j] = heap_d[j], heap_d[p]
                        heap_i[p], heap_i[j] = heap_i[j], heap_i[p]
                        j = p
    return dist.reshape(h, w)


@_jit
def astar_point(passable, sr, sc, tr, tc):
    """A* between two cells with the octile-distance heuristic, in cell units.

    Returns +inf when the target is unreachable.
    """
    h, w = passable.shape
    n = h * w
    g = np.full(n, np.inf)
    done = np.zeros(n, np.uint8)
    cap = 8 * n + 16
    heap_f = np.empty(cap)
    heap_i = np.empty(cap, np.int64)
    start = sr * w + sc
    target = tr * w + tc
    g[start] = 0.0
    dy0 = abs(sr - tr)
    dx0 = abs(sc - tc)
    heap_f[0] = (dy0 + dx0) + (_SQRT2 - 2.0) * min(dy0, dx0)
    heap_i[0] = start
    size = 1
    while size > 0:
        u = heap_i[0]
        size -= 1
        heap_f[0] = heap_f[size]
        heap_i[0] = heap_i[size]
        i = 0
        while True:
            left = 2 * i + 1
            right = left + 1
            m = i
            if left < size and heap_f[left] < heap_f[m]:
                m = left
            if right < size and heap_f[right] < heap_f[m]:
                m = right
            if m == i:
                break
            heap_f[i], heap_f[m] = heap_f[m], heap_f[i]
            heap_i[i], heap_i[m] = heap_i[m], heap_i[i]
            i = m
        if done[u] == 1:
            continue
        if u == target:
            return g[u]
        done[u] = 1
        ur = u // w
        uc = u % w
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                vr = ur + dr
                vc = uc + dc
                if vr < 0 or vr >= h or vc < 0 or vc >= w:
                    continue
                if passable[vr, vc] == 0:
                    continue
                step = _SQRT2 if dr != 0 and dc != 0 else 1.0
                ng = g[u] + step
                v = vr * w + vc
                if ng < g[v]:
                    g[v] = ng
                    dy = abs(vr - tr)
                    dx = abs(vc - tc)
                    hv = (dy + dx) + (_SQRT2 - 2.0) * min(dy, dx)
                    j = size
                    heap_f[j] = ng + hv
                    heap_i[j] = v
                    size += 1
                    while j > 0:
                        p = (j - 1) // 2
                        if heap_f[p] <= heap_f[j]:
                            break
                        heap_f[p], heap_f[j] = heap_f[j], heap_f[p]
                        heap_i[p], heap_i[j] = heap_i[j], heap_i[p]
                        j = p
    return np.inf


def _path_dp_loops(dist, weights, latency_mode):
    # subset DP over (visited set, last node); node j maps to bit j, row/col
    # j+1 of ``dist`` (row/col 0 is the start). Transition cost is
    # d(last, next) * (W_total - W(visited)) in latency mode, plain edge
    # length otherwise.
    k = weights.shape[0]
    nmask = 1 << k
    full = nmask - 1
    wsum = np.empty(nmask)
    wsum[0] = 0.0
    for mask in range(1, nmask):
        low = mask & (-mask)
        b = 0
        m2 = low
        while m2 > 1:
            m2 >>= 1
            b += 1
        wsum[mask] = wsum[mask ^ low] + weights[b]
    wtot = wsum[full]
    dp = np.full((nmask, k), np.inf)
    parent = np.full((nmask, k), -1, np.int64)
    coef0 = wtot if latency_mode else 1.0
    for j in range(k):
        dp[1 << j, j] = dist[0, j + 1] * coef0
    for mask in range(1, full):
        coef = (wtot - wsum[mask]) if latency_mode else 1.0
        for last in range(k):
            if (mask >> last) & 1 == 0:
                continue
            c = dp[mask, last]
            if c == np.inf:
                continue
            for nxt in range(k):
                if (mask >> nxt) & 1 == 1:
                    continue
                nc = c + dist[last + 1, nxt + 1] * coef
                nm = mask | (1 << nxt)
                if nc < dp[nm, nxt]:
                    dp[nm, nxt] = nc
                    parent[nm, nxt] = last
    best = np.inf
    blast = 0
    for last in range(k):
        if dp[full, last] < best:
            best = dp[full, last]
            blast = last
    order = np.empty(k, np.int64)
    mask = full
    last = blast
    for pos in range(k - 1, -1, -1):
        order[pos] = last
        p = parent[mask, last]
        mask ^= 1 << last
        last = p
    return order, best


def _path_dp_numpy(dist, weights, latency_mode):
    # mask-major loop with vectorized (last, next) transitions
    k = weights.shape[0]
    nmask = 1 << k
    full = nmask - 1
    bits = (np.arange(nmask)[:, None] >> np.arange(k)) & 1
    wsum = bits @ weights
    wtot = wsum[full]
    d = dist[1:, 1:]
    dp = np.full((nmask, k), np.inf)
    parent = np.full((nmask, k), -1, np.int64)
    coef0 = wtot if latency_mode else 1.0
    dp[1 << np.arange(k), np.arange(k)] = dist[0, 1:] * coef0
    for mask in range(1, full):
        row = dp[mask]
        if not np.any(np.isfinite(row)):
            continue
        coef = (wtot - wsum[mask]) if latency_mode else 1.0
        cand = row[:, None] + d * coef
        in_mask = bits[mask].astype(bool)
        cand[~in_mask, :] = np.inf
        best_last = np.argmin(cand, axis=0)
        best_cost = cand[best_last, np.arange(k)]
        for nxt in np.nonzero(~in_mask)[0]:
            nm = mask | (1 << nxt)
            if best_cost[nxt] < dp[nm, nxt]:
                dp[nm, nxt] = best_cost[nxt]
                parent[nm, nxt] = best_last[nxt]
    blast = int(np.argmin(dp[full]))
    best = dp[full, blast]
    order = np.empty(k, np.int64)
    mask = full
    last = blast
    for pos in range(k - 1, -1, -1):
        order[pos] = last
        p = int(parent[mask, last])
        mask ^= 1 << last
        last = p
    return order, best


if USING_NUMBA:
    _path_dp_jit = njit(cache=True)(_path_dp_loops)

    def path_dp(dist, weights, latency_mode):
        return _path_dp_jit(
            np.ascontiguousarray(dist, dtype=np.float64),
            np.ascontiguousarray(weights, dtype=np.float64),
            latency_mode,
        )

else:

    def path_dp(dist, weights, latency_mode):
        return _path_dp_numpy(
            np.asarray(dist, dtype=np.float64),
            np.asarray(weights, dtype=np.float64),
            latency_mode,
        )


path_dp.__doc__ = """Exact min-cost open path over all nodes via subset DP.

``dist`` is the (k+1)x(k+1) matrix with index 0 the start node. In latency
mode the objective is the weighted sum of cumulative arrival distances,
otherwise the plain open-tour length. Returns (visit order as 0-based node
indices, objective).
"""
