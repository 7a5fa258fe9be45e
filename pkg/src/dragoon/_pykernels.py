"""Pure numpy implementations of the hot loops.

Used when the compiled ``_ckernels`` extension is not built, or when
``DRAGOON_PURE_PYTHON=1`` is set. Results match the extension to
floating-point rounding.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def gc_distances(lat, lon, lats, lons, radius):
    p0 = np.radians(lat)
    l0 = np.radians(lon)
    p = np.radians(lats)
    lam = np.radians(lons)
    a = np.sin(0.5 * (p - p0)) ** 2 + np.cos(p0) * np.cos(p) * np.sin(0.5 * (lam - l0)) ** 2
    return radius * 2.0 * np.arcsin(np.sqrt(np.minimum(a, 1.0)))


def gc_mean_distance(lat, lon, lats, lons, radius):
    if len(lats) == 0:
        return 0.0
    return float(gc_distances(lat, lon, lats, lons, radius).mean())


def assign_nearest(hops, landmarks):
    if len(landmarks) == 0:
        n = hops.shape[0]
        return np.full(n, -1, dtype=np.int64), np.full(n, np.inf)
    sub = hops[:, landmarks]
    # argmin returns the first minimum, i.e. the earliest placed landmark
    owner = np.argmin(sub, axis=1).astype(np.int64)
    return owner, sub[np.arange(hops.shape[0]), owner]


def kcenter_cost(hops, landmarks):
    if len(landmarks) == 0:
        return np.inf, np.inf
    best = hops[:, landmarks].min(axis=1)
    return float(best.max()), float(best.sum())


def bfs_hops(indptr, indices, n):
    out = np.full((n, n), np.inf)
    for s in range(n):
        row = out[s]
        row[s] = 0.0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in indices[indptr[u]:indptr[u + 1]]:
                if row[w] == np.inf:
                    row[w] = row[u] + 1.0
                    queue.append(w)
    return out
