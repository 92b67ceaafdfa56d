"""Hot numeric kernels: triangle enumeration and 1-D flat-kernel mean shift.

Each kernel has a numba ``@njit`` implementation and a pure-numpy fallback.
The numba path is used when numba imports and ``SIGNED_EGO_NUMBA`` is not
set to ``0``; both are exported under explicit names for benchmarking.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("SIGNED_EGO_NUMBA", "1").lower() not in ("0", "false", "off", "no")


# --- triangle enumeration -------------------------------------------------
#
# Graphs arrive as forward CSR: for node u, indices[indptr[u]:indptr[u+1]]
# are its neighbours v > u in ascending order and edge_ids gives the id of
# edge (u, v).  Each triangle u < v < w is reported once, at u, as the ids
# of edges (u, v), (u, w), (v, w).


def triangle_edges_numpy(indptr: np.ndarray, indices: np.ndarray, edge_ids: np.ndarray) -> np.ndarray:
    chunks = []
    n = len(indptr) - 1
    for u in range(n):
        a0, a1 = indptr[u], indptr[u + 1]
        if a1 - a0 < 2:
            continue
        nu = indices[a0:a1]
        eu = edge_ids[a0:a1]
        for j in range(a1 - a0 - 1):
            v = nu[j]
            b0, b1 = indptr[v], indptr[v + 1]
            if b0 == b1:
                continue
            _, iu, iv = np.intersect1d(nu[j + 1:], indices[b0:b1], assume_unique=True,
                                       return_indices=True)
            if len(iu):
                tri = np.empty((len(iu), 3), dtype=np.int64)
                tri[:, 0] = eu[j]
                tri[:, 1] = eu[j + 1:][iu]
                tri[:, 2] = edge_ids[b0:b1][iv]
                chunks.append(tri)
    if not chunks:
        return np.empty((0, 3), dtype=np.int64)
    return np.concatenate(chunks)


def _triangle_pass(indptr, indices, edge_ids, out, fill):
    n = len(indptr) - 1
    k = 0
    for u in range(n):
        a0 = indptr[u]
        a1 = indptr[u + 1]
        for j in range(a0, a1):
            v = indices[j]
            p = j + 1
            q = indptr[v]
            q1 = indptr[v + 1]
            while p < a1 and q < q1:
                wp = indices[p]
                wq = indices[q]
                if wp < wq:
                    p += 1
                elif wq < wp:
                    q += 1
                else:
                    if fill:
                        out[k, 0] = edge_ids[j]
                        out[k, 1] = edge_ids[p]
                        out[k, 2] = edge_ids[q]
                    k += 1
                    p += 1
                    q += 1
    return k


if HAVE_NUMBA:
    _triangle_pass_jit = numba.njit(cache=True, nogil=True)(_triangle_pass)

    def triangle_edges_numba(indptr: np.ndarray, indices: np.ndarray, edge_ids: np.ndarray) -> np.ndarray:
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        edge_ids = np.ascontiguousarray(edge_ids, dtype=np.int64)
        scratch = np.empty((0, 3), dtype=np.int64)
        count = _triangle_pass_jit(indptr, indices, edge_ids, scratch, False)
        out = np.empty((count, 3), dtype=np.int64)
        _triangle_pass_jit(indptr, indices, edge_ids, out, True)
        return out
else:  # pragma: no cover
    triangle_edges_numba = None


def triangle_edges(indptr, indices, edge_ids) -> np.ndarray:
    if USE_NUMBA:
        return triangle_edges_numba(indptr, indices, edge_ids)
    return triangle_edges_numpy(np.asarray(indptr), np.asarray(indices), np.asarray(edge_ids))


# --- mean shift -------------------------------------------------------------
#
# ``values`` must be sorted ascending.  Every seed climbs to the fixed point
# of x <- mean(values within [x - h, x + h]).


def mean_shift_modes_numpy(values: np.ndarray, seeds: np.ndarray, bandwidth: float,
                           tol: float = 1e-7, max_iter: int = 500) -> np.ndarray:
    x = seeds.astype(np.float64).copy()
    csum = np.concatenate(([0.0], np.cumsum(values)))
    active = np.ones(len(x), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        xa = x[active]
        lo = np.searchsorted(values, xa - bandwidth, side="left")
        hi = np.searchsorted(values, xa + bandwidth, side="right")
        cnt = hi - lo
        new = (csum[hi] - csum[lo]) / cnt
        # a lone point is its own mean; avoid prefix-sum rounding there
        single = cnt == 1
        new[single] = values[lo[single]]
        moved = np.abs(new - xa) >= tol
        x[active] = new
        idx = np.flatnonzero(active)
        active[idx[~moved]] = False
    return x


def _mean_shift_modes(values, csum, seeds, bandwidth, tol, max_iter):
    # same arithmetic per seed as the numpy path, so both backends agree bitwise
    out = np.empty(len(seeds), dtype=np.float64)
    for i in range(len(seeds)):
        x = seeds[i]
        for _ in range(max_iter):
            lo = np.searchsorted(values, x - bandwidth, side="left")
            hi = np.searchsorted(values, x + bandwidth, side="right")
            if hi - lo == 1:
                new = values[lo]
            else:
                new = (csum[hi] - csum[lo]) / (hi - lo)
            done = abs(new - x) < tol
            x = new
            if done:
                break
        out[i] = x
    return out


if HAVE_NUMBA:
    _mean_shift_modes_jit = numba.njit(cache=True, nogil=True)(_mean_shift_modes)

    def mean_shift_modes_numba(values: np.ndarray, seeds: np.ndarray, bandwidth: float,
                               tol: float = 1e-7, max_iter: int = 500) -> np.ndarray:
        values = np.ascontiguousarray(values, dtype=np.float64)
        csum = np.concatenate(([0.0], np.cumsum(values)))
        return _mean_shift_modes_jit(values, csum, np.ascontiguousarray(seeds, dtype=np.float64),
                                     float(bandwidth), float(tol), int(max_iter))
else:  # pragma: no cover
    mean_shift_modes_numba = None


def mean_shift_modes(values, seeds, bandwidth, tol=1e-7, max_iter=500) -> np.ndarray:
    if USE_NUMBA:
        return mean_shift_modes_numba(values, seeds, bandwidth, tol, max_iter)
    return mean_shift_modes_numpy(np.asarray(values, dtype=np.float64),
                                  np.asarray(seeds, dtype=np.float64), bandwidth, tol, max_iter)
