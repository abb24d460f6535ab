"""P1 triangle kernels: numba loop with a vectorized numpy fallback.

Both paths emit identical COO triplets for the scalar stiffness and the
region-weighted mass; the active path follows
``dirac_ml._backend.BACKEND``.  The implementations cross-validate in the
test suite and the benchmark script compares their throughput.  (Band
quads are assembled separately in vectorized numpy; the triangle loop is
the hot kernel.)
"""

from __future__ import annotations

import numpy as np

from dirac_ml._backend import USE_NUMBA

__all__ = ["p1_triplets", "p1_triplets_numpy", "p1_triplets_numba"]


def p1_triplets_numpy(xy: np.ndarray, tris: np.ndarray, wmass: np.ndarray):
    """Vectorized triplets (rows, cols, stiffness, weighted mass)."""
    v0 = xy[tris[:, 0]]
    v1 = xy[tris[:, 1]]
    v2 = xy[tris[:, 2]]
    b = np.stack(
        [v1[:, 1] - v2[:, 1], v2[:, 1] - v0[:, 1], v0[:, 1] - v1[:, 1]], axis=1
    )
    c = np.stack(
        [v2[:, 0] - v1[:, 0], v0[:, 0] - v2[:, 0], v1[:, 0] - v0[:, 0]], axis=1
    )
    area = 0.5 * (
        (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1])
        - (v2[:, 0] - v0[:, 0]) * (v1[:, 1] - v0[:, 1])
    )
    stiff = (
        b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]
    ) / (4.0 * area)[:, None, None]
    mass_local = np.full((3, 3), 1.0 / 12.0)
    np.fill_diagonal(mass_local, 2.0 / 12.0)
    mass = (wmass * area)[:, None, None] * mass_local[None, :, :]
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    return rows, cols, stiff.ravel(), mass.ravel()


def _p1_triplets_loop(xy, tris, wmass, rows, cols, sv, mv):
    nt = tris.shape[0]
    for t in range(nt):
        i0, i1, i2 = tris[t, 0], tris[t, 1], tris[t, 2]
        x0, y0 = xy[i0, 0], xy[i0, 1]
        x1, y1 = xy[i1, 0], xy[i1, 1]
        x2, y2 = xy[i2, 0], xy[i2, 1]
        b0, b1, b2 = y1 - y2, y2 - y0, y0 - y1
        c0, c1, c2 = x2 - x1, x0 - x2, x1 - x0
        area = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
        inv4a = 1.0 / (4.0 * area)
        wa = wmass[t] * area / 12.0
        bs = (b0, b1, b2)
        cs = (c0, c1, c2)
        ids = (i0, i1, i2)
        base = 9 * t
        n = 0
        for a in range(3):
            for bb in range(3):
                rows[base + n] = ids[a]
                cols[base + n] = ids[bb]
                sv[base + n] = (bs[a] * bs[bb] + cs[a] * cs[bb]) * inv4a
                mv[base + n] = wa * (2.0 if a == bb else 1.0)
                n += 1


if USE_NUMBA:
    import numba

    _p1_triplets_loop_jit = numba.njit(cache=True)(_p1_triplets_loop)

    def p1_triplets_numba(xy, tris, wmass):
        nt = tris.shape[0]
        rows = np.empty(9 * nt, dtype=np.int64)
        cols = np.empty(9 * nt, dtype=np.int64)
        sv = np.empty(9 * nt)
        mv = np.empty(9 * nt)
        _p1_triplets_loop_jit(
            np.ascontiguousarray(xy),
            np.ascontiguousarray(tris.astype(np.int64)),
            np.ascontiguousarray(wmass),
            rows, cols, sv, mv,
        )
        return rows, cols, sv, mv

    p1_triplets = p1_triplets_numba
else:
    def p1_triplets_numba(xy, tris, wmass):  # pragma: no cover
        raise RuntimeError("numba backend not active (DIRAC_ML_BACKEND=numpy)")

    p1_triplets = p1_triplets_numpy
