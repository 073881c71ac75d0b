"""Pure numpy implementations of the hot loops.

These are the reference versions; ``_kernels.pyx`` mirrors them loop for
loop. Both must agree to rounding.
"""

import numpy as np

SIN_COLLINEAR = 1e-14


def circumradii(x, y, z):
    """Vectorised circumradius of the point triples ``(x, y, z)``.

    Arrays broadcast against each other along leading axes; the last axis
    holds the three coordinates.
    """
    x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float),
                                  np.asarray(z, float))
    u = x - y
    v = y - z
    w = x - z
    lu = np.sqrt(np.einsum('...i,...i->...', u, u))
    lv = np.sqrt(np.einsum('...i,...i->...', v, v))
    lw = np.sqrt(np.einsum('...i,...i->...', w, w))
    cr = np.linalg.norm(np.cross(u, v), axis=-1)

    distinct = (lu > 0) & (lv > 0) & (lw > 0)
    with np.errstate(divide='ignore', invalid='ignore'):
        sin = cr / (lu * lv)
        r = lw / (2.0 * sin)
    out = np.where(sin < SIN_COLLINEAR, np.inf, r)
    diam = np.maximum(np.maximum(lu, lv), lw)
    return np.where(distinct, out, 0.5 * diam)


def min_triple_radius(points):
    """Minimum circumradius over all index triples ``i < j < k``.

    Returns ``(r, i, j, k)``; ties keep the lexicographically smallest triple.
    """
    p = np.ascontiguousarray(points, dtype=float)
    n = len(p)
    best = (np.inf, -1, -1, -1)
    for i in range(n - 2):
        jj, kk = np.triu_indices(n - i - 1, k=1)
        jj = jj + i + 1
        kk = kk + i + 1
        r = circumradii(p[i], p[jj], p[kk])
        m = int(np.argmin(r))
        if r[m] < best[0]:
            best = (float(r[m]), i, int(jj[m]), int(kk[m]))
    return best


def min_pair_radius(x, points, mask):
    """Minimum of ``R(x, points[i], points[j])`` over ``i < j`` with both
    ``mask[i]`` and ``mask[j]`` set. Returns ``(r, i, j)``."""
    p = np.ascontiguousarray(points, dtype=float)
    idx = np.flatnonzero(np.asarray(mask, bool))
    if len(idx) < 2:
        return (np.inf, -1, -1)
    a, b = np.triu_indices(len(idx), k=1)
    r = circumradii(np.asarray(x, float), p[idx[a]], p[idx[b]])
    m = int(np.argmin(r))
    return (float(r[m]), int(idx[a[m]]), int(idx[b[m]]))


def pointtangent_radii(points, tangents, band):
    """Point-tangent radius ``|c|^2 / (2 |c x T_j|)`` for all ordered pairs
    with cyclic index distance ``>= band``; the rest are ``inf``.

    Returns the ``(n, n)`` matrix with rows indexed by the free point ``i``
    and columns by the tangent point ``j``.
    """
    p = np.asarray(points, float)
    t = np.asarray(tangents, float)
    n = len(p)
    c = p[:, None, :] - p[None, :, :]
    cc = np.einsum('ijk,ijk->ij', c, c)
    cr = np.linalg.norm(np.cross(c, t[None, :, :]), axis=-1)
    with np.errstate(divide='ignore', invalid='ignore'):
        r = cc / (2.0 * cr)
    r[cr == 0] = np.inf
    d = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    d = np.minimum(d, n - d)
    r[d < band] = np.inf
    return r
