"""Build a symmetric near-ideal Fourier trefoil for offline runs.

The published k3_1 data set is not bundled. This script tightens a trefoil
within the D3-symmetric Fourier family

    x + iy = sum_{j = 2 mod 3} c_j exp(2 pi i j t),   c_j real
    z      = sum_k d_k sin(6 pi k t)

(120-degree rotation about z with a 1/3 parameter shift, 180-degree
rotation about x with parameter reversal) by minimising length subject to
point-tangent radius >= 1 on a parameter grid, then rescales to unit
length and writes ``src/knotcycle/data/trefoil_d3.fourier``.

Usage: python tools/reconstruct_trefoil.py [--harmonics 40] [--grid 720]
"""

import argparse
import sys
import time

import numpy as np
from scipy import optimize

sys.path.insert(0, 'src')

from knotcycle.curve import FourierCurve  # noqa: E402
from knotcycle.io import write_fourier  # noqa: E402


def basis(M):
    js = [j for j in range(-M, M + 1) if j % 3 == 2]
    ks = list(range(1, M // 3 + 1))
    return np.array(js), np.array(ks)


class Family:
    def __init__(self, M, grid):
        self.js, self.ks = basis(M)
        self.nv = len(self.js) + len(self.ks)
        self.grid = grid
        self.t = np.arange(grid) / grid

    def phi(self, t, order=0):
        """Basis values (len(t), nv, 3) of the order-th derivative."""
        t = np.atleast_1d(t)
        out = np.zeros((len(t), self.nv, 3))
        w = 2 * np.pi * self.js
        ph = np.outer(t, w) + order * np.pi / 2
        out[:, :len(self.js), 0] = np.cos(ph) * w ** order
        out[:, :len(self.js), 1] = np.sin(ph) * w ** order
        wz = 6 * np.pi * self.ks
        phz = np.outer(t, wz) + order * np.pi / 2
        out[:, len(self.js):, 2] = np.sin(phz) * wz ** order
        return out

    def curve(self, x):
        m = max(np.max(np.abs(self.js)), 3 * np.max(self.ks))
        a = np.zeros((m, 3))
        b = np.zeros((m, 3))
        for c, j in zip(x[:len(self.js)], self.js):
            a[abs(j) - 1, 0] += c
            b[abs(j) - 1, 1] += np.sign(j) * c
        for d, k in zip(x[len(self.js):], self.ks):
            b[3 * k - 1, 2] += d
        return FourierCurve(np.zeros(3), a, b)

    def freqs(self):
        return np.concatenate([np.abs(self.js), 3 * self.ks])

    def embed(self, saved):
        """Coefficients from a saved (npz) run of a possibly smaller family."""
        x = np.zeros(self.nv)
        for c, j in zip(saved['x'][:len(saved['js'])], saved['js']):
            if j in self.js:
                x[list(self.js).index(j)] = c
        for d, k in zip(saved['x'][len(saved['js']):], saved['ks']):
            if k in self.ks:
                x[len(self.js) + list(self.ks).index(k)] = d
        return x

    def start(self):
        x = np.zeros(self.nv)
        jl = list(self.js)
        x[jl.index(2)] = 2.0
        x[jl.index(-1)] = 0.5
        x[jl.index(5)] = 0.5
        x[len(self.js)] = 1.0
        return x / 0.82


def prepare(fam, quad=4096):
    tq = np.arange(quad) / quad
    P = fam.phi(fam.t, 0)
    V = fam.phi(fam.t, 1)
    A = fam.phi(tq, 2)            # curvature is checked on the finer quadrature grid
    Vq = fam.phi(tq, 1)
    return P, V, A, Vq


def length(x, Vq):
    v = np.einsum('tmk,m->tk', Vq, x)
    sp = np.linalg.norm(v, axis=1)
    L = sp.mean()
    g = np.einsum('tk,tmk->m', v / sp[:, None], Vq) / len(sp)
    return L, g


def pair_radii(fam, x, P, V, band):
    """Point-tangent radii r(s_i, t_j) for s_i in the fundamental domain
    [0, 1/6] of the symmetry group and all grid t_j outside the band."""
    n = fam.grid
    p = np.einsum('tmk,m->tk', P, x)
    v = np.einsum('tmk,m->tk', V, x)
    sp = np.linalg.norm(v, axis=1)
    si = np.arange(0, n // 6 + 1)
    c = p[si, None, :] - p[None, :, :]
    cc = np.einsum('ijk,ijk->ij', c, c)
    cr = np.linalg.norm(np.cross(c, v[None, :, :]), axis=2)
    with np.errstate(divide='ignore', invalid='ignore'):
        r = cc * sp[None, :] / (2 * cr)
    d = np.abs(si[:, None] - np.arange(n)[None, :])
    d = np.minimum(d, n - d)
    r[d < band] = np.inf
    return si, r


def select_pairs(fam, x, P, V, band, margin):
    si, r = pair_radii(fam, x, P, V, band)
    ii, jj = np.nonzero(r < r.min() * (1 + margin))
    return np.stack([si[ii], jj], axis=1)


def radius_constraints(x, pairs, P, V):
    i, j = pairs[:, 0], pairs[:, 1]
    ps = np.einsum('tmk,m->tk', P[i], x)
    pt = np.einsum('tmk,m->tk', P[j], x)
    v = np.einsum('tmk,m->tk', V[j], x)
    c = ps - pt
    cc = np.einsum('ij,ij->i', c, c)
    X = np.cross(c, v)
    xx = np.linalg.norm(X, axis=1)
    vv = np.linalg.norm(v, axis=1)
    r = cc * vv / (2 * xx)
    dc = P[i] - P[j]                        # (q, m, 3)
    dv = V[j]
    dX = np.cross(dc, v[:, None, :]) + np.cross(c[:, None, :], dv)
    g = r[:, None] * (2 * np.einsum('qk,qmk->qm', c, dc) / cc[:, None]
                      + np.einsum('qk,qmk->qm', v, dv) / vv[:, None] ** 2
                      - np.einsum('qk,qmk->qm', X, dX) / xx[:, None] ** 2)
    return r - 1.0, g


def curvature_constraints(x, V, A):
    v = np.einsum('tmk,m->tk', V, x)
    a = np.einsum('tmk,m->tk', A, x)
    X = np.cross(v, a)
    xx = np.linalg.norm(X, axis=1)
    vv = np.linalg.norm(v, axis=1)
    k = xx / vv ** 3
    dX = np.cross(V, a[:, None, :]) + np.cross(v[:, None, :], A)
    g = k[:, None] * (np.einsum('tk,tmk->tm', X, dX) / xx[:, None] ** 2
                      - 3 * np.einsum('tk,tmk->tm', v, V) / vv[:, None] ** 2)
    return 1.0 - k, -g


def merit(fam, x, P, V, A, Vq, band):
    """Ropelength of the grid-sampled curve and its thickness estimate."""
    L = length(x, Vq)[0]
    r = pair_radii(fam, x, P, V, band)[1].min()
    k = 1 - curvature_constraints(x, Vq, A)[0].min()
    rmin = min(r, 1.0 / k)
    return L / rmin, rmin


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument('--harmonics', type=int, default=40)
    ap.add_argument('--grid', type=int, default=720)
    ap.add_argument('--outer', type=int, default=200)
    ap.add_argument('--margin', type=float, default=0.02)
    ap.add_argument('--init', default=None, help='start from a saved run (.npz)')
    ap.add_argument('--out', default='src/knotcycle/data/trefoil_d3.fourier')
    args = ap.parse_args(argv)

    fam = Family(args.harmonics, args.grid)
    P, V, A, Vq = prepare(fam)
    x = fam.start()
    if args.init:
        x = fam.embed(np.load(args.init))
    band = max(2, args.grid // 60)
    rope, rmin = merit(fam, x, P, V, A, Vq, band)
    x = x / rmin
    delta = 0.05
    w = 2.0 / np.maximum(2, fam.freqs())
    t0 = time.time()
    for it in range(args.outer):
        pairs = select_pairs(fam, x, P, V, band, args.margin)
        rc, rg = radius_constraints(x, pairs, P, V)
        kc, kg = curvature_constraints(x, Vq, A)
        act = kc < args.margin
        L, gL = length(x, Vq)
        # linearised: rc + rg dx >= 0, kc + kg dx >= 0
        G = np.vstack([-rg, -kg[act]])
        h = np.concatenate([rc, kc[act]])
        res = optimize.linprog(gL, A_ub=G, b_ub=h, bounds=list(zip(-delta * w, delta * w)),
                               method='highs')
        if res.status != 0:
            delta *= 0.5
            continue
        y = x + res.x
        r2, m2 = merit(fam, y, P, V, A, Vq, band)
        if r2 < rope:
            x = y / m2
            rope = r2
            delta = min(delta * 1.5, 0.5)
        else:
            delta *= 0.5
        print(f'{it:3d} rope={rope:.6f} pairs={len(pairs)} delta={delta:.2e} '
              f'({time.time() - t0:.0f}s)', flush=True)
        if delta < 1e-9:
            break
    np.savez(args.out + '.npz', x=x, js=fam.js, ks=fam.ks)
    fc = fam.curve(x)
    fc = fc.transformed(scale=1.0 / fc.arclength)
    write_fourier(args.out, fc, name='trefoil-d3-reconstruction')
    print('wrote', args.out)


if __name__ == '__main__':
    main()
