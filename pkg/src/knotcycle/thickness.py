"""Global radius of curvature, thickness, doubly critical self-distance,
ropelength and the local/global contact classification of curve points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import kernels
from .curve import BiarcCurve, PolyCurve, biarc_interpolate, circle_distance


@dataclass(frozen=True)
class ThicknessReport:
    """Outcome of a thickness computation.

    ``achieving`` lists what realises the minimum: ``('curvature', s)`` for
    the tightest arc, ``('chord', s, t)`` for a doubly critical pair, or
    ``('triple', s, sigma, tau)`` for the brute-force scan.
    """
    delta: float
    method: str
    achieving: list = field(default_factory=list)
    local_radius_min: float = np.inf
    dcsd_half: float = np.inf
    arclength: float = np.nan

    @property
    def branch(self):
        if self.method != 'decomposed':
            return 'triple'
        if np.isclose(self.local_radius_min, self.dcsd_half, rtol=1e-9, atol=0):
            return 'tie'
        return 'curvature' if self.local_radius_min < self.dcsd_half else 'chord'

    @property
    def ropelength(self):
        return ropelength_from(self.arclength, self.delta)


@dataclass(frozen=True)
class CriticalPair:
    distance: float
    s: float
    t: float
    residual: float


@dataclass(frozen=True)
class PointClass:
    """Classification of one parameter.

    ``kind`` is ``'A'``, ``'B'`` or ``'C'``; ``witness`` is the parameter
    of the contact partner for C and the curvature for B.
    """
    kind: str
    rho_g: float
    curvature: float
    witness: float | None = None
    curvature_active: bool = False


def _sample(curve, n):
    t = np.arange(n) / n
    return t, np.atleast_2d(curve.evaluate(t))


def global_radius(curve, s: float, grid: int = 256, refine: int = 8) -> float:
    """Global radius of curvature at ``s`` from a grid of triples.

    Every pair of grid parameters (and ``s``) closer than half a grid step
    on the circle is excluded. The best pair is then rescanned on a grid
    ``refine`` times finer spanning one coarse step on each side.
    """
    if grid < 16:
        raise ValueError('grid must be at least 16')
    x = np.asarray(curve.evaluate(s), float)
    t, pts = _sample(curve, grid)
    h = 1.0 / grid
    mask = circle_distance(t, s) >= 0.5 * h
    r, i, j = kernels.min_pair_radius(x, pts, mask.astype(np.uint8))
    if i < 0 or refine <= 1:
        return float(r)
    m = 2 * refine + 1
    ti = t[i] + h * np.linspace(-1, 1, m)
    tj = t[j] + h * np.linspace(-1, 1, m)
    fine_t = np.concatenate([ti, tj])
    fine_p = np.atleast_2d(curve.evaluate(fine_t))
    ok = circle_distance(fine_t, s) >= 0.5 * h / refine
    rr, a, b = kernels.min_pair_radius(x, fine_p, ok.astype(np.uint8))
    if a >= 0 and circle_distance(fine_t[a], fine_t[b]) < 0.5 * h / refine:
        rr = np.inf
    return float(min(r, rr))


def pointtangent_radius(curve, s: float, grid: int = 1024) -> float:
    """``min_t |c|^2 / (2 |c x T(t)|)`` over a grid of ``t``: the radius of
    the smallest circle through ``gamma(s)`` tangent to the curve at
    ``gamma(t)``. Equals the global radius of curvature in the limit."""
    x = np.asarray(curve.evaluate(s), float)
    t = np.arange(grid) / grid
    p = np.atleast_2d(curve.evaluate(t))
    tan = np.atleast_2d(curve.tangent(t))
    c = x - p
    cc = np.einsum('ij,ij->i', c, c)
    cr = np.linalg.norm(np.cross(c, tan), axis=1)
    with np.errstate(divide='ignore', invalid='ignore'):
        r = np.where(cr > 0, cc / (2 * cr), np.inf)
    r[circle_distance(t, s) < 0.5 / grid] = np.inf
    local = float(curve.curvature(s))
    return float(min(r.min(), np.inf if local == 0 else 1.0 / local))


MAX_BRUTEFORCE = 512


def thickness_bruteforce(curve, n: int = 256) -> ThicknessReport:
    """Minimum circumradius over all triples of ``n`` samples at ``i/n``.

    O(n^3); meant as an oracle for :func:`thickness`.
    """
    if n > MAX_BRUTEFORCE:
        raise ValueError(f'brute force limited to n <= {MAX_BRUTEFORCE}')
    if n < 3:
        raise ValueError('need at least 3 samples')
    t, pts = _sample(curve, n)
    r, i, j, k = kernels.min_triple_radius(pts)
    return ThicknessReport(delta=float(r), method='brute-force',
                           achieving=[('triple', t[i], t[j], t[k])],
                           arclength=float(curve.arclength))


# ---------------------------------------------------------------------------
# doubly critical pairs

def _pair_residual(curve, s, t):
    ps, pt = np.atleast_2d(curve.evaluate([s, t]))
    ts, tt = np.atleast_2d(curve.tangent([s, t]))
    c = pt - ps
    lc = np.linalg.norm(c)
    if lc == 0:
        return np.inf, 0.0
    return max(abs(ts @ c), abs(tt @ c)) / lc, lc


def _newton_pair(curve, s, t, iters=40, tol=1e-13):
    """Solve <g'(s), c> = <g'(t), c> = 0 for c = g(t) - g(s)."""
    best = None
    for _ in range(iters):
        pts = np.atleast_2d(curve.evaluate([s, t]))
        d1 = np.atleast_2d(curve.derivative([s, t], 1))
        d2 = np.atleast_2d(curve.derivative([s, t], 2))
        c = pts[1] - pts[0]
        lc = np.linalg.norm(c)
        if lc == 0:
            break
        F = np.array([d1[0] @ c, d1[1] @ c])
        res = np.max(np.abs(F) / (np.linalg.norm(d1, axis=1) * lc))
        if best is None or res < best[0]:
            best = (res, s, t)
        if res < tol:
            break
        J = np.array([[d2[0] @ c - d1[0] @ d1[0], d1[0] @ d1[1]],
                      [-d1[1] @ d1[0], d2[1] @ c + d1[1] @ d1[1]]])
        step = np.linalg.lstsq(J, -F, rcond=1e-12)[0]
        cap = 0.02
        big = np.max(np.abs(step))
        if big > cap:
            step *= cap / big
        s, t = s + step[0], t + step[1]
    return best


def critical_pairs(curve, grid: int = 1024, band: float = 0.0, max_polish: int = 200):
    """Doubly critical pairs found from sign changes of both orthogonality
    residuals on a ``grid x grid`` parameter lattice, polished by Newton.

    Pairs closer than ``band`` on the circle are ignored. Returns a list of
    :class:`CriticalPair` sorted by distance.
    """
    t = np.arange(grid) / grid
    p = np.atleast_2d(curve.evaluate(t))
    tan = np.atleast_2d(curve.tangent(t))
    c = p[None, :, :] - p[:, None, :]             # c[i, j] = p_j - p_i
    f1 = np.einsum('ik,ijk->ij', tan, c)
    f2 = np.einsum('jk,ijk->ij', tan, c)
    pp = np.linalg.norm(c, axis=2)

    def corners(a):
        b = np.roll(a, -1, axis=0)
        return np.stack([a, np.roll(a, -1, axis=1), b, np.roll(b, -1, axis=1)])

    c1, c2 = corners(f1), corners(f2)
    sign1 = (c1.min(axis=0) <= 0) & (c1.max(axis=0) >= 0)
    sign2 = (c2.min(axis=0) <= 0) & (c2.max(axis=0) >= 0)
    cand = sign1 & sign2
    dist = circle_distance(t[:, None], t[None, :])
    cand &= dist >= band + 1.0 / grid
    # the pair relation is symmetric; keep s < t
    cand &= np.arange(grid)[:, None] < np.arange(grid)[None, :]
    ii, jj = np.nonzero(cand)
    order = np.lexsort((jj, ii, pp[ii, jj]))
    ii, jj = ii[order], jj[order]

    found = []
    lipschitz = 2.0 * curve.arclength / grid
    for k in range(min(len(ii), max_polish)):
        i, j = ii[k], jj[k]
        if found and pp[i, j] - 2 * lipschitz > found[0].distance:
            break
        res, s, tt = _newton_pair(curve, t[i] + 0.5 / grid, t[j] + 0.5 / grid)
        s, tt = s % 1.0, tt % 1.0
        if res > 1e-6 or circle_distance(s, tt) < band:
            continue
        r, lc = _pair_residual(curve, s, tt)
        if s > tt:
            s, tt = tt, s
        found.append(CriticalPair(float(lc), float(s), float(tt), float(r)))
        found.sort(key=lambda q: (q.distance, q.s, q.t))
        # a continuum of equal pairs (circles): more polishing changes nothing
        if sum(q.distance <= found[0].distance * (1 + 1e-12) for q in found) >= 16:
            break
    return found


def dcsd(curve, grid: int = 1024, band: float | None = None):
    """Doubly critical self-distance ``(distance, s, t)`` or ``None``.

    ``band`` (in parameter units) defaults to twice the smallest radius of
    curvature divided by the arclength.
    """
    if band is None:
        band = 2.0 * _local_radius_min(curve)[0] / curve.arclength
    pairs = critical_pairs(curve, grid=grid, band=band)
    if not pairs:
        return None
    q = pairs[0]
    return (q.distance, q.s, q.t)


def _local_radius_min(curve, grid=4096):
    """Smallest radius of curvature and where it occurs."""
    if isinstance(curve, BiarcCurve):
        k = curve.curvatures
        i = int(np.argmax(k))
        return (np.inf if k[i] == 0 else 1.0 / k[i]), curve.segment_params()[i]
    t = np.arange(grid) / grid
    k = np.atleast_1d(curve.curvature(t))
    i = int(np.argmax(k))
    res = optimize.minimize_scalar(lambda x: -float(curve.curvature(x)),
                                   bounds=(t[i] - 1.0 / grid, t[i] + 1.0 / grid),
                                   method='bounded', options={'xatol': 1e-12})
    kmax, tmax = (-res.fun, res.x % 1.0) if -res.fun > k[i] else (k[i], t[i])
    return (np.inf if kmax == 0 else 1.0 / kmax), float(tmax)


def thickness(curve, grid: int = 1024) -> ThicknessReport:
    """Thickness as the smaller of the minimal radius of curvature and half
    the doubly critical self-distance.

    Point-tangent data is biarc-interpolated on its own nodes; biarcs and
    Fourier curves are used as they are. The diagonal band for the pair
    scan is set from the curvature pass and shrunk once if the chord branch
    comes out smaller.
    """
    bc = biarc_interpolate(curve) if isinstance(curve, PolyCurve) else curve
    rloc, sloc = _local_radius_min(bc)
    L = bc.arclength
    band = 2.0 * rloc / L
    pairs = critical_pairs(bc, grid=grid, band=band)
    half = pairs[0].distance / 2 if pairs else np.inf
    if half < rloc:
        pairs2 = critical_pairs(bc, grid=grid, band=2.0 * half / L)
        if pairs2 and pairs2[0].distance / 2 < half:
            pairs = pairs2
            half = pairs[0].distance / 2
    delta = min(rloc, half)
    achieving = []
    if rloc <= half * (1 + 1e-9):
        achieving.append(('curvature', float(sloc)))
    if pairs and half <= rloc * (1 + 1e-9):
        achieving.append(('chord', pairs[0].s, pairs[0].t))
    if not np.isfinite(delta):
        delta = 0.0
    return ThicknessReport(delta=float(delta), method='decomposed', achieving=achieving,
                           local_radius_min=float(rloc), dcsd_half=float(half),
                           arclength=float(L))


def ropelength_from(length, delta):
    if not delta > 0:
        raise ValueError('ropelength undefined for zero thickness')
    return float(length / delta)


def ropelength(curve, report: ThicknessReport | None = None) -> float:
    """Arclength over thickness."""
    if report is None:
        report = thickness(curve)
    return ropelength_from(report.arclength, report.delta)


def classify_point(curve, s: float, report: ThicknessReport, tol: float = 1e-4,
                   grid: int = 512) -> PointClass:
    """Sort ``s`` into case A (``rho_G > Delta``), B (curvature at its bound)
    or C (global contact). A point that is both B and C is returned as C
    with ``curvature_active`` set."""
    delta = report.delta
    rho = min(global_radius(curve, s, grid=grid), pointtangent_radius(curve, s, grid=4 * grid))
    kappa = float(curve.curvature(s))
    if rho > delta * (1 + tol):
        return PointClass('A', rho, kappa)
    active = kappa >= (1 - tol) / delta
    partner = _contact_partner(curve, s, delta, tol, grid=4 * grid)
    if partner is not None:
        return PointClass('C', rho, kappa, witness=partner, curvature_active=bool(active))
    if active:
        return PointClass('B', rho, kappa, witness=kappa, curvature_active=True)
    # at the bound but no partner resolved on the grid
    return PointClass('C', rho, kappa)


def _contact_partner(curve, s, delta, tol, grid):
    """Parameter ``t`` with a chord of length ~2 Delta orthogonal at both ends."""
    t = np.arange(grid) / grid
    p = np.atleast_2d(curve.evaluate(t))
    x = np.asarray(curve.evaluate(s))
    c = p - x
    d = np.linalg.norm(c, axis=1)
    far = circle_distance(t, s) > 2 * delta / curve.arclength
    if not np.any(far):
        return None
    d = np.where(far, d, np.inf)
    # local minima of the distance profile
    lm = (d < np.roll(d, 1)) & (d <= np.roll(d, -1)) & far
    best = None
    for j in np.flatnonzero(lm):
        if abs(d[j] - 2 * delta) > 2 * delta * max(tol, 4.0 / grid):
            continue
        res, lc = _pair_residual(curve, s, t[j])
        if best is None or abs(lc - 2 * delta) < best[0]:
            best = (abs(lc - 2 * delta), float(t[j]))
    return None if best is None else best[1]
