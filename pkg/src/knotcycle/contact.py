"""Point-to-point distance landscape and the contact function.

The contact function is stored through its lift: a strictly increasing
piecewise-linear map on breakpoints ``i/n`` with ``lift(x + 1) = lift(x) + 1``.
Composition, inversion and winding are all done on the lift so no
information is lost to the modulo.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .curve import circle_distance

log = logging.getLogger(__name__)


class ContactError(RuntimeError):
    """Valley tracking failed."""

    def __init__(self, message, index=None):
        super().__init__(message if index is None else f'{message} (step {index})')
        self.index = index


def pp(curve, s, t):
    """``|gamma(s) - gamma(t)|``."""
    d = np.asarray(curve.evaluate(s)) - np.asarray(curve.evaluate(t))
    return np.linalg.norm(d, axis=-1) if np.ndim(d) > 1 else float(np.linalg.norm(d))


def pp_surface(curve, n: int = 256):
    """``(params, matrix)`` with ``matrix[i, j] = pp(i/n, j/n)``."""
    t = np.arange(n) / n
    p = np.atleast_2d(curve.evaluate(t))
    return t, np.linalg.norm(p[:, None, :] - p[None, :, :], axis=2)


def _slope(curve, s, t):
    """Derivative of ``pp(s, .)^2 / 2`` at ``t`` (up to the speed factor)."""
    x = np.asarray(curve.evaluate(s))
    return np.einsum('...i,...i->...', curve.tangent(t), np.asarray(curve.evaluate(t)) - x)


def _polish(curve, s, a, b):
    """Root of the slope in ``[a, b]`` where it goes from negative to positive."""
    f = lambda x: float(_slope(curve, s, x))
    fa, fb = f(a), f(b)
    if fa > 0 or fb < 0:
        res = optimize.minimize_scalar(lambda x: pp(curve, s, x), bounds=(a, b),
                                       method='bounded', options={'xatol': 1e-13})
        return float(res.x)
    if fa == 0:
        return a
    if fb == 0:
        return b
    return optimize.brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def valley_minima(curve, s, grid: int = 4096, band: float = 0.0):
    """Local minima of ``pp(s, .)`` away from ``s``, sorted by distance.

    Returns a list of ``(t, pp)`` with ``t`` in ``[0, 1)``.
    """
    t = s + band + (1 - 2 * band) * np.arange(grid + 1) / grid
    g = _slope(curve, s, t)
    idx = np.flatnonzero((g[:-1] < 0) & (g[1:] >= 0))
    out = []
    for k in idx:
        r = _polish(curve, s, t[k], t[k + 1])
        out.append((r % 1.0, pp(curve, s, r)))
    out.sort(key=lambda q: (q[1], q[0]))
    return out


def _band(curve, report=None):
    if report is not None and report.delta > 0:
        return 2.0 * report.delta / report.arclength
    k = np.max(np.atleast_1d(curve.curvature(np.arange(2048) / 2048)))
    return 2.0 / (k * curve.arclength) if k > 0 else 0.05


def find_seed_contact(curve, grid: int = 512, band: float | None = None):
    """Global minimum of ``pp`` over strict local minima on the torus
    outside the diagonal band, polished to a doubly critical pair.

    Returns ``(s0, sigma0)`` or ``None`` when there is no strict
    off-diagonal local minimum (convex curves, and circles where minima
    are not isolated).
    """
    from .thickness import _newton_pair

    if band is None:
        band = _band(curve)
    t, d = pp_surface(curve, grid)
    strict = np.ones_like(d, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                strict &= d < np.roll(np.roll(d, di, axis=0), dj, axis=1)
    strict &= circle_distance(t[:, None], t[None, :]) > band + 1.0 / grid
    ii, jj = np.nonzero(strict)
    if len(ii) == 0:
        return None
    order = np.lexsort((jj, ii, d[ii, jj]))
    i, j = ii[order[0]], jj[order[0]]
    res, s0, s1 = _newton_pair(curve, t[i], t[j])
    if res > 1e-6:
        s0, s1 = t[i], t[j]
    return (float(s0 % 1.0), float(s1 % 1.0))


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContactFunction:
    """Degree-one circle map given by lift values at ``breaks = i/n``."""
    breaks: np.ndarray
    lift: np.ndarray
    branch: str = 'sigma'
    closure_defect: float = 0.0
    source: str = ''
    jumps: tuple = ()

    def __post_init__(self):
        b = np.asarray(self.breaks, float)
        v = np.asarray(self.lift, float)
        if b.shape != v.shape or b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError('breaks must run from 0 to 1 with one lift value each')
        if np.any(np.diff(v) <= 0):
            raise ValueError('lift must be strictly increasing')
        if abs(v[-1] - v[0] - 1.0) > 1e-12:
            raise ValueError('lift must have degree one')
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, 'breaks', b)
        object.__setattr__(self, 'lift', v)

    @property
    def n(self):
        return len(self.breaks) - 1

    def sigma_lift(self, x):
        x = np.asarray(x, float)
        k = np.floor(x)
        return np.interp(x - k, self.breaks, self.lift) + k

    def tau_lift(self, y):
        y = np.asarray(y, float)
        k = np.floor(y - self.lift[0])
        return np.interp(y - k, self.lift, self.breaks) + k

    def __call__(self, t):
        return np.mod(self.sigma_lift(t), 1.0)

    def inverse(self):
        """The inverse map resampled on the same breakpoints.

        This is an approximation at the breakpoint spacing; use
        :meth:`tau_lift` for the exact inverse.
        """
        other = 'tau' if self.branch == 'sigma' else 'sigma'
        return ContactFunction(self.breaks, self.tau_lift(self.breaks), branch=other,
                               source=self.source)


def sigma_eval(cf: ContactFunction, t):
    """``sigma(t)`` in ``[0, 1)``."""
    return np.mod(cf.sigma_lift(t), 1.0)


def tau_eval(cf: ContactFunction, t):
    """``sigma^-1(t)`` in ``[0, 1)``; the inverse of a piecewise-linear lift
    is again piecewise linear, so it is evaluated exactly."""
    return np.mod(cf.tau_lift(t), 1.0)


def iterate_lift(cf: ContactFunction, t, k: int):
    """``k``-fold composition on the lift (winding kept in the integer part).
    Negative ``k`` iterates the inverse."""
    x = np.asarray(t, float)
    f = cf.sigma_lift if k >= 0 else cf.tau_lift
    for _ in range(abs(k)):
        x = f(x)
    return x


def iterate_sigma(cf: ContactFunction, t, k: int):
    """``sigma^k(t)`` in ``[0, 1)``."""
    if k < 0:
        raise ValueError('k must be non-negative')
    return np.mod(iterate_lift(cf, t, k), 1.0)


def trace_contact(curve, n: int = 1000, window: float = 0.02, branch: str = 'sigma',
                  band: float | None = None, samples: int = 64, start: float | None = None,
                  max_defect: float = 1e-2, max_jump: float | None = None,
                  max_refine: int = 8, rule: str = 'deepest') -> ContactFunction:
    """Follow one valley floor of ``pp`` from ``s = 0`` around the circle.

    At ``s_i = i/n`` the partner ``sigma_i`` is the deepest local minimum
    of ``pp(s_i, .)`` inside the window ``sigma_{i-1} +- window``
    (``rule='nearest'`` takes the one closest to ``sigma_{i-1}`` instead);
    it is refined as a root of the orthogonality residual. Of the two deepest valleys at ``s = 0`` the ``'sigma'`` branch
    takes the one at the smaller parameter, ``'tau'`` the other (or pass
    ``start`` explicitly). A closure defect below ``max_defect`` is spread
    linearly over the breakpoints.

    Where ``sigma`` is steep (a step moves the partner by more than
    ``max_jump``) the step in ``s`` is halved, at most ``max_refine``
    times, and the extra breakpoints are kept. The breakpoints therefore
    always include ``i/n`` but may be finer.
    """
    if n < 64:
        raise ValueError('n must be at least 64')
    if rule not in ('deepest', 'nearest'):
        raise ValueError("rule must be 'deepest' or 'nearest'")
    if max_jump is None:
        max_jump = window / 8
    if not 0 < window < 0.25:
        raise ValueError('window must lie in (0, 0.25)')
    if branch not in ('sigma', 'tau'):
        raise ValueError("branch must be 'sigma' or 'tau'")
    if band is None:
        band = _band(curve)
    if start is None:
        mins = valley_minima(curve, 0.0, band=band)
        if not mins:
            raise ContactError('no off-diagonal valley at s = 0', 0)
        two = sorted(mins[:2], key=lambda q: q[0])
        start = two[0][0] if branch == 'sigma' or len(two) == 1 else two[1][0]

    offs = window * np.linspace(-1.0, 1.0, 2 * (samples // 2) + 1)
    reach = 4 * window
    jumps = []

    def step(s, prev, i):
        t = prev + offs
        g = _slope(curve, s, t)
        idx = np.flatnonzero((g[:-1] < 0) & (g[1:] >= 0))
        jumped = False
        if len(idx) == 0:
            # the tracked minimum merged with a saddle of the floor ripple:
            # re-acquire the nearest minimum ahead within reach
            t = prev + np.linspace(0.0, reach, 2 * (samples // 2) + 1)
            g = _slope(curve, s, t)
            idx = np.flatnonzero((g[:-1] < 0) & (g[1:] >= 0))
            if len(idx) == 0:
                raise ContactError('lost valley: no local minimum inside the window', i)
            jumped = True
        if rule == 'nearest':
            mid = 0.5 * (t[idx] + t[idx + 1])
            k = idx[np.argmin(np.abs(mid - prev))]
            return _polish(curve, s, t[k], t[k + 1]), jumped
        cand = [_polish(curve, s, t[k], t[k + 1]) for k in idx]
        depth = [pp(curve, s, c) for c in cand]
        return cand[int(np.argmin(depth))], jumped

    ss, sig = [0.0], [start]
    prev = start
    min_ds = 1.0 / (n * 2 ** max_refine)
    for i in range(1, n + 1):
        s0, s1 = (i - 1) / n, i / n
        while s0 < s1:
            ds = s1 - s0
            while True:
                cur, jumped = step(s0 + ds, prev, i)
                if cur - prev <= max_jump or ds <= min_ds:
                    break
                ds *= 0.5
            s0 = s1 if ds == s1 - s0 else s0 + ds
            if jumped:
                jumps.append(i)
            ss.append(s0)
            sig.append(cur)
            prev = cur
    ss = np.array(ss)
    sig = np.array(sig)
    lift = sig.copy()
    defect = lift[-1] - lift[0] - 1.0
    if abs(defect) > max_defect:
        raise ContactError(f'closure defect {defect:.3g} exceeds {max_defect:g}', n)
    if refined := len(ss) - n - 1:
        log.debug('%d extra breakpoints on steep stretches', refined)
    lift -= defect * ss
    if np.any(np.diff(lift) <= 0):
        raise ContactError('tracked partner is not monotone', int(np.argmin(np.diff(lift))) + 1)
    log.debug('traced %s branch with n=%d, closure defect %.3g', branch, n, defect)
    if jumps:
        log.info('valley re-acquired ahead at %d step(s): %s', len(jumps), jumps[:10])
    return ContactFunction(ss, lift, branch=branch,
                           closure_defect=float(defect), jumps=tuple(jumps))


@dataclass(frozen=True)
class ContactChord:
    s: float
    t: float
    start: np.ndarray
    end: np.ndarray
    length: float
    angle_s: float
    angle_t: float
    warning: bool = False


def contact_chord(curve, s: float, cf: ContactFunction, tol: float = 5e-3) -> ContactChord:
    """Chord from ``gamma(s)`` to ``gamma(sigma(s))`` with its deviation from
    orthogonality at both ends (radians). ``warning`` is set when either
    deviation exceeds ``10 * tol``."""
    t = float(sigma_eval(cf, s))
    a = np.asarray(curve.evaluate(s))
    b = np.asarray(curve.evaluate(t))
    c = b - a
    lc = float(np.linalg.norm(c))
    u = c / lc

    def off(tan):
        return abs(np.pi / 2 - np.arccos(np.clip(tan @ u, -1.0, 1.0)))

    ang_s = off(np.asarray(curve.tangent(s)))
    ang_t = off(np.asarray(curve.tangent(t)))
    return ContactChord(float(s), t, a, b, lc, float(ang_s), float(ang_t),
                        warning=bool(max(ang_s, ang_t) > 10 * tol))
