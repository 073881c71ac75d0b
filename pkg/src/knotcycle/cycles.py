"""Periodic orbits of the contact function.

Everything here works on the lift of a :class:`~knotcycle.contact.ContactFunction`:
``sigma^n`` is a degree-one map, so ``lift^n(t) - t`` is 1-periodic and
its zeros (shifted by the winding ``k``) are the fixed points of
``sigma^n`` on the circle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .contact import ContactFunction, iterate_lift
from .curve import circle_distance

log = logging.getLogger(__name__)

TOUCH_TOL = 2e-3
DISTINCT = 1e-6

# arcs of the nine-cycle partition as (label, start index, end index),
# listed in their order along the circle starting at s0
NINE_ORDER = (0, 7, 5, 3, 1, 8, 6, 4, 2)
NINE_ARCS = (
    ('beta1', 0, 7), ('alpha2', 7, 5), ('beta~3', 5, 3), ('beta3', 3, 1),
    ('alpha1', 1, 8), ('beta~2', 8, 6), ('beta2', 6, 4), ('alpha3', 4, 2),
    ('beta~1', 2, 0),
)
NINE_CHAIN = ('alpha1', 'beta~1', 'beta3', 'alpha3', 'beta~3', 'beta2', 'alpha2',
              'beta~2', 'beta1')


class CycleError(ValueError):
    """A cycle does not have the structure an operation needs."""


def _gap(cf, t, n, k):
    return iterate_lift(cf, t, n) - t - k


def winding_number(cf: ContactFunction, n: int, grid: int = 1024) -> int:
    """The integer ``k`` for which ``lift^n(t) - t = k`` can have solutions.

    ``lift^n - id`` varies by less than one over the circle, so at most one
    integer lies in its range; without one, ``floor(lift^n(0))`` is returned.
    """
    if n == 0:
        return 0
    t = np.arange(grid) / grid
    g = iterate_lift(cf, t, n) - t
    k = int(np.floor(g.max() + 1e-12))
    if k >= g.min() - 1e-12:
        return k
    return int(np.floor(iterate_lift(cf, 0.0, n) + 1e-12))


@dataclass
class FixedPointSet:
    """Fixed points of ``sigma^n``.

    ``points`` are sign-change roots of ``lift^n(t) - t - winding``; their
    ``kinds`` are ``'attracting'`` (graph crosses downward) or
    ``'repelling'``. ``grazing`` holds local minima of ``|sigma^n(t) - t|``
    below the touch tolerance that are not roots. ``degenerate`` marks maps
    with ``sigma^n = id`` on the whole circle.
    """
    n: int
    winding: int
    points: np.ndarray
    residuals: np.ndarray
    kinds: tuple
    grazing: np.ndarray = field(default_factory=lambda: np.empty(0))
    grazing_gap: np.ndarray = field(default_factory=lambda: np.empty(0))
    degenerate: bool = False

    def __len__(self):
        return len(self.points)

    def rows(self):
        """``(n, t, residual, type)`` rows, roots first then grazing points."""
        out = [(self.n, float(t), float(r), k) for t, r, k in
               zip(self.points, self.residuals, self.kinds)]
        out += [(self.n, float(t), float(r), 'grazing') for t, r in
                zip(self.grazing, self.grazing_gap)]
        return out


def fixed_points(cf: ContactFunction, n: int, grid: int = 4096, tol: float = 1e-10,
                 touch_tol: float = TOUCH_TOL) -> FixedPointSet:
    if n < 1:
        raise ValueError('n must be at least 1')
    k = winding_number(cf, n)
    t = np.arange(grid + 1) / grid
    g = _gap(cf, t, n, k)
    g[-1] = g[0]
    if np.max(np.abs(g)) < 1e-12:
        return FixedPointSet(n, k, t[:-1].copy(), np.abs(g[:-1]),
                             ('degenerate',) * grid, degenerate=True)

    f = lambda x: float(_gap(cf, x, n, k))
    roots, res, kinds = [], [], []
    cells = set()
    for i in range(grid):
        a, b = g[i], g[i + 1]
        if a == 0.0:
            r = t[i]
            before = g[i - 1] if i > 0 else g[-2]
            kind = 'attracting' if before > 0 or b < 0 else 'repelling'
        elif a * b < 0:
            r = optimize.brentq(f, t[i], t[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps)
            kind = 'attracting' if a > 0 else 'repelling'
        else:
            continue
        cells.update((i - 1, i, i + 1))
        roots.append(r % 1.0)
        res.append(abs(f(r)))
        kinds.append(kind)

    # tangential touches: local minima of |g| without a sign change nearby
    a = np.abs(g[:-1])
    lm = np.flatnonzero((a <= np.roll(a, 1)) & (a <= np.roll(a, -1)) & (a < touch_tol))
    graze, ggap = [], []
    for i in lm:
        if i in cells or (i % grid) in cells or ((i - 1) % grid) in cells:
            continue
        m = optimize.minimize_scalar(lambda x: abs(f(x)), bounds=(t[i] - 1 / grid, t[i] + 1 / grid),
                                     method='bounded', options={'xatol': tol})
        graze.append(float(m.x) % 1.0)
        ggap.append(float(f(m.x)))

    order = np.argsort(roots)
    return FixedPointSet(n, k, np.array(roots)[order], np.array(res)[order],
                         tuple(kinds[j] for j in order),
                         np.array(graze), np.array(ggap))


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cycle:
    """A periodic orbit ``t_0, sigma(t_0), ..., sigma^{n-1}(t_0)``."""
    params: tuple
    n: int
    minimal: bool
    residual: float
    winding: int
    stability: str = ''
    id: int = -1
    multiple_of: int | None = None

    def rotated(self, i: int) -> 'Cycle':
        """The cyclic permutation starting at ``params[i]``."""
        p = self.params[i:] + self.params[:i]
        return Cycle(p, self.n, self.minimal, self.residual, self.winding, self.stability,
                     self.id, self.multiple_of)


def _orbit(cf, t, n, roots=None):
    """``t, sigma(t), ...`` (n entries). With ``roots`` given, every iterate
    is snapped to the nearest root within the touch tolerance, which keeps
    repelling orbits from drifting."""
    out = [float(t) % 1.0]
    x = float(t)
    for _ in range(n - 1):
        x = float(cf.sigma_lift(x)) % 1.0
        if roots is not None and len(roots):
            d = circle_distance(roots, x)
            j = int(np.argmin(d))
            if d[j] < TOUCH_TOL:
                x = float(roots[j])
        out.append(x)
    return out


def cycle_residual(cf, params):
    p = np.asarray(params)
    return float(np.max(circle_distance(np.mod(cf.sigma_lift(p), 1.0), np.roll(p, -1))))


def _is_minimal(params):
    p = np.asarray(params)
    if len(p) == 1:
        return True
    d = circle_distance(p[:, None], p[None, :])
    return bool(np.all(d[np.triu_indices(len(p), 1)] > DISTINCT))


def _period(params):
    p = np.asarray(params)
    for q in range(1, len(p)):
        if len(p) % q == 0 and circle_distance(p[q], p[0]) <= DISTINCT:
            return q
    return len(p)


def cycles_from(cf: ContactFunction, fps: FixedPointSet, next_id: int = 0,
                known: list | None = None):
    """Group the roots of ``fps`` into orbits.

    Non-minimal orbits are linked to the matching entry of ``known`` (the
    shorter cycles found so far) through ``multiple_of``.
    """
    n = fps.n
    if fps.degenerate:
        log.warning('sigma^%d is the identity on the grid; no isolated cycles', n)
        return []
    left = list(range(len(fps.points)))
    pts = fps.points
    out = []
    while left:
        i = left.pop(0)
        orb = _orbit(cf, pts[i], n, pts)
        for x in orb[1:]:
            if x in pts[left]:
                left.remove(int(np.flatnonzero(pts == x)[0]))
        # start each cycle at its smallest parameter
        s = int(np.argmin(orb))
        orb = orb[s:] + orb[:s]
        minimal = _is_minimal(orb)
        parent = None
        if not minimal and known:
            q = _period(orb)
            for c in known:
                if c.n == q and c.minimal and np.min(circle_distance(np.array(c.params), orb[0])) < TOUCH_TOL:
                    parent = c.id
                    break
        out.append(Cycle(tuple(orb), n, minimal, cycle_residual(cf, orb), fps.winding,
                         fps.kinds[i], next_id + len(out), parent))
    return out


def detect_cycles(cf: ContactFunction, n_max: int, grid: int = 4096, tol: float = 1e-10,
                  ns=None):
    """All cycles for ``n = 1..n_max`` (or the given ``ns``), ordered by
    ``(n, smallest param)``. Multiples of shorter cycles are kept but marked
    non-minimal with the parent's id in ``multiple_of``."""
    if n_max > 160:
        raise ValueError('n_max must not exceed 160')
    ns = range(1, n_max + 1) if ns is None else sorted(ns)
    found = []
    for n in ns:
        fps = fixed_points(cf, n, grid=grid, tol=tol)
        found += cycles_from(cf, fps, next_id=len(found), known=found)
    return found


def minimal_cycles(cycles, n=None):
    return [c for c in cycles if c.minimal and (n is None or c.n == n)]


@dataclass(frozen=True)
class CountingVerdict:
    n: int
    fixed: int
    minimal_cycles: int
    holds: bool
    slack: int


def touch_groups(cycles, tol: float = TOUCH_TOL):
    """Group minimal cycles of equal length whose point sets agree within
    ``tol``.

    On an approximate curve a tangential touch of ``sigma^n`` with the
    diagonal usually splits into a close attracting/repelling pair of
    cycles; each group stands for one touch. Groups are ordered like their
    first member.
    """
    groups = []
    for c in minimal_cycles(cycles):
        p = np.sort(np.asarray(c.params))
        for g in groups:
            q = np.sort(np.asarray(g[0].params))
            if g[0].n == c.n and np.all(np.min(circle_distance(p[:, None], q[None, :]),
                                                axis=1) < tol):
                g.append(c)
                break
        else:
            groups.append([c])
    for g in groups:
        g.sort(key=lambda c: c.stability != 'attracting')
    return groups


def touch_intervals(group):
    """For a touch group: per point of its first (attracting) cycle, the
    arc ``[lo, hi]`` spanned by the matching points of all members."""
    base = np.sort(np.asarray(group[0].params))
    lo, hi = base.copy(), base.copy()
    for c in group[1:]:
        p = np.asarray(c.params)
        for i, b in enumerate(base):
            d = np.mod(p - b + 0.5, 1.0) - 0.5
            j = int(np.argmin(np.abs(d)))
            lo[i] = min(lo[i], b + d[j])
            hi[i] = max(hi[i], b + d[j])
    return np.column_stack([lo, hi])


def counting_check(fps: FixedPointSet, cycles, n: int) -> CountingVerdict:
    """``#fixed points of sigma^n >= n * #distinct minimal n-cycles``."""
    m = len(minimal_cycles(cycles, n))
    count = len(fps.points)
    v = CountingVerdict(n, count, m, count >= n * m, count - n * m)
    if not v.holds:
        log.error('counting inequality violated at n=%d: %d < %d', n, count, n * m)
    return v


def cycle_ordering(cycle: Cycle):
    """Indices of the cycle entries in the order met when going once around
    the circle starting at ``params[0]``."""
    p = np.asarray(cycle.params)
    return tuple(int(i) for i in np.argsort(np.mod(p - p[0], 1.0), kind='stable'))


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Arc:
    label: str
    start: float
    end: float
    i: int
    j: int

    @property
    def length(self):
        return (self.end - self.start) % 1.0

    def contains(self, t, tol=0.0):
        return (np.mod(np.asarray(t) - self.start + tol, 1.0) <= self.length + 2 * tol)


@dataclass(frozen=True)
class Partition:
    params: tuple
    arcs: tuple

    def arc(self, label) -> Arc:
        for a in self.arcs:
            if a.label == label:
                return a
        raise KeyError(label)

    def s(self, k):
        """``s_k`` with indices taken mod 9."""
        return self.params[k % 9]


def partition(cycle: Cycle, origin: float = 0.0) -> Partition:
    """Split the circle at the nine cycle points.

    The cycle is rotated so that ``s0`` is the entry nearest ``origin``;
    its order around the circle must then be s0, s7, s5, s3, s1, s8, s6,
    s4, s2.
    """
    if cycle.n != 9 or not cycle.minimal:
        raise CycleError('partition needs a minimal 9-cycle')
    i0 = int(np.argmin(circle_distance(np.array(cycle.params), origin)))
    c = cycle.rotated(i0)
    order = cycle_ordering(c)
    if order != NINE_ORDER:
        raise CycleError(f'cycle order {order} differs from {NINE_ORDER}')
    p = c.params
    arcs = tuple(Arc(lab, p[i], p[j], i, j) for lab, i, j in NINE_ARCS)
    return Partition(tuple(p), arcs)


@dataclass
class PieceMapReport:
    chain: tuple
    successors: dict
    endpoint_residuals: dict
    interior_ok: dict
    ok: bool

    @property
    def max_endpoint_residual(self):
        return max(max(v) for v in self.endpoint_residuals.values())


def piece_map_check(cf: ContactFunction, part: Partition, tol: float = 2e-3,
                    samples: int = 10) -> PieceMapReport:
    """Check that ``sigma`` maps every arc ``[s_i, s_j]`` onto
    ``[s_{i+1}, s_{j+1}]`` and read off the realised chain of arcs."""
    by_idx = {(a.i, a.j): a for a in part.arcs}
    succ, endres, inner = {}, {}, {}
    for a in part.arcs:
        target = by_idx[((a.i + 1) % 9, (a.j + 1) % 9)]
        img = np.mod(cf.sigma_lift(np.array([a.start, a.start + a.length])), 1.0)
        endres[a.label] = (float(circle_distance(img[0], target.start)),
                           float(circle_distance(img[1], target.end)))
        ts = a.start + a.length * (np.arange(1, samples + 1) / (samples + 1))
        im = np.mod(cf.sigma_lift(ts), 1.0)
        inner[a.label] = bool(np.all(target.contains(im, tol)))
        # realised successor: the arc holding most interior images
        hits = [int(np.sum(b.contains(im))) for b in part.arcs]
        succ[a.label] = part.arcs[int(np.argmax(hits))].label
    chain = ['alpha1']
    while len(chain) < 9:
        chain.append(succ[chain[-1]])
    chain = tuple(chain)
    ok = (chain == NINE_CHAIN and all(inner.values())
          and all(max(v) < tol for v in endres.values()))
    return PieceMapReport(chain, succ, endres, inner, ok)


# ---------------------------------------------------------------------------

def attractor_orbit(cf: ContactFunction, t: float, steps: int, stride: int = 1):
    """Lift values ``sigma^{stride * i}(t)`` for ``i = 0..steps``."""
    if steps > 10_000:
        raise ValueError('steps must not exceed 10000')
    out = np.empty(steps + 1)
    x = float(t)
    out[0] = x
    for i in range(1, steps + 1):
        x = float(iterate_lift(cf, x, stride))
        out[i] = x
    return out


@dataclass
class AttractorReport:
    """Behaviour of ``sigma^{n i}`` from a grid of starts.

    ``positions[j, i]`` is ``lift^{n i}(start_j) - i * winding`` and
    ``displacements[j, i]`` its increment ``sigma^{n(i+1)} - sigma^{n i}``
    on the lift. Each start lies in an interval ``(left, right)`` between
    consecutive points of the cycle.
    """
    n: int
    winding: int
    starts: np.ndarray
    positions: np.ndarray
    displacements: np.ndarray
    left: np.ndarray
    right: np.ndarray
    limit: np.ndarray
    nearest: np.ndarray
    to_right: np.ndarray
    converged_at: np.ndarray
    monotone: np.ndarray
    sup_trace: np.ndarray
    median_trace: np.ndarray

    @property
    def all_converged(self):
        return bool(np.all(self.converged_at >= 0))


def attractor_report(cf: ContactFunction, cycle: Cycle, grid: int = 64, iters: int = 150,
                     tol: float = 2e-3) -> AttractorReport:
    if grid < 64:
        raise ValueError('grid must be at least 64')
    n = cycle.n
    k = winding_number(cf, n)
    pts = np.sort(np.asarray(cycle.params))
    starts = np.arange(grid) / grid
    x = starts.copy()
    pos = np.empty((grid, iters + 1))
    pos[:, 0] = x
    for i in range(1, iters + 1):
        x = iterate_lift(cf, x, n) - k
        pos[:, i] = x
    disp = np.diff(pos, axis=1)

    # bracketing cycle points, lifted around each start
    ext = np.concatenate([pts - 1, pts, pts + 1])
    r_idx = np.searchsorted(ext, starts, side='right')
    left = ext[r_idx - 1]
    right = ext[r_idx]
    dr = np.abs(pos - right[:, None])
    dl = np.abs(pos - left[:, None])
    to_right = dr[:, -1] <= dl[:, -1]
    dist = np.where(to_right[:, None], dr, dl)
    conv = np.full(grid, -1)
    for j in range(grid):
        hit = np.flatnonzero(dist[j] < tol)
        if len(hit) and np.all(dist[j, hit[0]:] < tol):
            conv[j] = hit[0]
    d = np.diff(pos, axis=1)
    mono = np.all(d >= -1e-12, axis=1) | np.all(d <= 1e-12, axis=1)
    limit = np.mod(pos[:, -1], 1.0)
    nearest = pts[np.argmin(circle_distance(limit[:, None], pts[None, :]), axis=1)]
    ad = np.abs(disp)
    return AttractorReport(n, k, starts, pos, disp, left, right, limit, nearest, to_right,
                           conv, mono, ad.max(axis=0), np.median(ad, axis=0))
