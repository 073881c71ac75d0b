"""Closed curves on the circle S = R/Z: polylines with tangents, biarcs and
Fourier series.

All curve objects are immutable. Parameters are reduced modulo 1 before use,
and every evaluation routine accepts scalars or arrays.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels


class DegenerateCurveError(ValueError):
    """Raised when a curve has zero length or a vanishing derivative."""


class BiarcError(ValueError):
    """Raised when point-tangent data cannot be joined by a biarc."""

    def __init__(self, message, node=None):
        super().__init__(message if node is None else f'{message} (node {node})')
        self.node = node


def circle_distance(a, b):
    """Distance on S between parameters ``a`` and ``b``."""
    d = np.abs(np.mod(np.asarray(a, float) - np.asarray(b, float), 1.0))
    return np.minimum(d, 1.0 - d)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _scalar_or_array(values, t):
    return values[0] if np.ndim(t) == 0 else values


def circumradius(x, y, z):
    """Radius of the smallest circle through ``x``, ``y`` and ``z``.

    Collinear, pairwise distinct points give ``inf``; when two points
    coincide the radius is half the diameter of the set. The three points
    are put in lexicographic order first so the value does not depend on
    argument order.
    """
    pts = [np.asarray(p, dtype=float).reshape(3) for p in (x, y, z)]
    if not all(np.all(np.isfinite(p)) for p in pts):
        raise ValueError('circumradius needs finite coordinates')
    pts.sort(key=lambda p: tuple(p))
    return float(kernels.circumradii(pts[0], pts[1], pts[2]))


def _unit(v, axis=-1):
    n = np.linalg.norm(v, axis=axis, keepdims=True)
    if np.any(n == 0):
        raise DegenerateCurveError('zero-length tangent')
    return v / n


class _Curve:
    """Shared helpers; subclasses provide ``evaluate`` and ``derivative``."""

    def tangent(self, t):
        d = self.derivative(t, 1)
        n = np.linalg.norm(d, axis=-1, keepdims=True)
        if np.any(n == 0):
            raise DegenerateCurveError('zero-length derivative')
        return d / n

    def speed(self, t):
        return np.linalg.norm(self.derivative(t, 1), axis=-1)

    def __call__(self, t):
        return self.evaluate(t)


class PolyCurve(_Curve):
    """Closed polygon through ``points`` at parameters ``params`` with unit
    ``tangents`` attached to the nodes.

    ``arclength`` defaults to the polygon length; resampled smooth curves
    carry the length of their source instead.
    """

    def __init__(self, params, points, tangents, arclength=None):
        params = np.asarray(params, float)
        points = np.asarray(points, float)
        tangents = np.asarray(tangents, float)
        n = len(params)
        if points.shape != (n, 3) or tangents.shape != (n, 3):
            raise ValueError('params, points and tangents must have matching lengths')
        if n < 3:
            raise ValueError('a closed curve needs at least 3 nodes')
        if params[0] != 0.0 or np.any(np.diff(params) <= 0) or params[-1] >= 1.0:
            raise ValueError('params must start at 0 and increase strictly inside [0, 1)')
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(tangents))):
            raise ValueError('non-finite node data')
        self.params = _frozen(params)
        self.points = _frozen(points)
        # rows that are unit to rounding are kept bit for bit
        norms = np.linalg.norm(tangents, axis=1, keepdims=True)
        keep = np.abs(norms - 1.0) <= 4 * np.finfo(float).eps
        self.tangents = _frozen(np.where(keep, tangents, _unit(tangents)))
        chords = np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)
        if np.any(chords == 0):
            raise DegenerateCurveError('coincident consecutive nodes')
        self.chords = _frozen(chords)
        self.polygon_length = float(chords.sum())
        self.arclength = float(arclength) if arclength is not None else self.polygon_length
        self._dparam = np.diff(np.append(params, 1.0))

    @classmethod
    def from_points(cls, points, tangents=None, arclength=None):
        """Nodes at parameters ``i/n``; tangents default to central differences."""
        points = np.asarray(points, float)
        n = len(points)
        if tangents is None:
            tangents = np.roll(points, -1, axis=0) - np.roll(points, 1, axis=0)
        return cls(np.arange(n) / n, points, tangents, arclength)

    def __len__(self):
        return len(self.params)

    def _locate(self, t):
        t = np.mod(np.atleast_1d(np.asarray(t, float)), 1.0)
        i = np.searchsorted(self.params, t, side='right') - 1
        f = (t - self.params[i]) / self._dparam[i]
        return i, (i + 1) % len(self.params), f

    def evaluate(self, t):
        i, j, f = self._locate(t)
        p = self.points[i] + f[:, None] * (self.points[j] - self.points[i])
        return _scalar_or_array(p, t)

    def derivative(self, t, order=1):
        i, j, _ = self._locate(t)
        if order == 1:
            d = (self.points[j] - self.points[i]) / self._dparam[i][:, None]
        elif order >= 2:
            d = np.zeros((len(i), 3))
        else:
            return self.evaluate(t)
        return _scalar_or_array(d, t)

    def tangent(self, t):
        """Spherical-linear interpolation of the node tangents."""
        i, j, f = self._locate(t)
        a = self.tangents[i]
        b = self.tangents[j]
        dot = np.clip(np.einsum('ij,ij->i', a, b), -1.0, 1.0)
        if np.any(dot <= -1.0 + 1e-15):
            raise DegenerateCurveError('antiparallel neighbouring tangents')
        om = np.arccos(dot)
        small = om < 1e-8
        so = np.where(small, 1.0, np.sin(om))
        wa = np.where(small, 1.0 - f, np.sin((1.0 - f) * om) / so)
        wb = np.where(small, f, np.sin(f * om) / so)
        v = wa[:, None] * a + wb[:, None] * b
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return _scalar_or_array(v, t)

    def curvature(self, t):
        """Reciprocal circumradius of the nearest node and its neighbours."""
        i, j, f = self._locate(t)
        i = np.where(f > 0.5, j, i)
        n = len(self.params)
        r = kernels.circumradii(self.points[(i - 1) % n], self.points[i], self.points[(i + 1) % n])
        k = np.where(np.isinf(r), 0.0, 1.0 / r)
        return _scalar_or_array(k, t)

    def transformed(self, rotation=None, translation=None, scale=1.0):
        rot = np.eye(3) if rotation is None else np.asarray(rotation, float)
        sh = np.zeros(3) if translation is None else np.asarray(translation, float)
        return PolyCurve(self.params, scale * self.points @ rot.T + sh,
                         self.tangents @ rot.T, scale * self.arclength)

    def reversed(self):
        """Same curve traversed backwards: ``t -> -t``."""
        p = np.mod(-self.params, 1.0)
        order = np.argsort(p)
        return PolyCurve(p[order], self.points[order], -self.tangents[order], self.arclength)

    def shifted(self, s0):
        """Re-index so that the new parameter 0 is the old ``s0`` (a node)."""
        p = np.mod(self.params - s0, 1.0)
        order = np.argsort(p)
        if p[order][0] > 1e-12:
            raise ValueError('shift must land on a node')
        p = p[order]
        p[0] = 0.0
        return PolyCurve(p, self.points[order], self.tangents[order], self.arclength)


# ---------------------------------------------------------------------------
# biarcs

class ArcSegment:
    """One circular arc (or straight segment when ``curvature == 0``)."""

    __slots__ = ('start', 'tangent', 'normal', 'curvature', 'length')

    def __init__(self, start, tangent, normal, curvature, length):
        self.start = np.asarray(start, float)
        self.tangent = np.asarray(tangent, float)
        self.normal = np.asarray(normal, float)
        self.curvature = float(curvature)
        self.length = float(length)

    @property
    def radius(self):
        return math.inf if self.curvature == 0 else 1.0 / self.curvature

    @property
    def angle(self):
        return self.curvature * self.length

    @property
    def end(self):
        return _arc_point(self.start, self.tangent, self.normal, self.curvature, self.length)

    @property
    def end_tangent(self):
        return _arc_tangent(self.tangent, self.normal, self.curvature, self.length)

    @property
    def center(self):
        if self.curvature == 0:
            return None
        return self.start + self.normal / self.curvature

    def __repr__(self):
        return f'ArcSegment(radius={self.radius:.6g}, length={self.length:.6g})'


def _arc_point(p, t, n, k, u):
    u = np.asarray(u, float)
    ku = k * u
    a = u * np.sinc(ku / np.pi)
    b = u * np.sin(0.5 * ku) * np.sinc(ku / (2 * np.pi))
    return p + a[..., None] * t + b[..., None] * n if np.ndim(u) else p + a * t + b * n


def _arc_tangent(t, n, k, u):
    ku = np.asarray(k * u, float)
    c = np.cos(ku)
    s = np.sin(ku)
    return c[..., None] * t + s[..., None] * n if np.ndim(ku) else c * t + s * n


def _arcs(a, ta, b, nodes):
    """Arcs leaving ``a`` with tangent ``ta`` and ending at ``b`` (row-wise)."""
    c = b - a
    lc = np.linalg.norm(c, axis=1)
    if np.any(lc == 0):
        raise BiarcError('coincident points', int(nodes[np.argmax(lc == 0)]))
    cos = np.einsum('ij,ij->i', ta, c) / lc
    perp = c - (cos * lc)[:, None] * ta
    sin = np.linalg.norm(perp, axis=1) / lc
    theta = np.arctan2(sin, cos)
    straight = sin < 1e-15
    if np.any(straight & (cos < 0)):
        raise BiarcError('tangent antiparallel to chord', int(nodes[np.argmax(straight & (cos < 0))]))
    with np.errstate(invalid='ignore', divide='ignore'):
        normal = np.where(straight[:, None], 0.0, perp / (sin * lc)[:, None])
        k = np.where(straight, 0.0, 2.0 * sin / lc)
        length = np.where(straight, lc, lc * theta / np.where(straight, 1.0, sin))
    return normal, k, length


class BiarcCurve(_Curve):
    """G1 chain of circular arcs, two per node interval.

    The parameter interval of node ``i`` is mapped linearly onto the
    arclength of its two arcs, so a biarc built from constant-speed data is
    itself (piecewise) constant speed.
    """

    def __init__(self, data: PolyCurve):
        self.data = data
        p = data.points
        t = data.tangents
        n = len(p)
        q = np.roll(p, -1, axis=0)
        tq = np.roll(t, -1, axis=0)
        nodes = np.arange(n)
        d = q - p
        s = t + tq
        a = 2.0 * (np.einsum('ij,ij->i', t, tq) - 1.0)
        b = -2.0 * np.einsum('ij,ij->i', d, s)
        c = np.einsum('ij,ij->i', d, d)
        den = -b + np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
        bad = den <= 1e-300
        if np.any(bad):
            raise BiarcError('no biarc: tangents turn away from the chord', int(nodes[np.argmax(bad)]))
        beta = 2.0 * c / den
        q0 = p + beta[:, None] * t
        q1 = q - beta[:, None] * tq
        m = 0.5 * (q0 + q1)
        tm = _unit(q1 - q0)
        n1, k1, l1 = _arcs(p, t, m, nodes)
        n2, k2, l2 = _arcs(m, tm, q, nodes)

        start = np.empty((2 * n, 3))
        tan = np.empty((2 * n, 3))
        nor = np.empty((2 * n, 3))
        start[0::2], start[1::2] = p, m
        tan[0::2], tan[1::2] = t, tm
        nor[0::2], nor[1::2] = n1, n2
        self.starts = _frozen(start)
        self.tangents0 = _frozen(tan)
        self.normals = _frozen(nor)
        self.curvatures = _frozen(np.ravel(np.column_stack([k1, k2])))
        self.lengths = _frozen(np.ravel(np.column_stack([l1, l2])))
        self.params = data.params
        self._dparam = data._dparam
        self._pairlen = self.lengths[0::2] + self.lengths[1::2]
        self.arclength = float(self.lengths.sum())
        self._cum = np.concatenate([[0.0], np.cumsum(self._pairlen)])

    @property
    def segments(self):
        return [ArcSegment(self.starts[i], self.tangents0[i], self.normals[i],
                           self.curvatures[i], self.lengths[i]) for i in range(len(self.lengths))]

    @property
    def radii(self):
        with np.errstate(divide='ignore'):
            return np.where(self.curvatures == 0, np.inf, 1.0 / self.curvatures)

    def g1_residual(self):
        """Largest angle (radians) between consecutive arc tangents."""
        ends = _arc_tangent(self.tangents0, self.normals, self.curvatures, self.lengths)
        nxt = np.roll(self.tangents0, -1, axis=0)
        cr = np.linalg.norm(np.cross(ends, nxt), axis=1)
        dot = np.einsum('ij,ij->i', ends, nxt)
        return float(np.max(np.arctan2(cr, dot)))

    def closure_residual(self):
        """Largest gap between an arc end and the next arc start."""
        ends = _arc_point(self.starts, self.tangents0, self.normals, self.curvatures,
                          self.lengths)
        return float(np.max(np.linalg.norm(ends - np.roll(self.starts, -1, axis=0), axis=1)))

    def _locate(self, t):
        t = np.mod(np.atleast_1d(np.asarray(t, float)), 1.0)
        i = np.searchsorted(self.params, t, side='right') - 1
        f = (t - self.params[i]) / self._dparam[i]
        u = f * self._pairlen[i]
        first = u <= self.lengths[2 * i]
        seg = np.where(first, 2 * i, 2 * i + 1)
        u = np.where(first, u, u - self.lengths[2 * i])
        return seg, u, self._pairlen[i] / self._dparam[i]

    def evaluate(self, t):
        seg, u, _ = self._locate(t)
        k = self.curvatures[seg]
        ku = k * u
        a = u * np.sinc(ku / np.pi)
        b = u * np.sin(0.5 * ku) * np.sinc(ku / (2 * np.pi))
        p = self.starts[seg] + a[:, None] * self.tangents0[seg] + b[:, None] * self.normals[seg]
        return _scalar_or_array(p, t)

    def tangent(self, t):
        seg, u, _ = self._locate(t)
        ku = self.curvatures[seg] * u
        v = np.cos(ku)[:, None] * self.tangents0[seg] + np.sin(ku)[:, None] * self.normals[seg]
        return _scalar_or_array(v, t)

    def derivative(self, t, order=1):
        seg, u, speed = self._locate(t)
        k = self.curvatures[seg]
        ku = k * u
        c, s = np.cos(ku), np.sin(ku)
        T, N = self.tangents0[seg], self.normals[seg]
        if order == 0:
            return self.evaluate(t)
        if order == 1:
            d = speed[:, None] * (c[:, None] * T + s[:, None] * N)
        elif order == 2:
            d = (speed ** 2 * k)[:, None] * (-s[:, None] * T + c[:, None] * N)
        else:
            raise ValueError('biarcs are only C1; derivatives above order 2 are not defined')
        return _scalar_or_array(d, t)

    def curvature(self, t):
        seg, _, _ = self._locate(t)
        return _scalar_or_array(self.curvatures[seg], t)

    def segment_params(self):
        """Parameter of the midpoint of every arc."""
        f0 = 0.5 * self.lengths[0::2] / self._pairlen
        f1 = (self.lengths[0::2] + 0.5 * self.lengths[1::2]) / self._pairlen
        out = np.empty(len(self.lengths))
        out[0::2] = self.params + f0 * self._dparam
        out[1::2] = self.params + f1 * self._dparam
        return out

    def transformed(self, rotation=None, translation=None, scale=1.0):
        return BiarcCurve(self.data.transformed(rotation, translation, scale))

    def reversed(self):
        return BiarcCurve(self.data.reversed())


def biarc_interpolate(data: PolyCurve) -> BiarcCurve:
    """Join consecutive point-tangent nodes by pairs of circular arcs.

    The matching point of each pair is the midpoint of the two inner
    control points placed at equal distance along both end tangents; this
    reproduces circles exactly.
    """
    return BiarcCurve(data)


# ---------------------------------------------------------------------------
# Fourier curves

class FourierCurve(_Curve):
    """``constant + sum_j a_j cos(2 pi j t) + b_j sin(2 pi j t)`` per axis.

    ``a`` and ``b`` have shape ``(m, 3)``; row ``j-1`` holds harmonic ``j``.
    """

    _GAUSS = np.polynomial.legendre.leggauss(8)

    def __init__(self, constant, a, b):
        a = np.atleast_2d(np.asarray(a, float))
        b = np.atleast_2d(np.asarray(b, float))
        constant = np.asarray(constant, float).reshape(3)
        if a.shape != b.shape or a.ndim != 2 or a.shape[1] != 3 or len(a) < 1:
            raise ValueError('coefficient arrays must both have shape (m, 3) with m >= 1')
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(constant))):
            raise ValueError('non-finite Fourier coefficient')
        self.constant = _frozen(constant)
        self.a = _frozen(a)
        self.b = _frozen(b)
        self._omega = 2 * np.pi * np.arange(1, len(a) + 1)
        self._table = None

    @property
    def harmonics(self):
        return len(self.a)

    def derivative(self, t, order=1):
        tt = np.atleast_1d(np.asarray(t, float))
        ph = np.outer(tt, self._omega) + order * np.pi / 2
        w = self._omega ** order
        d = (np.cos(ph) * w) @ self.a + (np.sin(ph) * w) @ self.b
        if order == 0:
            d = d + self.constant
        return _scalar_or_array(d, t)

    def evaluate(self, t):
        return self.derivative(t, 0)

    def curvature(self, t):
        d1 = np.atleast_2d(self.derivative(t, 1))
        d2 = np.atleast_2d(self.derivative(t, 2))
        sp = np.linalg.norm(d1, axis=1)
        if np.any(sp == 0):
            raise DegenerateCurveError('zero-length derivative')
        k = np.linalg.norm(np.cross(d1, d2), axis=1) / sp ** 3
        return _scalar_or_array(k, t)

    def _arclength_table(self):
        if self._table is None:
            cells = max(2048, 64 * self.harmonics)
            x, w = self._GAUSS
            edges = np.linspace(0.0, 1.0, cells + 1)
            h = 1.0 / cells
            nodes = (edges[:-1, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
            sp = self.speed(nodes).reshape(cells, len(x))
            seg = 0.5 * h * (sp @ w)
            self._table = (edges, np.concatenate([[0.0], np.cumsum(seg)]))
        return self._table

    @property
    def arclength(self):
        return float(self._arclength_table()[1][-1])

    def arclength_to(self, t):
        """Arclength from parameter 0 to ``t`` (``0 <= t <= 1``)."""
        edges, cum = self._arclength_table()
        t = np.atleast_1d(np.asarray(t, float))
        cells = len(edges) - 1
        k = np.clip((t * cells).astype(int), 0, cells - 1)
        x, w = self._GAUSS
        lo = edges[k]
        half = 0.5 * (t - lo)
        nodes = lo[:, None] + half[:, None] * (x[None, :] + 1.0)
        sp = self.speed(nodes.ravel()).reshape(nodes.shape)
        return cum[k] + half * (sp @ w)

    def param_at_arclength(self, s):
        edges, cum = self._arclength_table()
        s = np.asarray(s, float)
        t = np.interp(s, cum, edges)
        for _ in range(4):
            t = t - (self.arclength_to(t) - s) / self.speed(t)
        return t

    def transformed(self, rotation=None, translation=None, scale=1.0):
        rot = np.eye(3) if rotation is None else np.asarray(rotation, float)
        sh = np.zeros(3) if translation is None else np.asarray(translation, float)
        return FourierCurve(scale * rot @ self.constant + sh, scale * self.a @ rot.T,
                            scale * self.b @ rot.T)

    def reversed(self):
        return FourierCurve(self.constant, self.a, -self.b)

    def truncated(self, m):
        return FourierCurve(self.constant, self.a[:m], self.b[:m])

    # a few analytic closed curves used as fixtures and CLI inputs

    @classmethod
    def circle(cls, radius=1.0):
        return cls(np.zeros(3), [[radius, 0, 0]], [[0, radius, 0]])

    @classmethod
    def ellipse(cls, a=10.0, b=0.5):
        return cls(np.zeros(3), [[a, 0, 0]], [[0, b, 0]])

    @classmethod
    def standard_trefoil(cls):
        """``((2 + cos 3u) cos 2u, (2 + cos 3u) sin 2u, sin 3u)`` with ``u = 2 pi t``."""
        a = np.zeros((5, 3))
        b = np.zeros((5, 3))
        a[0, 0], b[0, 1] = 0.5, -0.5
        a[1, 0], b[1, 1] = 2.0, 2.0
        b[2, 2] = 1.0
        a[4, 0], b[4, 1] = 0.5, 0.5
        return cls(np.zeros(3), a, b)

    @classmethod
    def peanut(cls):
        """Planar two-bump curve with a waist of width 1 across the x = 0 line."""
        a = np.zeros((3, 3))
        b = np.zeros((3, 3))
        a[0, 0] = 2.0
        b[0, 1] = 0.75
        b[2, 1] = 0.25
        return cls(np.zeros(3), a, b)

    @classmethod
    def two_harmonic(cls):
        """Planar curve ``(cos u + 0.2 cos 2u, sin u - 0.2 sin 2u)``; convex."""
        a = np.zeros((2, 3))
        b = np.zeros((2, 3))
        a[0, 0], b[0, 1] = 1.0, 1.0
        a[1, 0], b[1, 1] = 0.2, -0.2
        return cls(np.zeros(3), a, b)


# ---------------------------------------------------------------------------
# reparameterisation

def _param_at_arclength(curve, s):
    if isinstance(curve, FourierCurve):
        return curve.param_at_arclength(s)
    if isinstance(curve, PolyCurve):
        cum = np.concatenate([[0.0], np.cumsum(curve.chords)])
        return np.interp(s, cum, np.append(curve.params, 1.0))
    if isinstance(curve, BiarcCurve):
        return np.interp(s, curve._cum, np.append(curve.params, 1.0))
    raise TypeError(f'cannot reparameterise {type(curve).__name__}')


def _source_length(curve):
    return curve.polygon_length if isinstance(curve, PolyCurve) else curve.arclength


def reparameterize_constant_speed(curve, n: int, tol: float = 1e-13,
                                  max_iter: int = 60) -> PolyCurve:
    """Sample ``n`` nodes on ``curve`` with all successive chords equal.

    Nodes start from equal-arclength positions and are slid along the curve
    until the polygon is equilateral, so the result is constant speed both
    as a polygon and, to O(h^2), along the source. The first node stays at
    the source parameter 0. Returned tangents come from the source.
    """
    if n < 8:
        raise ValueError('need n >= 8 nodes')
    length = _source_length(curve)
    if not np.isfinite(length) or length <= 0:
        raise DegenerateCurveError('curve has zero length')
    s = length * np.arange(n) / n
    for _ in range(max_iter):
        t = _param_at_arclength(curve, s)
        p = np.atleast_2d(curve.evaluate(t))
        ch = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
        if ch.min() <= 0:
            raise DegenerateCurveError('curve has zero length')
        cum = np.concatenate([[0.0], np.cumsum(ch)])
        err = cum[-1] * np.arange(n) / n - cum[:-1]
        if np.max(np.abs(ch / ch.mean() - 1.0)) < tol:
            break
        s = s + err * (length / cum[-1])
    tan = np.atleast_2d(curve.tangent(t))
    return PolyCurve(np.arange(n) / n, p, tan, arclength=curve.arclength)


def fourier_to_poly(fc: FourierCurve, n: int) -> PolyCurve:
    """Constant-speed ``n``-node sampling with the analytic tangents."""
    if np.allclose(fc.a, 0) and np.allclose(fc.b, 0):
        raise DegenerateCurveError('constant Fourier curve')
    return reparameterize_constant_speed(fc, n)


def to_biarc(curve, n: int = 1000) -> BiarcCurve:
    """Constant-speed biarc approximation of any curve with ``n`` nodes."""
    if isinstance(curve, BiarcCurve):
        return curve
    return biarc_interpolate(reparameterize_constant_speed(curve, n))
