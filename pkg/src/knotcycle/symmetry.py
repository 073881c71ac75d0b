"""Dihedral symmetry of trefoil-like curves and of their contact function.

The group considered is D3: a rotation by 120 degrees about one axis that
shifts the parameter by 1/3, and three rotations by 180 degrees about axes
orthogonal to it that reverse the parameter around ``s*`` (``s* + k/3``
for the k-th axis).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.spatial.transform import Rotation

from .curve import circle_distance


class NoSymmetryError(ValueError):
    """The curve is too far from D3 symmetric to fit a frame."""


def _rotation(axis, angle):
    return Rotation.from_rotvec(np.asarray(axis, float) * angle).as_matrix()


def _fit(p, q):
    """Best rigid motion ``x -> R x + b`` taking rows of ``p`` onto ``q``."""
    pc, qc = p.mean(axis=0), q.mean(axis=0)
    rot, _ = Rotation.align_vectors(q - qc, p - pc)
    R = rot.as_matrix()
    return R, qc - R @ pc


def _axis_of(R, b):
    """Unit axis of the rotation ``R`` and the point of the motion's axis
    (``x -> R x + b``) nearest the origin."""
    rv = Rotation.from_matrix(R).as_rotvec()
    axis = rv / np.linalg.norm(rv)
    # points on the axis satisfy (I - R) c = b up to the along-axis part
    c = np.linalg.lstsq(np.eye(3) - R, b - axis * (axis @ b), rcond=None)[0]
    return axis, c - axis * (axis @ c)


@dataclass(frozen=True)
class SymmetryFrame:
    c3_axis: np.ndarray
    c3_point: np.ndarray
    c2_axes: np.ndarray             # (3, 3), rows are unit vectors
    c2_points: np.ndarray           # (3, 3)
    s_star: float
    c3_rms: float
    c2_rms: float
    c2_tilt: float                  # fitted C2 axis deviation from orthogonality (rad)

    def c3_matrix(self):
        return _rotation(self.c3_axis, 2 * np.pi / 3)

    def c2_matrix(self, k=0):
        return _rotation(self.c2_axes[k], np.pi)


def _c2_rms(curve, s, t):
    p = np.atleast_2d(curve.evaluate(s + t))
    q = np.atleast_2d(curve.evaluate(s - t))
    R, b = _fit(p, q)
    return float(np.sqrt(np.mean(np.sum((p @ R.T + b - q) ** 2, axis=1))))


def detect_frame(curve, samples: int = 512, threshold: float | None = None) -> SymmetryFrame:
    """Fit the D3 frame of ``curve``.

    The C3 axis comes from the best rigid motion taking ``gamma(t)`` to
    ``gamma(t + 1/3)``, with the angle then fixed to 120 degrees. The first
    C2 axis comes from the best rigid motion taking ``gamma(s* + t)`` to
    ``gamma(s* - t)``, minimised over ``s*``; it is projected orthogonal to
    the C3 axis and the other two are its images under the C3 rotation.
    Among the equivalent ``s*`` (spaced 1/6 apart) the one farthest from the
    C3 axis is returned, ties going to the smallest parameter.
    """
    t = np.arange(samples) / samples
    p = np.atleast_2d(curve.evaluate(t))
    scale = float(np.sqrt(np.mean(np.sum((p - p.mean(axis=0)) ** 2, axis=1))))
    if threshold is None:
        threshold = 0.05 * scale

    q = np.atleast_2d(curve.evaluate(t + 1.0 / 3.0))
    R, b = _fit(p, q)
    axis, point = _axis_of(R, b)

    def c3_err(ax):
        d = (p - point) @ _rotation(ax, 2 * np.pi / 3).T + point - q
        return float(np.sqrt(np.mean(np.sum(d ** 2, axis=1))))

    # orient the axis so that the shift by 1/3 is the rotation by +120 degrees
    if c3_err(-axis) < c3_err(axis):
        axis = -axis
    R3 = _rotation(axis, 2 * np.pi / 3)
    c3_rms = c3_err(axis)
    # anchor the frame at the centroid's foot on the C3 axis, where the C2
    # axes cross it
    point = point + axis * ((p.mean(axis=0) - point) @ axis)
    if c3_rms > threshold:
        raise NoSymmetryError(f'no 3-fold symmetry: rms residual {c3_rms:.3g}')

    # reversal centre: coarse scan over [0, 1/6] then a bounded refine
    coarse = np.arange(64) / 384
    half = t[: samples // 2]
    errs = [_c2_rms(curve, s, half) for s in coarse]
    i = int(np.argmin(errs))
    res = optimize.minimize_scalar(lambda s: _c2_rms(curve, s, half),
                                   bounds=(coarse[i] - 1 / 384, coarse[i] + 1 / 384),
                                   method='bounded', options={'xatol': 1e-12})
    s0 = float(res.x) % (1.0 / 6.0)
    c2_rms = float(res.fun)
    if c2_rms > threshold:
        raise NoSymmetryError(f'no 2-fold symmetry: rms residual {c2_rms:.3g}')

    cands = (s0 + np.arange(6) / 6) % 1.0
    pts = np.atleast_2d(curve.evaluate(cands)) - point
    rad = np.linalg.norm(pts - np.outer(pts @ axis, axis), axis=1)
    best = np.flatnonzero(rad >= rad.max() - 1e-9 * scale)
    s_star = float(np.min(cands[best]))
    if s_star > 1 - 1e-12:
        s_star = 0.0

    pa = np.atleast_2d(curve.evaluate(s_star + half))
    pb = np.atleast_2d(curve.evaluate(s_star - half))
    R2, b2 = _fit(pa, pb)
    a2, _ = _axis_of(R2, b2)
    tilt = float(abs(np.pi / 2 - np.arccos(np.clip(abs(a2 @ axis), 0, 1))))
    a2 = a2 - axis * (a2 @ axis)
    a2 /= np.linalg.norm(a2)
    # all C2 axes pass through the C3 axis
    axes = np.array([a2, R3 @ a2, R3 @ R3 @ a2])
    return SymmetryFrame(axis, point, axes, np.tile(point, (3, 1)), s_star, c3_rms, c2_rms, tilt)


@dataclass(frozen=True)
class ShapeSymmetryReport:
    c3: float
    c2: tuple

    @property
    def max(self):
        return max(self.c3, *self.c2)

    def ok(self, tol):
        return self.max < tol


def verify_shape_symmetry(curve, frame: SymmetryFrame, samples: int = 1024) -> ShapeSymmetryReport:
    """Max point distances ``|R gamma(t) - gamma(t + 1/3)|`` for the C3 element
    and ``|R_k gamma(s_k + t) - gamma(s_k - t)|`` for the C2 elements, with
    ``s_k = s* + k/3``."""
    t = np.arange(samples) / samples
    c = frame.c3_point
    p = np.atleast_2d(curve.evaluate(t))
    q = np.atleast_2d(curve.evaluate(t + 1.0 / 3.0))
    c3 = float(np.max(np.linalg.norm((p - c) @ frame.c3_matrix().T + c - q, axis=1)))
    c2 = []
    for k in range(3):
        s = frame.s_star + k / 3.0
        a = np.atleast_2d(curve.evaluate(s + t))
        b = np.atleast_2d(curve.evaluate(s - t))
        ck = frame.c2_points[k]
        c2.append(float(np.max(np.linalg.norm((a - ck) @ frame.c2_matrix(k).T + ck - b, axis=1))))
    return ShapeSymmetryReport(c3, tuple(c2))


# ---------------------------------------------------------------------------

SIGMA_IDENTITIES = ('reversal_sigma', 'shift_sigma', 'reversal_tau', 'shift_tau')


@dataclass
class SigmaSymmetryReport:
    """Signed residuals (wrapped to ``[-1/2, 1/2)``) of

    * ``reversal_sigma``: ``sigma(s* + t) - (2 s* - tau(s* - t))``
    * ``shift_sigma``: ``sigma(t + 1/3) - (sigma(t) + 1/3)``
    * ``reversal_tau``: ``tau(s* + t) - (2 s* - sigma(s* - t))``
    * ``shift_tau``: ``tau(t + 1/3) - (tau(t) + 1/3)``
    """
    s_star: float
    grid: np.ndarray
    residuals: dict
    names: tuple = SIGMA_IDENTITIES

    @property
    def max(self):
        return {k: float(np.max(np.abs(v))) for k, v in self.residuals.items()}

    def ok(self, tol):
        return all(v < tol for v in self.max.values())


def _wrap(x):
    return np.mod(x + 0.5, 1.0) - 0.5


def verify_sigma_symmetry(cf, s_star: float = 0.0, grid: int = 512) -> SigmaSymmetryReport:
    t = np.arange(grid) / grid
    sl, tl = cf.sigma_lift, cf.tau_lift
    third = 1.0 / 3.0
    res = {
        'reversal_sigma': _wrap(sl(s_star + t) - 2 * s_star + tl(s_star - t)),
        'shift_sigma': _wrap(sl(t + third) - sl(t) - third),
        'reversal_tau': _wrap(tl(s_star + t) - 2 * s_star + sl(s_star - t)),
        'shift_tau': _wrap(tl(t + third) - tl(t) - third),
    }
    return SigmaSymmetryReport(float(s_star), t, res)


def reflection_residual(points, s_star: float = 0.0) -> float:
    """Largest distance from ``2 s* - p`` to the nearest point of the set."""
    p = np.asarray(points, float)
    if len(p) == 0:
        return 0.0
    m = np.mod(2 * s_star - p, 1.0)
    return float(np.max(np.min(circle_distance(m[:, None], p[None, :]), axis=1)))


def shift_residual(points, shift: float = 1.0 / 3.0) -> float:
    """Largest distance from ``p + shift`` to the nearest point of the set."""
    p = np.asarray(points, float)
    if len(p) == 0:
        return 0.0
    m = np.mod(p + shift, 1.0)
    return float(np.max(np.min(circle_distance(m[:, None], p[None, :]), axis=1)))
