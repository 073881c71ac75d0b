"""Acceptance criteria, one test per criterion.

Each test records a one-line verdict; the lines are printed in the pytest
terminal summary (and directly when this file is run as a script).

The published k3_1 point-tangent data is looked up through the
``KNOTCYCLE_K31`` environment variable (a ``.pkf`` or ``.pt`` file). Without
it criterion 3 is SKIPPED and criteria 4-8 run on the bundled synthetic
reconstruction with every tolerance multiplied by ``RELAX``; those lines are
labelled accordingly. Criterion 9 runs on whichever trefoil is available at
its stated tolerances.
"""

import os
import time

import numpy as np
import pytest

from knotcycle import contact, cycles, io
from knotcycle.curve import (FourierCurve, PolyCurve, biarc_interpolate, circle_distance,
                             circumradius, reparameterize_constant_speed)
from knotcycle.thickness import thickness, thickness_bruteforce

K31 = os.environ.get('KNOTCYCLE_K31')
RELAX = 1 if K31 else 5
LABEL = 'k3_1 data' if K31 else f'synthetic reconstruction, tolerances x{RELAX}'

PAPER_DELTA = 0.030539753
PAPER_ROPE = 32.744208
PAPER_NINE = np.array([0, 0.159, 0.175, 0.334, 0.492, 0.508, 0.667, 0.826, 0.841])

RESULTS = {}


def record(k, title, ok, detail, status=None):
    status = status or ('PASS' if ok else 'FAIL')
    RESULTS[k] = f'[{status}] {k:>2}. {title}: {detail}'
    return ok


def verdict_lines():
    return [RESULTS[k] for k in sorted(RESULTS)]


# ---------------------------------------------------------------------------
# inputs

def _load_k31():
    data = io.read_point_tangent(K31, pkf=K31.endswith('.pkf'))
    return data, biarc_interpolate(data)


@pytest.fixture(scope='module')
def curve():
    if K31:
        return _load_k31()[1]
    return io.bundled_trefoil()


@pytest.fixture(scope='module')
def report(curve):
    return thickness(curve)


@pytest.fixture(scope='module')
def cf(curve):
    return contact.trace_contact(curve, n=999)


@pytest.fixture(scope='module')
def scan(cf):
    return cycles.detect_cycles(cf, 30)


@pytest.fixture(scope='module')
def b9(scan):
    att = [c for c in cycles.minimal_cycles(scan, 9) if c.stability == 'attracting']
    return att[0] if att else None


# ---------------------------------------------------------------------------

def test_c01_circle_exactness():
    t0 = time.perf_counter()
    worst = [0.0, 0.0, 0.0]
    for r in (0.5, 1.0, 3.0):
        c = FourierCurve.circle(r)
        rep = thickness(c)
        k = c.curvature(np.arange(256) / 256)
        worst[0] = max(worst[0], abs(rep.delta - r))
        worst[1] = max(worst[1], abs(rep.ropelength - 2 * np.pi))
        worst[2] = max(worst[2], float(np.max(np.abs(k * rep.delta - 1))))
    dt = time.perf_counter() - t0
    ok = worst[0] < 1e-9 and worst[1] < 1e-9 and worst[2] < 1e-9 and dt < 1.0
    record(1, 'circle exactness', ok,
           f'|delta-r| {worst[0]:.1e}, |rope-2pi| {worst[1]:.1e}, |kappa*delta-1| '
           f'{worst[2]:.1e} (tol 1e-9), {dt:.2f} s (< 1 s)')
    assert ok


def test_c02_bruteforce_oracle():
    curves = {
        'ellipse': FourierCurve.ellipse(3.0, 1.0),
        'thin ellipse': FourierCurve.ellipse(10.0, 0.5),
        'two-harmonic': FourierCurve.two_harmonic(),
        'standard trefoil': FourierCurve.standard_trefoil(),
        'peanut': FourierCurve.peanut(),
        'circle': FourierCurve.circle(1.5),
    }
    n = 256
    t0 = time.perf_counter()
    ratios = {}
    for name, c in curves.items():
        a = thickness(c).delta
        b = thickness_bruteforce(c, n).delta
        ratios[name] = abs(a - b) / (2 * c.arclength / n)
    dt = time.perf_counter() - t0
    ok = max(ratios.values()) <= 1.0 and dt < 120
    record(2, 'brute-force oracle', ok,
           f'{len(curves)} curves, worst |decomposed-oracle| = {max(ratios.values()):.3f} x slack '
           f'2L/{n}, {dt:.1f} s (< 120 s)')
    assert ok


def test_c03_published_data():
    if not K31:
        record(3, 'published k3_1 data', True, 'dataset not available (set KNOTCYCLE_K31); '
               'criteria 4-8 use the synthetic reconstruction', status='SKIPPED')
        pytest.skip('k3_1 dataset not available')
    data, bc = _load_k31()
    rep = thickness(bc)
    ok = (len(data) == 333 and abs(rep.delta - PAPER_DELTA) <= 1e-6
          and abs(rep.ropelength - PAPER_ROPE) <= 1e-3)
    record(3, 'published k3_1 data', ok, f'{len(data)} nodes, delta {rep.delta:.9f}, '
           f'ropelength {rep.ropelength:.6f}')
    assert ok


def test_c04_contact_function(curve, report, cf):
    tt, d = contact.pp_surface(curve, 512)
    lm = np.ones_like(d, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                lm &= d <= np.roll(np.roll(d, di, 0), dj, 1)
    far = circle_distance(tt[:, None], tt[None, :]) > 2 * report.delta / report.arclength + 0.01
    i, j = np.argwhere(lm & far)[np.argmin(d[lm & far])]
    # polish the grid minimum
    from knotcycle.thickness import _newton_pair
    _, s, t = _newton_pair(curve, tt[i], tt[j])
    e_pp = abs(contact.pp(curve, s, t) - 2 * report.delta)
    r = np.random.default_rng(2024).random(100)
    e_inv = float(np.max(circle_distance(contact.tau_eval(cf, contact.sigma_eval(cf, r)), r)))
    g = np.arange(512) / 512
    e_shift = float(np.max(np.abs(cf.sigma_lift(g + 1 / 3) - cf.sigma_lift(g) - 1 / 3)))
    ok = e_pp < 1e-4 * RELAX and e_inv < 1e-9 * RELAX and e_shift < 2e-3 * RELAX
    record(4, f'contact function [{LABEL}]', ok,
           f'|min pp - 2 delta| {e_pp:.1e} (tol {1e-4 * RELAX:g}), tau(sigma) {e_inv:.1e} '
           f'(tol {1e-9 * RELAX:g}), shift {e_shift:.1e} (tol {2e-3 * RELAX:g})')
    assert ok


def test_c05_nine_cycle(cf, b9):
    s9 = float(circle_distance(contact.iterate_sigma(cf, 0.0, 9), 0.0))
    if b9 is None:
        record(5, f'nine-cycle [{LABEL}]', False, 'no attracting 9-cycle found')
        pytest.fail('no 9-cycle')
    pts = np.sort(np.asarray(b9.params))
    e_pts = float(np.max(circle_distance(pts[:, None], PAPER_NINE[None, :]).min(axis=1)))
    i0 = int(np.argmin(circle_distance(np.asarray(b9.params), 0.0)))
    order = cycles.cycle_ordering(b9.rotated(i0))
    ok = s9 < 2e-3 * RELAX and e_pts < 5e-3 * RELAX and order == cycles.NINE_ORDER
    record(5, f'nine-cycle [{LABEL}]', ok,
           f'sigma^9(0) {s9:.2e} (tol {2e-3 * RELAX:g}), points vs published {e_pts:.1e} '
           f'(tol {5e-3 * RELAX:g}), order {order}')
    assert ok


def test_c06_exclusions(cf, scan):
    excluded = (2, 7, 11, 13, 16, 20, 25)
    hits = [n for n in excluded if any(c.n == n for c in scan)]
    c18 = [c for c in scan if c.n == 18]
    nine_ids = {c.id for c in scan if c.n == 9 and c.minimal}
    only_mult = bool(c18) and all((not c.minimal) and c.multiple_of in nine_ids for c in c18)
    groups = cycles.touch_groups(scan, tol=2e-3 * RELAX)
    single = len(groups) == 1 and groups[0][0].n == 9
    bad = [n for n in range(1, 31)
           if not cycles.counting_check(cycles.fixed_points(cf, n), scan, n).holds]
    ok = not hits and only_mult and single and not bad
    record(6, f'cycle exclusions [{LABEL}]', ok,
           f'cycles at excluded n: {hits or "none"}; n=18: {len(c18)} cycle(s), all multiples of '
           f'the 9-cycle(s): {only_mult}; minimal cycles {len(cycles.minimal_cycles(scan))} '
           f'in {len(groups)} touch group(s); counting fails at {bad or "no n <= 30"}')
    assert ok


def test_c07_piece_chain(cf, b9):
    part = cycles.partition(b9)
    rep = cycles.piece_map_check(cf, part, tol=2e-3 * RELAX)
    ok = rep.chain == cycles.NINE_CHAIN and rep.max_endpoint_residual < 2e-3 * RELAX
    record(7, f'piece-to-piece chain [{LABEL}]', ok,
           f'chain {"matches" if rep.chain == cycles.NINE_CHAIN else rep.chain}, max endpoint '
           f'residual {rep.max_endpoint_residual:.1e} (tol {2e-3 * RELAX:g})')
    assert ok


def test_c08_attractor(cf, scan, b9):
    tol = 2e-3 * RELAX
    rep = cycles.attractor_report(cf, b9, grid=64, iters=150)
    # each touch of sigma^9 with the diagonal may be split into an
    # attracting point a and a repelling point r nearby; starts between two
    # touches must reach the next attracting point from the left, starts
    # inside a split touch [a, r] are already at the touch
    group = next(g for g in cycles.touch_groups(scan, tol=tol) if g[0].id == b9.id)
    spans = cycles.touch_intervals(group)
    inside = np.zeros(64, dtype=bool)
    target = np.empty(64)
    for j, s in enumerate(rep.starts):
        d = np.mod(s - spans[:, 0], 1.0)
        k = int(np.argmin(d))
        if d[k] <= spans[k, 1] - spans[k, 0]:
            inside[j] = True
            target[j] = spans[k, 0] + round(s - spans[k, 0])
        else:
            nxt = (k + 1) % len(spans)
            target[j] = spans[nxt, 0] + np.ceil(s - spans[nxt, 0])
    dist = np.abs(rep.positions - target[:, None])
    reached = np.array([np.any(dist[j] < tol) and np.all(dist[j, np.argmax(dist[j] < tol):] < tol)
                        for j in range(64)])
    outside_right = reached[~inside].all()
    sup_dec = bool(np.all(np.diff(rep.sup_trace) <= 1e-15))
    m = rep.median_trace
    med_dec = m[1] > m[10] > m[100] or (m[1] > m[10] > 0 and m[100] == 0)
    ok = bool(rep.monotone.all()) and outside_right and reached.all() and sup_dec and med_dec
    record(8, f'attractor [{LABEL}]', ok,
           f'monotone {int(rep.monotone.sum())}/64, reach right endpoint within {tol:g} by i<=150: '
           f'{int(reached[~inside].sum())}/{int((~inside).sum())} (+{int(inside.sum())} starting '
           f'inside a split touch), sup trace non-increasing {sup_dec}, median '
           f'{m[1]:.1e} > {m[10]:.1e} > {m[100]:.1e}')
    assert ok


def test_c09_curvature_profile(curve, report, b9):
    src = 'k3_1 data' if K31 else 'synthetic reconstruction, stated tolerances'
    t = np.arange(24000) / 24000
    kd = np.atleast_1d(curve.curvature(t)) * report.delta
    in_range = kd.min() >= 0 and kd.max() <= 1 + 1e-3
    part = cycles.partition(b9)
    s7, s5 = part.s(7), part.s(5)
    third = t < 1 / 3
    tt, kk = t[third], kd[third]
    lm = (kk >= np.roll(kk, 1)) & (kk >= np.roll(kk, -1)) & (kk > kk.max() - 1e-3)
    peaks = tt[lm]
    e_peak = max(float(np.min(circle_distance(peaks, s7))), float(np.min(circle_distance(peaks, s5))))
    # symmetry centre of the profile between s7 and s5 (the reversal about
    # s* = 0 is another, trivial, centre)
    cands = np.linspace(s7, s5, 801)
    u = np.linspace(0, 1 / 6, 400)
    mis = [np.max(np.abs(curve.curvature(c + u) - curve.curvature(c - u))) for c in cands]
    centre = float(cands[int(np.argmin(mis))])
    e_sym = float(circle_distance(centre, 0.5 * (s7 + s5)))
    ok = in_range and e_peak < 5e-3 and e_sym < 2e-3
    record(9, f'curvature profile [{src}]', ok,
           f'kappa*delta in [{kd.min():.3f}, {kd.max():.6f}] (<= 1+1e-3); peaks '
           f'{", ".join(f"{p:.4f}" for p in peaks)} vs s7 {s7:.4f}, s5 {s5:.4f}: offset '
           f'{e_peak:.1e} (tol 5e-3); symmetry centre {centre:.4f} vs midpoint '
           f'{0.5 * (s7 + s5):.4f}: {e_sym:.1e} (tol 2e-3)')
    assert ok


def test_c10_property_suite(tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    from scipy.spatial.transform import Rotation
    perm_ok = rigid_ok = True
    for _ in range(300):
        x, y, z = rng.normal(size=(3, 3))
        r = circumradius(x, y, z)
        perm_ok &= all(circumradius(*p) == r for p in [(x, z, y), (y, x, z), (y, z, x),
                                                       (z, x, y), (z, y, x)])
        R = Rotation.random(random_state=rng).as_matrix()
        b = rng.normal(size=3)
        rigid_ok &= abs(circumradius(R @ x + b, R @ y + b, R @ z + b) - r) <= 1e-9 * r
    mono_ok = True
    for _ in range(100):
        b = np.arange(201) / 200
        v = b + rng.random() + rng.uniform(-0.9, 0.9) * np.sin(2 * np.pi * b) / (2 * np.pi)
        cf = contact.ContactFunction(b, v)
        x = np.sort(rng.random(100))
        mono_ok &= bool(np.all(np.diff(cf.sigma_lift(x)) > 0))
    io_ok = True
    for k in range(200):
        n = int(rng.integers(8, 30))
        pts = rng.normal(size=(n, 3))
        tan = rng.normal(size=(n, 3))
        pc = PolyCurve.from_points(pts, tan / np.linalg.norm(tan, axis=1, keepdims=True))
        io.write_point_tangent(tmp_path / 'p.pt', pc)
        back = io.read_point_tangent(tmp_path / 'p.pt')
        io_ok &= np.array_equal(back.points, pc.points) and np.array_equal(back.tangents, pc.tangents)
        fc = FourierCurve(rng.normal(size=3), rng.normal(size=(3, 3)), rng.normal(size=(3, 3)))
        io.write_fourier(tmp_path / 'f.fourier', fc)
        f2 = io.read_fourier(tmp_path / 'f.fourier')
        io_ok &= np.array_equal(f2.a, fc.a) and np.array_equal(f2.b, fc.b)
    rp = reparameterize_constant_speed(FourierCurve.standard_trefoil(), 300)
    idem = float(np.max(np.abs(reparameterize_constant_speed(rp, 300).points - rp.points)))
    dt = time.perf_counter() - t0
    ok = perm_ok and rigid_ok and mono_ok and io_ok and idem < 1e-8 and dt < 30
    record(10, 'property suite', ok,
           f'circumradius permutation {perm_ok}, rigid motion {rigid_ok}, lift monotone {mono_ok}, '
           f'IO round trip {io_ok}, reparameterisation drift {idem:.1e} (tol 1e-8), '
           f'{dt:.1f} s (< 30 s)')
    assert ok


if __name__ == '__main__':
    pytest.main([__file__, '-q'])
