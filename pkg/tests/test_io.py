import logging

import numpy as np
import pytest

from knotcycle import cycles, io
from knotcycle.curve import FourierCurve, PolyCurve, fourier_to_poly
from knotcycle.io import ParseError
from knotcycle.symmetry import verify_sigma_symmetry
from knotcycle.thickness import thickness


def random_poly(rng, n):
    u = np.sort(rng.random(n))
    pts = np.column_stack([np.cos(2 * np.pi * u), np.sin(2 * np.pi * u), rng.normal(size=n)])
    pts *= rng.lognormal(size=(1, 3))
    tan = rng.normal(size=(n, 3))
    return PolyCurve.from_points(pts, tan / np.linalg.norm(tan, axis=1, keepdims=True))


def test_point_tangent_roundtrip_many(tmp_path):
    rng = np.random.default_rng(7)
    path = tmp_path / 'c.pt'
    for k in range(1000):
        pc = random_poly(rng, int(rng.integers(8, 40)))
        io.write_point_tangent(path, pc, name=f'c{k}')
        back = io.read_point_tangent(path)
        assert np.array_equal(back.points, pc.points)
        assert np.array_equal(back.tangents, pc.tangents)


def test_fourier_roundtrip_many(tmp_path):
    rng = np.random.default_rng(8)
    path = tmp_path / 'c.fourier'
    for _ in range(1000):
        m = int(rng.integers(1, 6))
        fc = FourierCurve(rng.normal(size=3), rng.normal(size=(m, 3)), rng.normal(size=(m, 3)))
        io.write_fourier(path, fc)
        back = io.read_fourier(path)
        assert np.array_equal(back.a, fc.a) and np.array_equal(back.b, fc.b)
        assert np.array_equal(back.constant, fc.constant)


def test_bundled_roundtrip(tmp_path, trefoil):
    io.write_fourier(tmp_path / 't.fourier', trefoil, name='t')
    assert np.array_equal(io.read_fourier(tmp_path / 't.fourier').a, trefoil.a)


def test_comments_and_normalisation(tmp_path, caplog):
    pc = fourier_to_poly(FourierCurve.circle(), 12)
    lines = ['# a comment', 'PT 1', 'NODES 12']
    lines += [' '.join(map(str, (*p, *(3 * t)))) for p, t in zip(pc.points, pc.tangents)]
    (tmp_path / 'c.pt').write_text('\n'.join(lines) + '\n')
    with caplog.at_level(logging.WARNING):
        back = io.read_point_tangent(tmp_path / 'c.pt')
    assert 'not unit' in caplog.text
    assert np.allclose(np.linalg.norm(back.tangents, axis=1), 1)


def test_errors(tmp_path):
    p = tmp_path / 'bad.pt'
    p.write_text('')
    with pytest.raises(ParseError, match='empty'):
        io.read_point_tangent(p)
    pc = fourier_to_poly(FourierCurve.circle(), 7 + 1)
    io.write_point_tangent(p, pc)
    good = p.read_text().splitlines()
    text = list(good)
    text[4] = '1 2 three 4 5 6'
    p.write_text('\n'.join(text) + '\n')
    with pytest.raises(ParseError) as e:
        io.read_point_tangent(p)
    assert e.value.line == 5
    p.write_text('PT 1\n' + '\n'.join(['1 0 0 0 1 0', '0 1 0 1 0 0'] * 3) + '\n')
    with pytest.raises(ParseError, match='at least 8'):
        io.read_point_tangent(p)
    p.write_text('PT 1\nNODES 9\n' + '\n'.join(good[2:]) + '\n')
    with pytest.raises(ParseError, match='NODES says'):
        io.read_point_tangent(p)
    q = tmp_path / 'bad.fourier'
    q.write_text('')
    with pytest.raises(ParseError):
        io.read_fourier(q)
    q.write_text('FOURIER 1\nHARMONICS 1\n1 0 0 0 1 0\n')
    with pytest.raises(ParseError, match='CONST'):
        io.read_fourier(q)


def test_pkf_best_effort(tmp_path):
    pc = fourier_to_poly(FourierCurve.standard_trefoil(), 333)
    rows = [' '.join(f'{v:.17g}' for v in (*p, *t)) for p, t in zip(pc.points, pc.tangents)]
    text = 'PKF 0.2\nETIC\nETXT\nHIST\nNODES 333\n' + '\n'.join('X ' + r for r in rows) + '\nEND\n'
    (tmp_path / 'k.pkf').write_text(text)
    back = io.read_point_tangent(tmp_path / 'k.pkf', pkf=True)
    assert len(back) == 333
    assert np.allclose(back.points, pc.points)


def test_bare_fourier(tmp_path):
    (tmp_path / 'k.3').write_text('0 0 0\n1 0 0 0 1 0\n')
    fc = io.read_fourier(tmp_path / 'k.3')
    assert fc.arclength == pytest.approx(2 * np.pi)


def test_truncation_converges(trefoil):
    m = trefoil.harmonics
    ks = [m // 8, m // 4, m // 2, m]
    diffs = [abs(trefoil.truncated(k).arclength - trefoil.arclength) for k in ks]
    assert all(a > b for a, b in zip(diffs, diffs[1:]))


# exports -------------------------------------------------------------------

def test_curvature_profile_circle():
    text = io.export_table('curvature_profile', curve=FourierCurve.circle(2.0), delta=2.0, grid=64)
    rows = [r.split(',') for r in text.splitlines() if not r.startswith('#')]
    assert rows[0] == ['t', 'kappa', 'kappa_delta']
    assert np.allclose([float(r[2]) for r in rows[1:]], 1.0)


def test_exports_deterministic_lf(tmp_path, trefoil_cf):
    a = io.export_table('sigma_n_graph', tmp_path / 'a.csv', cf=trefoil_cf, n=9)
    b = io.export_table('sigma_n_graph', tmp_path / 'b.csv', cf=trefoil_cf, n=9)
    ba, bb = open(a, 'rb').read(), open(b, 'rb').read()
    assert ba == bb and b'\r' not in ba


def test_sigma_n_graph_touch(trefoil_cf):
    text = io.export_table('sigma_n_graph', cf=trefoil_cf, n=9)
    data = np.array([[float(x) for x in r.split(',')] for r in text.splitlines()[3:]])
    assert np.min(np.abs(data[:, 2])) < 2e-3


def test_pp_surface_minimum(trefoil, trefoil_report):
    text = io.export_table('pp_surface', curve=trefoil, grid=400)
    lines = text.splitlines()
    assert lines[0] == 's,t,pp'
    d = np.array([float(r.rsplit(',', 1)[1]) for r in lines[1:]]).reshape(400, 400)
    t = np.arange(400) / 400
    far = np.abs((t[:, None] - t[None, :] + 0.5) % 1 - 0.5) > 0.1
    lm = np.ones_like(d, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                lm &= d <= np.roll(np.roll(d, di, 0), dj, 1)
    assert d[lm & far].min() == pytest.approx(2 * trefoil_report.delta, abs=1e-4)


def test_other_exports(trefoil_cf, nine_cycle):
    fps = cycles.fixed_points(trefoil_cf, 9)
    t = io.export_table('fixed_points', sets=[fps])
    assert t.splitlines()[0] == 'n,t,residual,type' and len(t.splitlines()) >= 19
    t = io.export_table('orbit', orbit=cycles.attractor_orbit(trefoil_cf, 0.05, 5))
    assert t.splitlines()[0] == 'i,t_lift'
    rep = cycles.attractor_report(trefoil_cf, nine_cycle, iters=5)
    t = io.export_table('attractor_trace', report=rep)
    assert t.splitlines()[0] == 'start,i,displacement' and len(t.splitlines()) == 1 + 64 * 5
    t = io.export_table('symmetry_residuals', report=verify_sigma_symmetry(trefoil_cf, grid=16))
    assert t.splitlines()[0] == 'identity,t,residual' and len(t.splitlines()) == 1 + 4 * 16
    with pytest.raises(ValueError):
        io.export_table('surface3d')


def test_bundled_thickness_matches_header(trefoil):
    # unit arclength, as written by the reconstruction tool
    assert trefoil.arclength == pytest.approx(1.0, abs=1e-9)
    assert thickness(trefoil).delta > 0
