"""Plain-text curve formats and CSV exports.

Point-tangent files (``.pt``)::

    # comment lines start with '#'
    PT 1
    NAME k3_1
    NODES 333
    x y z tx ty tz        (one node per line)

Fourier coefficient files (``.fourier``)::

    FOURIER 1
    NAME trefoil
    HARMONICS m
    CONST cx cy cz
    ax ay az bx by bz     (harmonic j = 1..m, one per line)

Numbers are written with 17 significant digits so a write/read round trip
is exact for 64-bit floats. All output is UTF-8 with LF line endings.
"""

from __future__ import annotations

import csv
import io as _io
import logging
import os
from importlib import resources

import numpy as np

from .curve import FourierCurve, PolyCurve

log = logging.getLogger(__name__)

MIN_NODES = 8


class ParseError(ValueError):
    def __init__(self, message, path=None, line=None):
        where = ''
        if path is not None:
            where += f'{path}'
        if line is not None:
            where += f':{line}'
        super().__init__(f'{where}: {message}' if where else message)
        self.line = line


def _fmt(x):
    return format(float(x), '.17g')


def _lines(path):
    with open(path, encoding='utf-8') as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith('#'):
                yield no, line


def _floats(tokens, path, no, count=None):
    try:
        vals = [float(x) for x in tokens]
    except ValueError:
        raise ParseError('expected numbers', path, no) from None
    if count is not None and len(vals) != count:
        raise ParseError(f'expected {count} numbers, got {len(vals)}', path, no)
    if not all(np.isfinite(vals)):
        raise ParseError('non-finite value', path, no)
    return vals


# ---------------------------------------------------------------------------
# point-tangent data

def write_point_tangent(path, curve: PolyCurve, name: str = ''):
    """Write node points and tangents. Parameters are implicit (``i/n``)."""
    out = ['PT 1']
    if name:
        out.append(f'NAME {name}')
    out.append(f'NODES {len(curve.points)}')
    for p, t in zip(curve.points, curve.tangents):
        out.append(' '.join(_fmt(v) for v in (*p, *t)))
    _write_text(path, '\n'.join(out) + '\n')


def read_point_tangent(path, pkf: bool = False) -> PolyCurve:
    """Read a point-tangent file into a :class:`PolyCurve` with nodes at
    ``i/n``. Tangents are normalised (with a warning if they were not unit).

    ``pkf=True`` switches to a best-effort reader for libbiarc PKF files;
    it only relies on a ``NODES n`` header followed by ``6 n`` numbers.
    """
    if pkf:
        pts, tans = _read_pkf(path)
    else:
        pts, tans = _read_pt(path)
    if len(pts) < MIN_NODES:
        raise ParseError(f'need at least {MIN_NODES} nodes, found {len(pts)}', path)
    pts = np.array(pts)
    tans = np.array(tans)
    norms = np.linalg.norm(tans, axis=1)
    if np.any(norms == 0):
        raise ParseError(f'zero tangent at node {int(np.argmin(norms))}', path)
    if np.max(np.abs(norms - 1)) > 1e-9:
        log.warning('%s: tangents are not unit length; normalising', path)
    return PolyCurve.from_points(pts, tans)


def _read_pt(path):
    it = _lines(path)
    try:
        no, head = next(it)
    except StopIteration:
        raise ParseError('empty file', path) from None
    if head.split()[0] != 'PT':
        raise ParseError("missing 'PT' header", path, no)
    count = None
    pts, tans = [], []
    for no, line in it:
        tok = line.split()
        key = tok[0].upper()
        if key == 'NAME':
            continue
        if key == 'NODES':
            if len(tok) != 2 or not tok[1].isdigit():
                raise ParseError('bad NODES line', path, no)
            count = int(tok[1])
            continue
        v = _floats(tok, path, no, 6)
        pts.append(v[:3])
        tans.append(v[3:])
    if count is not None and count != len(pts):
        raise ParseError(f'NODES says {count} but {len(pts)} records found', path)
    return pts, tans


def _read_pkf(path):
    count = None
    nums = []
    for no, line in _lines(path):
        tok = line.split()
        key = tok[0].upper()
        if key == 'NODES' and len(tok) >= 2:
            count = int(tok[1])
            continue
        if count is None:
            continue
        if key == 'END':
            break
        try:
            nums.extend(float(x) for x in tok)
        except ValueError:
            # tagged lines such as 'X 1 2 3': keep the numeric tail
            try:
                nums.extend(float(x) for x in tok[1:])
            except ValueError:
                raise ParseError('unreadable node record', path, no) from None
    if count is None:
        raise ParseError("no 'NODES' header", path)
    if len(nums) < 6 * count:
        raise ParseError(f'expected {6 * count} numbers after NODES, got {len(nums)}', path)
    arr = np.array(nums[:6 * count]).reshape(count, 6)
    return list(arr[:, :3]), list(arr[:, 3:])


# ---------------------------------------------------------------------------
# Fourier coefficients

def write_fourier(path, fc: FourierCurve, name: str = ''):
    out = ['FOURIER 1']
    if name:
        out.append(f'NAME {name}')
    out.append(f'HARMONICS {fc.harmonics}')
    out.append('CONST ' + ' '.join(_fmt(v) for v in fc.constant))
    for a, b in zip(fc.a, fc.b):
        out.append(' '.join(_fmt(v) for v in (*a, *b)))
    _write_text(path, '\n'.join(out) + '\n')


def read_fourier(path) -> FourierCurve:
    """Read a coefficient file.

    Files without the ``FOURIER`` header are read experimentally as an
    optional line of 3 numbers (the constant) followed by lines of 6
    numbers (cosine triple, sine triple) for harmonics 1, 2, ...
    """
    it = list(_lines(path))
    if not it:
        raise ParseError('empty file', path)
    no, head = it[0]
    if head.split()[0] != 'FOURIER':
        return _read_fourier_bare(path, it)
    m = None
    const = None
    rows = []
    for no, line in it[1:]:
        tok = line.split()
        key = tok[0].upper()
        if key == 'NAME':
            continue
        if key == 'HARMONICS':
            m = int(tok[1])
        elif key == 'CONST':
            const = _floats(tok[1:], path, no, 3)
        else:
            rows.append(_floats(tok, path, no, 6))
    if const is None:
        raise ParseError("missing 'CONST' line", path)
    if not rows:
        raise ParseError('no harmonics', path)
    if m is not None and m != len(rows):
        raise ParseError(f'HARMONICS says {m} but {len(rows)} rows found', path)
    rows = np.array(rows)
    return FourierCurve(const, rows[:, :3], rows[:, 3:])


def _read_fourier_bare(path, lines):
    const = np.zeros(3)
    rows = []
    for k, (no, line) in enumerate(lines):
        tok = line.split()
        if k == 0 and len(tok) == 3:
            const = np.array(_floats(tok, path, no, 3))
            continue
        rows.append(_floats(tok, path, no, 6))
    if not rows:
        raise ParseError('no harmonics', path)
    rows = np.array(rows)
    return FourierCurve(const, rows[:, :3], rows[:, 3:])


def bundled_trefoil() -> FourierCurve:
    """The symmetric Fourier trefoil reconstruction shipped with the package."""
    ref = resources.files('knotcycle') / 'data' / 'trefoil_d3.fourier'
    with resources.as_file(ref) as p:
        return read_fourier(p)


# ---------------------------------------------------------------------------
# tables

def _write_text(path, text):
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(text)


def csv_text(header, rows, comments=()):
    buf = _io.StringIO()
    for c in comments:
        buf.write(f'# {c}\n')
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, comments=()):
    _write_text(path, csv_text(header, rows, comments))


EXPORT_KINDS = ('sigma_n_graph', 'pp_surface', 'curvature_profile', 'attractor_trace',
                'fixed_points', 'orbit', 'symmetry_residuals')


def export_table(kind, path=None, **data):
    """Write the plot table ``kind`` to ``path`` (or return it as text).

    Required keyword data per kind:

    * ``sigma_n_graph``: ``cf``, ``n``, optional ``grid`` (default 2048)
    * ``pp_surface``: ``curve``, optional ``grid`` (default 256)
    * ``curvature_profile``: ``curve``, ``delta``, optional ``grid``
    * ``attractor_trace``: ``report`` (an ``AttractorReport``)
    * ``fixed_points``: ``sets`` (iterable of ``FixedPointSet``)
    * ``orbit``: ``orbit`` (lift values)
    * ``symmetry_residuals``: ``report`` (a ``SigmaSymmetryReport``)
    """
    from . import contact

    if kind == 'sigma_n_graph':
        cf, n = data['cf'], int(data['n'])
        t = np.arange(data.get('grid', 2048)) / data.get('grid', 2048)
        y = contact.iterate_lift(cf, t, n)
        k = np.round(np.median(y - t))
        rows = [(a, b % 1.0, b - a - k) for a, b in zip(t, y)]
        text = csv_text(['t', 'sigma_n', 'lift_minus_identity'], rows,
                        [f'n={n}', f'winding={int(k)}'])
    elif kind == 'pp_surface':
        t, d = contact.pp_surface(data['curve'], int(data.get('grid', 256)))
        rows = [(t[i], t[j], d[i, j]) for i in range(len(t)) for j in range(len(t))]
        text = csv_text(['s', 't', 'pp'], rows)
    elif kind == 'curvature_profile':
        curve, delta = data['curve'], float(data['delta'])
        g = int(data.get('grid', 3000))
        t = np.arange(g) / g
        k = np.atleast_1d(curve.curvature(t))
        text = csv_text(['t', 'kappa', 'kappa_delta'], zip(t, k, k * delta),
                        [f'delta={_fmt(delta)}'])
    elif kind == 'attractor_trace':
        rep = data['report']
        rows = []
        for j, s in enumerate(rep.starts):
            for i, d in enumerate(rep.displacements[j]):
                rows.append((s, i, d))
        text = csv_text(['start', 'i', 'displacement'], rows)
    elif kind == 'fixed_points':
        rows = []
        for fs in data['sets']:
            rows += fs.rows()
        text = csv_text(['n', 't', 'residual', 'type'], rows)
    elif kind == 'orbit':
        text = csv_text(['i', 't_lift'], enumerate(np.asarray(data['orbit'], float)))
    elif kind == 'symmetry_residuals':
        rep = data['report']
        rows = [(name, t, r) for name in rep.names for t, r in zip(rep.grid, rep.residuals[name])]
        text = csv_text(['identity', 't', 'residual'], rows)
    else:
        raise ValueError(f'unknown export kind {kind!r}; choose from {", ".join(EXPORT_KINDS)}')
    if path is None:
        return text
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    _write_text(path, text)
    return path
