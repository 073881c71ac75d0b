"""Command line front end.

    knotcycle thickness --kind synthetic-trefoil
    knotcycle contact   --input k3_1.pt --n 999
    knotcycle cycles    --kind synthetic-trefoil --n-max 30
    knotcycle attractor --kind synthetic-trefoil --start 0.05
    knotcycle symmetry  --kind synthetic-trefoil
    knotcycle export    --kind synthetic-trefoil --table sigma_n_graph --power 9
    knotcycle generate  --shape standard-trefoil --out trefoil.fourier

Settings come from flags, then a JSON ``--config`` file, then defaults.
Tables go to ``--out-dir`` (default: ``$KNOTCYCLE_OUT_DIR`` or the current
directory). Exit status is 0 on success, 1 when an analysis fails and 2 for
usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import contact, cycles, io, symmetry
from .curve import (BiarcError, DegenerateCurveError, FourierCurve, biarc_interpolate,
                    fourier_to_poly)
from .thickness import classify_point, thickness

log = logging.getLogger('knotcycle')

OUT_ENV = 'KNOTCYCLE_OUT_DIR'
KINDS = ('pt', 'fourier', 'synthetic-trefoil', 'circle')
SHAPES = ('trefoil-d3', 'standard-trefoil', 'circle', 'ellipse')


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ''
    input: str | None = None
    kind: str | None = None
    pkf: bool = False
    radius: float = 1.0
    n: int = 999
    window: float = 0.02
    tol: float = 1e-4
    touch_tol: float = cycles.TOUCH_TOL
    branch: str = 'sigma'
    n_max: int = 30
    out_dir: str | None = None
    format: str = 'csv'
    grid: int = 64
    iters: int = 150
    start: float | None = None
    census: int = 120
    pp_grid: int = 128
    table: tuple = ()
    power: int = 9
    shape: str = 'trefoil-d3'
    out: str | None = None
    nodes: int = 333

    def validate(self):
        if self.kind is None:
            self.kind = 'synthetic-trefoil' if self.input is None else _guess_kind(self.input)
        if self.kind not in KINDS:
            raise UsageError(f'--kind must be one of {", ".join(KINDS)}')
        if self.kind in ('pt', 'fourier') and self.input is None:
            raise UsageError(f'--kind {self.kind} needs --input')
        if self.n < 64:
            raise UsageError('--n must be at least 64')
        if not 0 < self.window < 0.25:
            raise UsageError('--window must lie in (0, 0.25)')
        if self.tol <= 0 or self.touch_tol <= 0:
            raise UsageError('tolerances must be positive')
        if self.branch not in ('sigma', 'tau'):
            raise UsageError('--branch must be sigma or tau')
        if not 1 <= self.n_max <= 160:
            raise UsageError('--n-max must lie in [1, 160]')
        if self.format not in ('csv', 'jsonl'):
            raise UsageError('--format must be csv or jsonl')
        if self.grid < 64:
            raise UsageError('--grid must be at least 64')
        if self.radius <= 0:
            raise UsageError('--radius must be positive')
        bad = [t for t in self.table if t not in io.EXPORT_KINDS]
        if bad:
            raise UsageError(f'unknown table {bad[0]!r}; choose from {", ".join(io.EXPORT_KINDS)}')
        if self.out_dir is None:
            self.out_dir = os.environ.get(OUT_ENV, '.')
        return self


def _guess_kind(path):
    return 'fourier' if str(path).endswith(('.fourier', '.3')) else 'pt'


def load_curve(cfg: RunConfig):
    """``(curve, label)`` for the configured input."""
    if cfg.kind == 'circle':
        return FourierCurve.circle(cfg.radius), f'circle r={cfg.radius:g}'
    if cfg.kind == 'synthetic-trefoil':
        return io.bundled_trefoil(), 'synthetic trefoil (D3 Fourier reconstruction)'
    if not os.path.exists(cfg.input):
        raise FileNotFoundError(cfg.input)
    if cfg.kind == 'fourier':
        return io.read_fourier(cfg.input), cfg.input
    data = io.read_point_tangent(cfg.input, pkf=cfg.pkf)
    log.info('loaded %d nodes from %s', len(data), cfg.input)
    return biarc_interpolate(data), f'{cfg.input} ({len(data)} nodes)'


# ---------------------------------------------------------------------------
# output helpers

class Output:
    def __init__(self, cfg):
        self.cfg = cfg
        self.records = []

    def say(self, text=''):
        print(text)

    def record(self, **kw):
        self.records.append({k: _plain(v) for k, v in kw.items()})

    def path(self, name):
        os.makedirs(self.cfg.out_dir, exist_ok=True)
        return os.path.join(self.cfg.out_dir, name)

    def table(self, name, header, rows, comments=()):
        if self.cfg.format == 'csv':
            p = self.path(name + '.csv')
            io.write_csv(p, header, rows, comments)
        else:
            p = self.path(name + '.jsonl')
            lines = [json.dumps(dict(zip(header, map(_plain, r)))) for r in rows]
            with open(p, 'w', encoding='utf-8', newline='\n') as fh:
                fh.write(''.join(line + '\n' for line in lines))
        self.say(f'  wrote {p}')
        return p

    def close(self):
        if self.cfg.format == 'jsonl' and self.records:
            p = self.path(f'{self.cfg.command}.jsonl')
            with open(p, 'w', encoding='utf-8', newline='\n') as fh:
                for r in self.records:
                    fh.write(json.dumps(r) + '\n')
            self.say(f'  wrote {p}')


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def _report(curve):
    rep = thickness(curve)
    return rep, contact._band(curve, rep)


def _trace(cfg, curve, band):
    return contact.trace_contact(curve, n=cfg.n, window=cfg.window, branch=cfg.branch, band=band)


# ---------------------------------------------------------------------------
# subcommands

def cmd_thickness(cfg, out):
    curve, label = load_curve(cfg)
    rep = thickness(curve)
    out.say(f'curve        {label}')
    out.say(f'arclength    {rep.arclength:.9f}')
    out.say(f'thickness    {rep.delta:.9f}')
    out.say(f'ropelength   {rep.ropelength:.6f}')
    out.say(f'min radius   {rep.local_radius_min:.9f}')
    out.say(f'dcsd / 2     {rep.dcsd_half:.9f}')
    out.say(f'limited by   {rep.branch}')
    for a in rep.achieving:
        out.say('achieved at  ' + ' '.join(f'{x:.6f}' if isinstance(x, float) else str(x) for x in a))
    census = {'A': 0, 'B': 0, 'C': 0}
    rows = []
    if cfg.census > 0:
        for s in np.arange(cfg.census) / cfg.census:
            pc = classify_point(curve, s, rep, tol=cfg.tol)
            census[pc.kind] += 1
            rows.append((s, pc.kind, pc.rho_g, pc.curvature, int(pc.curvature_active)))
        out.say('census       ' + '  '.join(f'{k}={v}' for k, v in census.items()))
        out.table('classification', ['s', 'class', 'rho_g', 'kappa', 'curvature_active'], rows)
    out.record(curve=label, arclength=rep.arclength, thickness=rep.delta, ropelength=rep.ropelength,
               branch=rep.branch, achieving=[list(map(_plain, a)) for a in rep.achieving],
               census=census)
    return 0


def cmd_contact(cfg, out):
    curve, label = load_curve(cfg)
    rep, band = _report(curve)
    seed = contact.find_seed_contact(curve, band=band)
    if seed is None:
        out.say(f'{label}: no off-diagonal contact')
        out.record(curve=label, contact=False)
        return 0
    cf = _trace(cfg, curve, band)
    chord = contact.contact_chord(curve, 0.0, cf)
    out.say(f'curve           {label}')
    out.say(f'seed contact    ({seed[0]:.6f}, {seed[1]:.6f}) pp={contact.pp(curve, *seed):.9f}')
    out.say(f'2 * thickness   {2 * rep.delta:.9f}')
    out.say(f'branch          {cf.branch}')
    out.say(f'{cf.branch}(0)        {float(cf(0.0)):.6f}')
    out.say(f'closure defect  {cf.closure_defect:.3g}')
    out.say(f'breakpoints     {cf.n + 1} ({cf.n + 1 - cfg.n - 1} added on steep stretches)')
    out.say(f'chord at 0      length {chord.length:.9f}, angle residuals '
            f'{chord.angle_s:.2e} {chord.angle_t:.2e}')
    out.table(f'contact_{cf.branch}', ['s', 'lift'], zip(cf.breaks, cf.lift))
    t, d = contact.pp_surface(curve, cfg.pp_grid)
    out.table('pp_surface', ['s', 't', 'pp'],
              ((t[i], t[j], d[i, j]) for i in range(len(t)) for j in range(len(t))))
    out.record(curve=label, branch=cf.branch, value_at_0=float(cf(0.0)),
               closure_defect=cf.closure_defect, breakpoints=cf.n + 1, chord_length=chord.length)
    return 0


def _cycle_scan(cfg, cf):
    found, sets, verdicts = [], [], []
    for n in range(1, cfg.n_max + 1):
        fps = cycles.fixed_points(cf, n, tol=1e-10, touch_tol=cfg.touch_tol)
        new = cycles.cycles_from(cf, fps, next_id=len(found), known=found)
        found += new
        sets.append(fps)
        verdicts.append(cycles.counting_check(fps, found, n))
    return found, sets, verdicts


def _nine_cycle(found):
    """The attracting minimal cycle of least period (the attractor)."""
    mins = [c for c in found if c.minimal and c.stability == 'attracting']
    return min(mins, key=lambda c: (c.n, c.params[0])) if mins else None


def cmd_cycles(cfg, out):
    curve, label = load_curve(cfg)
    _, band = _report(curve)
    cf = _trace(cfg, curve, band)
    found, sets, verdicts = _cycle_scan(cfg, cf)
    out.say(f'curve {label}, {cf.branch} branch, n = 1..{cfg.n_max}')
    out.say(' n  fixed  grazing  minimal  multiples  counting')
    for fps, v in zip(sets, verdicts):
        mult = sum(1 for c in found if c.n == fps.n and not c.minimal)
        out.say(f'{fps.n:2d}  {len(fps):5d}  {len(fps.grazing):7d}  {v.minimal_cycles:7d}  '
                f'{mult:9d}  {"ok" if v.holds else "VIOLATED"} (slack {v.slack})')
        out.record(n=fps.n, fixed=len(fps), grazing=len(fps.grazing), minimal=v.minimal_cycles,
                   multiples=mult, counting_holds=v.holds, slack=v.slack)
    for c in cycles.minimal_cycles(found):
        out.say(f'minimal {c.n}-cycle #{c.id} ({c.stability}), residual {c.residual:.2e}: '
                + ' '.join(f'{p:.4f}' for p in sorted(c.params)))
    groups = cycles.touch_groups(found, tol=5 * cfg.touch_tol)
    if any(len(g) > 1 for g in groups):
        out.say(f'{len(groups)} touch group(s) within {5 * cfg.touch_tol:g}: '
                + ', '.join('+'.join(f'#{c.id}' for c in g) for g in groups))
    b = _nine_cycle(found)
    if b is not None:
        out.say(f'{cf.branch}^{b.n}(0) - 0 = {float(contact.iterate_lift(cf, 0.0, b.n)) - b.winding:+.2e}'
                f' (winding {b.winding})')
        out.say('order along the circle: ' + str(cycles.cycle_ordering(b.rotated(
            int(np.argmin(np.minimum(b.params, 1 - np.asarray(b.params))))))))
    out.table('fixed_points', ['n', 't', 'residual', 'type'], [r for s in sets for r in s.rows()])
    out.table('cycles', ['id', 'n', 'minimal', 'stability', 'multiple_of', 'residual', 'params'],
              [(c.id, c.n, int(c.minimal), c.stability, '' if c.multiple_of is None else c.multiple_of,
                c.residual, ';'.join(f'{p:.12g}' for p in c.params)) for c in found])
    if any(not v.holds for v in verdicts):
        return 1
    return 0


def cmd_attractor(cfg, out):
    curve, label = load_curve(cfg)
    _, band = _report(curve)
    cf = _trace(cfg, curve, band)
    found, _, _ = _cycle_scan(cfg, cf)
    b = _nine_cycle(found)
    if b is None:
        out.say('no attracting cycle found')
        return 1
    rep = cycles.attractor_report(cf, b, grid=cfg.grid, iters=cfg.iters)
    right = int(np.sum(rep.to_right))
    out.say(f'attracting {b.n}-cycle: ' + ' '.join(f'{p:.4f}' for p in sorted(b.params)))
    out.say(f'{cfg.grid} starts: {int(np.sum(rep.converged_at >= 0))} converged within '
            f'{cfg.iters} iterations, {right} to the right end of their interval, '
            f'{int(np.sum(rep.monotone))} monotone')
    for i in (1, 10, 100):
        if i < len(rep.sup_trace):
            out.say(f'  i={i:3d}  sup |step| {rep.sup_trace[i]:.3e}  median {rep.median_trace[i]:.3e}')
    verdict = rep.all_converged
    out.say('verdict: ' + ('all starts converge to cycle points' if verdict
                           else 'some starts did not converge'))
    out.table('attractor_trace', ['start', 'i', 'displacement'],
              [(s, i, d) for j, s in enumerate(rep.starts) for i, d in enumerate(rep.displacements[j])])
    if cfg.start is not None:
        orb = cycles.attractor_orbit(cf, cfg.start, cfg.iters, stride=b.n)
        orb = orb - b.winding * np.arange(len(orb))
        out.say(f'orbit from {cfg.start}: ' + ' '.join(f'{x:.4f}' for x in orb[:17]))
        out.table('orbit', ['i', 't_lift'], enumerate(orb))
    out.record(cycle=sorted(b.params), converged=int(np.sum(rep.converged_at >= 0)),
               to_right=right, monotone=int(np.sum(rep.monotone)), all_converged=verdict)
    return 0


def cmd_symmetry(cfg, out):
    curve, label = load_curve(cfg)
    frame = symmetry.detect_frame(curve)
    shape = symmetry.verify_shape_symmetry(curve, frame)
    out.say(f'curve      {label}')
    out.say('C3 axis    ' + ' '.join(f'{x:+.6f}' for x in frame.c3_axis)
            + '  through ' + ' '.join(f'{x:+.6f}' for x in frame.c3_point))
    for k, a in enumerate(frame.c2_axes):
        out.say(f'C2 axis {k}  ' + ' '.join(f'{x:+.6f}' for x in a))
    out.say(f's*         {frame.s_star:.6f}')
    out.say(f'shape      C3 {shape.c3:.2e}  C2 ' + ' '.join(f'{x:.2e}' for x in shape.c2))
    rows = []
    sig = None
    _, band = _report(curve)
    try:
        cf = _trace(cfg, curve, band)
    except contact.ContactError as exc:
        out.say(f'contact function unavailable: {exc}')
    else:
        sig = symmetry.verify_sigma_symmetry(cf, frame.s_star)
        for name, v in sig.max.items():
            out.say(f'{name:15s} {v:.2e}')
        rows = [(name, t, r) for name in sig.names for t, r in zip(sig.grid, sig.residuals[name])]
        out.table('symmetry_residuals', ['identity', 't', 'residual'], rows)
    out.record(curve=label, c3_axis=frame.c3_axis, s_star=frame.s_star, shape_c3=shape.c3,
               shape_c2=shape.c2, sigma=None if sig is None else sig.max)
    return 0


def cmd_export(cfg, out):
    curve, label = load_curve(cfg)
    tables = cfg.table or io.EXPORT_KINDS
    rep, band = _report(curve)
    need_cf = set(tables) & {'sigma_n_graph', 'attractor_trace', 'fixed_points', 'orbit',
                             'symmetry_residuals'}
    cf = _trace(cfg, curve, band) if need_cf else None
    found = b = None
    if set(tables) & {'attractor_trace', 'fixed_points', 'orbit'}:
        found, sets, _ = _cycle_scan(cfg, cf)
        b = _nine_cycle(found)
    ext = 'csv'
    for kind in tables:
        p = out.path(f'{kind}.{ext}')
        if kind == 'sigma_n_graph':
            io.export_table(kind, p, cf=cf, n=cfg.power)
        elif kind == 'pp_surface':
            io.export_table(kind, p, curve=curve, grid=cfg.pp_grid)
        elif kind == 'curvature_profile':
            io.export_table(kind, p, curve=curve, delta=rep.delta)
        elif kind == 'fixed_points':
            io.export_table(kind, p, sets=sets)
        elif kind == 'attractor_trace':
            if b is None:
                out.say('  skipped attractor_trace: no attracting cycle')
                continue
            io.export_table(kind, p, report=cycles.attractor_report(cf, b, cfg.grid, cfg.iters))
        elif kind == 'orbit':
            if b is None:
                out.say('  skipped orbit: no attracting cycle')
                continue
            start = 0.05 if cfg.start is None else cfg.start
            orb = cycles.attractor_orbit(cf, start, cfg.iters, stride=b.n)
            io.export_table(kind, p, orbit=orb - b.winding * np.arange(len(orb)))
        elif kind == 'symmetry_residuals':
            frame = symmetry.detect_frame(curve)
            io.export_table(kind, p, report=symmetry.verify_sigma_symmetry(cf, frame.s_star))
        out.say(f'  wrote {p}')
    return 0


def cmd_generate(cfg, out):
    if cfg.out is None:
        raise UsageError('generate needs --out')
    if cfg.shape == 'trefoil-d3':
        fc = io.bundled_trefoil()
    elif cfg.shape == 'standard-trefoil':
        fc = FourierCurve.standard_trefoil()
    elif cfg.shape == 'circle':
        fc = FourierCurve.circle(cfg.radius)
    elif cfg.shape == 'ellipse':
        fc = FourierCurve.ellipse()
    else:
        raise UsageError(f'--shape must be one of {", ".join(SHAPES)}')
    if cfg.out.endswith('.fourier'):
        io.write_fourier(cfg.out, fc, name=cfg.shape)
    else:
        io.write_point_tangent(cfg.out, fourier_to_poly(fc, cfg.nodes), name=cfg.shape)
    out.say(f'wrote {cfg.out}')
    return 0


COMMANDS = {
    'thickness': cmd_thickness,
    'contact': cmd_contact,
    'cycles': cmd_cycles,
    'attractor': cmd_attractor,
    'symmetry': cmd_symmetry,
    'export': cmd_export,
    'generate': cmd_generate,
}


def build_parser():
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    g = common.add_argument_group('input')
    g.add_argument('--input', help='curve file')
    g.add_argument('--kind', choices=KINDS, help='input kind (default: from the file name, '
                   'or the bundled synthetic trefoil without --input)')
    g.add_argument('--pkf', action='store_true', help='read --input as a PKF file (best effort)')
    g.add_argument('--radius', type=float, help='radius for --kind circle')
    g = common.add_argument_group('analysis')
    g.add_argument('--n', type=int, help='contact function samples (default 999)')
    g.add_argument('--window', type=float, help='valley tracking window (default 0.02)')
    g.add_argument('--tol', type=float, help='classification tolerance (default 1e-4)')
    g.add_argument('--touch-tol', type=float, help='grazing tolerance (default 2e-3)')
    g.add_argument('--branch', choices=('sigma', 'tau'), help='valley to follow')
    g.add_argument('--n-max', type=int, help='largest power scanned for cycles (default 30)')
    g = common.add_argument_group('output')
    g.add_argument('--out-dir', help=f'table directory (default ${OUT_ENV} or .)')
    g.add_argument('--format', choices=('csv', 'jsonl'), help='table format (default csv)')
    g.add_argument('--config', help='JSON file with default settings')
    g.add_argument('-v', '--verbose', action='count', default=0)

    ap = argparse.ArgumentParser(prog='knotcycle', description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest='command', required=True)
    sub.add_parser('thickness', parents=[common], help='thickness and ropelength').add_argument(
        '--census', type=int, default=S, help='points classified A/B/C (default 120, 0 to skip)')
    p = sub.add_parser('contact', parents=[common], help='trace the contact function')
    p.add_argument('--pp-grid', type=int, default=S, help='pp surface resolution (default 128)')
    sub.add_parser('cycles', parents=[common], help='fixed points and cycles of the powers')
    p = sub.add_parser('attractor', parents=[common], help='convergence to the cycle')
    p.add_argument('--grid', type=int, default=S, help='start points (default 64)')
    p.add_argument('--iters', type=int, default=S, help='iterations of the cycle power (default 150)')
    p.add_argument('--start', type=float, default=S, help='also record the orbit of this start')
    sub.add_parser('symmetry', parents=[common], help='symmetry frame and identities')
    p = sub.add_parser('export', parents=[common], help='write plot tables')
    p.add_argument('--table', action='append', default=S, help='table kind (repeatable; default all)')
    p.add_argument('--power', type=int, default=S, help='power for sigma_n_graph (default 9)')
    p.add_argument('--pp-grid', type=int, default=S)
    p.add_argument('--grid', type=int, default=S)
    p.add_argument('--iters', type=int, default=S)
    p.add_argument('--start', type=float, default=S)
    p = sub.add_parser('generate', parents=[common], help='write a synthetic curve file')
    p.add_argument('--shape', choices=SHAPES, default=S)
    p.add_argument('--out', default=S, help='.fourier for coefficients, anything else for point-tangent')
    p.add_argument('--nodes', type=int, default=S, help='point-tangent nodes (default 333)')
    return ap


def make_config(ns) -> RunConfig:
    values = {}
    path = getattr(ns, 'config', None)
    if path is not None:
        try:
            with open(path, encoding='utf-8') as fh:
                values.update(json.load(fh))
        except json.JSONDecodeError as exc:
            raise UsageError(f'{path}: invalid JSON ({exc})') from None
    values.update({k: v for k, v in vars(ns).items() if k not in ('config', 'verbose')})
    names = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise UsageError(f'unknown setting(s): {", ".join(unknown)}')
    if 'table' in values:
        values['table'] = tuple(values['table'])
    return RunConfig(**values).validate()


def main(argv=None):
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2),
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        cfg = make_config(ns)
        out = Output(cfg)
        code = COMMANDS[cfg.command](cfg, out)
        out.close()
        return code
    except (UsageError, FileNotFoundError, IsADirectoryError, PermissionError, io.ParseError) as exc:
        print(f'knotcycle: error: {exc}', file=sys.stderr)
        return 2
    except (contact.ContactError, cycles.CycleError, symmetry.NoSymmetryError,
            DegenerateCurveError, BiarcError, ValueError) as exc:
        print(f'knotcycle: analysis failed: {exc}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
