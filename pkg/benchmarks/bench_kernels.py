"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeat 3]

Each kernel is run on polygons sampled from the bundled trefoil; the
results of the two backends are compared before timing is reported.
"""

import argparse
import time

import numpy as np

from knotcycle import curve, io, kernels


def _best(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _cases(n):
    c = io.bundled_trefoil()
    s = np.arange(n) / n
    pts = c.evaluate(s)
    tans = c.tangent(s)
    mask = np.ones(n, np.uint8)
    mask[: n // 8] = 0
    x = pts[0]
    band = max(2, n // 16)
    return {
        'min_triple_radius': lambda m: m.min_triple_radius(pts),
        'min_pair_radius': lambda m: m.min_pair_radius(x, pts, mask),
        'pointtangent_radii': lambda m: m.pointtangent_radii(pts, tans, band),
    }


def _agree(a, b):
    if isinstance(a, tuple):
        return abs(a[0] - b[0]) <= 1e-12 * max(1.0, abs(a[0]))
    a, b = np.asarray(a), np.asarray(b)
    fin = np.isfinite(a)
    return bool(np.array_equal(fin, np.isfinite(b))
                and np.allclose(a[fin], b[fin], rtol=1e-12, atol=0))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument('--sizes', type=int, nargs='+', default=[64, 128, 256])
    ap.add_argument('--repeat', type=int, default=3)
    args = ap.parse_args(argv)

    mods = kernels.backends()
    print(f"backends: {', '.join(mods)} (active: {kernels.BACKEND})")
    if 'cython' not in mods:
        print('compiled extension not built; timing the fallback only')
    print(f"{'kernel':<20} {'n':>5} " + ' '.join(f'{k:>10}' for k in mods) + '   speedup  agree')
    for n in args.sizes:
        for name, fn in _cases(n).items():
            times, outs = {}, {}
            for k, m in mods.items():
                times[k], outs[k] = _best(lambda: fn(m), args.repeat)
            row = f'{name:<20} {n:>5} ' + ' '.join(f'{times[k]*1e3:>8.2f}ms' for k in mods)
            if 'cython' in mods:
                row += f"   {times['python'] / times['cython']:>6.1f}x  {_agree(outs['python'], outs['cython'])}"
            print(row)


if __name__ == '__main__':
    main()
