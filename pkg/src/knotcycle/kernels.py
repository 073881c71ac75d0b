"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
reference in ``_pykernels`` takes over. Setting ``KNOTCYCLE_PURE_PYTHON=1``
forces the fallback.
"""

import os

from . import _pykernels

_ext = None
if os.environ.get('KNOTCYCLE_PURE_PYTHON', '') not in ('1', 'true', 'yes'):
    try:
        from . import _kernels as _ext
    except ImportError:  # extension not built
        _ext = None

BACKEND = 'cython' if _ext is not None else 'python'

circumradii = _pykernels.circumradii

if _ext is not None:
    min_triple_radius = _ext.min_triple_radius
    min_pair_radius = _ext.min_pair_radius
    pointtangent_radii = _ext.pointtangent_radii
else:
    min_triple_radius = _pykernels.min_triple_radius
    min_pair_radius = _pykernels.min_pair_radius
    pointtangent_radii = _pykernels.pointtangent_radii


def backends():
    """Map backend name to its module, for tests and benchmarks."""
    out = {'python': _pykernels}
    if _ext is not None:
        out['cython'] = _ext
    return out
