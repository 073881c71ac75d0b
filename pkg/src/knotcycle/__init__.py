"""Thickness, contact chords and contact-function dynamics of closed
curves in space, with tools for the periodic orbits of the contact map on
near-ideal trefoils."""

from .kernels import BACKEND
from .curve import (BiarcCurve, DegenerateCurveError, FourierCurve, PolyCurve, biarc_interpolate,
                    circumradius, reparameterize_constant_speed, to_biarc)
from .thickness import ThicknessReport, dcsd, global_radius, ropelength, thickness
from .contact import (ContactError, ContactFunction, find_seed_contact, iterate_sigma, pp,
                      sigma_eval, tau_eval, trace_contact)
from .cycles import (Cycle, attractor_report, counting_check, detect_cycles, fixed_points,
                     partition, piece_map_check, winding_number)
from .symmetry import detect_frame, verify_shape_symmetry, verify_sigma_symmetry
from .io import bundled_trefoil, read_fourier, read_point_tangent, write_fourier, write_point_tangent

__version__ = '0.1.0'
