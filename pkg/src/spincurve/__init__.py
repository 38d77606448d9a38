"""Locally convex curves on S^2 and S^3: spin covering maps, Bruhat cells,
Frenet frames, the decomposition of S^3 curves into pairs of S^2 curves, and
the loop-adding surgeries.
"""

from .bruhat import BruhatCellSpin, SignedPermutation, classify_so, classify_spin, enumerate_b_plus, inv_count
from .curves import CurvatureProfile, FrameCurve, Grid, SampledCurve, curvature_torsion, frenet_frame
from .decompose import CurvePair, compose3, decompose3
from .errors import ConditionViolation, CurveFileError, NumericalError, PreconditionError, SpinCurveError
from .frames_ode import curve_from_profile, integrate_frame
from .spin_algebra import ONE, I, J, K, Spin4, pi3, pi4, quat_mul
from .surgery import RRParams, SurgerySpec, add_loops, hat_pair, relax_reflect, sharp, tangent_circles

__version__ = "0.1.0"
