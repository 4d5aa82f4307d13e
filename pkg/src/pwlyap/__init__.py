"""Lyapunov quantities, centers and small-amplitude cycles of piecewise
quadratic systems with an invariant straight line."""

from .algebra import ParamPoly, PiPoly, QuadExtScalar
from .systems import FamilySpec, PiecewiseSystem, build_family, named_point
from .lyapunov import displacement_coeffs, weak_focus_order

__version__ = "0.1.0"

__all__ = ["ParamPoly", "PiPoly", "QuadExtScalar", "FamilySpec", "PiecewiseSystem", "build_family",
           "named_point", "displacement_coeffs", "weak_focus_order"]
