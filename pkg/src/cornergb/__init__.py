"""Numerical verification of Gauss-Bonnet with codimension-two corners in dimension four."""

from .boundary import (BoundaryFrame, aw_boundary_density, boundary_frame, boundary_integrand,
                       l_curvature, p3_apply, t_curvature)
from .catalog import CatalogEntry, conformal_variant, flat_bidisk, hemiball, sheared_corner
from .corner import (CornerFrame, aw_corner_density, corner_frame, corner_integrand, g_curvature,
                     p2b_apply, u_curvature)
from .curvature import InteriorCurvature, interior_curvature, pfaffian_density
from .errors import NumericalError, SceneError
from .expr import ExpressionError, evaluate, parse_expression
from .harness import (Report, conformal_law_check, convergence_sweep, identity_suite,
                      point_report, verify_gauss_bonnet)
from .jets import Jet, jet_partial, jet_var
from .quadrature import gl_rule, integrate_region, periodic_rule
from .scene import Chart, Scene, format_scene, load_scene, parse_scene

__version__ = "0.1.0"

__all__ = [
    "BoundaryFrame", "CatalogEntry", "Chart", "CornerFrame", "ExpressionError",
    "InteriorCurvature", "Jet", "NumericalError", "Report", "Scene", "SceneError",
    "aw_boundary_density", "aw_corner_density", "boundary_frame", "boundary_integrand",
    "conformal_law_check", "conformal_variant", "convergence_sweep", "corner_frame",
    "corner_integrand", "evaluate", "flat_bidisk", "format_scene", "g_curvature", "gl_rule",
    "hemiball", "identity_suite", "integrate_region", "interior_curvature", "jet_partial",
    "jet_var", "l_curvature", "load_scene", "p2b_apply", "p3_apply", "parse_expression",
    "parse_scene", "periodic_rule", "pfaffian_density", "point_report", "sheared_corner",
    "t_curvature", "u_curvature", "verify_gauss_bonnet",
]
