"""Numerical verification of proper biharmonic hyperplanes in conformally flat spaces
of negative curvature."""

from .biharmonic import CaseLabel, classify, residual_general, residual_reduced, residual_single
from .curvature import ConformalMetric, curvature_sign_scan, riemann_conformal, sectional
from .hypersurface import Hyperplane, adapted_frame, mean_curvature
from .jets import Constant, Jet3, PowerLaw, Reciprocal, eval_f_jet, sigma_jet
from .report import report_schema_version
from .solutions import (
    certify_counterexample,
    constraint_radius,
    make_counterexample,
    ode_solve_single,
    product_codim_k,
    reciprocal_leaf_check,
)

__version__ = "0.1.0"
