"""Delta and nabla calculus on time scales, and the duality between them."""

from .calculus import (
    DerivativeResult,
    TsFunction,
    check_integration_by_parts_delta,
    check_integration_by_parts_nabla,
    check_rho_formula,
    check_sigma_formula,
    delta_derivative,
    delta_integral,
    integrate,
    nabla_derivative,
    nabla_integral,
)
from .duality import (
    DualPair,
    dual_function,
    dual_scale,
    run_duality_matrix,
    verify_classification_duality,
    verify_derivative_duality,
    verify_graininess_duality,
    verify_integral_duality,
    verify_jump_duality,
    verify_kappa_duality,
    verify_regularity_transport,
    verify_rho_formula_via_dual,
)
from .errors import *  # noqa: F401,F403
from .expr import diff, evaluate, parse, substitute_negate, to_source
from .report import IdentityReport
from .timescale import PointClass, TimeScale, canonicalize, cantor_scale, parse_scale_literal
from .variational import (
    Candidate,
    Lagrangian,
    VariationalProblem,
    check_euler_lagrange,
    check_weierstrass_delta,
    check_weierstrass_nabla,
    dual_candidate,
    dual_problem,
    el_residual_delta,
    el_residual_nabla,
    functional_value,
    make_candidate,
    minimize_discrete,
    weierstrass_excess,
)

__version__ = "0.1.0"
