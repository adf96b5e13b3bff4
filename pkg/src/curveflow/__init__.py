"""curveflow: curvature flows for prescribed-curvature equations.

Solves F(kappa) = f(s, x, nu) for strictly convex hypersurfaces by running
curvature flows without global terms to their steady states, in the flat
ambient (support-function parametrization) and in the round hemisphere and
hyperbolic plane (radial graphs), with slice-barrier construction,
admissibility checkers and independent verification oracles.
"""

from .anisotropy import (PrescribedData, SphereFunction, check_firey,
                         check_firey_p, check_guanma,
                         check_position_concavity, curvature_measure,
                         dual_minkowski, eval_f, expression_data, firey_G,
                         lp_aleksandrov, parse_expression, power_law,
                         ring_integral)
from .barrier import (BarrierPair, admissible_constant,
                      find_spherical_barriers, slice_margins, validate_barrier)
from .curvfun import (CurvatureFunction, DualCurvatureFunction, check_concave,
                      check_dual_boundary, check_inverse_concave,
                      check_lambda_eps, gauss, mean, power_mean, quotient,
                      structure_report)
from .errors import (BarrierError, ConfigError, ConvexityError, CurveflowError,
                     DataError, DomainError, ExpressionError, MonitorError,
                     OracleError, StallError)
from .flow import (CONTRACTING, EXPANDING, FlowResult, ProblemSpec, RunOptions,
                   adaptive_dt, make_problem, rhs_radial, rhs_support, run,
                   step, suggest_annulus)
from .profile import (FlowDiagnostics, RadialProfile, SupportProfile,
                      contact_point, curvature_matrix, diagnostics,
                      differentiate, evaluate, principal_curvatures,
                      principal_radii, profile_from_csv, profile_from_json,
                      profile_to_csv, profile_to_json, round_profile,
                      spectral_derivatives, theta_grid)
from .spaceform import (DESITTER, EUCLID, HYPERBOLIC, SPHERE, SpaceformConfig,
                        graph_support, radial_graph_curvature, slice_curvature,
                        warping, warping_values)
from .verify import (ManufacturedPair, bvp_oracle_n1, evaluate_gap,
                     firey_crosscheck, hessian_estimate_margin,
                     make_manufactured, radii_psi, remove_first_harmonic,
                     residual, residual_values, surface_fields,
                     verification_report)

__version__ = "0.1.0"
