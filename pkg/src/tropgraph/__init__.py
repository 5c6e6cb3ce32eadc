"""Exact tropical independence and rank for PL functions on metric graphs.

Independence of a finite family of piecewise-linear functions is decided by
a stochastic mean-payoff game whose value is positive exactly when the
family is independent.  Every verdict comes with a certificate that is
re-checked in exact rational arithmetic.
"""

from .exact import INF, format_rational, parse_rational, to_rational
from .functions import (Divisor, EdgeProfile, FunctionError, Segment, TropFunction, Verdict,
                        breakpoints, common_refinement, constant, dirac, divisor_of, evaluate,
                        in_riemann_roch, infinity, lower_envelope, min_attained_twice, shift,
                        trop_min)
from .gadgets import (CSPInstance, CompletedInstance, GeneralizedInstance, MatrixGadget,
                      complete_instance, csp_feasibility, csp_to_generalized, lemma_assignments,
                      matrix_gadget, property_D_check, validate_csp, within_bound_boxes)
from .games import (GameCertificate, MinAction, SignDecision, StochGame, apply_shapley,
                    brute_force_mean_payoff, decide_sign, escape_rate_bounds, hilbert_seminorm,
                    strategy_iteration, value_iteration, verify_certificate)
from .graph import (Direction, Edge, GraphError, Interior, MetricGraph, PointRef, Vertex,
                    canonical_point, incident_directions, validate_graph)
from .independence import (Dependent, Independent, ReductionGame, SupMinResult, Unresolved,
                           build_game, check_independence, extract_witness_points,
                           sup_min_on_interval, unique_permutation_check)
from .rank import RankResult, dss_matrix_rank, troprank
from .semimodule import (EvalMatrix, Semimodule, SlopeProfile, combine, evaluation_matrix,
                         rank_lower_bound_slopes, section_rho, slope_profile, two_slope_points)

__version__ = "0.1.0"
