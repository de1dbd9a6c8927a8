"""Projectively flat Finsler metrics of constant flag curvature.

Construct metrics from origin data (a Minkowski norm and a degree-1
drift function), evaluate the classical closed forms, and verify the
defining identities numerically.
"""

from .catalog import (CatalogEntry, as_evaluator, bryant_all_real, catalog_entry,
                      eval_catalog, list_catalog, parse_catalog,
                      zhou_reduction_check)
from .construct import (MetricEvaluator, broken_metric, build_k0, build_kneg1,
                        build_kpos1, evaluate, projective_factor_exact)
from .errors import (BranchCutError, DimensionMismatchError, DomainError,
                     ProjFlatError, SolverError, SpecParseError)
from .norms import (BryantPair, CombinedNorm, DoubleSqrtNorm, EuclideanNorm,
                    HomogeneousFunction, RandersNorm, ScaledNorm, ZeroNorm,
                    check_minkowski, combine, format_norm, parse_norm)
from .solver import (SolveResult, SolverConfig, implicit_derivatives,
                     pair_radius_estimate, radius_estimate, solve_complex,
                     solve_complex_nested, solve_real)
from .verify import (GeodesicResult, JetData, VerificationReport,
                     berwald_system_residual, collinearity_score,
                     convexity_check, flag_curvature,
                     geodesic_coefficients_general, hamel_residual,
                     integrate_geodesic, jet, master_pde_residual,
                     projective_factor_numeric)

__version__ = "0.1.0"
