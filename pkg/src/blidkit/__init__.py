"""Numerical toolkit for entire functions of bounded L-index in a direction."""

from .core import (EntireFunction, as_direction, as_point, build_fixture, canonical_product,
                   exp_linear, gauss_square, list_fixtures, polynomial, register_fixture, sin_linear)
from .criteria import (growth_profile, hayman_check, local_derivative_check, log_derivative_check,
                       max_modulus_check, min_max_check, value_distribution_check, with_trend)
from .deriv import (DerivativeResult, QuadratureOptions, directional_derivative, directional_derivatives,
                    joint_partial_derivative)
from .errors import (AccuracyError, BlidError, FixtureError, InputError, PreconditionError,
                     ResolutionError, WeightError)
from .grids import GridSpec
from .index import IndexEstimate, compare_directions, estimate_index, estimate_joint_index, tm_table
from .pde import DirectionalPDE, residual_check, slice_ode_crosscheck, solution_index_report
from .report import CriterionReport
from .weights import WeightFunction, build_weight, check_equivalent, check_Q_class, lambda_bounds_local
from .zeros import counting_function, excluded_region, find_slice_zeros

__version__ = "0.1.0"
