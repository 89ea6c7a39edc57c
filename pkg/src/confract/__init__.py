"""Conformable fractional Laplace transforms.

The order-``alpha`` transform ``L_alpha{f}(s) = integral_0^inf exp(-s t**alpha / alpha) f(t) t**(alpha-1) dt``
is a classical Laplace transform in ``u = t**alpha / alpha``.  The package
evaluates forward and inverse transforms, checks the transform rules for
conformable derivatives, integrals and convolutions, and solves four
fractional diffusion problems in closed form with a finite-difference cross
check.
"""

from types import ModuleType as _ModuleType

from .calculus import (FractionalOrder, SubstitutionMap, TimeFunction, as_order, as_time_function,
                       conformable_derivative, conformable_integral, from_u, nth_conformable_derivative, to_u)
from .convolution import (WeightedNormSpec, check_convolution_algebra, check_convolution_theorem, check_young,
                          conv_alpha, conv_function, weighted_norm)
from .diffusion import (DiffusionProblem, SeriesSpec, SeriesTruncationWarning, SpaceTimeField, evaluate_field,
                        solve_dirichlet_sine, solve_finite_mixed, solve_first_order, solve_semi_infinite)
from .errors import (AccuracyError, ConfractError, DivergenceError, DomainError, ExpressionSyntaxError,
                     VerificationFailure)
from .expression import compile_time_function, parse_expression, parse_rational
from .fd_oracle import FDGrid, FDReport, fd_solve_diffusion, fd_solve_first_order, residual_check
from .forward import (ComparisonReport, FrequencyExpression, check_property, derivative_transform_check,
                      final_value, forward_transform, initial_value, integral_transform_check,
                      nth_derivative_transform_check, pair_lookup, pair_table, transform_converges)
from .inverse import BromwichSpec, PoleSet, invert_bromwich, invert_residues, invert_via_classical, partial_fractions
from .quadrature import QuadratureSpec

__version__ = "0.1.0"

__all__ = [name for name, obj in dict(globals()).items()
           if not name.startswith("_") and not isinstance(obj, _ModuleType)]
