"""Freud-Sobolev orthogonal polynomials for the weight exp(-x**4)."""

from .asymptotics import ConvergenceReport, LimitTargets, aitken, kappa_limit
from .errors import (ArgumentError, ConvergenceError, DomainError, EvaluationError,
                     FieldError, FreudSobolevError, NumericError, RangeError,
                     ResolutionError, ScaleError)
from .freud_coeffs import (CoeffTable, MomentTable, compute_moments, solve_string_system,
                           stieltjes_oracle)
from .poly_engine import ScaledValue, eval_p, eval_p_derivative, eval_p_normalized
from .precision import STD, Precision, ext, parse_precision
from .quadrature import QuadRule, gauss_chebyshev, gauss_freud, integrate
from .sobolev import (BalanceRecord, LambdaSchedule, SobolevTable, balance_diagnostic,
                      build_sobolev_table, eval_s, gram_schmidt_oracle, sobolev_inner)

__version__ = "0.1.0"
