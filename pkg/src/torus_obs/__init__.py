"""Lattice points, vanishing orders and observability constants on flat tori."""

__version__ = "0.1.0"

from .errors import CapExceededError, ConvergenceError, DomainError
from .expoly import ExponentialPolynomial
from .lattice import (CapStatistics, PrimeProduct, SphereSet, cap_statistics, enumerate_sphere,
                      is_three_square_excluded, primes_one_mod_four, r2_via_divisors)
from .spectral import (GammaBounds, MomentMatrix, RationalVector, exact_rank, extremal_kernel,
                       gamma_bounds, gamma_max, kernel_vector, moment_matrix, vanishing_order)
from .observability import (FamilyReport, GramMatrix, ball_kernel, exponent_tables, family_hyperplane,
                            family_simple, family_wigert, gram_matrix, local_mass_oracle,
                            min_eigenvalue, rayleigh_quotient, taylor_bound_check, upper_bound_eval)
from .clusters import (CutoffSpec, Partition, arc_window_check, connes_threshold, decomposition_gap,
                       is_affine_hyperplane, partition)
from .turan import Ball, Box, Interval, RatioReport, extremal_scaling_suite, sup_norm, turan_ratio
from .report import RunManifest, emit_report

__all__ = [name for name in dir() if not name.startswith("_")]
