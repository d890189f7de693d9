"""Numerical laboratory for nonlocal diffusion with absorption.

The evolution u_t = J*u - u - u^p is solved pseudo-spectrally on periodic
boxes; the linear semigroup's kernel decomposition exp(-t)*delta + W, the
parabolic rescaling u^k(x,t) = f(k) u(kx, k^2 t), and the local
heat-with-absorption limit problem are first-class objects, so every
asymptotic statement about them can be measured at desk scale.
"""

from .errors import (ConfigError, CorruptSnapshot, DomainTooSmall,
                     EmptyExclusionRegion, GridMismatch, InsufficientPoints,
                     InvalidAlpha, NldiffError, NonfiniteState,
                     NonpositiveValue, OutOfDomain, SingularDatumUnsupported,
                     SubcriticalExponent, UnderresolvedKernel,
                     WindowExceedsDomain)
from .fields import Field, Grid, constant_field, delta_field, integrate, \
    interpolate, load, lq_norm, save, sup_norm
from .kernel import KernelSpec, diffusivity, evaluate, make_kernel, \
    spectral_symbol
from .fundamental import BarrierReport, WEvaluation, barrier_report, \
    grad_w_field, w_field, wt_field
from .solver import SolveConfig, Trajectory, evolve, linear_solution_via_w
from .heat import LimitProblem, PointSourceDatum, PowerLawDatum, \
    evolve_limit, gaussian_point_source, solve_limit_at
from .scaling import FamilyKind, ScalingFamily, ScalingLaw, \
    delta_mass_constant, representative_datum, rescale_field, scaling_law
from .analysis import ConvergenceSeries, MassAudit, RateFit, \
    convergence_series, mass_audit, rate_fit, solution_barrier_report
from .config import ExperimentConfig, load_config

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
