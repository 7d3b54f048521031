"""Spectral toolkit for rotating vortex sheets with surface tension.

Contour operators of a sheet written as a radial graph over the unit circle,
the steady functional whose zeros are uniformly rotating sheets, the
closed-form linear theory of the circular sheet, local branch continuation
and a time integrator used as an independent check.
"""
__version__ = "0.1.0"

from .errors import (AliasError, BlowupError, DomainError, InadmissibleError, NewtonDivergence,
                     QuadratureWarning, StepTooLarge, StepWarning, TooCloseError, VortexSheetError)
from .fourier import (EvenSeries, Grid, OddSeries, SpectralReport, abs_derivative, analyze,
                      derivative, evaluate, hilbert, sobolev_norm)
from .contour import (CurvePoint, SheetGeometry, SheetState, TraceVelocities, biot_savart_velocity,
                      curvature, d0, h0, h_full, parametric_curvature, radius, trace_velocities)
from .steady import ParamPoint, Residual, f1, f2, fd_jacobian, residual, x_norm, y_norm
from .linear import (NOT_POSITIVE, NOT_REAL, Admissibility, BifurcationPoint, CollisionReport,
                     LinearBlock, admissibility, apply_linear, bifurcation_point, block,
                     collision_check, det_block, kernel_vectors, threshold_c, threshold_gamma,
                     threshold_sigma)
from .continuation import Branch, BranchStep, branch_asymptotics, certify, trace_branch
from .evolution import EvolutionConfig, FlowState, evolve, rhs, step, verify_traveling

__all__ = [name for name in dir() if not name.startswith("_")]
