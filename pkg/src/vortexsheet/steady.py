"""The steady functional whose zeros are rotating/stationary vortex sheets.

``F1 = c eta_x + (1/2) H(eta)[psi_x] + (gamma/2) H(eta)[1]``
``F2 = c psi_x + ((psi_x + gamma)/2) D0(eta)[psi_x + gamma] + sigma K(eta)``

``F2`` is only defined modulo constants, so its mean is always removed before
projection or measurement.
"""
from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .contour import SheetGeometry, SheetState
from .errors import StepWarning
from .fourier import ALIAS_ATOL, ALIAS_TOL, EvenSeries, FloatArray, Grid, OddSeries, analyze, sobolev_norm

#: Regularity index used for residual norms unless stated otherwise.
DEFAULT_S = 2.0
#: Per-node roundoff of the kernel sums, relative to ``Q`` times the gross term size.
ROUNDOFF = 1e-14

PARAMETER_OF_KIND = {"speed": "c", "tension": "sigma", "vorticity": "gamma"}


@dataclass(frozen=True)
class ParamPoint:
    """Rotation speed ``c``, surface tension ``sigma > 0`` and mean vorticity ``gamma``."""

    c: float
    sigma: float
    gamma: float

    def __post_init__(self):
        for name in ("c", "sigma", "gamma"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.sigma <= 0:
            raise ValueError(f"surface tension must be positive, got sigma={self.sigma}")

    def value(self, kind: str) -> float:
        return getattr(self, PARAMETER_OF_KIND[kind])

    def with_value(self, kind: str, value: float) -> "ParamPoint":
        return dataclasses.replace(self, **{PARAMETER_OF_KIND[kind]: float(value)})


@dataclass(frozen=True, eq=False)
class Residual:
    r1: OddSeries
    r2: EvenSeries
    y_norm: float

    @property
    def vector(self) -> FloatArray:
        return np.concatenate([self.r1.coeffs, self.r2.coeffs])


def _pointwise(params: ParamPoint, state: SheetState, grid: Grid):
    geo = SheetGeometry.from_state(state, grid)
    x, y = grid.nodes, grid.midpoints
    eta_x = geo.eta_x
    psi_x = state.psi.values(x, 1)
    omega = params.gamma + psi_x
    omega_mid = state.omega(y, params.gamma)

    drift1 = params.c * eta_x
    sheet1 = 0.5 * geo.h_full(omega_mid)
    drift2 = params.c * psi_x
    sheet2 = 0.5 * omega * geo.d0(omega_mid)
    tension = params.sigma * geo.curvature

    ref1 = float(np.mean(drift1**2) + np.mean(sheet1**2))
    ref2 = float(np.mean(drift2**2) + np.mean(sheet2**2) + np.mean(tension**2))
    # the kernel sums cancel O(1) terms, so roundoff does not shrink with the residual
    w = np.abs(omega).max()
    gross = (w + w**2 + params.sigma * np.abs(geo.curvature).max()
             + abs(params.c) * (np.abs(eta_x).max() + np.abs(psi_x).max()))
    floor = float((ROUNDOFF * grid.Q * gross) ** 2)
    F2 = drift2 + sheet2 + tension
    return drift1 + sheet1, F2 - F2.mean(), ref1, ref2, floor


def _grid_for(state: SheetState, grid: Grid | None) -> Grid:
    grid = grid or Grid.for_modes(state.m, state.N)
    grid.check_resolution(state.m, state.N)
    return grid


def f1(params: ParamPoint, state: SheetState, grid: Grid | None = None,
       alias_tol: float | None = ALIAS_TOL) -> OddSeries:
    """First component of the steady functional, projected on odd modes."""
    grid = _grid_for(state, grid)
    F1, _, ref1, _, floor = _pointwise(params, state, grid)
    return analyze(F1, "odd", state.m, state.N, alias_tol=alias_tol, reference=ref1,
                   alias_atol=max(ALIAS_ATOL, floor))


def f2(params: ParamPoint, state: SheetState, grid: Grid | None = None,
       alias_tol: float | None = ALIAS_TOL) -> EvenSeries:
    """Second component, mean-projected, projected on even modes."""
    grid = _grid_for(state, grid)
    _, F2, _, ref2, floor = _pointwise(params, state, grid)
    return analyze(F2, "even", state.m, state.N, alias_tol=alias_tol, reference=ref2,
                   alias_atol=max(ALIAS_ATOL, floor))


def y_norm(r1: OddSeries, r2: EvenSeries, s: float = DEFAULT_S) -> float:
    return sobolev_norm(r1, s - 1.25) + sobolev_norm(r2, s - 1.75)


def x_norm(state: SheetState, s: float = DEFAULT_S) -> float:
    return sobolev_norm(state.eta, s + 0.25) + sobolev_norm(state.psi, s - 0.25)


def residual(params: ParamPoint, state: SheetState, s: float = DEFAULT_S,
             grid: Grid | None = None, alias_tol: float | None = ALIAS_TOL) -> Residual:
    """Both components of the functional and their norm in ``Y_m^s``."""
    grid = _grid_for(state, grid)
    F1, F2, ref1, ref2, floor = _pointwise(params, state, grid)
    atol = max(ALIAS_ATOL, floor)
    r1 = analyze(F1, "odd", state.m, state.N, alias_tol=alias_tol, reference=ref1, alias_atol=atol)
    r2 = analyze(F2, "even", state.m, state.N, alias_tol=alias_tol, reference=ref2, alias_atol=atol)
    return Residual(r1, r2, y_norm(r1, r2, s))


def residual_vector(params: ParamPoint, state: SheetState, grid: Grid,
                    alias_tol: float | None = ALIAS_TOL) -> FloatArray:
    """Coefficients ``[F1 sin-modes, F2 cos-modes]`` (length ``2N``)."""
    return residual(params, state, grid=grid, alias_tol=alias_tol).vector


def unit_directions(m: int, N: int) -> list[SheetState]:
    """The ``2N`` coordinate directions of coefficient space, eta modes first."""
    eye = np.eye(2 * N)
    return [SheetState.from_vector(m, row) for row in eye]


def _centered(params, state, directions, eps, grid, alias_tol):
    cols = []
    for d in directions:
        plus = residual_vector(params, state + eps * d, grid, alias_tol)
        minus = residual_vector(params, state - eps * d, grid, alias_tol)
        cols.append((plus - minus) / (2 * eps))
    return np.column_stack(cols)


def fd_jacobian(params: ParamPoint, state: SheetState,
                directions: Sequence[SheetState] | None = None, eps: float = 1e-5,
                grid: Grid | None = None, *, richardson: bool = True,
                alias_tol: float | None = None) -> FloatArray:
    """Centered finite-difference Jacobian of the functional in coefficient space.

    Column ``j`` is ``(F(u + eps d_j) - F(u - eps d_j)) / (2 eps)`` written as
    ``[F1 sin-coefficients, F2 cos-coefficients]``.  With ``richardson`` the
    columns are recomputed at ``2 eps``; a relative disagreement above
    ``1e-4`` emits :class:`StepWarning`.

    The alias guard is off by default: perturbing the highest retained mode
    leaks quadratic terms past the truncation, and centered differences
    cancel them.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError(f"eps must lie in [1e-7, 1e-3], got {eps}")
    grid = _grid_for(state, grid)
    if directions is None:
        directions = unit_directions(state.m, state.N)
    J = _centered(params, state, directions, eps, grid, alias_tol)
    if richardson:
        J2 = _centered(params, state, directions, 2 * eps, grid, alias_tol)
        scale = max(np.abs(J).max(), np.finfo(float).tiny)
        gap = np.abs(J - J2).max() / scale
        if gap > 1e-4:
            warnings.warn(f"finite-difference Jacobian changes by {gap:.2e} when eps doubles",
                          StepWarning, stacklevel=2)
    return J


def fd_parameter_derivative(params: ParamPoint, state: SheetState, kind: str,
                            h: float = 1e-4, grid: Grid | None = None) -> FloatArray:
    """Centered difference of the functional in the bifurcation parameter ``kind``."""
    grid = _grid_for(state, grid)
    p = params.value(kind)
    plus = residual_vector(params.with_value(kind, p + h), state, grid, alias_tol=None)
    minus = residual_vector(params.with_value(kind, p - h), state, grid, alias_tol=None)
    return (plus - minus) / (2 * h)
