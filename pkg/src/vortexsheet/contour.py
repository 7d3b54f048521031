"""Contour operators of the radial vortex-sheet parametrization.

The interface is ``z(x) = R(x) e^{ix}`` with ``R = sqrt(1 + 2 eta)``.  All
integrals over the circle use the normalized measure ``(1/2pi) dx``.

Principal-value integrals are evaluated at the grid nodes from samples at the
half-offset midpoints (the alternate-point trapezoidal rule).  The offset
samples are placed symmetrically about every node, so the odd ``cot``-type
part of each kernel cancels in the sum and the remaining smooth part is
integrated with spectral accuracy.  An alternative would be to split off the
singular part explicitly and integrate the remainder; that route is not used.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError, QuadratureWarning, TooCloseError
from .fourier import EvenSeries, FloatArray, Grid, OddSeries, Series

#: Smallest admissible value of ``(1 + 2 eta)`` anywhere on the grid.
MIN_RADIUS_SQ = 1e-8


@dataclass(frozen=True, eq=False)
class SheetState:
    """m-fold profile pair: even radial perturbation ``eta``, odd potential ``psi``.

    The vortex-sheet strength is never stored; it is rebuilt as
    ``omega = gamma + psi_x``.
    """

    eta: EvenSeries
    psi: OddSeries

    def __post_init__(self):
        if not isinstance(self.eta, EvenSeries) or not isinstance(self.psi, OddSeries):
            raise TypeError("eta must be an EvenSeries and psi an OddSeries")
        if self.eta.m != self.psi.m or self.eta.N != self.psi.N:
            raise ValueError("eta and psi must share foldness and length")

    @property
    def m(self) -> int:
        return self.eta.m

    @property
    def N(self) -> int:
        return self.eta.N

    @classmethod
    def zeros(cls, m: int, N: int) -> "SheetState":
        return cls(EvenSeries.zeros(m, N), OddSeries.zeros(m, N))

    @classmethod
    def from_vector(cls, m: int, v: ArrayLike) -> "SheetState":
        """Inverse of :meth:`to_vector`: ``[a_1..a_N, b_1..b_N]``."""
        v = np.asarray(v, dtype=np.float64)
        N = v.size // 2
        if v.size != 2 * N:
            raise ValueError("coefficient vector must have even length")
        return cls(EvenSeries(m, v[:N]), OddSeries(m, v[N:]))

    def to_vector(self) -> FloatArray:
        return np.concatenate([self.eta.coeffs, self.psi.coeffs])

    def omega(self, x: ArrayLike, gamma: float) -> FloatArray:
        return gamma + self.psi.values(x, 1)

    def with_length(self, N: int) -> "SheetState":
        return SheetState(self.eta.with_length(N), self.psi.with_length(N))

    def __add__(self, other: "SheetState") -> "SheetState":
        return SheetState(self.eta + other.eta, self.psi + other.psi)

    def __sub__(self, other: "SheetState") -> "SheetState":
        return SheetState(self.eta - other.eta, self.psi - other.psi)

    def __mul__(self, scalar: float) -> "SheetState":
        return SheetState(self.eta * scalar, self.psi * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SheetState":
        return SheetState(-self.eta, -self.psi)


FunctionLike = Union[float, Series, Callable[[FloatArray], FloatArray], ArrayLike]


def _sample(f: FunctionLike, x: FloatArray) -> FloatArray:
    if np.isscalar(f):
        return np.full(x.shape, float(f))
    if isinstance(f, (EvenSeries, OddSeries)):
        return f.values(x)
    if callable(f):
        return np.asarray(f(x), dtype=np.float64)
    arr = np.asarray(f, dtype=np.float64)
    if arr.shape != x.shape:
        raise ValueError(f"sampled function has shape {arr.shape}, expected {x.shape}")
    return arr


class SheetGeometry:
    """Grid samples of one interface and the kernels of its contour operators.

    Built either from a :class:`SheetState` or from raw samples (the time
    integrator works with profiles that are not parity-restricted).
    """

    def __init__(self, grid: Grid, eta_nodes, eta_mid, eta_x, eta_xx):
        self.grid = grid
        self.eta = np.asarray(eta_nodes, dtype=np.float64)
        self.eta_mid = np.asarray(eta_mid, dtype=np.float64)
        self.eta_x = np.asarray(eta_x, dtype=np.float64)
        self.eta_xx = np.asarray(eta_xx, dtype=np.float64)
        lowest = min(self.eta.min(), self.eta_mid.min())
        if 1 + 2 * lowest <= MIN_RADIUS_SQ:
            raise DomainError(f"1 + 2*eta reaches {1 + 2 * lowest:.3e}; the radius is not real")
        self.R = np.sqrt(1 + 2 * self.eta)
        self.R_mid = np.sqrt(1 + 2 * self.eta_mid)

    @classmethod
    def from_state(cls, state: SheetState, grid: Grid) -> "SheetGeometry":
        eta = state.eta
        return cls(grid, eta.values(grid.nodes), eta.values(grid.midpoints),
                   eta.values(grid.nodes, 1), eta.values(grid.nodes, 2))

    @cached_property
    def _denominator(self) -> FloatArray:
        cos_d, _ = self.grid.offset_trig
        den = (1 + self.eta[:, None] + self.eta_mid[None, :]
               - self.R[:, None] * self.R_mid[None, :] * cos_d)
        # on the unit circle the closest offset pair gives 1 - cos(pi/Q)
        floor = 1e-3 * (1 - np.cos(np.pi / self.grid.Q))
        if den.min() <= floor:
            raise DomainError("interface nearly self-intersects: kernel denominator "
                              f"{den.min():.3e} below {floor:.3e}")
        return den

    @cached_property
    def kernel_d0(self) -> FloatArray:
        cos_d, _ = self.grid.offset_trig
        num = 1 - (self.R_mid[None, :] / self.R[:, None]) * cos_d
        return num / self._denominator

    @cached_property
    def kernel_h0(self) -> FloatArray:
        _, sin_d = self.grid.offset_trig
        return self.R[:, None] * self.R_mid[None, :] * sin_d / self._denominator

    def d0(self, f_mid: FloatArray) -> FloatArray:
        return self.kernel_d0 @ f_mid / self.grid.Q

    def h0(self, f_mid: FloatArray) -> FloatArray:
        return self.kernel_h0 @ f_mid / self.grid.Q

    def h_full(self, f_mid: FloatArray) -> FloatArray:
        return self.eta_x * self.d0(f_mid) + self.h0(f_mid)

    @cached_property
    def curvature(self) -> FloatArray:
        slope = self.eta_x / self.R
        speed_sq = self.R**2 + slope**2
        return (self.eta_xx - 2 * slope**2) / speed_sq**1.5 - speed_sq**-0.5

    @cached_property
    def z(self) -> FloatArray:
        x = self.grid.nodes
        return np.stack([self.R * np.cos(x), self.R * np.sin(x)], axis=-1)

    @cached_property
    def z_mid(self) -> FloatArray:
        y = self.grid.midpoints
        return np.stack([self.R_mid * np.cos(y), self.R_mid * np.sin(y)], axis=-1)

    @cached_property
    def z_x(self) -> FloatArray:
        x = self.grid.nodes
        radial = self.eta_x / self.R
        return np.stack([radial * np.cos(x) - self.R * np.sin(x),
                         radial * np.sin(x) + self.R * np.cos(x)], axis=-1)


def _perp(v: FloatArray) -> FloatArray:
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _geometry(state: SheetState, grid: Grid | None) -> SheetGeometry:
    return SheetGeometry.from_state(state, grid or Grid.for_modes(state.m, state.N))


def _checked(op: str, state: SheetState, f: FunctionLike, grid: Grid,
             result: FloatArray, check: bool, check_tol: float) -> FloatArray:
    if check:
        if not (np.isscalar(f) or callable(f) or isinstance(f, (EvenSeries, OddSeries))):
            raise ValueError("the doubled-grid check needs f as a scalar, series or callable")
        fine = _apply(op, state, f, grid.doubled())[::2]
        diff = np.abs(fine - result).max()
        if diff > check_tol:
            warnings.warn(f"{op}: doubled grid changes the result by {diff:.3e}",
                          QuadratureWarning, stacklevel=3)
    return result


def _apply(op: str, state: SheetState, f: FunctionLike, grid: Grid) -> FloatArray:
    geo = SheetGeometry.from_state(state, grid)
    return getattr(geo, op)(_sample(f, grid.midpoints))


def radius(state: SheetState, grid: Grid | None = None) -> FloatArray:
    """``R = sqrt(1 + 2 eta)`` at the grid nodes."""
    return _geometry(state, grid).R


def d0(state: SheetState, f: FunctionLike, grid: Grid | None = None, *,
       check: bool = False, check_tol: float = 1e-10) -> FloatArray:
    """The operator ``D0(eta)[f]`` at the nodes.

    ``f`` may be a constant, a series, a callable, or an array of samples at
    ``grid.midpoints``.  With ``check=True`` the result is recomputed on the
    doubled grid and a :class:`QuadratureWarning` is emitted on disagreement.
    """
    grid = grid or Grid.for_modes(state.m, state.N)
    return _checked("d0", state, f, grid, _apply("d0", state, f, grid), check, check_tol)


def h0(state: SheetState, f: FunctionLike, grid: Grid | None = None, *,
       check: bool = False, check_tol: float = 1e-10) -> FloatArray:
    """The operator ``H0(eta)[f]``; reduces to the Hilbert transform at ``eta = 0``."""
    grid = grid or Grid.for_modes(state.m, state.N)
    return _checked("h0", state, f, grid, _apply("h0", state, f, grid), check, check_tol)


def h_full(state: SheetState, f: FunctionLike, grid: Grid | None = None, *,
           check: bool = False, check_tol: float = 1e-10) -> FloatArray:
    """``H(eta)[f] = eta_x D0(eta)[f] + H0(eta)[f]``."""
    grid = grid or Grid.for_modes(state.m, state.N)
    return _checked("h_full", state, f, grid, _apply("h_full", state, f, grid), check, check_tol)


def curvature(state: SheetState, grid: Grid | None = None) -> FloatArray:
    """Signed curvature ``K(eta)`` from spectral derivatives of ``eta``.

    With this sign convention the unit circle has ``K = -1``.
    """
    return _geometry(state, grid).curvature


def parametric_curvature(state: SheetState, grid: Grid | None = None) -> FloatArray:
    """``-z_x^perp . z_xx / |z_x|^3`` computed from the Cartesian curve directly."""
    grid = grid or Grid.for_modes(state.m, state.N)
    x = grid.nodes
    R = radius(state, grid)
    Rx = state.eta.values(x, 1) / R
    Rxx = (state.eta.values(x, 2) - Rx**2) / R
    # z = R e^{ix}: z_x = (R_x + iR) e^{ix}, z_xx = (R_xx - R + 2i R_x) e^{ix}
    zx = (Rx + 1j * R) * np.exp(1j * x)
    zxx = (Rxx - R + 2j * Rx) * np.exp(1j * x)
    zx_perp = 1j * zx
    dot = (np.conj(zx_perp) * zxx).real
    return -dot / np.abs(zx) ** 3


@dataclass(frozen=True)
class CurvePoint:
    """A point of the plane tagged with the fluid region it belongs to."""

    position: tuple[float, float]
    owner: str

    @classmethod
    def classify(cls, state: SheetState, position, tol: float = 1e-12) -> "CurvePoint":
        px, py = map(float, position)
        theta = np.arctan2(py, px)
        R = float(np.sqrt(1 + 2 * state.eta.values(np.array([theta]))[0]))
        r = np.hypot(px, py)
        owner = "on-interface" if abs(r - R) <= tol else ("inside" if r < R else "outside")
        return cls((px, py), owner)


def distance_to_curve(state: SheetState, points: ArrayLike, samples: int = 4096) -> FloatArray:
    """Distance from each point to the interface, by dense sampling plus local refinement."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    t = 2 * np.pi * np.arange(samples) / samples
    R = np.sqrt(1 + 2 * state.eta.values(t))
    curve = np.stack([R * np.cos(t), R * np.sin(t)], axis=-1)
    d = np.linalg.norm(pts[:, None, :] - curve[None, :, :], axis=-1)
    return d.min(axis=1)


def biot_savart_velocity(state: SheetState, points: ArrayLike | CurvePoint, gamma: float,
                         grid: Grid | None = None) -> FloatArray:
    """Velocity induced off the interface, by the plain trapezoidal rule.

    ``points`` is a :class:`CurvePoint`, one ``(x, y)`` pair, or an ``(M, 2)``
    array.  Returns an array of the same leading shape with two components.

    Raises
    ------
    TooCloseError
        If a point lies within two grid spacings of the interface, where the
        trapezoidal rule loses its spectral accuracy.
    """
    grid = grid or Grid.for_modes(state.m, state.N)
    if isinstance(points, CurvePoint):
        points = points.position
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    dist = distance_to_curve(state, pts)
    limit = 2 * grid.spacing
    if np.any(dist <= limit):
        raise TooCloseError(f"point at distance {dist.min():.3e} from the interface (limit {limit:.3e})")
    geo = SheetGeometry.from_state(state, grid)
    omega = state.omega(grid.nodes, gamma)
    diff = pts[:, None, :] - geo.z[None, :, :]
    r2 = np.sum(diff**2, axis=-1)
    u = np.einsum("mqk,q->mk", _perp(diff) / r2[..., None], omega) / grid.Q
    return u[0] if single else u


@dataclass(frozen=True, eq=False)
class TraceVelocities:
    """Interior (``minus``) and exterior (``plus``) velocity traces on the interface."""

    birkhoff_rott: FloatArray
    v_minus: FloatArray
    v_plus: FloatArray
    z_x: FloatArray
    omega: FloatArray

    @property
    def tangential_minus(self) -> FloatArray:
        return np.sum(self.v_minus * self.z_x, axis=-1)

    @property
    def tangential_plus(self) -> FloatArray:
        return np.sum(self.v_plus * self.z_x, axis=-1)

    @property
    def normal_minus(self) -> FloatArray:
        return np.sum(self.v_minus * _perp(self.z_x), axis=-1)

    @property
    def normal_plus(self) -> FloatArray:
        return np.sum(self.v_plus * _perp(self.z_x), axis=-1)

    @property
    def jump(self) -> FloatArray:
        """Tangential jump ``(v_plus - v_minus) . z_x``, which equals ``omega``."""
        return self.tangential_plus - self.tangential_minus


def birkhoff_rott(geo: SheetGeometry, omega_mid: FloatArray) -> FloatArray:
    """Principal-value Birkhoff-Rott integral at the nodes (alternate-point rule)."""
    diff = geo.z[:, None, :] - geo.z_mid[None, :, :]
    # |z(x) - z(y)|^2 = 2 * denominator of the D0/H0 kernels
    r2 = 2 * geo._denominator
    return np.einsum("qpk,p->qk", _perp(diff) / r2[..., None], omega_mid) / geo.grid.Q


def trace_velocities(state: SheetState, gamma: float, grid: Grid | None = None) -> TraceVelocities:
    """Limits of the velocity on the interface from inside and outside.

    ``v_minus/plus = BR(z) omega -/+ (omega / 2) z_x / |z_x|^2``.  The
    exterior trace carries the ``+`` sign for the counter-clockwise
    parametrization, consistent with the exterior field ``gamma x^perp / |x|^2``
    of the circular sheet.
    """
    grid = grid or Grid.for_modes(state.m, state.N)
    geo = SheetGeometry.from_state(state, grid)
    br = birkhoff_rott(geo, state.omega(grid.midpoints, gamma))
    omega = state.omega(grid.nodes, gamma)
    zx = geo.z_x
    half_jump = 0.5 * omega[:, None] * zx / np.sum(zx**2, axis=-1)[:, None]
    return TraceVelocities(br, br - half_jump, br + half_jump, zx, omega)
