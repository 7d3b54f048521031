"""Local branches of m-fold traveling sheets emanating from a bifurcation point.

Each step fixes the ``cos(mx)`` coefficient of ``eta`` to the amplitude ``s``
and solves the steady functional for the bifurcating parameter together with
the remaining ``2N - 1`` coefficients by Newton's method.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .contour import SheetState
from .errors import NewtonDivergence, StepTooLarge
from .fourier import FloatArray, Grid
from .linear import BifurcationPoint, jacobian, parameter_jacobian
from .steady import ParamPoint, fd_jacobian, residual, x_norm

log = logging.getLogger(__name__)

DEFAULT_MODES = 16
DEFAULT_TOL = 1e-10
TRUST_AMPLITUDE = 0.05
TAIL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BranchStep:
    s: float
    param_value: float
    state: SheetState
    residual_norm: float
    newton_iters: int
    params: ParamPoint
    tail_ratio: float = 0.0


@dataclass(eq=False)
class Branch:
    point: BifurcationPoint
    steps: list[BranchStep] = field(default_factory=list)
    direction: int = 1
    N: int = DEFAULT_MODES
    Q: int = 0
    tol: float = DEFAULT_TOL

    @property
    def amplitudes(self) -> FloatArray:
        return np.array([st.s for st in self.steps])

    @property
    def values(self) -> FloatArray:
        return np.array([st.param_value for st in self.steps])

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class NewtonOptions:
    max_iters: int = 25
    tol: float = DEFAULT_TOL
    stall_ratio: float = 0.5
    fd_eps: float = 1e-6
    predictor_tol: float = 1e-1
    tail_tol: float = TAIL_TOL


def tail_ratio(state: SheetState) -> float:
    """Energy in fold-modes above ``N/2`` relative to the total."""
    energy = state.eta.coeffs**2 + state.psi.coeffs**2
    total = energy.sum()
    if total == 0:
        return 0.0
    return float(energy[state.N // 2:].sum() / total)


class _StepSystem:
    """Unknowns ``z = [p, a_2..a_N, b_1..b_N]`` at fixed amplitude ``s``."""

    def __init__(self, point: BifurcationPoint, s: float, N: int, grid: Grid):
        self.point, self.s, self.N, self.grid = point, s, N, grid
        self.m = point.m

    def state(self, z: FloatArray) -> SheetState:
        v = np.concatenate([[self.s], z[1:]])
        return SheetState.from_vector(self.m, v)

    def params(self, z: FloatArray) -> ParamPoint:
        return self.point.params.with_value(self.point.kind, z[0])

    def pack(self, p: float, state: SheetState) -> FloatArray:
        return np.concatenate([[p], state.to_vector()[1:]])

    def residual(self, z: FloatArray):
        return residual(self.params(z), self.state(z), grid=self.grid)

    def analytic_jacobian(self, z: FloatArray) -> FloatArray:
        params = self.params(z)
        u = self.state(z).to_vector()
        J = jacobian(params, self.m, self.N)
        J[:, 0] = parameter_jacobian(self.point.kind, params, self.m, self.N) @ u
        return J

    def fd_jacobian(self, z: FloatArray, eps: float) -> FloatArray:
        params, state = self.params(z), self.state(z)
        J = fd_jacobian(params, state, eps=eps, grid=self.grid, richardson=False)
        h = max(eps, 1e-8 * abs(z[0]))
        kind = self.point.kind
        plus = residual(params.with_value(kind, z[0] + h), state, grid=self.grid, alias_tol=None)
        minus = residual(params.with_value(kind, z[0] - h), state, grid=self.grid, alias_tol=None)
        J[:, 0] = (plus.vector - minus.vector) / (2 * h)
        return J


def _newton(system: _StepSystem, z: FloatArray, opts: NewtonOptions):
    res = system.residual(z)
    norm = res.y_norm
    J = system.analytic_jacobian(z)
    refreshed = False
    for it in range(1, opts.max_iters + 1):
        if norm <= opts.tol:
            return z, res, it - 1
        dz = np.linalg.solve(J, -res.vector)
        z_new = z + dz
        res_new = system.residual(z_new)
        ratio = res_new.y_norm / norm
        if ratio > opts.stall_ratio and not refreshed:
            # the linearization at the trivial state is too crude here
            J = system.fd_jacobian(z, opts.fd_eps)
            refreshed = True
            log.debug("s=%g: FD Jacobian refresh at iteration %d (ratio %.2e)", system.s, it, ratio)
            if ratio >= 1:
                continue
        elif ratio > opts.stall_ratio:
            J = system.fd_jacobian(z_new, opts.fd_eps)
        z, res, norm = z_new, res_new, res_new.y_norm
    if norm <= opts.tol:
        return z, res, opts.max_iters
    raise NewtonDivergence(f"Newton did not reach {opts.tol:.1e} at s={system.s:g} "
                           f"(last residual {norm:.3e})")


def trace_branch(point: BifurcationPoint, ds: float, steps: int, *, direction: int = 1,
                 N: int = DEFAULT_MODES, grid: Grid | None = None, tol: float = DEFAULT_TOL,
                 trust: float = TRUST_AMPLITUDE, options: NewtonOptions | None = None) -> Branch:
    """Continue the branch through ``point`` at amplitudes ``s_k = k ds direction``.

    Parameters
    ----------
    point : BifurcationPoint
        Admissible threshold with its kernel vector ``x0``.
    ds : float
        Amplitude increment, ``0 < ds <= 0.05``.
    steps : int
        Number of steps; ``steps * ds`` may not exceed ``trust``.
    direction : {+1, -1}
        Sign of the amplitude.
    N : int
        Retained fold-modes.
    grid : Grid, optional
        Collocation grid; defaults to ``Grid.for_modes(m, N)``.

    Raises
    ------
    NewtonDivergence
        If a step fails to converge. ``last_good`` carries the partial branch.
    StepTooLarge
        If the predictor residual exceeds ``options.predictor_tol``.
    """
    opts = options or NewtonOptions(tol=tol)
    opts.tol = tol
    if not point.admissible:
        raise ValueError(f"bifurcation point is not admissible: {point.reason}")
    if not 0 < ds <= 0.05:
        raise ValueError(f"ds must lie in (0, 0.05], got {ds}")
    if int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps}")
    if steps * ds > trust * (1 + 1e-12):
        raise ValueError(f"steps*ds = {steps * ds:g} exceeds the trust amplitude {trust:g}")
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    m = point.m
    grid = grid or Grid.for_modes(m, N)
    grid.check_resolution(m, N)
    branch = Branch(point, [], direction, N, grid.Q, tol)

    x0 = point.kernel_state(N)
    p0 = point.value
    history = [(0.0, p0, SheetState.zeros(m, N))]
    for k in range(1, steps + 1):
        s = direction * k * ds
        system = _StepSystem(point, s, N, grid)
        if k == 1:
            p_guess, u_guess = p0, s * x0
        else:
            (s1, p1, u1), (s2, p2, u2) = history[-2], history[-1]
            t = (s - s2) / (s2 - s1)
            p_guess = p2 + t * (p2 - p1)
            u_guess = u2 + t * (u2 - u1)
        z = system.pack(p_guess, u_guess)
        pred = system.residual(z).y_norm
        if pred > opts.predictor_tol:
            raise StepTooLarge(f"predictor residual {pred:.3e} at s={s:g} exceeds "
                               f"{opts.predictor_tol:g}; reduce ds")
        try:
            z, res, iters = _newton(system, z, opts)
        except NewtonDivergence as exc:
            raise NewtonDivergence(str(exc), last_good=branch) from None
        state = system.state(z)
        tail = tail_ratio(state)
        if tail > opts.tail_tol:
            raise NewtonDivergence(f"tail energy ratio {tail:.2e} at s={s:g} exceeds "
                                   f"{opts.tail_tol:.0e}; increase N", last_good=branch)
        params = system.params(z)
        branch.steps.append(BranchStep(s, float(z[0]), state, res.y_norm, iters, params, tail))
        history.append((s, float(z[0]), state))
        log.info("step %d: s=%.3e p=%.15g residual=%.2e iters=%d", k, s, z[0], res.y_norm, iters)
    return branch


def certify(branch: Branch, factor: int = 2) -> FloatArray:
    """Residual norms of every step re-evaluated on a grid ``factor`` times finer."""
    fine = Grid(branch.Q * factor)
    return np.array([residual(st.params, st.state, grid=fine).y_norm for st in branch.steps])


@dataclass(frozen=True)
class BranchAsymptotics:
    p0_extrapolated: float
    tangent_defect: float
    quadratic_fit: float
    exponent: float


def tangent_defects(branch: Branch, s_norm: float = 2.0) -> FloatArray:
    """``||state - s x0||_X / s^2`` for each step."""
    x0 = branch.point.kernel_state(branch.N)
    return np.array([x_norm(st.state - st.s * x0, s_norm) / st.s**2 for st in branch.steps])


def branch_asymptotics(branch: Branch) -> BranchAsymptotics:
    """Limit ``p(0)``, tangency defect and the leading power law of ``p(s) - p(0)``.

    ``p`` is even in ``s`` (a half-period shift maps ``s`` to ``-s``), so the
    extrapolation fits a polynomial in ``s^2`` through the computed steps.
    """
    if len(branch.steps) < 3:
        raise ValueError("asymptotics need at least three steps")
    s = branch.amplitudes
    p = branch.values
    deg = min(2, len(s) - 1)
    coef = np.polynomial.polynomial.polyfit(s**2, p, deg)
    p0 = float(coef[0])
    dp = np.abs(p - p0)
    good = dp > 0
    if good.sum() >= 2:
        exponent = float(np.polyfit(np.log(np.abs(s[good])), np.log(dp[good]), 1)[0])
    else:
        exponent = float("nan")
    return BranchAsymptotics(p0, float(tangent_defects(branch).max()), float(coef[1]), exponent)
