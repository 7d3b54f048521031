"""Time integration of the contour equations in the lab frame (``c = 0``).

Traveling profiles lose their parity as they move, so the integrator works
with general real m-fold series stored as complex coefficients:
``f(x) = sum_n (f_n e^{i k x} + conj)``, ``k = n m``.  A cosine series
``a_n cos(kx)`` has ``f_n = a_n / 2`` and a sine series ``b_n sin(kx)`` has
``f_n = -i b_n / 2``.

Per mode the linear part is ``u' = A_k u`` with
``A_k = [[-i gamma k/2, -k/2], [-beta_k, -i gamma k/2]]`` and
``beta_k = sigma - gamma^2 + gamma^2 k/2 - sigma k^2``; it is propagated
exactly.  The nonlinear remainder uses the exponential midpoint rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import expm

from .contour import SheetGeometry, SheetState
from .errors import BlowupError
from .fourier import EvenSeries, FloatArray, Grid, OddSeries
from .linear import linear_frequencies

ComplexArray = NDArray[np.complex128]

BLOWUP = 1e6
#: ``dt * max |linear frequency|`` may not exceed this.
STABILITY_BOUND = math.pi


@dataclass(frozen=True, eq=False)
class FlowState:
    """Complex coefficients of ``eta`` and ``psi`` on fold-modes ``1..N``."""

    m: int
    eta_hat: ComplexArray
    psi_hat: ComplexArray

    def __post_init__(self):
        for name in ("eta_hat", "psi_hat"):
            arr = np.array(getattr(self, name), dtype=np.complex128).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.eta_hat.size != self.psi_hat.size:
            raise ValueError("eta and psi need the same number of modes")

    @property
    def N(self) -> int:
        return self.eta_hat.size

    @property
    def wavenumbers(self) -> FloatArray:
        return self.m * np.arange(1, self.N + 1, dtype=np.float64)

    @classmethod
    def zeros(cls, m: int, N: int) -> "FlowState":
        return cls(m, np.zeros(N, complex), np.zeros(N, complex))

    @classmethod
    def from_sheet(cls, state: SheetState) -> "FlowState":
        return cls(state.m, 0.5 * state.eta.coeffs, -0.5j * state.psi.coeffs)

    def to_sheet(self) -> SheetState:
        """Parity projection: keeps the cosine part of ``eta`` and the sine part of ``psi``."""
        return SheetState(EvenSeries(self.m, 2 * self.eta_hat.real),
                          OddSeries(self.m, -2 * self.psi_hat.imag))

    def stacked(self) -> ComplexArray:
        """Shape ``(N, 2)`` array of ``(eta_n, psi_n)``."""
        return np.stack([self.eta_hat, self.psi_hat], axis=-1)

    @classmethod
    def from_stacked(cls, m: int, u: ComplexArray) -> "FlowState":
        return cls(m, u[:, 0], u[:, 1])

    def shifted(self, shift: float) -> "FlowState":
        """The profile translated so that ``f_new(x) = f(x + shift)``."""
        phase = np.exp(1j * self.wavenumbers * shift)
        return FlowState(self.m, self.eta_hat * phase, self.psi_hat * phase)

    def values(self, which: str, x_shift: float, Q: int, order: int = 0) -> FloatArray:
        """Samples of ``eta`` or ``psi`` (or a derivative) at ``2 pi j / Q + x_shift``."""
        hat = self.eta_hat if which == "eta" else self.psi_hat
        k = self.wavenumbers
        full = np.zeros(Q // 2 + 1, dtype=np.complex128)
        full[(self.m * np.arange(1, self.N + 1))] = hat * (1j * k) ** order * np.exp(1j * k * x_shift)
        return np.fft.irfft(full, n=Q) * Q

    def x_norm(self, s: float = 2.0) -> float:
        """Same weights as the steady ``X`` norm (``||a cos + b sin||`` with ``a^2+b^2 = 4|f_n|^2``)."""
        k = np.maximum(1.0, self.wavenumbers)
        e = np.sqrt(np.sum((k ** (s + 0.25) * 2 * np.abs(self.eta_hat)) ** 2))
        p = np.sqrt(np.sum((k ** (s - 0.25) * 2 * np.abs(self.psi_hat)) ** 2))
        return float(e + p)

    def vector(self) -> FloatArray:
        """Real coefficients ``[Re eta, Im eta, Re psi, Im psi]`` for output."""
        return np.concatenate([self.eta_hat.real, self.eta_hat.imag,
                               self.psi_hat.real, self.psi_hat.imag])

    def __sub__(self, other: "FlowState") -> "FlowState":
        return FlowState(self.m, self.eta_hat - other.eta_hat, self.psi_hat - other.psi_hat)


def _project(values: FloatArray, m: int, N: int) -> tuple[ComplexArray, complex]:
    Q = values.size
    c = np.fft.rfft(values) / Q
    return c[m * np.arange(1, N + 1)], c[0]


@dataclass(frozen=True, eq=False)
class FlowRates:
    eta_dot: ComplexArray
    psi_dot: ComplexArray
    eta_mean_rate: float

    def stacked(self) -> ComplexArray:
        return np.stack([self.eta_dot, self.psi_dot], axis=-1)


def _rates(sigma: float, gamma: float, state: FlowState, grid: Grid) -> FlowRates:
    Q = grid.Q
    h = 0.5 * grid.spacing
    eta = state.values("eta", 0.0, Q)
    geo = SheetGeometry(grid, eta, state.values("eta", h, Q),
                        state.values("eta", 0.0, Q, 1), state.values("eta", 0.0, Q, 2))
    omega = gamma + state.values("psi", 0.0, Q, 1)
    omega_mid = gamma + state.values("psi", h, Q, 1)
    eta_t = -0.5 * geo.h_full(omega_mid)
    psi_t = -0.5 * omega * geo.d0(omega_mid) - sigma * geo.curvature
    e_hat, e_mean = _project(eta_t, state.m, state.N)
    p_hat, _ = _project(psi_t, state.m, state.N)
    return FlowRates(e_hat, p_hat, float(e_mean.real))


def rhs(sigma: float, gamma: float, state: SheetState,
        grid: Grid | None = None) -> tuple[OddSeries, EvenSeries]:
    """Time derivatives of a parity-restricted state, ``-F(c=0)``.

    ``eta_t`` comes back odd and ``psi_t`` even (mean removed).
    """
    if sigma <= 0:
        raise ValueError("evolution needs sigma > 0")
    grid = grid or Grid.for_modes(state.m, state.N)
    grid.check_resolution(state.m, state.N)
    rates = _rates(sigma, gamma, FlowState.from_sheet(state), grid)
    # f_n = a_n/2 for cosines and -i b_n/2 for sines
    return (OddSeries(state.m, -2 * rates.eta_dot.imag),
            EvenSeries(state.m, 2 * rates.psi_dot.real))


def linear_matrices(k: FloatArray, sigma: float, gamma: float) -> ComplexArray:
    """``A_k`` stacked with shape ``(len(k), 2, 2)``."""
    k = np.asarray(k, dtype=np.float64)
    beta = sigma - gamma**2 + 0.5 * gamma**2 * k - sigma * k**2
    A = np.zeros((k.size, 2, 2), dtype=np.complex128)
    A[:, 0, 0] = A[:, 1, 1] = -0.5j * gamma * k
    A[:, 0, 1] = -0.5 * k
    A[:, 1, 0] = -beta
    return A


def _exp_phi1(B: ComplexArray) -> tuple[ComplexArray, ComplexArray]:
    """``exp(B)`` and ``phi1(B) = B^{-1}(exp(B) - I)`` from one augmented exponential."""
    n = B.shape[-1]
    aug = np.zeros(B.shape[:-2] + (2 * n, 2 * n), dtype=np.complex128)
    aug[..., :n, :n] = B
    aug[..., :n, n:] = np.eye(n)
    big = expm(aug)
    return big[..., :n, :n], big[..., :n, n:]


def max_frequency(sigma: float, gamma: float, m: int, N: int) -> float:
    w_plus, w_minus = linear_frequencies(m * np.arange(1, N + 1), sigma, gamma)
    return float(max(np.abs(w_plus).max(), np.abs(w_minus).max()))


@dataclass(frozen=True)
class EvolutionConfig:
    """Step size, horizon and filtering.

    When ``sigma``, ``gamma``, ``m`` and ``N`` are given, the step is checked
    against ``dt * max |w_k| <= pi`` right away; the integrator repeats the
    check in any case.
    """

    dt: float
    t_final: float
    scheme: str = "imex"
    filter_fraction: float = 1 / 3
    stride: int = 1
    sigma: float | None = None
    gamma: float | None = None
    m: int | None = None
    N: int | None = None

    def __post_init__(self):
        if not self.dt > 0 or not self.t_final > 0:
            raise ValueError("dt and t_final must be positive")
        if self.scheme != "imex":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0 <= self.filter_fraction < 1:
            raise ValueError("filter_fraction must lie in [0, 1)")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if None not in (self.sigma, self.gamma, self.m, self.N):
            self.check_stability(self.sigma, self.gamma, self.m, self.N)

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.t_final / self.dt - 1e-9))

    @property
    def step_size(self) -> float:
        return self.t_final / self.n_steps

    def check_stability(self, sigma: float, gamma: float, m: int, N: int) -> None:
        if sigma <= 0:
            raise ValueError("evolution is only run for sigma > 0")
        w = max_frequency(sigma, gamma, m, N)
        if self.dt * w > STABILITY_BOUND:
            raise ValueError(f"dt={self.dt:g} too large: dt * max frequency = {self.dt * w:.3g} "
                             f"exceeds {STABILITY_BOUND:.4g} (need dt <= {STABILITY_BOUND / w:.3e})")


class Integrator:
    """Exponential midpoint integrator for fixed ``(sigma, gamma)`` and truncation."""

    def __init__(self, config: EvolutionConfig, sigma: float, gamma: float, m: int, N: int,
                 grid: Grid | None = None):
        config.check_stability(sigma, gamma, m, N)
        self.config, self.sigma, self.gamma, self.m, self.N = config, sigma, gamma, m, N
        self.grid = grid or Grid.for_modes(m, N)
        self.grid.check_resolution(m, N)
        self.h = config.step_size
        self.A = linear_matrices(m * np.arange(1, N + 1), sigma, gamma)
        self.E, phi = _exp_phi1(self.h * self.A)
        self.P = self.h * phi
        self.E_half, phi_half = _exp_phi1(0.5 * self.h * self.A)
        self.P_half = 0.5 * self.h * phi_half
        keep = N - int(math.floor(config.filter_fraction * N))
        self.mask = (np.arange(1, N + 1) <= keep).astype(float)[:, None]

    def nonlinear(self, u: ComplexArray) -> ComplexArray:
        rates = _rates(self.sigma, self.gamma, FlowState.from_stacked(self.m, u), self.grid)
        lin = np.einsum("nij,nj->ni", self.A, u)
        return (rates.stacked() - lin) * self.mask

    def step(self, state: FlowState) -> FlowState:
        u = state.stacked()
        mid = _apply(self.E_half, u) + _apply(self.P_half, self.nonlinear(u))
        new = _apply(self.E, u) + _apply(self.P, self.nonlinear(mid))
        big = np.abs(new).max() * 2
        if not np.all(np.isfinite(new)) or big > BLOWUP:
            raise BlowupError(f"coefficient magnitude {big:.3e} exceeds {BLOWUP:.0e}")
        return FlowState.from_stacked(self.m, new)

    def linear_step(self, state: FlowState, backward: bool = False) -> FlowState:
        E = np.linalg.inv(self.E) if backward else self.E
        return FlowState.from_stacked(self.m, _apply(E, state.stacked()))

    def run(self, state: FlowState) -> Iterator[tuple[float, FlowState]]:
        """Yield ``(t, state)`` at ``t = 0`` and then every ``stride`` steps."""
        yield 0.0, state
        n = self.config.n_steps
        for j in range(1, n + 1):
            state = self.step(state)
            if j % self.config.stride == 0 or j == n:
                yield j * self.h, state


def _apply(M: ComplexArray, u: ComplexArray) -> ComplexArray:
    return np.einsum("nij,nj->ni", M, u)


def step(config: EvolutionConfig, sigma: float, gamma: float, state: FlowState | SheetState,
         grid: Grid | None = None) -> FlowState:
    """One step of size ``config.step_size``."""
    if isinstance(state, SheetState):
        state = FlowState.from_sheet(state)
    return Integrator(config, sigma, gamma, state.m, state.N, grid).step(state)


def evolve(config: EvolutionConfig, sigma: float, gamma: float, state: FlowState | SheetState,
           grid: Grid | None = None,
           callback: Callable[[float, FlowState], None] | None = None) -> FlowState:
    """Advance ``state`` to ``config.t_final``; ``callback`` sees every ``stride``-th state."""
    if isinstance(state, SheetState):
        state = FlowState.from_sheet(state)
    integ = Integrator(config, sigma, gamma, state.m, state.N, grid)
    last = state
    for t, last in integ.run(state):
        if callback is not None:
            callback(t, last)
    return last


@dataclass(frozen=True)
class TravelingReport:
    max_shape_error: float
    final_error: float
    speed: float
    t_final: float


def verify_traveling(step_or_state, config: EvolutionConfig, *, c: float | None = None,
                     sigma: float | None = None, gamma: float | None = None,
                     grid: Grid | None = None, s: float = 2.0) -> TravelingReport:
    """Evolve a steady profile and compare with its rigid translation.

    A zero of the steady functional at speed ``c`` moves as
    ``u(t, x) = u(0, x + c t)``.  ``step_or_state`` is a continuation step
    (carrying its parameters) or a :class:`SheetState` with ``c``, ``sigma``
    and ``gamma`` given explicitly.  The reported error is the largest
    ``X``-norm discrepancy over the stored states.
    """
    if isinstance(step_or_state, SheetState):
        state = step_or_state
        if sigma is None or gamma is None:
            raise ValueError("sigma and gamma are required with a bare state")
        c = 0.0 if c is None else c
    else:
        state = step_or_state.state
        p = step_or_state.params
        c, sigma, gamma = p.c, p.sigma, p.gamma
    u0 = FlowState.from_sheet(state)
    errors = []

    def track(t, u):
        errors.append((u - u0.shifted(c * t)).x_norm(s))

    evolve(config, sigma, gamma, u0, grid, track)
    return TravelingReport(float(max(errors)), float(errors[-1]), float(c), config.t_final)


def measure_frequency(times: FloatArray, signal: FloatArray) -> float:
    """Angular frequency from linearly interpolated upward and downward zero crossings."""
    t, y = np.asarray(times), np.asarray(signal)
    idx = np.nonzero(np.signbit(y[:-1]) != np.signbit(y[1:]))[0]
    if idx.size < 2:
        raise ValueError("signal has fewer than two zero crossings")
    tc = t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
    slope = np.polyfit(np.arange(tc.size), tc, 1)[0]
    return float(np.pi / slope)


def measure_phase_rate(times: FloatArray, coeffs: ComplexArray) -> float:
    """Angular frequency from the unwrapped phase of a complex coefficient."""
    phase = np.unwrap(np.angle(np.asarray(coeffs)))
    return float(np.polyfit(np.asarray(times), phase, 1)[0])


def trivial_mean_check(sigma: float, gamma: float, state: FlowState, grid: Grid | None = None) -> float:
    """Rate of change of the mean of ``eta`` that the projection discards."""
    grid = grid or Grid.for_modes(state.m, state.N)
    return abs(_rates(sigma, gamma, state, grid).eta_mean_rate)
