"""Self-check suites that exercise the package invariants."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .contour import SheetState, biot_savart_velocity, curvature, d0, h0, parametric_curvature, trace_velocities
from .evolution import EvolutionConfig, evolve, measure_frequency
from .fourier import EvenSeries, Grid, OddSeries
from .linear import block, det_block
from .steady import ParamPoint, fd_jacobian, residual


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name}: {self.value:.3e} (tol {self.tol:.1e})"


def random_params(rng: np.random.Generator, n: int) -> list[ParamPoint]:
    """Points of ``[-2, 2] x (0, 3] x [-2, 2]``."""
    c = rng.uniform(-2, 2, n)
    sigma = 3 - rng.uniform(0, 3, n)  # (0, 3]
    gamma = rng.uniform(-2, 2, n)
    return [ParamPoint(*t) for t in zip(c, sigma, gamma)]


def suite_trivial(rng: np.random.Generator, n_points: int = 100, m: int = 2, N: int = 8) -> list[Check]:
    zero = SheetState.zeros(m, N)
    grid = Grid.for_modes(m, N)
    worst = max(residual(p, zero, grid=grid).y_norm for p in random_params(rng, n_points))
    return [Check(f"trivial residual over {n_points} parameter points", worst, 1e-12)]


def jacobian_errors(params: ParamPoint, m: int, N: int = 8, modes: int = 4,
                    eps: float = 1e-5) -> tuple[float, float]:
    """Worst relative block error for ``n <= modes`` and worst cross-mode entry."""
    J = fd_jacobian(params, SheetState.zeros(m, N), eps=eps, grid=Grid.for_modes(m, N))
    scale = np.abs(J).max()
    worst = 0.0
    off = J.copy()
    for n in range(1, N + 1):
        idx = np.ix_([n - 1, N + n - 1], [n - 1, N + n - 1])
        if n <= modes:
            M = block(n * m, params).entries
            worst = max(worst, np.linalg.norm(J[idx] - M) / np.linalg.norm(M))
        off[idx] = 0.0
    return float(worst), float(np.abs(off).max() / scale)


def suite_jacobian(rng: np.random.Generator, n_points: int = 5) -> list[Check]:
    checks = []
    for m in (2, 3):
        errs = [jacobian_errors(p, m) for p in random_params(rng, n_points)]
        checks.append(Check(f"FD Jacobian vs M_nm blocks, m={m}", max(e[0] for e in errs), 1e-6))
        checks.append(Check(f"cross-mode leakage, m={m}", max(e[1] for e in errs), 1e-8))
    return checks


def operator_test_functions(kmax: int = 8) -> list[tuple[str, Callable, Callable, float]]:
    """``(label, f, hilbert(f), mean(f))`` for ``1, cos kx, sin kx``."""
    out = [("1", lambda x: np.ones_like(x), lambda x: np.zeros_like(x), 1.0)]
    for k in range(1, kmax + 1):
        out.append((f"cos {k}x", lambda x, k=k: np.cos(k * x), lambda x, k=k: np.sin(k * x), 0.0))
        out.append((f"sin {k}x", lambda x, k=k: np.sin(k * x), lambda x, k=k: -np.cos(k * x), 0.0))
    return out


def suite_operators(rng: np.random.Generator, Q: int = 256) -> list[Check]:
    grid = Grid(Q)
    zero = SheetState.zeros(1, 4)
    d_err = h_err = 0.0
    for _, f, hf, mean in operator_test_functions():
        d_err = max(d_err, np.abs(d0(zero, f, grid) - mean).max())
        h_err = max(h_err, np.abs(h0(zero, f, grid) - hf(grid.nodes)).max())
    coeffs = rng.uniform(-1, 1, 8) * 0.05 / np.arange(1, 9) ** 2
    state = SheetState(EvenSeries(3, coeffs), OddSeries.zeros(3, 8))
    k_err = np.abs(curvature(state, grid) - parametric_curvature(state, grid)).max()
    circle = np.abs(curvature(zero, grid) + 1).max()
    return [Check("D0(0)[f] - mean f", d_err, 1e-11),
            Check("H0(0)[f] - Hilbert f", h_err, 1e-11),
            Check("curvature vs parametric curvature", k_err, 1e-10),
            Check("curvature of the unit circle + 1", circle, 1e-14)]


def _annulus(rng: np.random.Generator, n: int, rmin: float, rmax: float) -> np.ndarray:
    r = rng.uniform(rmin, rmax, n)
    t = rng.uniform(0, 2 * np.pi, n)
    return np.stack([r * np.cos(t), r * np.sin(t)], axis=-1)


def suite_velocity(rng: np.random.Generator, gamma: float = 2.0) -> list[Check]:
    circle = SheetState.zeros(1, 8)
    grid = Grid(256)
    inner = _annulus(rng, 20, 0.0, 0.8)
    outer = _annulus(rng, 20, 1.2, 3.0)
    u_in = biot_savart_velocity(circle, inner, gamma, grid)
    u_out = biot_savart_velocity(circle, outer, gamma, grid)
    exact = gamma * np.stack([-outer[:, 1], outer[:, 0]], axis=-1) / np.sum(outer**2, axis=1)[:, None]
    m, N = 2, 6
    a = rng.uniform(-1, 1, N) * 0.02 / np.arange(1, N + 1) ** 2
    b = rng.uniform(-1, 1, N) * 0.02 / np.arange(1, N + 1) ** 2
    state = SheetState(EvenSeries(m, a), OddSeries(m, b))
    tr = trace_velocities(state, 0.7, grid)
    return [Check("interior velocity of the circular sheet", np.abs(u_in).max(), 1e-10),
            Check("exterior velocity vs gamma x^perp/|x|^2", np.abs(u_out - exact).max(), 1e-10),
            Check("tangential jump - omega on a perturbed sheet", np.abs(tr.jump - tr.omega).max(), 1e-8),
            Check("normal velocity jump", np.abs(tr.normal_plus - tr.normal_minus).max(), 1e-8)]


def standing_wave_frequency(k_index: int, m: int, sigma: float, N: int = 8,
                            amplitude: float = 1e-8, periods: float = 3.2,
                            samples_per_period: int = 400) -> tuple[float, float]:
    """Measured and predicted angular frequency of a small standing wave at ``gamma = 0``."""
    k = k_index * m
    w = float(np.sqrt(det_block(k, ParamPoint(0.0, sigma, 0.0))))
    T = 2 * np.pi / w
    state = SheetState(EvenSeries.mode(m, N, k_index, amplitude), OddSeries.zeros(m, N))
    ts, ys = [], []

    def record(t, u):
        ts.append(t)
        ys.append(u.eta_hat[k_index - 1].real)

    evolve(EvolutionConfig(T / samples_per_period, periods * T), sigma, 0.0, state, callback=record)
    return measure_frequency(np.array(ts), np.array(ys)), w


def suite_dispersion(rng: np.random.Generator, sigma: float = 1.0) -> list[Check]:
    checks = []
    for m in (2, 3):
        for n in range(1, 8 // m + 1):
            measured, predicted = standing_wave_frequency(n, m, sigma)
            checks.append(Check(f"frequency of wavenumber {n * m} (m={m})",
                                abs(measured - predicted) / predicted, 5e-3))
    return checks


SUITES = {
    "trivial": suite_trivial,
    "jacobian": suite_jacobian,
    "operators": suite_operators,
    "velocity": suite_velocity,
    "dispersion": suite_dispersion,
}


def run_suite(name: str, seed: int = 0) -> list[Check]:
    names = list(SUITES) if name == "all" else [name]
    checks = []
    for n in names:
        if n not in SUITES:
            raise ValueError(f"unknown suite {n!r}")
        checks.extend(SUITES[n](np.random.default_rng(seed)))
    return checks
