"""Parity-restricted m-fold Fourier series on the circle.

An :class:`EvenSeries` stores ``a_1..a_N`` for ``sum a_n cos(n m x)`` and an
:class:`OddSeries` stores ``b_1..b_N`` for ``sum b_n sin(n m x)``.  The zero
mode is never stored, so every series has zero mean by construction.

Evaluation is an exact trigonometric sum; projection back onto coefficients
goes through the FFT and reports how much energy fell outside the retained
modes.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import AliasError

FloatArray = NDArray[np.float64]

#: Default relative energy fraction allowed outside the retained modes.
ALIAS_TOL = 1e-20
#: Absolute energy floor below which discarded content is treated as roundoff.
ALIAS_ATOL = 1e-24


def _frozen(a: ArrayLike) -> FloatArray:
    arr = np.array(a, dtype=np.float64, copy=True).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class _ParitySeries:
    m: int
    coeffs: FloatArray

    parity: ClassVar[str] = ""

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"foldness m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        coeffs = _frozen(self.coeffs)
        if coeffs.size == 0:
            raise ValueError("a series needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def N(self) -> int:
        return self.coeffs.size

    @property
    def wavenumbers(self) -> FloatArray:
        """Absolute wavenumbers ``n*m`` for ``n = 1..N``."""
        return self.m * np.arange(1, self.N + 1, dtype=np.float64)

    @classmethod
    def zeros(cls, m: int, N: int):
        return cls(m, np.zeros(N))

    @classmethod
    def mode(cls, m: int, N: int, n: int = 1, amplitude: float = 1.0):
        """Single fold-mode ``n`` (1-based) with the given amplitude."""
        c = np.zeros(N)
        c[n - 1] = amplitude
        return cls(m, c)

    def values(self, x: ArrayLike, order: int = 0) -> FloatArray:
        """Evaluate the ``order``-th derivative of the series at points ``x``."""
        x = np.asarray(x, dtype=np.float64)
        k = self.wavenumbers
        phase = np.multiply.outer(x, k)
        # d^j/dx^j of cos(kx) is k^j cos(kx + j pi/2); sin is cos shifted by -pi/2
        shift = order * np.pi / 2 - (np.pi / 2 if self.parity == "odd" else 0.0)
        return np.cos(phase + shift) @ (self.coeffs * k**order)

    def __call__(self, x: ArrayLike) -> FloatArray:
        return self.values(x)

    def with_length(self, N: int):
        """Truncate or zero-pad to ``N`` coefficients."""
        c = np.zeros(N)
        n = min(N, self.N)
        c[:n] = self.coeffs[:n]
        return type(self)(self.m, c)

    def _check_compatible(self, other):
        if type(other) is not type(self) or other.m != self.m or other.N != self.N:
            raise ValueError("series must share parity, foldness and length")

    def __add__(self, other):
        self._check_compatible(other)
        return type(self)(self.m, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_compatible(other)
        return type(self)(self.m, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float):
        return type(self)(self.m, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(self.m, -self.coeffs)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(m={self.m}, coeffs={np.array2string(self.coeffs, precision=4)})"


class EvenSeries(_ParitySeries):
    """``f(x) = sum_{n=1}^N a_n cos(n m x)``."""

    parity = "even"


class OddSeries(_ParitySeries):
    """``f(x) = sum_{n=1}^N b_n sin(n m x)``."""

    parity = "odd"


Series = Union[EvenSeries, OddSeries]
_BY_PARITY = {"even": EvenSeries, "odd": OddSeries}


@dataclass(frozen=True)
class Grid:
    """Uniform collocation grid with its half-offset companion.

    ``nodes`` are ``x_j = 2 pi j / Q``; ``midpoints`` are ``x_j + pi / Q``.
    Measured from any node, the midpoints sit at offsets ``pi (2k+1) / Q``,
    so they never touch the node itself.
    """

    Q: int

    def __post_init__(self):
        if int(self.Q) != self.Q or self.Q < 4 or self.Q % 2:
            raise ValueError(f"Q must be an even integer >= 4, got {self.Q!r}")
        object.__setattr__(self, "Q", int(self.Q))

    @classmethod
    def for_modes(cls, m: int, N: int, factor: int = 8) -> "Grid":
        """Power-of-two grid with at least ``factor*m*N`` nodes (never below ``4mN``)."""
        target = max(factor, 4) * m * N
        return cls(int(2 ** np.ceil(np.log2(target))))

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.Q

    @cached_property
    def nodes(self) -> FloatArray:
        x = self.spacing * np.arange(self.Q)
        x.setflags(write=False)
        return x

    @cached_property
    def midpoints(self) -> FloatArray:
        y = self.nodes + np.pi / self.Q
        y.setflags(write=False)
        return y

    @cached_property
    def offset_trig(self) -> tuple[FloatArray, FloatArray]:
        """``cos(x_j - y_k)`` and ``sin(x_j - y_k)`` between nodes and midpoints."""
        d = self.nodes[:, None] - self.midpoints[None, :]
        c, s = np.cos(d), np.sin(d)
        c.setflags(write=False)
        s.setflags(write=False)
        return c, s

    def doubled(self) -> "Grid":
        return Grid(2 * self.Q)

    def check_resolution(self, m: int, N: int) -> None:
        if self.Q < 4 * m * N:
            raise ValueError(f"grid with Q={self.Q} under-resolves m={m}, N={N} (need Q >= {4 * m * N})")


@dataclass(frozen=True)
class SpectralReport:
    """Energy bookkeeping of a projection (energies are grid means of squares)."""

    total: float
    retained: float
    wrong_parity: float
    tail: float
    off_fold: float
    mean: float

    @property
    def discarded(self) -> float:
        return self.wrong_parity + self.tail + self.off_fold

    @property
    def discarded_fraction(self) -> float:
        return self.discarded / self.total if self.total > 0 else 0.0


def evaluate(series: Series, grid: Grid | ArrayLike, order: int = 0) -> FloatArray:
    """Values of ``series`` (or its ``order``-th derivative) on a grid or at points."""
    x = grid.nodes if isinstance(grid, Grid) else grid
    return series.values(x, order)


def analyze(
    values: ArrayLike,
    parity: str,
    m: int,
    N: int,
    *,
    alias_tol: float | None = ALIAS_TOL,
    alias_atol: float = ALIAS_ATOL,
    reference: float | None = None,
    full_output: bool = False,
):
    """Project node values onto the first ``N`` fold-modes of one parity.

    Parameters
    ----------
    values : array_like, shape (Q,)
        Samples at ``Grid(Q).nodes``.
    parity : {"even", "odd"}
    m, N : int
        Foldness and number of retained fold-modes.
    alias_tol : float or None
        Allowed fraction of the reference energy landing outside the
        retained modes (wrong parity, fold-modes beyond ``N``, or
        wavenumbers that are not multiples of ``m``). ``None`` disables
        the check. The mean is reported but never counted as discarded.
    alias_atol : float
        Absolute energy floor added to the threshold (roundoff level).
    reference : float, optional
        Energy scale to compare against; defaults to the total energy of
        ``values``.
    full_output : bool
        Also return the :class:`SpectralReport`.

    Raises
    ------
    AliasError
        If the discarded energy exceeds ``alias_tol * reference + alias_atol``.
    """
    if parity not in _BY_PARITY:
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    v = np.asarray(values, dtype=np.float64)
    Q = v.size
    if Q < 2 * m * N + 2:
        raise ValueError(f"{Q} samples cannot resolve {N} modes of foldness {m}")
    c = np.fft.rfft(v) / Q
    a = 2 * c.real
    b = -2 * c.imag
    if Q % 2 == 0:
        # Nyquist cosine is not doubled; its sine is invisible on the grid
        a[-1] = c[-1].real
        b[-1] = 0.0
    k = np.arange(c.size)
    e_cos = 0.5 * a**2
    e_sin = 0.5 * b**2
    if Q % 2 == 0:
        e_cos[-1] = a[-1] ** 2
    e_cos[0] = e_sin[0] = 0.0

    on_fold = (k % m == 0) & (k > 0)
    kept = on_fold & (k <= m * N)
    same, other = (e_cos, e_sin) if parity == "even" else (e_sin, e_cos)
    report = SpectralReport(
        total=float(np.mean(v**2)),
        retained=float(same[kept].sum()),
        wrong_parity=float(other[kept].sum()),
        tail=float((e_cos + e_sin)[on_fold & ~kept].sum()),
        off_fold=float((e_cos + e_sin)[~on_fold & (k > 0)].sum()),
        mean=float(c[0].real ** 2),
    )
    if alias_tol is not None:
        ref = report.total if reference is None else max(reference, report.total)
        if report.discarded > alias_tol * ref + alias_atol:
            raise AliasError(
                f"{report.discarded:.3e} of {ref:.3e} energy outside the retained "
                f"{parity} modes (tail {report.tail:.2e}, wrong parity "
                f"{report.wrong_parity:.2e}, off-fold {report.off_fold:.2e})"
            )
    idx = m * np.arange(1, N + 1)
    coeffs = a[idx] if parity == "even" else b[idx]
    series = _BY_PARITY[parity](m, coeffs)
    return (series, report) if full_output else series


def derivative(series: Series) -> Series:
    """Coefficientwise ``d/dx``; the parity flips."""
    k = series.wavenumbers
    if series.parity == "even":
        return OddSeries(series.m, -k * series.coeffs)
    return EvenSeries(series.m, k * series.coeffs)


def hilbert(series: Series) -> Series:
    """Periodic Hilbert transform: ``cos -> sin``, ``sin -> -cos``."""
    if series.parity == "even":
        return OddSeries(series.m, series.coeffs)
    return EvenSeries(series.m, -series.coeffs)


def abs_derivative(series: Series) -> Series:
    """The multiplier ``|D|``, equal to ``d/dx`` composed with the Hilbert transform."""
    return type(series)(series.m, series.wavenumbers * series.coeffs)


def sobolev_norm(series: Series, s: float) -> float:
    """``(sum <n m>^(2s) c_n^2)^(1/2)`` with ``<k> = max(1, k)``."""
    w = np.maximum(1.0, series.wavenumbers) ** s
    return float(np.sqrt(np.sum((w * series.coeffs) ** 2)))
