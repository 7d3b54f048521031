"""Closed-form linear theory around the circular sheet.

The linearization of the steady functional at the trivial state acts on the
fold-mode pair ``(a_n cos(nmx), b_n sin(nmx))`` through the 2x2 block

    M_k(c, sigma, gamma) = [[-(c + gamma/2) k,                       k/2        ],
                            [sigma - gamma^2 + gamma^2 k/2 - sigma k^2, (c + gamma/2) k]]

with ``k = nm`` the absolute wavenumber; the first output row is the
coefficient of ``sin(kx)`` and the second that of ``cos(kx)``.

Pairings use the plain coefficient product ``sum a_n a~_n + b_n b~_n``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .contour import SheetState
from .errors import InadmissibleError
from .fourier import EvenSeries, FloatArray, OddSeries
from .steady import PARAMETER_OF_KIND, ParamPoint

KINDS = ("speed", "tension", "vorticity")

#: Distance to the nearest positive integer below which a collision is declared.
COLLISION_TOL = 1e-10
#: Distance below which a near-collision warning is emitted.
COLLISION_WARN = 1e-6


class _NoThreshold:
    """Falsy marker returned when a closed-form threshold does not exist."""

    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name

    def __bool__(self) -> bool:
        return False


NOT_REAL = _NoThreshold("NotReal")
NOT_POSITIVE = _NoThreshold("NotPositive")


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def _sign(sign) -> int:
    if sign in (1, "+", "plus", "+1"):
        return 1
    if sign in (-1, "-", "minus", "-1"):
        return -1
    raise ValueError(f"sign must be + or -, got {sign!r}")


def _tension_coeff(k, sigma: float, gamma: float):
    return sigma - gamma**2 + 0.5 * gamma**2 * k - sigma * k**2


@dataclass(frozen=True, eq=False)
class LinearBlock:
    """The 2x2 multiplier at absolute wavenumber ``n``."""

    n: int
    entries: FloatArray

    @property
    def det(self) -> float:
        (a, b), (c, d) = self.entries
        return float(a * d - b * c)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    def __matmul__(self, v):
        return self.entries @ np.asarray(v, dtype=np.float64)


def block(n: int, params: ParamPoint) -> LinearBlock:
    if n < 1:
        raise ValueError(f"wavenumber must be >= 1, got {n}")
    drift = (params.c + 0.5 * params.gamma) * n
    M = np.array([[-drift, 0.5 * n],
                  [_tension_coeff(n, params.sigma, params.gamma), drift]])
    M.setflags(write=False)
    return LinearBlock(int(n), M)


def det_block(n: int, params: ParamPoint) -> float:
    """Closed-form determinant of :func:`block`."""
    c, s, g = params.c, params.sigma, params.gamma
    return -(c + g / 2) ** 2 * n**2 + (n / 4) * (2 * s * n**2 - g**2 * n + 2 * (g**2 - s))


def det_scale(n: int, params: ParamPoint) -> float:
    """Size of the two products in the determinant, for relative comparisons."""
    (a, b), (c, d) = block(n, params).entries
    return float(abs(a * d) + abs(b * c))


def apply_linear(params: ParamPoint, state: SheetState) -> tuple[OddSeries, EvenSeries]:
    """Modewise action of the linearized operator on ``state``."""
    k = state.eta.wavenumbers
    a, b = state.eta.coeffs, state.psi.coeffs
    drift = (params.c + 0.5 * params.gamma) * k
    first = -drift * a + 0.5 * k * b
    second = _tension_coeff(k, params.sigma, params.gamma) * a + drift * b
    return OddSeries(state.m, first), EvenSeries(state.m, second)


def jacobian(params: ParamPoint, m: int, N: int) -> FloatArray:
    """Block-diagonal coefficient-space matrix, ordered like ``fd_jacobian``."""
    J = np.zeros((2 * N, 2 * N))
    for n in range(1, N + 1):
        idx = [n - 1, N + n - 1]
        J[np.ix_(idx, idx)] = block(n * m, params).entries
    return J


def parameter_block(kind: str, n: int, params: ParamPoint) -> FloatArray:
    """``d M_n / d p`` for the parameter named by ``kind``."""
    _check_kind(kind)
    if kind == "speed":
        return np.array([[-n, 0.0], [0.0, n]], dtype=np.float64)
    if kind == "tension":
        return np.array([[0.0, 0.0], [1.0 - n**2, 0.0]])
    g = params.gamma
    return np.array([[-0.5 * n, 0.0], [g * (n - 2.0), 0.5 * n]])


def parameter_jacobian(kind: str, params: ParamPoint, m: int, N: int) -> FloatArray:
    J = np.zeros((2 * N, 2 * N))
    for n in range(1, N + 1):
        idx = [n - 1, N + n - 1]
        J[np.ix_(idx, idx)] = parameter_block(kind, n * m, params)
    return J


# -- admissibility and thresholds ------------------------------------------------


@dataclass(frozen=True)
class Admissibility:
    """Where ``(m, sigma, gamma)`` sits relative to the sets S1 and S2.

    ``m_minus``/``m_plus`` are the real roots of
    ``2 sigma n^2 - gamma^2 n + 2 (gamma^2 - sigma)``; they exist only outside
    the S1 band.
    """

    m: int
    in_S1: bool
    in_S2: bool
    m_minus: float | None
    m_plus: float | None

    @property
    def in_S(self) -> bool:
        return self.in_S1 or self.in_S2


def admissibility(m: int, sigma: float, gamma: float) -> Admissibility:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    g2 = gamma**2
    lo, hi = 4 * sigma * (2 - math.sqrt(3)), 4 * sigma * (2 + math.sqrt(3))
    if lo < g2 < hi:
        return Admissibility(m, True, False, None, None)
    root = math.sqrt(max((g2 - 8 * sigma) ** 2 - 48 * sigma**2, 0.0))
    m_minus = (g2 - root) / (4 * sigma)
    m_plus = (g2 + root) / (4 * sigma)
    return Admissibility(m, False, not (m_minus <= m <= m_plus), m_minus, m_plus)


def speed_radicand(n: int, sigma: float, gamma: float) -> float:
    return 2 * sigma * n - gamma**2 + 2 * (gamma**2 - sigma) / n


def threshold_c(m: int, sigma: float, gamma: float, sign=+1):
    """Rotation speed ``c_m^{+/-}`` at which ``det M_m`` vanishes, or ``NOT_REAL``."""
    if sigma <= 0 or m < 1:
        raise ValueError("need sigma > 0 and m >= 1")
    rad = speed_radicand(m, sigma, gamma)
    if rad < 0:
        return NOT_REAL
    return -gamma / 2 + _sign(sign) * 0.5 * math.sqrt(rad)


def critical_fold(c: float, gamma: float) -> float:
    """``N(c, gamma)``: the tension threshold is positive only for ``m`` above it."""
    alpha = (2 * c + gamma) ** 2 + gamma**2
    return 2 * gamma**2 / alpha if alpha > 0 else math.inf


def threshold_sigma(m: int, c: float, gamma: float, *, form: str = "determinant"):
    """Surface tension ``sigma_m(c, gamma)``, or ``NOT_POSITIVE``.

    ``form="determinant"`` uses ``(alpha m - beta) / (2 (m^2 - 1))`` and
    ``form="expanded"`` the expanded numerator ``m (2c+gamma)^2 + (m-2) gamma^2``.
    """
    if m < 2:
        raise ValueError(f"tension thresholds need m >= 2, got {m}")
    if not m > critical_fold(c, gamma):
        return NOT_POSITIVE
    q = (2 * c + gamma) ** 2
    if form == "determinant":
        num = (q + gamma**2) * m - 2 * gamma**2
    elif form == "expanded":
        num = m * q + (m - 2) * gamma**2
    else:
        raise ValueError(f"unknown form {form!r}")
    value = num / (2 * (m**2 - 1))
    return value if value > 0 else NOT_POSITIVE


def threshold_gamma(m: int, sigma: float, sign=+1) -> float:
    """Mean vorticity ``gamma_m^{+/-}(sigma)`` of the stationary family."""
    if sigma <= 0 or m < 2:
        raise ValueError("need sigma > 0 and m >= 2")
    return _sign(sign) * math.sqrt(sigma * (m + 1))


# -- spectral collisions ----------------------------------------------------------


@dataclass(frozen=True)
class CollisionReport:
    ok: bool
    offending_k: float
    near: bool = False

    @property
    def as_fraction(self) -> Fraction | None:
        if not math.isfinite(self.offending_k):
            return None
        return Fraction(self.offending_k).limit_denominator(10**6)


def _distance_to_positive_integer(k: float) -> float:
    if not math.isfinite(k):
        return math.inf
    nearest = max(1, round(k))
    return abs(k - nearest)


def collision_check(kind: str, m: int, params: ParamPoint) -> CollisionReport:
    """Second root ``k_2`` of the collision equation of the ``m`` threshold.

    For the speed family ``k_2`` is the multiple ``n/m`` of the colliding
    wavenumber ``n``; for tension it is ``n`` itself, so any integer is
    refused, including wavenumbers that are not multiples of ``m``.
    """
    _check_kind(kind)
    c, sigma, gamma = params.c, params.sigma, params.gamma
    if kind == "vorticity":
        # thresholds strictly increase with the wavenumber
        return CollisionReport(True, math.nan)
    if kind == "speed":
        k2 = (gamma**2 - sigma) / (sigma * m**2)
    else:
        q = (2 * c + gamma) ** 2
        den = m * q + (m - 2) * gamma**2
        k2 = ((2 * m - 1) * gamma**2 - q) / den if den != 0 else math.inf
    dist = _distance_to_positive_integer(k2)
    ok = dist > COLLISION_TOL
    near = ok and dist <= COLLISION_WARN
    if near:
        warnings.warn(f"{kind} family at m={m}: k2={k2!r} is within {dist:.1e} of an integer",
                      RuntimeWarning, stacklevel=2)
    return CollisionReport(ok, float(k2), near)


# -- bifurcation points ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BifurcationPoint:
    """A located threshold with its kernel, cokernel and transversality pairing.

    ``kernel = (a, b)`` stands for ``x0 = (a cos(mx), b sin(mx))`` and
    ``cokernel = (a, b)`` for ``y0 = (a sin(mx), b cos(mx))``.
    """

    kind: str
    value: float
    sign: int | None
    m: int
    params: ParamPoint
    kernel: tuple[float, float]
    cokernel: tuple[float, float]
    pairing: float
    admissible: bool = True
    reason: str = ""

    @property
    def parameter(self) -> str:
        return PARAMETER_OF_KIND[self.kind]

    @property
    def sign_label(self) -> str:
        return {1: "+", -1: "-", None: "0"}[self.sign]

    def kernel_state(self, N: int, scale: float = 1.0) -> SheetState:
        a, b = self.kernel
        return SheetState(EvenSeries.mode(self.m, N, 1, scale * a),
                          OddSeries.mode(self.m, N, 1, scale * b))

    def check(self, atol: float = 1e-12) -> tuple[float, float]:
        """Residuals ``|M_m x0|`` and ``|M_m^T y0|`` relative to ``|M_m|``."""
        M = block(self.m, self.params).entries
        scale = max(np.abs(M).max(), 1.0)
        kx = np.abs(M @ np.array(self.kernel)).max() / scale
        ky = np.abs(M.T @ np.array(self.cokernel)).max() / scale
        return float(kx), float(ky)


def _refuse(message: str, reason: str):
    raise InadmissibleError(message, reason)


def bifurcation_point(kind: str, m: int, *, c: float | None = None,
                      sigma: float | None = None, gamma: float | None = None,
                      sign=+1) -> BifurcationPoint:
    """Locate the ``kind`` threshold for foldness ``m`` and assemble its data.

    The two non-bifurcating parameters must be supplied: ``(sigma, gamma)``
    for the speed family, ``(c, gamma)`` for tension and ``sigma`` for the
    stationary vorticity family (``c = 0``).

    Raises
    ------
    InadmissibleError
        If the threshold does not exist or the kernel is not one-dimensional.
    """
    _check_kind(kind)
    if m < 1 or int(m) != m:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    if kind == "speed":
        if sigma is None or gamma is None:
            raise ValueError("speed family needs sigma and gamma")
        if sigma <= 0:
            _refuse("sigma must be positive", "sigma")
        adm = admissibility(m, sigma, gamma)
        if not adm.in_S:
            _refuse(f"(m={m}, sigma={sigma}, gamma={gamma}) lies outside S1 and S2: "
                    f"m in [{adm.m_minus:.6g}, {adm.m_plus:.6g}]", "S")
        sg = _sign(sign)
        value = threshold_c(m, sigma, gamma, sg)
        params = ParamPoint(value, sigma, gamma)
        root = math.sqrt(speed_radicand(m, sigma, gamma))
        kernel = (1.0, sg * root)
        cokernel = (-sg * root, 1.0)
        pairing = 2 * sg * m * root
    elif kind == "tension":
        if c is None or gamma is None:
            raise ValueError("tension family needs c and gamma")
        if m < 2:
            _refuse(f"tension family needs m >= 2, got {m}", "m")
        value = threshold_sigma(m, c, gamma)
        if not value:
            _refuse(f"m={m} does not exceed N(c, gamma)={critical_fold(c, gamma):.6g}; "
                    "the threshold tension is not positive", "N(c,gamma)")
        sg = None
        params = ParamPoint(c, value, gamma)
        q = float(2 * c + gamma)
        kernel = (1.0, q)
        cokernel = (-q, 1.0)
        pairing = 1.0 - m**2
    else:
        if sigma is None:
            raise ValueError("vorticity family needs sigma")
        if sigma <= 0:
            _refuse("sigma must be positive", "sigma")
        if m < 2:
            _refuse(f"vorticity family needs m >= 2, got {m}", "m")
        sg = _sign(sign)
        value = threshold_gamma(m, sigma, sg)
        params = ParamPoint(0.0, sigma, value)
        kernel = (1.0, value)
        cokernel = (-value, 1.0)
        pairing = 2 * value * (m - 1)

    collision = collision_check(kind, m, params)
    if not collision.ok:
        _refuse(f"spectral collision: k2={collision.offending_k!r} is a positive integer",
                "collision")
    return BifurcationPoint(kind, float(value), sg, m, params, kernel, cokernel, float(pairing))


def kernel_vectors(kind: str, m: int, params: ParamPoint, sign=+1):
    """``(x0, y0, pairing)`` for the family ``kind`` located from ``params``.

    The bifurcating entry of ``params`` is ignored and replaced by its
    threshold value.
    """
    kw = {"speed": dict(sigma=params.sigma, gamma=params.gamma),
          "tension": dict(c=params.c, gamma=params.gamma),
          "vorticity": dict(sigma=params.sigma)}[kind]
    point = bifurcation_point(kind, m, sign=sign, **kw)
    return point.kernel, point.cokernel, point.pairing


def pairing(point: BifurcationPoint) -> float:
    """``<d_p L x0, y0>`` from the analytic parameter derivative of the block."""
    dM = parameter_block(point.kind, point.m, point.params)
    return float(np.dot(dM @ np.array(point.kernel), np.array(point.cokernel)))


def linear_frequencies(k, sigma: float, gamma: float) -> tuple[FloatArray, FloatArray]:
    """Frequencies of the linearized time evolution at wavenumbers ``k``.

    Solutions behave like ``exp(i(kx + w t))`` with ``w = -gamma k/2 +/- sqrt(D_k)``,
    ``D_k = det M_k(-gamma/2, sigma, gamma)``. For ``gamma = 0`` these reduce
    to ``+/- sqrt(det M_k(0, sigma, 0))``.  ``D_k < 0`` gives complex pairs.
    """
    k = np.asarray(k, dtype=np.float64)
    D = (k / 4) * (2 * sigma * k**2 - gamma**2 * k + 2 * (gamma**2 - sigma))
    root = np.sqrt(D.astype(complex))
    return -0.5 * gamma * k + root, -0.5 * gamma * k - root
