import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexsheet.contour import SheetState
from vortexsheet.fourier import EvenSeries, Grid, OddSeries, analyze
from vortexsheet.linear import apply_linear, jacobian, parameter_jacobian
from vortexsheet.steady import (ParamPoint, fd_jacobian, fd_parameter_derivative, residual,
                                residual_vector, unit_directions, x_norm, y_norm)
from vortexsheet.steady import _pointwise
from vortexsheet.verify import jacobian_errors, random_params

params_st = st.builds(ParamPoint, st.floats(-2, 2), st.floats(0.05, 3), st.floats(-2, 2))
small = st.lists(st.floats(-0.02, 0.02), min_size=3, max_size=3)


def state_from(a, b, m=2):
    return SheetState(EvenSeries(m, a), OddSeries(m, b))


def test_param_point_validation():
    with pytest.raises(ValueError):
        ParamPoint(0, 0, 1)
    with pytest.raises(ValueError):
        ParamPoint(np.nan, 1, 1)
    p = ParamPoint(1, 2, 3)
    assert p.with_value("tension", 5.0) == ParamPoint(1, 5, 3)
    assert p.value("vorticity") == 3.0


def test_trivial_state_is_a_zero(rng):
    zero = SheetState.zeros(3, 6)
    for p in random_params(rng, 20):
        assert residual(p, zero).y_norm <= 1e-12


@settings(max_examples=20, deadline=None)
@given(params_st, small, small)
def test_half_period_shift_equivariance(p, a, b):
    """Shifting by pi/m flips the sign of odd-indexed fold-modes in input and output."""
    flip = np.array([-1.0, 1.0, -1.0])
    u = state_from(a, b)
    v = state_from(flip * np.array(a), flip * np.array(b))
    g = Grid(64)
    ru = residual_vector(p, u, g, alias_tol=None)
    rv = residual_vector(p, v, g, alias_tol=None)
    np.testing.assert_allclose(rv, np.concatenate([flip, flip]) * ru, atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(params_st, small, small)
def test_reflection_symmetry(p, a, b):
    """The functional maps the (even eta, odd psi) class to (odd F1, even F2)."""
    u = state_from(a, b)
    F1, F2, *_ = _pointwise(p, u, Grid(64))
    for values, parity in ((F1, "odd"), (F2, "even")):
        _, rep = analyze(values, parity, 2, 3, alias_tol=None, full_output=True)
        assert rep.wrong_parity <= 1e-26 + 1e-24 * rep.total
        assert rep.off_fold <= 1e-26 + 1e-24 * rep.total


@settings(max_examples=15, deadline=None)
@given(params_st, small, small)
def test_linearization_is_first_order(p, a, b):
    u = state_from(a, b)
    g = Grid(64)
    r_eps = []
    for eps in (1e-2, 5e-3):
        F = residual_vector(p, u * eps, g, alias_tol=None)
        r1, r2 = apply_linear(p, u * eps)
        r_eps.append(np.abs(F - np.concatenate([r1.coeffs, r2.coeffs])).max())
    # quadratic remainder: halving eps divides the defect by about four
    if r_eps[0] > 1e-12:
        assert r_eps[1] / r_eps[0] < 0.3


@pytest.mark.parametrize("m", [2, 3])
def test_fd_jacobian_matches_blocks(rng, m):
    for p in random_params(rng, 3):
        block_err, leak = jacobian_errors(p, m)
        assert block_err <= 1e-6
        assert leak <= 1e-8


def test_fd_jacobian_whole_matrix():
    p = ParamPoint(0.4, 1.3, -0.6)
    m, N = 2, 6
    J = fd_jacobian(p, SheetState.zeros(m, N), grid=Grid.for_modes(m, N))
    np.testing.assert_allclose(J, jacobian(p, m, N), atol=1e-7 * np.abs(J).max())


@pytest.mark.parametrize("kind", ["speed", "tension", "vorticity"])
def test_parameter_derivative_of_linear_part(kind):
    p = ParamPoint(0.3, 1.1, 0.8)
    m, N = 2, 4
    u = SheetState(EvenSeries(m, [1e-4, 2e-5, 0, 0]), OddSeries(m, [-3e-5, 1e-5, 0, 0]))
    d = fd_parameter_derivative(p, u, kind, grid=Grid.for_modes(m, N))
    exact = parameter_jacobian(kind, p, m, N) @ u.to_vector()
    # the nonlinear part contributes at order |u|^2
    np.testing.assert_allclose(d, exact, atol=10 * np.abs(u.to_vector()).max() ** 2)


def test_unit_directions_span():
    dirs = unit_directions(2, 3)
    M = np.array([d.to_vector() for d in dirs])
    np.testing.assert_array_equal(M, np.eye(6))


def test_norm_weights():
    u = SheetState(EvenSeries(2, [1.0]), OddSeries(2, [1.0]))
    assert x_norm(u, 2.0) == pytest.approx(2**2.25 + 2**1.75)
    r1, r2 = OddSeries(2, [1.0]), EvenSeries(2, [1.0])
    assert y_norm(r1, r2, 2.0) == pytest.approx(2**0.75 + 2**0.25)
