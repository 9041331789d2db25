import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from activescalar.errors import SearchExhausted
from activescalar.moduli import (KiselevModulus, PowerModulus, SupercriticalModulus, check_obedience,
                                 delta_of_b, dissipation_d_alpha, dissipation_d_b, holder_seminorm,
                                 select_initial_b, xi0_evolution, xi0_extinction_time)
from activescalar.spectral import PeriodicGrid
from activescalar.verifier import load_calibration, shipped_supercritical_modulus


@pytest.fixture(scope="module")
def omega_b():
    return shipped_supercritical_modulus(1.0)


def log_grid_integral(f, lo, hi, points):
    """Trapezoid rule in log(eta): a brute-force oracle for the dissipation integrals."""
    s = np.linspace(math.log(lo), math.log(hi), points)
    eta = np.exp(s)
    return float(np.trapezoid(np.array([f(e) for e in eta]) * eta, s))


# --------------------------------------------------------------- Kiselev family


def test_kiselev_continuity_at_breakpoints():
    km = KiselevModulus(2.0, 0.7, 0.6, 0.05)
    left = km.beta * km._scale * km.xi0 ** (km.beta - 1) * km.xi0 + (1 - km.beta) * km._scale * km.xi0**km.beta
    assert left == pytest.approx(km.h_amp * (km.xi0 / km.delta) ** km.beta, rel=1e-14)
    assert km.value(km.xi0 * (1 - 1e-12)) == pytest.approx(km.value(km.xi0), rel=1e-10)
    assert km.value(km.delta) == pytest.approx(km.h_amp, rel=1e-14)
    assert km.value(km.delta * 3) == km.h_amp
    assert km.value(1e-14) == pytest.approx((1 - km.beta) * km._scale * km.xi0**km.beta, rel=1e-9)


def test_kiselev_rejects_bad_parameters():
    for args in ((0.0, 1.0, 0.5, 0.0), (1.0, 1.0, 1.0, 0.0), (1.0, 1.0, 0.5, 2.0)):
        with pytest.raises(ValueError):
            KiselevModulus(*args)


def _assert_concave_increasing(modulus, xs, strict_to):
    v = np.asarray(modulus.value(xs))
    rising = xs < strict_to
    assert np.all(np.diff(v[rising]) > 0)
    slopes = np.diff(v) / np.diff(xs)
    assert np.all(np.diff(slopes) <= 1e-6 * np.abs(slopes[:-1]) + 1e-12)


@pytest.mark.parametrize("xi0", [0.0, 1e-3, 0.2, 0.7])
def test_kiselev_concave_and_increasing(xi0):
    km = KiselevModulus(1.5, 0.7, 0.55, xi0)
    xs = np.geomspace(1e-6, 2.0, 600)
    _assert_concave_increasing(km, xs, km.delta)


def test_kiselev_derivative_matches_finite_differences():
    km = KiselevModulus(1.5, 0.7, 0.55, 0.1)
    for xi in (0.03, 0.3, 0.6, 1.0):
        h = 1e-7
        fd = (km.value(xi + h) - km.value(xi - h)) / (2 * h)
        assert km.derivative(xi) == pytest.approx(fd, rel=1e-6, abs=1e-9)
    assert km.derivative(km.delta, -1) > 0 and km.derivative(km.delta, 1) == 0.0


# ------------------------------------------------------------- xi0 dynamics


def test_xi0_closed_form_examples():
    assert xi0_evolution(0.8, 0.3, 2.0, 0.0) == 0.8
    assert xi0_evolution(1.0, 0.25, 1.0, 1.0) == pytest.approx(0.25, rel=1e-14)
    t = np.linspace(0, 2, 9)
    assert np.allclose(xi0_evolution(1.0, 0.25, 1.0, t), (1 - t / 2) ** 2)
    t_star = xi0_extinction_time(1.0, 0.25, 1.0)
    assert t_star == 2.0 and xi0_evolution(1.0, 0.25, 1.0, t_star) == 0.0
    assert xi0_evolution(1.0, 0.25, 1.0, 5.0) == 0.0


@pytest.mark.parametrize("delta,alpha,c2", [(1.0, 0.25, 1.0), (np.pi / 4, 0.3, 0.3), (0.5, 0.1, 2.0)])
def test_xi0_closed_form_matches_numerical_ode(delta, alpha, c2):
    t_star = xi0_extinction_time(delta, alpha, c2)
    ts = np.linspace(0, 0.9 * t_star, 20)
    sol = integrate.solve_ivp(lambda t, y: -c2 * np.maximum(y, 0) ** (1 - 2 * alpha), (0, ts[-1]), [delta],
                              t_eval=ts, rtol=1e-11, atol=1e-13, method="DOP853")
    assert np.allclose(sol.y[0], xi0_evolution(delta, alpha, c2, ts), rtol=1e-7, atol=1e-10)


def test_xi0_rejects_bad_inputs():
    with pytest.raises(ValueError):
        xi0_evolution(1.0, 0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        xi0_evolution(1.0, 0.2, 0.0, 0.0)


# ---------------------------------------------------------------- obedience


def test_small_field_obeys_initial_modulus():
    grid = PeriodicGrid(256)
    km = KiselevModulus(2.0, np.pi / 4, 0.7, np.pi / 4)
    amp = (1 - km.beta) * km.h_amp / 2
    theta = grid.function(amp * np.sin(3 * grid.points))
    assert check_obedience(theta, km).status == "obeys"


def test_sine_against_linear_moduli():
    grid = PeriodicGrid(256)
    theta = grid.function(1.0 * np.sin(grid.points))
    steep = check_obedience(theta, PowerModulus(1.2))
    # closed form: 2 sin(xi/2) - c xi < 0 for every xi > 0 when c > 1, with sup 0 as xi -> 0
    assert steep.status == "obeys" and -0.2 * grid.spacing < steep.gap < 0
    shallow = check_obedience(theta, PowerModulus(0.8))
    xi = 2 * np.arccos(0.8)
    assert shallow.status == "violated"
    assert shallow.gap == pytest.approx(2 * np.sin(xi / 2) - 0.8 * xi, rel=1e-8)
    assert shallow.xi == pytest.approx(xi, rel=1e-6)


def test_critical_status_within_tolerance():
    grid = PeriodicGrid(256)
    theta = grid.function(np.sin(grid.points))
    xi = 2 * np.arccos(0.8)
    target = 2 * np.sin(xi / 2) - 0.8 * xi
    report = check_obedience(theta, PowerModulus(0.8), tolerance=1.01 * target)
    assert report.status == "critical"


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_obedience_gap_symmetric_under_sign_flip(seed):
    from conftest import random_field

    grid = PeriodicGrid(64)
    theta = random_field(grid, np.random.default_rng(seed), modes=5)
    flipped = grid.function(-theta.values)
    km = KiselevModulus(1.0, 0.8, 0.6, 0.1)
    a, b = check_obedience(theta, km), check_obedience(flipped, km)
    assert a.gap == pytest.approx(b.gap, rel=1e-9, abs=1e-12)


def test_holder_seminorm_matches_brute_force():
    grid = PeriodicGrid(64)
    theta = grid.function(np.sin(grid.points) + 0.2 * np.cos(4 * grid.points))
    x = grid.points
    d = np.abs(x[:, None] - x[None, :])
    d = np.minimum(d, 2 * np.pi - d)
    np.fill_diagonal(d, np.inf)
    ref = np.max(np.abs(theta.values[:, None] - theta.values[None, :]) / d**0.4)
    assert holder_seminorm(theta, 0.4) == pytest.approx(ref, rel=1e-14)


# ------------------------------------------------------------- dissipation D_alpha


def test_d_alpha_vanishes_for_linear_modulus():
    assert abs(dissipation_d_alpha(PowerModulus(1.0), 0.3, 0.4, c_alpha=1.0)) < 1e-9


@pytest.mark.parametrize("xi", [0.01, 0.3, 2.0])
def test_d_alpha_nonpositive_for_square_root(xi):
    assert dissipation_d_alpha(PowerModulus(1.0, 0.5), 0.25, xi) <= 0


def _d_alpha_oracle(km, alpha, xi, points=60001):
    s = 1 + 2 * alpha
    w0 = km.value(xi)
    inner = log_grid_integral(
        lambda e: (km.value(xi + 2 * e) + km.value(xi - 2 * e) - 2 * w0) / e**s, 1e-14, xi / 2, points)
    top = 1e6
    outer = log_grid_integral(
        lambda e: (km.value(xi + 2 * e) - km.value(2 * e - xi) - 2 * w0) / e**s, xi / 2, top, points)
    return inner + outer - 2 * w0 * top ** (-2 * alpha) / (2 * alpha)


@pytest.mark.parametrize("xi0_frac", [0.0, 0.1])
def test_d_alpha_matches_dense_riemann_sum(xi0_frac):
    km = KiselevModulus(1.0, np.pi / 4, 0.7, xi0_frac * np.pi / 4)
    xi = km.delta / 2
    got = dissipation_d_alpha(km, 0.3, xi, c_alpha=1.0)
    assert got == pytest.approx(_d_alpha_oracle(km, 0.3, xi), rel=1e-6)


def test_d_alpha_local_part_monotone_in_xi0():
    # only the second-difference part sharpens with smaller xi0; the far-field
    # -2 omega(xi) term moves the other way because omega(xi) grows with xi0
    alpha, delta = 0.3, np.pi / 4
    for xi in (1e-3, 1e-2, 0.1):
        values = []
        for f in (0.0, 1e-3, 1e-2, 0.1, 1.0):
            km = KiselevModulus(1.0, delta, 0.7, f * delta)
            w0 = km.value(xi)
            values.append(log_grid_integral(
                lambda e: (km.value(xi + 2 * e) + km.value(xi - 2 * e) - 2 * w0) / e ** (1 + 2 * alpha),
                1e-14, xi / 2, 4001))
        assert all(a <= b + 1e-6 for a, b in zip(values, values[1:]))


# ------------------------------------------------------------- omega_B family


def test_omega_b_slope_at_origin_and_delta(omega_b):
    cal = load_calibration()["supercritical"]
    assert omega_b.derivative(0.0) == 1.0
    assert omega_b.derivative(1e-300) == pytest.approx(1.0, rel=1e-12)
    assert omega_b.value(0.0) == 0.0
    assert omega_b.delta_b <= omega_b.minorant.sigma / 2
    assert float(omega_b.minorant.m(omega_b.delta_b)) == pytest.approx(omega_b.b / cal["kappa"], rel=1e-10)
    assert omega_b.concave_at_delta


def test_omega_b_closed_form_matches_direct_quadrature(omega_b):
    m, d, coeff = omega_b.minorant, omega_b.delta_b, omega_b._slope_coeff

    def integrand(eta):
        return (3 + math.log(d / eta)) / float(m.r_m(eta))

    for frac in (1e-6, 1e-3, 0.1, 0.5, 0.999):
        xi = frac * d
        direct = integrate.quad(integrand, 0, xi, epsabs=0, epsrel=1e-12, limit=400)[0]
        assert omega_b.derivative(xi) == pytest.approx(omega_b.b - coeff * direct, rel=1e-10)
        value = integrate.quad(lambda s: omega_b.derivative(s), 0, xi, epsabs=0, epsrel=1e-11)[0]
        assert omega_b.value(xi) == pytest.approx(value, rel=1e-9)


def test_omega_b_outer_branch(omega_b):
    m, d = omega_b.minorant, omega_b.delta_b
    for xi in (1.5 * d, 0.03, 0.08):
        assert omega_b.derivative(xi) == pytest.approx(omega_b.gamma * float(m.m(2 * xi)), rel=1e-14)
        direct = integrate.quad(lambda s: omega_b.derivative(s), d, xi, epsrel=1e-11, epsabs=0)[0]
        assert omega_b.value(xi) - omega_b.value(d) == pytest.approx(direct, rel=1e-7)
    assert omega_b.value(0.5) == omega_b.value(m.sigma)


@pytest.mark.parametrize("b", [1.0, 16.0, 256.0])
def test_omega_b_concave_increasing(b):
    sm = shipped_supercritical_modulus(b)
    xs = np.geomspace(1e-9, 0.099, 400)
    _assert_concave_increasing(sm, xs, sm.minorant.sigma)
    assert np.all(np.diff(sm.derivative(xs)) <= 0)


def test_omega_b_rejects_bad_parameters(omega_b):
    m = omega_b.minorant
    with pytest.raises(ValueError):
        SupercriticalModulus(m, 0.5, 1.0, 0.0625)
    with pytest.raises(ValueError):
        SupercriticalModulus(m, 1.0, 1e3, 0.0625)
    assert delta_of_b(m, 2.0, 1.0) < delta_of_b(m, 1.0, 1.0)


# ---------------------------------------------------------------- dissipation D_B


def test_d_b_vanishes_for_linear_modulus(omega_b):
    assert abs(dissipation_d_b(PowerModulus(1.0), omega_b.minorant, 0.05)) < 1e-12


def test_d_b_infinite_on_slope_drop(omega_b):
    assert dissipation_d_b(omega_b, omega_b.minorant, omega_b.delta_b) == math.inf


def test_d_b_lower_bound_near_delta(omega_b):
    m = omega_b.minorant
    c_a = 1 + 1.5 ** (-m.a)
    for xi in (omega_b.delta_b * (1 - 1e-3), omega_b.delta_b * (1 + 1e-3)):
        bound = (2 - c_a) / m.c_norm * omega_b.value(xi) * float(m.m(2 * xi))
        assert dissipation_d_b(omega_b, m, xi) >= bound


def _d_b_oracle(sm, xi, points=30001):
    m, w0 = sm.minorant, sm.value(xi)

    def inner(e):
        return (2 * w0 - sm.value(xi + 2 * e) - sm.value(xi - 2 * e)) * float(m.m(2 * e)) / e

    def outer(e):
        return (2 * w0 - sm.value(xi + 2 * e) + sm.value(2 * e - xi)) * float(m.m(2 * e)) / e

    # below 1e-9 xi the integrand is O(eta) and rounding in the second difference dominates
    total = log_grid_integral(inner, 1e-9 * xi, xi / 2, points)
    if xi / 2 < m.sigma:
        total += log_grid_integral(outer, xi / 2, m.sigma, points)
    return total


@pytest.mark.parametrize("xi_frac", [0.1, 0.5, 2.0, 4.0, 5.5])
def test_d_b_matches_dense_riemann_sum(omega_b, xi_frac):
    xi = xi_frac * omega_b.delta_b
    got = dissipation_d_b(omega_b, omega_b.minorant, xi)
    assert got > 0
    assert got == pytest.approx(_d_b_oracle(omega_b, xi), rel=1e-6)


# ---------------------------------------------------------------- initial B


def test_select_initial_b(omega_b):
    grid = PeriodicGrid(128)
    m = omega_b.minorant
    kappa, gamma = omega_b.kappa, omega_b.gamma
    assert select_initial_b(grid.function(np.zeros(128)), 0.0, m, kappa, gamma) == 1.0
    theta = grid.function(0.003 * (np.sin(grid.points) + np.cos(2 * grid.points)))
    big_m = float(np.max(np.abs(theta.values)))
    b = select_initial_b(theta, big_m, m, kappa, gamma)
    grad = float(np.max(np.abs(np.gradient(theta.values, grid.spacing))))
    sm = SupercriticalModulus(m, b, kappa, gamma)
    assert sm.value(2 * big_m / grad * 0.999) >= 2 * big_m * 0.99
    assert sm.value(m.sigma) >= 2 * big_m
    if b > 1:
        half = SupercriticalModulus(m, b / 2, kappa, gamma)
        sep = 2 * big_m / grad
        assert half.value(sep) < 2 * big_m or half.value(m.sigma) < 2 * big_m
    xs = np.geomspace(1e-6, np.pi, 200)
    assert np.all(sm.value(xs) >= np.minimum(xs * grad, 2 * big_m) * (1 - 1e-3))


def test_select_initial_b_exhausts_on_large_data(omega_b):
    grid = PeriodicGrid(64)
    theta = grid.function(np.sin(grid.points))
    with pytest.raises(SearchExhausted):
        select_initial_b(theta, 1.0, omega_b.minorant, omega_b.kappa, omega_b.gamma, b_max=8.0)
