import math

import numpy as np
import pytest
from scipy import integrate

from lattice_shuttle import design_polynomial
from lattice_shuttle.constants import HBAR
from lattice_shuttle.errors import InsufficientSignalError, ResolutionError, SingularityError
from lattice_shuttle.noise import OU, Channel, NoiseRealization, NoiseSpec, sample_ou_path, sample_ou_paths
from lattice_shuttle.sensitivity import sensitivity
from lattice_shuttle.verify import (
    estimate_sensitivity_mc,
    first_order_batch,
    first_order_response,
    lambda_scaling_check,
    nonlinear_excess_batch,
    response_weights,
    second_order_energy,
    simulate_nonlinear,
)

CHANNELS = list(Channel)


@pytest.fixture(scope="module")
def traj(params):
    return design_polynomial(2.0 * params.period, 433e-9)


def physical_rhs(traj, p, channel, xi_fun, lam):
    """Ermakov width and Newton centre in the trap ``lam * xi`` perturbs.

    Accordion rescales the lattice about the origin, so both the frequency
    and the trap centre ``q0 / (1 + lam xi)`` move; amplitude scales the
    depth; position shifts the lattice by ``lam xi / k``.
    """
    w, k = p.omega0, p.wavenumber

    def rhs(t, y):
        rho, rd, q, qd = y
        q0 = float(traj.trap_position(t, p))
        e = lam * xi_fun(t)
        if channel == "accordion":
            om2, centre = (w * (1 + e)) ** 2, q0 / (1 + e)
        elif channel == "amplitude":
            om2, centre = w**2 * (1 + e), q0
        else:
            om2, centre = w**2, q0 + e / k
        return [rd, w**2 / rho**3 - om2 * rho, qd, om2 * (centre - q)]

    return rhs


def solve_physical(traj, p, channel, xi_fun, lam):
    sol = integrate.solve_ivp(physical_rhs(traj, p, channel, xi_fun, lam), (0, traj.T), [1.0, 0.0, 0.0, 0.0],
                              method="DOP853", rtol=1e-12, atol=1e-15, max_step=p.period / 50)
    return sol.y[:, -1]


@pytest.mark.parametrize("channel", ["accordion", "amplitude", "position"])
def test_first_order_response_against_finite_difference(params, traj, channel):
    # smooth noise, so both the convolution and the ODE are well resolved
    xi_fun = lambda t: math.sin(3.1 * params.omega0 * t / 7) + 0.4 * math.cos(0.37 * params.omega0 * t)
    lam = 1e-5
    plus = solve_physical(traj, params, channel, xi_fun, lam)
    minus = solve_physical(traj, params, channel, xi_fun, -lam)
    ref = (plus - minus) / (2 * lam)
    N = 20000
    t = np.linspace(0, traj.T, N + 1)
    got = first_order_batch(traj, params, np.vectorize(xi_fun)(t), channel)[0]
    scale = np.array([1.0, params.omega0, traj.d, traj.d * params.omega0])
    if channel == "position":
        scale[2:] = 1 / params.wavenumber, params.omega0 / params.wavenumber
    np.testing.assert_allclose(got / scale, ref / scale, atol=1e-6)


def test_zero_noise_gives_zero_response(params, traj):
    out = first_order_batch(traj, params, np.zeros((3, 2001)), "accordion")
    assert np.all(out == 0)


def test_position_noise_leaves_width_alone(params, traj):
    xi = sample_ou_path(NoiseSpec("position", OU(1e-6, params.period)), traj.T, 2000, 5).xi
    out = first_order_batch(traj, params, xi, "position")[0]
    assert out[0] == 0 and out[1] == 0 and out[2] != 0


@pytest.mark.parametrize("T_T0", [0.5, 1.3, 2.0])
def test_constant_accordion_step(params, T_T0):
    traj = design_polynomial(T_T0 * params.period, 0.0)
    N = 40000
    r = first_order_response(traj, params, NoiseRealization(traj.T, np.ones(N + 1), 0), "accordion")
    w = params.omega0
    assert r.rho == pytest.approx(-0.5 * (1 - math.cos(2 * w * traj.T)), abs=1e-7)
    assert r.rho_dot / w == pytest.approx(-math.sin(2 * w * traj.T), abs=1e-7)


def test_resolution_floor(params, traj):
    n_ok = math.ceil(20 * traj.T / params.period)
    response_weights(traj, params, "amplitude", n_ok)
    with pytest.raises(ResolutionError):
        response_weights(traj, params, "amplitude", n_ok - 2)
    with pytest.raises(ResolutionError):
        estimate_sensitivity_mc(traj, params, NoiseSpec("amplitude", OU(1e-6, params.period)), N=100, points_per_period=10)


def test_realization_must_match_duration(params, traj):
    real = NoiseRealization(traj.T * 1.1, np.zeros(3001), 0)
    with pytest.raises(ValueError):
        first_order_response(traj, params, real, "amplitude")
    with pytest.raises(ValueError):
        simulate_nonlinear(traj, params, real, "amplitude", 1e-3)


def test_second_order_energy_formula(params):
    from lattice_shuttle.verify import FirstOrderResponse

    w, m, n = params.omega0, params.mass, 2
    r = FirstOrderResponse(0.3, -0.2 * w, 1e-8, 3e-8 * w)
    expected = (HBAR * w * (n + 0.5) * (2 * 0.3**2 + 2 * 0.2**2 / 4)
                + 0.5 * m * w**2 * (1e-16 + 9e-16))
    assert second_order_energy(r, params, n) == pytest.approx(expected, rel=1e-14)


# -- Monte-Carlo -------------------------------------------------------------------


@pytest.mark.parametrize("channel", CHANNELS)
def test_mc_agrees_with_quadrature(params, traj, channel):
    spec = NoiseSpec(channel, OU(1e-6, 0.5 * params.period))
    mc = estimate_sensitivity_mc(traj, params, spec, n=1, N=3000, seed=11, points_per_period=400)
    ref = sensitivity(params, traj, spec, 1)
    assert abs(mc.mean - ref.total) < 4 * mc.stderr
    assert mc.mean == pytest.approx(mc.g1 + mc.g2, rel=1e-12)
    assert mc.stderr < 0.1 * mc.mean


def test_mc_reproducible_and_jackknife(params, traj):
    spec = NoiseSpec("amplitude", OU(1e-6, params.period))
    a = estimate_sensitivity_mc(traj, params, spec, N=600, seed=3, points_per_period=200)
    b = estimate_sensitivity_mc(traj, params, spec, N=600, seed=3, points_per_period=200)
    assert a == b
    # the jackknife standard error of a mean is the textbook s / sqrt(N)
    grid = math.ceil(200 * traj.T / params.period)
    xi = sample_ou_paths(spec, traj.T, grid, 3, range(600))
    e = np.array([second_order_energy(first_order_response(traj, params, NoiseRealization(traj.T, x, 0), "amplitude"), params)
                  for x in xi])
    assert a.mean == pytest.approx(e.mean(), rel=1e-12)
    assert a.stderr == pytest.approx(e.std(ddof=1) / math.sqrt(e.size), rel=1e-9)


def test_mc_position_independent_of_n(params, traj):
    spec = NoiseSpec("position", OU(1e-6, params.period))
    a = estimate_sensitivity_mc(traj, params, spec, n=0, N=200, seed=1, points_per_period=100)
    b = estimate_sensitivity_mc(traj, params, spec, n=4, N=200, seed=1, points_per_period=100)
    assert a.mean == b.mean and a.g1 == 0


def test_mc_zero_strength(params, traj):
    spec = NoiseSpec("accordion", OU(0.0, params.period))
    mc = estimate_sensitivity_mc(traj, params, spec, N=100, points_per_period=100)
    assert mc.mean == 0 and mc.stderr == 0
    with pytest.raises(InsufficientSignalError):
        lambda_scaling_check(traj, params, spec, N=4, lambdas=(1e-3, 1e-2), points_per_period=100, with_mc=False)


def test_mc_argument_checks(params, traj):
    from lattice_shuttle.noise import White

    with pytest.raises(ValueError):
        estimate_sensitivity_mc(traj, params, NoiseSpec("accordion", White(1e-6)), N=100)
    with pytest.raises(ValueError):
        estimate_sensitivity_mc(traj, params, NoiseSpec("accordion", OU(1e-6, 1e-6)), N=99)
    with pytest.raises(ValueError):
        estimate_sensitivity_mc(traj, params, NoiseSpec("accordion", OU(1e-6, 1e-6)), channel="amplitude", N=100)


def test_energy_distribution_is_skewed(params, traj):
    # per-path energies are quadratic forms of Gaussians: positive and right-skewed
    spec = NoiseSpec("amplitude", OU(1e-6, params.period))
    grid = math.ceil(100 * traj.T / params.period)
    xi = sample_ou_paths(spec, traj.T, grid, 9, range(10_000))
    from lattice_shuttle.verify import _energy_parts

    g1, g2 = _energy_parts(first_order_batch(traj, params, xi, "amplitude"), params, 0)
    e = g1 + g2
    skew = np.mean((e - e.mean()) ** 3) / e.std() ** 3
    assert np.all(e >= 0) and skew > 1.0


# -- nonlinear propagation ---------------------------------------------------------


@pytest.mark.parametrize("channel", CHANNELS)
def test_noiseless_transport_is_exact(params, traj, channel):
    real = sample_ou_path(NoiseSpec(channel, OU(1e-6, params.period)), traj.T, 2000, 1)
    for n in (0, 3):
        e = simulate_nonlinear(traj, params, real, channel, 0.0, n)
        e0 = HBAR * params.omega0 * (n + 0.5)
        assert abs(e - e0) < 1e-10 * e0


@pytest.mark.parametrize("channel", CHANNELS)
def test_nonlinear_matches_second_order(params, traj, channel):
    spec = NoiseSpec(channel, OU(1e-6, params.period))
    real = sample_ou_path(spec, traj.T, 2000, 21)
    xi = real.xi / np.sqrt(spec.model.variance)
    unit = NoiseRealization(real.T, xi, 0)
    lam = 1e-3
    excess = simulate_nonlinear(traj, params, unit, channel, lam, 1) - HBAR * params.omega0 * 1.5
    pred = second_order_energy(first_order_response(traj, params, unit, channel), params, 1)
    assert excess / lam**2 == pytest.approx(pred, rel=1e-2)


def test_nonlinear_step_convergence(params, traj):
    real = sample_ou_path(NoiseSpec("accordion", OU(1e-6, params.period)), traj.T, 2000, 2)
    xi = real.xi / real.xi.std()
    a = nonlinear_excess_batch(traj, params, xi, "accordion", [1e-3, 1e-2])
    b = nonlinear_excess_batch(traj, params, xi, "accordion", [1e-3, 1e-2], max_step=params.period / 2000)
    np.testing.assert_allclose(a, b, rtol=1e-8)


def test_nonlinear_batch_matches_single(params, traj):
    spec = NoiseSpec("amplitude", OU(1e-6, params.period))
    xi = sample_ou_paths(spec, traj.T, 1000, 4, range(3)) / math.sqrt(spec.model.variance)
    batch = nonlinear_excess_batch(traj, params, xi, "amplitude", [1e-3, 1e-2], n=2)
    for j in range(3):
        single = simulate_nonlinear(traj, params, NoiseRealization(traj.T, xi[j], 0), "amplitude", 1e-2, 2)
        assert single - HBAR * params.omega0 * 2.5 == pytest.approx(batch[1, j], rel=1e-6)


def test_accordion_singularity(params, traj):
    xi = np.zeros(1001)
    xi[500] = -150.0
    nonlinear_excess_batch(traj, params, xi, "amplitude", [1e-4])
    with pytest.raises(SingularityError):
        nonlinear_excess_batch(traj, params, xi, "accordion", [1e-2])


def test_lambda_scaling(params, traj):
    spec = NoiseSpec("position", OU(1e-6, params.period))
    res = lambda_scaling_check(traj, params, spec, N=100, seed=5, points_per_period=200)
    assert res.exponent == pytest.approx(2.0, abs=0.02)
    assert res.coefficient_matches_mc
    assert res.mc.n_paths == 100 and res.mc.seed == 5
    with pytest.raises(ValueError):
        lambda_scaling_check(traj, params, spec, lambdas=(1e-3,), N=4)
    with pytest.raises(ValueError):
        lambda_scaling_check(traj, params, spec, lambdas=(1e-3, 0.1), N=4)
