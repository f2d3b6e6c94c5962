"""Monte-Carlo and nonlinear checks of the analytic sensitivities.

Two independent routes to ``G``:

* first order: the linear responses ``rho1(T), q1(T)`` are convolutions of
  the noise path with fixed kernels, evaluated by the trapezoid rule on the
  path grid, and their squares are averaged over OU paths;
* nonlinear: the full Ermakov and Newton equations are integrated with RK4
  under the noisy trap, and the excess final energy is fitted against
  ``lambda**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR
from .errors import InsufficientSignalError, ResolutionError, SingularityError
from .lattice import DerivedParams
from .noise import OU, Channel, NoiseRealization, NoiseSpec, sample_ou_paths
from .trajectory import TransportTrajectory

__all__ = [
    "FirstOrderResponse",
    "McEstimate",
    "ScalingResult",
    "first_order_response",
    "first_order_batch",
    "second_order_energy",
    "estimate_sensitivity_mc",
    "simulate_nonlinear",
    "nonlinear_excess_batch",
    "lambda_scaling_check",
    "MIN_POINTS_PER_PERIOD",
    "DEFAULT_POINTS_PER_PERIOD",
]

MIN_POINTS_PER_PERIOD = 20
DEFAULT_POINTS_PER_PERIOD = 1000
_PATH_BATCH = 512


@dataclass(frozen=True)
class FirstOrderResponse:
    rho: float
    rho_dot: float
    qc: float
    qc_dot: float


@dataclass(frozen=True)
class McEstimate:
    """Sample mean of the second-order energy over ``n_paths`` OU paths.

    ``g1``/``g2`` are the rho and q_c parts of ``mean``; standard errors are
    jackknife estimates over paths.
    """

    mean: float
    stderr: float
    n_paths: int
    seed: int
    g1: float = math.nan
    g2: float = math.nan
    g1_stderr: float = math.nan
    g2_stderr: float = math.nan
    points_per_period: int = DEFAULT_POINTS_PER_PERIOD


@dataclass(frozen=True)
class ScalingResult:
    """Power-law fit of the mean excess energy against ``lambda``."""

    exponent: float
    coefficient: float
    coefficient_stderr: float
    lambdas: tuple
    mean_excess: tuple
    mc: McEstimate | None = None

    @property
    def coefficient_matches_mc(self):
        if self.mc is None:
            return None
        return abs(self.coefficient - self.mc.mean) <= 3.0 * self.mc.stderr


def _grid_points(T, p, points_per_period):
    n = int(math.ceil(points_per_period * T / p.period))
    return max(n, 2)


def _check_resolution(dt, p):
    if p.period / dt < MIN_POINTS_PER_PERIOD * (1 - 1e-12):
        raise ResolutionError(
            f"grid step {dt:.3e} s gives {p.period / dt:.1f} points per trap period; "
            f"need at least {MIN_POINTS_PER_PERIOD}"
        )


def _forcing(traj, p, channel, t):
    """(rho coupling, q_c forcing on the grid) for the linearised equations."""
    if channel is Channel.ACCORDION:
        return 1.0, traj.forcing_kernel(t, p)
    if channel is Channel.AMPLITUDE:
        return 0.5, traj.qc(t, 2)
    return 0.0, np.full_like(t, p.omega0**2 / p.wavenumber)


def response_weights(traj: TransportTrajectory, p: DerivedParams, channel, n_intervals):
    """Quadrature weights ``W`` with ``[rho1, rho1', q1, q1'](T) = xi @ W``."""
    channel = Channel(channel)
    T = traj.T
    t = np.linspace(0.0, T, n_intervals + 1)
    dt = T / n_intervals
    _check_resolution(dt, p)
    trap = np.full(t.size, dt)
    trap[[0, -1]] = 0.5 * dt
    w = p.omega0
    lag = T - t
    c, F = _forcing(traj, p, channel, t)
    W = np.empty((t.size, 4))
    W[:, 0] = -c * w * np.sin(2 * w * lag)
    W[:, 1] = -2 * c * w**2 * np.cos(2 * w * lag)
    W[:, 2] = F * np.sin(w * lag) / w
    W[:, 3] = F * np.cos(w * lag)
    return W * trap[:, None]


def first_order_batch(traj, p, xi, channel):
    """Responses for a stack of paths ``xi`` (shape ``(paths, N + 1)``); returns ``(paths, 4)``."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    W = response_weights(traj, p, channel, xi.shape[1] - 1)
    return xi @ W


def first_order_response(traj, p, real: NoiseRealization, channel) -> FirstOrderResponse:
    """First-order ``rho``, ``q_c`` and their rates at ``T`` driven by ``real``."""
    if not math.isclose(real.T, traj.T, rel_tol=1e-12):
        raise ValueError(f"realization spans {real.T} s but the trajectory lasts {traj.T} s")
    out = first_order_batch(traj, p, real.xi, channel)[0]
    return FirstOrderResponse(*map(float, out))


def _energy_parts(resp, p, n):
    # resp[..., 0:4] = rho1, rho1', q1, q1'
    w = p.omega0
    g1 = HBAR * (2 * n + 1) * (w * resp[..., 0] ** 2 + resp[..., 1] ** 2 / (4 * w))
    g2 = 0.5 * p.mass * (w**2 * resp[..., 2] ** 2 + resp[..., 3] ** 2)
    return g1, g2


def second_order_energy(resp: FirstOrderResponse, p: DerivedParams, n=0):
    """Coefficient of ``lambda**2`` in the final energy for one path."""
    arr = np.array([resp.rho, resp.rho_dot, resp.qc, resp.qc_dot])
    g1, g2 = _energy_parts(arr, p, n)
    return float(g1 + g2)


def _jackknife_mean_se(x):
    n = x.size
    if n < 2:
        return math.nan
    loo = (x.sum() - x) / (n - 1)
    return float(math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def _require_ou(spec, channel):
    if not isinstance(spec.model, OU):
        raise ValueError("Monte-Carlo estimates need an OU noise model (use a small tau for white noise)")
    channel = Channel(channel if channel is not None else spec.channel)
    if channel is not spec.channel:
        raise ValueError(f"spec channel {spec.channel.value} does not match {channel.value}")
    return channel


def estimate_sensitivity_mc(traj, p, spec: NoiseSpec, channel=None, n=0, N=10_000, seed=0,
                            points_per_period=DEFAULT_POINTS_PER_PERIOD) -> McEstimate:
    """Monte-Carlo sensitivity from ``N`` OU paths (path ``i`` keyed by ``seed ^ i``)."""
    channel = _require_ou(spec, channel)
    if int(N) != N or N < 100:
        raise ValueError(f"need at least 100 paths, got {N!r}")
    N = int(N)
    grid = _grid_points(traj.T, p, points_per_period)
    W = response_weights(traj, p, channel, grid)
    g1 = np.empty(N)
    g2 = np.empty(N)
    for start in range(0, N, _PATH_BATCH):
        idx = range(start, min(start + _PATH_BATCH, N))
        xi = sample_ou_paths(spec, traj.T, grid, seed, idx)
        g1[idx.start:idx.stop], g2[idx.start:idx.stop] = _energy_parts(xi @ W, p, n)
    total = g1 + g2
    return McEstimate(
        mean=float(np.mean(total)),
        stderr=_jackknife_mean_se(total),
        n_paths=N,
        seed=int(seed),
        g1=float(np.mean(g1)),
        g2=float(np.mean(g2)),
        g1_stderr=_jackknife_mean_se(g1),
        g2_stderr=_jackknife_mean_se(g2),
        points_per_period=int(points_per_period),
    )


# -- nonlinear Ermakov / Newton integration --------------------------------------


def _refine(xi, factor):
    """Piecewise-linear values of ``xi`` (last axis) on a grid ``factor`` times finer."""
    n = xi.shape[-1] - 1
    k = np.arange(n * factor + 1)
    j = np.minimum(k // factor, n - 1)
    frac = (k - j * factor) / factor
    return xi[..., j] * (1.0 - frac) + xi[..., j + 1] * frac


def nonlinear_excess_batch(traj, p, xi, channel, lambdas, n=0, max_step=None):
    """Excess final energies ``E - hbar w0 (n + 1/2)``, shape ``(len(lambdas), paths)``.

    RK4 with step ``<= max_step`` (default ``T0 / 1000``); the noise is
    linear between its grid points.
    """
    channel = Channel(channel)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    n_int = xi.shape[1] - 1
    T = traj.T
    dt = T / n_int
    _check_resolution(dt, p)
    max_step = p.period / 1000.0 if max_step is None else max_step
    sub = max(1, int(math.ceil(dt / max_step * (1 - 1e-12))))
    h = dt / sub
    steps = n_int * sub

    lam_xi_scale = lambdas[:, None]
    if channel is Channel.ACCORDION and np.any(1.0 + lam_xi_scale * xi[None].min(axis=-1) <= 0):
        raise SingularityError("1 + lambda*xi reaches zero: accordion trap position diverges")

    # stage samples on a half-step grid, time-major for contiguous rows
    fine = np.ascontiguousarray(_refine(xi, 2 * sub).T)
    t_fine = np.linspace(0.0, T, 2 * steps + 1)
    q0 = traj.trap_position(t_fine, p)
    w2 = p.omega0**2
    k = p.wavenumber

    def coefficients(idx):
        lx = lam_xi_scale * fine[idx]
        if channel is Channel.ACCORDION:
            return w2 * (1.0 + lx) ** 2, w2 * (1.0 + lx) * q0[idx]
        if channel is Channel.AMPLITUDE:
            om2 = w2 * (1.0 + lx)
            return om2, om2 * q0[idx]
        return np.full_like(lx, w2), w2 * (q0[idx] + lx / k)

    def deriv(state, coef):
        rho, rd, q, qd = state
        om2, force = coef
        return np.stack([rd, w2 / rho**3 - om2 * rho, qd, force - om2 * q])

    shape = (lambdas.size, xi.shape[0])
    state = np.stack([np.ones(shape), np.zeros(shape), np.zeros(shape), np.zeros(shape)])
    c_next = coefficients(0)
    for i in range(steps):
        c0, cm, c_next = c_next, coefficients(2 * i + 1), coefficients(2 * i + 2)
        k1 = deriv(state, c0)
        k2 = deriv(state + 0.5 * h * k1, cm)
        k3 = deriv(state + 0.5 * h * k2, cm)
        k4 = deriv(state + h * k3, c_next)
        state = state + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    rho, rd, q, qd = state
    if not np.all(np.isfinite(state)) or np.any(rho <= 0):
        raise SingularityError("Ermakov solution reached rho <= 0")
    two_n1 = 2 * n + 1
    w = p.omega0
    return (
        0.5 * p.mass * w2 * (q - traj.d) ** 2
        + 0.25 * HBAR * w * two_n1 * (rho - 1.0 / rho) ** 2
        + 0.5 * p.mass * qd**2
        + 0.25 * HBAR / w * two_n1 * rd**2
    )


def simulate_nonlinear(traj, p, real: NoiseRealization, channel, lam, n=0, max_step=None):
    """Final energy (J) after transport through the noisy trap ``lam * xi``.

    Starts in the unperturbed mode ``n`` (``rho = 1``, ``q_c = 0``, at rest)
    and measures in the noiseless final trap.
    """
    if not math.isclose(real.T, traj.T, rel_tol=1e-12):
        raise ValueError(f"realization spans {real.T} s but the trajectory lasts {traj.T} s")
    excess = nonlinear_excess_batch(traj, p, real.xi, channel, [lam], n, max_step)
    return float(HBAR * p.omega0 * (n + 0.5) + excess[0, 0])


def lambda_scaling_check(traj, p, spec: NoiseSpec, channel=None, n=0,
                         lambdas=(1e-4, 3e-4, 1e-3, 3e-3, 1e-2), N=200, seed=0,
                         points_per_period=DEFAULT_POINTS_PER_PERIOD, with_mc=True) -> ScalingResult:
    """Fit ``log(mean excess)`` against ``log(lambda)`` over one common path set.

    The same ``N`` paths are reused for every ``lambda``. The fitted
    coefficient is taken at slope 2 and compared with the first-order
    Monte-Carlo estimate on the same paths.
    """
    channel = _require_ou(spec, channel)
    lambdas = np.asarray(sorted(lambdas), dtype=float)
    if lambdas.size < 2 or lambdas[0] < 1e-4 * (1 - 1e-9) or lambdas[-1] > 1e-2 * (1 + 1e-9):
        raise ValueError("need at least two lambdas inside [1e-4, 1e-2]")
    if spec.model.D == 0:
        # the excess would be pure integration roundoff
        raise InsufficientSignalError("noise strength D is zero: no excess energy to fit")
    grid = _grid_points(traj.T, p, points_per_period)
    excess = np.empty((lambdas.size, int(N)))
    for start in range(0, int(N), _PATH_BATCH // 2):
        idx = range(start, min(start + _PATH_BATCH // 2, int(N)))
        xi = sample_ou_paths(spec, traj.T, grid, seed, idx)
        excess[:, idx.start:idx.stop] = nonlinear_excess_batch(traj, p, xi, channel, lambdas, n)
    mean_excess = excess.mean(axis=1)
    if not np.all(mean_excess > 0):
        raise InsufficientSignalError("mean excess energy is not positive at every lambda")
    logl = np.log(lambdas)
    slope = float(np.polyfit(logl, np.log(mean_excess), 1)[0])

    def coef(means):
        return np.exp(np.mean(np.log(means) - 2.0 * logl[:, None], axis=0))

    c = float(coef(mean_excess[:, None])[0])
    if N > 1:
        loo = (excess.sum(axis=1, keepdims=True) - excess) / (N - 1)
        cj = coef(loo)
        c_se = float(math.sqrt((N - 1) / N * np.sum((cj - cj.mean()) ** 2)))
    else:
        c_se = math.nan
    mc = None
    if with_mc:
        mc = estimate_sensitivity_mc(traj, p, spec, channel, n, N, seed, points_per_period)
    return ScalingResult(slope, c, c_se, tuple(map(float, lambdas)), tuple(map(float, mean_excess)), mc)
