"""Second-order noise sensitivities of the final transport energy.

For each noise channel the sensitivity splits as ``G = G1 + G2``, the parts
coming from the width factor ``rho`` and from the centre ``q_c``. Both are
integrals ``int_0^T alpha(s) w(s) ds`` of the noise correlation against a
channel-specific weight:

============  ======================================  ==========================================
channel       G1 weight                               G2 weight
============  ======================================  ==========================================
accordion     hbar w0^3 (4n+2) (T-s) cos(2 w0 s)      m cos(w0 s) int_0^{T-s} B(u) B(u+s) du
amplitude     hbar w0^3 (n+1/2) (T-s) cos(2 w0 s)     m cos(w0 s) int_0^{T-s} q''(u) q''(u+s) du
position      0                                       (m w0^4 / k^2) (T-s) cos(w0 s)
============  ======================================  ==========================================

with ``B = q_c'' - w0^2 q_c``. The inner autocorrelations of the polynomial
forcings are integrated exactly by fixed Gauss-Legendre rules; only the
outer integral is adaptive (adaptive Gauss-Kronrod on panels shorter than a
quarter trap period).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .constants import HBAR
from .lattice import DerivedParams
from .noise import OU, Channel, NoiseSpec, Tabulated, White, spectral_density
from .trajectory import PolynomialTrajectory, design_polynomial

__all__ = [
    "SensitivityResult",
    "sensitivity",
    "sensitivity_accordion",
    "sensitivity_amplitude",
    "sensitivity_position",
    "white_closed_forms",
    "find_g2k_minimum",
    "find_amplitude_crossing",
    "amplitude_crossing_root",
    "heating_rate",
    "forcing_autocorrelation",
    "DEFAULT_RTOL",
    "WHITE_TAU_THRESHOLD",
]

DEFAULT_RTOL = 1e-8
# OU with tau below this many trap periods is evaluated with the white-noise forms
WHITE_TAU_THRESHOLD = 1e-6
# OU tails beyond this many correlation times are below 1e-26 and dropped
_OU_CUTOFF = 60.0

_QUINTIC = (0.0, 0.0, 0.0, 10.0, -15.0, 6.0)


@dataclass(frozen=True)
class SensitivityResult:
    """Sensitivity of the final energy to one noise channel.

    ``g1``/``g2`` follow the rho/q_c split; ``static``/``dynamical`` label the
    trajectory-independent and trajectory-dependent parts, which coincide
    with ``g1``/``g2`` except for position noise (purely static ``g2``).
    ``error`` is the absolute quadrature error estimate of ``total``.
    """

    g1: float
    g2: float
    channel: Channel
    n: int
    g0: float
    error: float = 0.0
    total: float = None

    def __post_init__(self):
        object.__setattr__(self, "total", self.g1 + self.g2)

    @property
    def static(self):
        return self.g2 if self.channel is Channel.POSITION else self.g1

    @property
    def dynamical(self):
        return 0.0 if self.channel is Channel.POSITION else self.g2

    def _over(self, value):
        return value / self.g0 if self.g0 else math.nan

    @property
    def g1_over_g0(self):
        return self._over(self.g1)

    @property
    def g2_over_g0(self):
        return self._over(self.g2)

    @property
    def total_over_g0(self):
        return self._over(self.total)


# -- exact inner kernels -----------------------------------------------------


# Gauss-Legendre nodes on [0, 1]; F(x) F(x + sigma) has degree <= 10 for the
# quintic, so six nodes integrate it exactly.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


def _shifted_autocorrelation(coef, sigma):
    """``C(sigma) = int_0^{1-sigma} F(x) F(x+sigma) dx`` for polynomial ``F``."""
    if len(coef) > 7:
        raise ValueError("forcing polynomial degree above 6 needs more nodes")
    sigma = np.asarray(sigma, dtype=float)
    span = 1.0 - sigma
    x = span[..., None] * _GL_NODES
    f = np.polynomial.polynomial.polyval
    return span * np.sum(_GL_WEIGHTS * f(x, coef) * f(x + sigma[..., None], coef), axis=-1)


def forcing_autocorrelation(traj: PolynomialTrajectory, p: DerivedParams, which, s):
    """``int_0^{T-s} F(u) F(u+s) du`` for the forcing ``F`` (``"B"`` or ``"acc"``)."""
    F = traj.scaled_forcing(which, p.omega0)
    return traj.d**2 / traj.T**3 * _shifted_autocorrelation(F.coef, np.asarray(s, dtype=float) / traj.T)


# -- outer integral against the correlation ------------------------------------


def _breakpoints(model, T, period):
    upper = T
    pts = [0.0]
    if isinstance(model, OU):
        upper = min(T, _OU_CUTOFF * model.tau)
        pts += [model.tau * 2.0**j for j in range(-3, 7)]
    elif isinstance(model, Tabulated):
        if T > model.t_max * (1 + 1e-12):
            raise ValueError(f"tabulated correlation ends at {model.t_max} s < T = {T} s")
        pts += list(model.t)
    step = period / 4.0
    pts += list(np.arange(1, math.ceil(upper / step)) * step)
    pts = np.unique(np.clip(pts, 0.0, upper))
    pts = pts[(pts > 0) & (pts < upper)]
    return np.concatenate([[0.0], pts, [upper]])


def _alpha_fn(model):
    if isinstance(model, OU):
        var, tau = model.variance, model.tau
        return lambda s: var * math.exp(-s / tau)
    return lambda s: float(np.interp(s, model.t, model.alpha))


def correlated_integral(model, weight, T, period, rtol=DEFAULT_RTOL):
    """``int_0^T alpha(s) weight(s) ds`` and its absolute error estimate.

    ``weight`` must accept scalars. White noise returns ``(D/2) weight(0)``.
    """
    if isinstance(model, White):
        return 0.5 * model.D * float(weight(0.0)), 0.0
    if model.strength == 0 and isinstance(model, OU):
        return 0.0, 0.0
    edges = _breakpoints(model, T, period)
    alpha = _alpha_fn(model)
    probe = np.linspace(0.0, edges[-1], 257)
    wmax = max(abs(float(weight(x))) for x in probe)
    amax = abs(float(np.trapezoid([abs(alpha(x)) for x in probe], probe)))
    if isinstance(model, OU):
        amax = 0.5 * model.D
    epsabs = 1e-3 * rtol * wmax * amax / len(edges)
    total, err = 0.0, 0.0
    f = lambda x: alpha(x) * weight(x)
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            try:
                val, e = integrate.quad(f, a, b, epsabs=epsabs, epsrel=rtol, limit=200)
            except integrate.IntegrationWarning:
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, e = integrate.quad(f, a, b, epsabs=epsabs, epsrel=rtol, limit=1000)
                warnings.simplefilter("error", integrate.IntegrationWarning)
            total += val
            err += e
    return total, err


def _check_channel(spec, channel):
    if spec.channel is not channel:
        raise ValueError(f"expected a {channel.value} noise spec, got {spec.channel.value}")


def _white_equivalent(spec, p, white_tau_threshold):
    model = spec.model
    if isinstance(model, White):
        return model.D
    if isinstance(model, OU) and model.tau < white_tau_threshold * p.period:
        return model.D
    return None


def _is_quintic(traj):
    return isinstance(traj, PolynomialTrajectory) and np.allclose(traj.scaled, _QUINTIC, rtol=1e-12, atol=1e-12)


def _static_integral(model, T, omega, p, rtol):
    return correlated_integral(model, lambda s: (T - s) * math.cos(omega * s), T, p.period, rtol)


def _dynamic_integral(model, traj, p, which, rtol):
    coef = traj.scaled_forcing(which, p.omega0).coef
    T, w0 = traj.T, p.omega0
    scale = traj.d**2 / T**3
    if scale == 0:
        return 0.0, 0.0
    weight = lambda s: math.cos(w0 * s) * float(_shifted_autocorrelation(coef, s / T))
    val, err = correlated_integral(model, weight, T, p.period, rtol)
    return scale * val, scale * err


def _rho_sensitivity(spec, traj, p, n, prefactor, which, rtol, white_tau_threshold):
    D = _white_equivalent(spec, p, white_tau_threshold)
    g0 = p.g0(spec.model.strength)
    if D is not None and _is_quintic(traj):
        return white_closed_forms(p, traj.T, traj.d, n, spec.channel, D)
    model = White(D) if D is not None else spec.model
    i1, e1 = _static_integral(model, traj.T, 2.0 * p.omega0, p, rtol)
    i2, e2 = _dynamic_integral(model, traj, p, which, rtol)
    c1 = HBAR * p.omega0**3 * prefactor
    return SensitivityResult(c1 * i1, p.mass * i2, spec.channel, n, g0, c1 * e1 + p.mass * e2)


def sensitivity_accordion(p, traj, spec: NoiseSpec, n=0, *, rtol=DEFAULT_RTOL,
                          white_tau_threshold=WHITE_TAU_THRESHOLD) -> SensitivityResult:
    """Wavenumber (accordion) noise, ``K = k [1 + xi(t)]``."""
    _check_channel(spec, Channel.ACCORDION)
    return _rho_sensitivity(spec, traj, p, n, 4 * n + 2, "B", rtol, white_tau_threshold)


def sensitivity_amplitude(p, traj, spec: NoiseSpec, n=0, *, rtol=DEFAULT_RTOL,
                          white_tau_threshold=WHITE_TAU_THRESHOLD) -> SensitivityResult:
    """Trap-depth noise, ``A = a [1 + xi(t)]`` (a spring-constant noise)."""
    _check_channel(spec, Channel.AMPLITUDE)
    return _rho_sensitivity(spec, traj, p, n, n + 0.5, "acc", rtol, white_tau_threshold)


def sensitivity_position(p, traj, spec: NoiseSpec, n=0, *, rtol=DEFAULT_RTOL,
                         white_tau_threshold=WHITE_TAU_THRESHOLD) -> SensitivityResult:
    """Phase noise, rigid trap displacement ``xi(t) / k``.

    Only ``T`` is read from ``traj``; the result does not depend on the
    trajectory shape nor on ``n``.
    """
    _check_channel(spec, Channel.POSITION)
    D = _white_equivalent(spec, p, white_tau_threshold)
    g0 = p.g0(spec.model.strength)
    if D is not None:
        return white_closed_forms(p, traj.T, traj.d, n, Channel.POSITION, D)
    i2, e2 = _static_integral(spec.model, traj.T, p.omega0, p, rtol)
    c2 = p.mass * p.omega0**4 / p.wavenumber**2
    return SensitivityResult(0.0, c2 * i2, Channel.POSITION, n, g0, c2 * e2)


_DISPATCH = {
    Channel.ACCORDION: sensitivity_accordion,
    Channel.AMPLITUDE: sensitivity_amplitude,
    Channel.POSITION: sensitivity_position,
}


def sensitivity(p, traj, spec: NoiseSpec, n=0, **kwargs) -> SensitivityResult:
    """Dispatch on ``spec.channel``."""
    return _DISPATCH[spec.channel](p, traj, spec, n, **kwargs)


def white_closed_forms(p: DerivedParams, T, d, n, channel, D=1.0) -> SensitivityResult:
    """White-noise sensitivities of the quintic shortcut.

    accordion  G1 = hbar w^3 D (2n+1) T
               G2 = m d^2 D [181/924 w^4 T + 60/(7 T^3) + 10 w^2/(7 T)]
    amplitude  G1 = D/4 hbar w^3 (2n+1) T,   G2 = 60 m d^2 D / (7 T^3)
    position   G1 = 0,                       G2 = m w^4 D T / (2 k^2)
    """
    if not T > 0:
        raise ValueError(f"transport time must be positive, got {T!r}")
    channel = Channel(channel)
    w, m = p.omega0, p.mass
    if channel is Channel.ACCORDION:
        g1 = HBAR * w**3 * D * (2 * n + 1) * T
        g2 = m * d**2 * D * (181.0 / 924.0 * w**4 * T + 60.0 / (7.0 * T**3) + 10.0 * w**2 / (7.0 * T))
    elif channel is Channel.AMPLITUDE:
        g1 = 0.25 * D * HBAR * w**3 * (2 * n + 1) * T
        g2 = 60.0 * m * d**2 * D / (7.0 * T**3)
    else:
        g1 = 0.0
        g2 = m * w**4 * D * T / (2.0 * p.wavenumber**2)
    return SensitivityResult(g1, g2, channel, n, p.g0(D))


def _g2k_scaled(x):
    # G2K / (m d^2 D w^3) in terms of x = w T
    return 181.0 / 924.0 * x + 60.0 / (7.0 * x**3) + 10.0 / (7.0 * x)


def _g2k_slope(x):
    return 181.0 / 924.0 - 180.0 / (7.0 * x**4) - 10.0 / (7.0 * x**2)


def find_g2k_minimum(p: DerivedParams, d=None, D=None, xtol=1e-10):
    """Transport time minimising the white-noise accordion ``G2K``.

    ``d`` and ``D`` only scale ``G2K``; the minimiser is ``x / omega0`` with
    ``x`` the unique positive root of ``(1267/924) x^4 - 10 x^2 - 180``.
    """
    res = optimize.minimize_scalar(_g2k_scaled, bracket=(1.0, 4.0, 10.0), method="golden", tol=xtol)
    # golden section stalls near sqrt(eps); polish on the stationarity condition
    x = optimize.brentq(_g2k_slope, 0.9 * res.x, 1.1 * res.x, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return float(x) / p.omega0


def find_amplitude_crossing(p: DerivedParams, d, n=0, D=None):
    """White-noise time where static and dynamical amplitude sensitivities meet."""
    return (240.0 * p.mass * d**2 / (7.0 * HBAR * p.omega0**3 * (2 * n + 1))) ** 0.25


def amplitude_crossing_root(p: DerivedParams, d, n=0, D=1.0, rtol=1e-14):
    """Same crossing found by bracketed root search on the closed forms."""
    if d == 0:
        return 0.0

    def gap(logT):
        r = white_closed_forms(p, math.exp(logT), d, n, Channel.AMPLITUDE, D)
        return math.log(r.g1) - math.log(r.g2)

    lo = hi = math.log(p.period)
    while gap(lo) > 0:
        lo -= 1.0
    while gap(hi) < 0:
        hi += 1.0
    return math.exp(optimize.brentq(gap, lo, hi, xtol=1e-15, rtol=rtol))


def heating_rate(p: DerivedParams, spec: NoiseSpec, n, channel):
    """Long-time heating rate ``dE_n/dT`` of a static trap.

    Valid for ``T`` well beyond the correlation time.
    """
    channel = Channel(channel)
    if spec.channel is not channel:
        raise ValueError(f"spec is for {spec.channel.value} noise, not {channel.value}")
    w = p.omega0
    e0 = HBAR * w * (n + 0.5)
    if channel is Channel.ACCORDION:
        return 4.0 * w**2 * math.pi * e0 * float(spectral_density(spec, 2.0 * w))
    if channel is Channel.AMPLITUDE:
        return w**2 * math.pi * e0 * float(spectral_density(spec, 2.0 * w))
    s_q = float(spectral_density(spec, w, p.wavenumber))
    return p.mass * w**4 * math.pi * s_q
