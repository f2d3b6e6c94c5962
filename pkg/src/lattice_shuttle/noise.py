"""Noise correlation models, spectral densities and OU path sampling.

The perturbation ``lambda * xi(t)`` is dimensionless, zero-mean and
stationary, ``E[xi(t) xi(s)] = alpha(t - s)``.

White noise uses ``alpha(t) = D delta(t)``. Its one-sided integrals
``int_0^T alpha(s) g(s) ds`` count half the delta weight, ``(D/2) g(0)``,
which is the ``tau -> 0`` limit of the OU correlation
``alpha(t) = D / (2 tau) exp(-t / tau)``.

Random streams
--------------
Paths are drawn from numpy's counter-based ``Philox`` bit generator with the
64-bit key ``seed ^ i`` for path ``i``. Every path is therefore a pure
function of ``(seed, i)`` and batches can be generated in any order or in
parallel.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "Channel",
    "White",
    "OU",
    "Tabulated",
    "NoiseSpec",
    "NoiseRealization",
    "correlation",
    "spectral_density",
    "sample_ou_path",
    "sample_ou_paths",
    "path_rng",
    "load_correlation_csv",
]

_SEED_LIMIT = 2**64


class Channel(str, enum.Enum):
    ACCORDION = "accordion"
    AMPLITUDE = "amplitude"
    POSITION = "position"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class White:
    """Delta-correlated noise of strength ``D`` (seconds)."""

    D: float

    def __post_init__(self):
        if not self.D >= 0:
            raise ValueError(f"noise strength D must be >= 0, got {self.D!r}")

    @property
    def strength(self):
        return self.D


@dataclass(frozen=True)
class OU:
    """Ornstein-Uhlenbeck noise, ``alpha(t) = D/(2 tau) exp(-t/tau)``."""

    D: float
    tau: float

    def __post_init__(self):
        if not self.D >= 0:
            raise ValueError(f"noise strength D must be >= 0, got {self.D!r}")
        if not self.tau > 0:
            raise ValueError(f"correlation time tau must be > 0, got {self.tau!r}")

    @property
    def strength(self):
        return self.D

    @property
    def variance(self):
        return self.D / (2.0 * self.tau)


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Correlation function sampled on ``0 = t_0 < t_1 < ... < t_max``.

    Evaluated by linear interpolation; outside the table is an error.
    """

    t: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        a = np.asarray(self.alpha, dtype=float)
        if t.ndim != 1 or t.shape != a.shape or t.size < 2:
            raise ValueError("tabulated correlation needs matching 1-D arrays of >= 2 points")
        if t[0] != 0.0:
            raise ValueError("tabulated correlation must start at t = 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("tabulated times must be strictly increasing")
        if not a[0] >= 0:
            raise ValueError("alpha(0) must be non-negative")
        if not np.all(np.isfinite(a)):
            raise ValueError("tabulated alpha contains non-finite values")
        t.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "alpha", a)

    def __eq__(self, other):
        return (
            isinstance(other, Tabulated)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.alpha, other.alpha)
        )

    def __hash__(self):
        return hash((self.t.tobytes(), self.alpha.tobytes()))

    @property
    def t_max(self):
        return float(self.t[-1])

    @property
    def strength(self):
        """Equivalent white strength ``2 int_0^tmax alpha``."""
        return 2.0 * float(np.trapezoid(self.alpha, self.t))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0) or np.any(s > self.t[-1]):
            raise ValueError(f"correlation requested outside tabulated range [0, {self.t_max}]")
        return np.interp(s, self.t, self.alpha)


@dataclass(frozen=True)
class NoiseSpec:
    channel: Channel
    model: White | OU | Tabulated

    def __post_init__(self):
        object.__setattr__(self, "channel", Channel(self.channel))
        if not isinstance(self.model, (White, OU, Tabulated)):
            raise TypeError(f"unknown correlation model {self.model!r}")


@dataclass(frozen=True, eq=False)
class NoiseRealization:
    """One sampled path ``xi(t_i)`` on the uniform grid ``t_i = i T / N``."""

    T: float
    xi: np.ndarray
    seed: int

    @property
    def n_intervals(self):
        return self.xi.size - 1

    @property
    def dt(self):
        return self.T / self.n_intervals

    @property
    def times(self):
        return np.linspace(0.0, self.T, self.xi.size)


def correlation(spec, t):
    """Evaluate ``alpha(t)`` for ``t >= 0``. White noise has no pointwise value."""
    model = spec.model if isinstance(spec, NoiseSpec) else spec
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("correlation is evaluated for t >= 0 only")
    if isinstance(model, White):
        raise TypeError("white-noise correlation is a distribution; only its integrals are defined")
    if isinstance(model, OU):
        out = model.variance * np.exp(-t / model.tau)
    else:
        out = model(t)
    return out if out.ndim else float(out)


def spectral_density(spec: NoiseSpec, omega, k_wavenumber=None):
    """One-sided spectrum ``(1/pi) int_0^inf alpha(t) cos(omega t) dt``.

    For the position channel the integrand carries ``1/k^2`` so the result is
    the spectrum of the trap displacement ``xi/k`` (m^2 s). Tabulated
    correlations are integrated over their table only.
    """
    if np.any(np.asarray(omega) < 0):
        raise ValueError("omega must be non-negative")
    scale = 1.0
    if spec.channel is Channel.POSITION:
        if k_wavenumber is None or not k_wavenumber > 0:
            raise ValueError("position-channel spectrum needs a positive wavenumber")
        scale = 1.0 / k_wavenumber**2
    model = spec.model
    if isinstance(model, White):
        return scale * model.D / (2.0 * math.pi) * np.ones_like(np.asarray(omega, dtype=float))[()]
    if isinstance(model, OU):
        w = np.asarray(omega, dtype=float)
        return (scale * model.D / (2.0 * math.pi) / (1.0 + (w * model.tau) ** 2))[()]
    return scale * np.vectorize(lambda w: _tabulated_cosine_transform(model, w))(omega)[()] / math.pi


def _tabulated_cosine_transform(tab: Tabulated, omega):
    # exact for the piecewise-linear interpolant
    t, a = tab.t, tab.alpha
    if omega == 0:
        return float(np.trapezoid(a, t))
    h = np.diff(t)
    slope = np.diff(a) / h
    s0, s1 = np.sin(omega * t[:-1]), np.sin(omega * t[1:])
    c0, c1 = np.cos(omega * t[:-1]), np.cos(omega * t[1:])
    # int (a0 + m (x - t0)) cos(w x) = [a(x) sin(w x)/w + m cos(w x)/w^2]
    return float(np.sum(a[1:] * s1 - a[:-1] * s0) / omega + np.sum(slope * (c1 - c0)) / omega**2)


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed


def path_rng(seed, index=0):
    """Generator for path ``index`` of the stream ``seed``."""
    key = _check_seed(seed) ^ int(index)
    return np.random.Generator(np.random.Philox(key=key))


def _ou_filter(model: OU, dt, normals):
    # exact AR(1) discretisation, stationary start
    decay = math.exp(-dt / model.tau)
    sd = math.sqrt(model.variance)
    innovation = sd * math.sqrt(-math.expm1(-2.0 * dt / model.tau))
    drive = normals * innovation
    drive[..., 0] = normals[..., 0] * sd
    return lfilter([1.0], [1.0, -decay], drive, axis=-1)


def _validate_sampling(spec, T, N):
    model = spec.model if isinstance(spec, NoiseSpec) else spec
    if not isinstance(model, OU):
        raise ValueError("only Ornstein-Uhlenbeck paths can be sampled")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    if int(N) != N or N < 2:
        raise ValueError(f"need at least 2 intervals, got {N!r}")
    return model


def sample_ou_path(spec, T, N, seed) -> NoiseRealization:
    """Sample one stationary OU path on ``N + 1`` grid points over ``[0, T]``."""
    model = _validate_sampling(spec, T, N)
    seed = _check_seed(seed)
    normals = path_rng(seed).standard_normal(int(N) + 1)
    xi = _ou_filter(model, T / N, normals)
    return NoiseRealization(float(T), xi, seed)


def sample_ou_paths(spec, T, N, seed, indices) -> np.ndarray:
    """Stack of paths ``seed ^ i`` for ``i in indices``, shape ``(len(indices), N + 1)``.

    Row ``j`` equals ``sample_ou_path(spec, T, N, seed ^ indices[j]).xi``.
    """
    model = _validate_sampling(spec, T, N)
    seed = _check_seed(seed)
    indices = list(indices)
    normals = np.empty((len(indices), int(N) + 1))
    for row, i in enumerate(indices):
        normals[row] = path_rng(seed, i).standard_normal(int(N) + 1)
    return _ou_filter(model, T / N, normals)


def load_correlation_csv(path) -> Tabulated:
    """Read a two-column ``t_seconds, alpha`` table.

    A single leading comment line starting with ``#`` is allowed; anything
    else that is not two numbers is an error.
    """
    path = Path(path)
    times, values = [], []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if lineno == 1 and row and row[0].lstrip().startswith("#"):
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                times.append(float(row[0]))
                values.append(float(row[1]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return Tabulated(np.array(times), np.array(values))
