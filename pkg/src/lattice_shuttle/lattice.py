"""Lattice parameters, harmonic trap quantities and the final-energy formula.

The occupied lattice site of ``a sin^2(k x + phi)`` is treated as a harmonic
well with ``(1/2) m omega0^2 = a k^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import CS133_MASS, HBAR
from .errors import InvalidConfigError

__all__ = [
    "LatticeConfig",
    "DerivedParams",
    "FinalState",
    "derive_params",
    "final_energy",
    "excess_energy",
    "min_shuttle_time",
]


@dataclass(frozen=True)
class LatticeConfig:
    """Optical lattice and transport parameters, SI units.

    Parameters
    ----------
    wavelength : float
        Lattice laser wavelength ``lambda_L`` in metres.
    depth : float
        Lattice depth ``a`` in joules. Use :meth:`from_recoil` to give it in
        recoil energies.
    mass : float
        Atomic mass in kg (default: 133Cs).
    distance : float, optional
        Transport distance in metres. Defaults to ``lambda_L / 2``, one
        lattice period.
    """

    wavelength: float
    depth: float
    mass: float = CS133_MASS
    distance: float | None = field(default=None)

    def __post_init__(self):
        for name in ("wavelength", "depth", "mass"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidConfigError(f"{name} must be positive and finite, got {value!r}")
        if self.distance is None:
            object.__setattr__(self, "distance", 0.5 * self.wavelength)
        if not (self.distance >= 0 and math.isfinite(self.distance)):
            raise InvalidConfigError(f"distance must be non-negative, got {self.distance!r}")

    @classmethod
    def from_recoil(cls, wavelength, depth_recoil, mass=CS133_MASS, distance=None):
        """Build a config with the depth given in units of the recoil energy."""
        if not wavelength > 0 or not mass > 0:
            raise InvalidConfigError("wavelength and mass must be positive")
        k = 2.0 * math.pi / wavelength
        e_recoil = (HBAR * k) ** 2 / (2.0 * mass)
        return cls(wavelength, depth_recoil * e_recoil, mass, distance)

    @property
    def wavenumber(self):
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class DerivedParams:
    """Harmonic-trap quantities derived from a :class:`LatticeConfig`.

    ``mass``, ``wavenumber`` and ``depth`` are carried along because the
    sensitivities need them next to ``omega0``.
    """

    omega0: float
    recoil_energy: float
    period: float
    lamb_dicke_ratio: float
    mass: float
    wavenumber: float
    depth: float

    @property
    def hbar_omega0(self):
        return HBAR * self.omega0

    def g0(self, strength):
        """Sensitivity unit ``hbar omega0^2 D`` for noise strength ``D`` (s)."""
        return HBAR * self.omega0**2 * strength


def derive_params(cfg: LatticeConfig) -> DerivedParams:
    if not isinstance(cfg, LatticeConfig):
        raise InvalidConfigError(f"expected LatticeConfig, got {type(cfg).__name__}")
    k = 2.0 * math.pi / cfg.wavelength
    omega0 = math.sqrt(2.0 * cfg.depth * k**2 / cfg.mass)
    e_recoil = (HBAR * k) ** 2 / (2.0 * cfg.mass)
    return DerivedParams(
        omega0=omega0,
        recoil_energy=e_recoil,
        period=2.0 * math.pi / omega0,
        lamb_dicke_ratio=HBAR * omega0 / e_recoil,
        mass=cfg.mass,
        wavenumber=k,
        depth=cfg.depth,
    )


@dataclass(frozen=True)
class FinalState:
    """Auxiliary-equation values at the final time ``T``."""

    rho: float
    rho_dot: float
    qc: float
    qc_dot: float
    n: int = 0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho(T) must be positive, got {self.rho!r}")
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"mode index must be a non-negative integer, got {self.n!r}")


def final_energy(fs: FinalState, p: DerivedParams, d: float) -> float:
    """Energy of transport mode ``n`` in the noiseless final trap centred at ``d``."""
    m, w = p.mass, p.omega0
    two_n1 = 2 * fs.n + 1
    rho2 = fs.rho**2
    return (
        0.5 * m * w**2 * (fs.qc - d) ** 2
        + 0.25 * HBAR * w * two_n1 * (1.0 + rho2**2) / rho2
        + 0.5 * m * fs.qc_dot**2
        + 0.25 * HBAR / w * two_n1 * fs.rho_dot**2
    )


def excess_energy(fs: FinalState, p: DerivedParams, d: float) -> float:
    """``final_energy - hbar omega0 (n + 1/2)`` without the cancellation.

    Uses ``(1 + rho^4) / rho^2 = 2 + (rho - 1/rho)^2``.
    """
    m, w = p.mass, p.omega0
    two_n1 = 2 * fs.n + 1
    return (
        0.5 * m * w**2 * (fs.qc - d) ** 2
        + 0.25 * HBAR * w * two_n1 * (fs.rho - 1.0 / fs.rho) ** 2
        + 0.5 * m * fs.qc_dot**2
        + 0.25 * HBAR / w * two_n1 * fs.rho_dot**2
    )


def min_shuttle_time(p: DerivedParams, cfg: LatticeConfig) -> float:
    """Shortest transport time keeping the atom in one lattice well.

    Solves ``6 m d^2 / (T^4 omega0^2 a) = 1``; shorter times push the average
    potential energy during transport above the lattice depth.
    """
    return (6.0 * cfg.mass * cfg.distance**2 / (p.omega0**2 * cfg.depth)) ** 0.25
