"""Inverse-engineered transport trajectories.

A trajectory prescribes the classical centre ``q_c(t)`` of the transport
modes. The trap path that realises it follows from the Newton equation
``q_c'' + omega0^2 q_c = omega0^2 q0``. Values are evaluated in the scaled
time ``s = t / T`` and rescaled by ``d / T**order``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .lattice import DerivedParams

__all__ = [
    "TransportTrajectory",
    "PolynomialTrajectory",
    "Trajectory",
    "design_polynomial",
    "eval_qc",
    "trap_trajectory",
    "forcing_kernel_B",
]

# Rounding slack accepted at the interval ends, relative to T.
_T_SLACK = 1e-12


class TransportTrajectory:
    """Interface for shortcut trajectories from 0 to ``d`` in time ``T``.

    Subclasses implement :meth:`qc`. Every family must satisfy
    ``q_c, q_c', q_c'' = 0`` at ``t = 0`` and ``q_c = d, q_c' = q_c'' = 0``
    at ``t = T``.
    """

    T: float
    d: float

    def qc(self, t, order=0):
        raise NotImplementedError

    def _check_time(self, t):
        t = np.asarray(t, dtype=float)
        slack = _T_SLACK * self.T
        if np.any(t < -slack) or np.any(t > self.T + slack):
            raise ValueError(f"time outside [0, T={self.T!r}]")
        return np.clip(t, 0.0, self.T)

    def trap_position(self, t, p: DerivedParams):
        """Trap centre ``q0 = q_c + q_c'' / omega0^2``."""
        return self.qc(t, 0) + self.qc(t, 2) / p.omega0**2

    def forcing_kernel(self, t, p: DerivedParams):
        """``B = q_c'' - omega0^2 q_c``, the accordion-noise forcing."""
        return self.qc(t, 2) - p.omega0**2 * self.qc(t, 0)


@dataclass(frozen=True)
class PolynomialTrajectory(TransportTrajectory):
    """``q_c(t) = d * P(t / T)`` with ``P`` a polynomial in scaled time.

    Attributes
    ----------
    T : float
        Transport time (s).
    d : float
        Transport distance (m).
    scaled : tuple of float
        Coefficients of ``P`` in increasing powers of ``s``.
    """

    T: float
    d: float
    scaled: tuple

    @property
    def coefficients(self):
        """Physical coefficients ``b_j`` of ``q_c(t) = sum_j b_j t**j``."""
        return np.array([self.d * c / self.T**j for j, c in enumerate(self.scaled)])

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.scaled)

    def qc(self, t, order=0):
        if order not in (0, 1, 2):
            raise ValueError(f"derivative order {order!r} unsupported (0, 1 or 2)")
        t = self._check_time(t)
        dpoly = self.poly.deriv(order) if order else self.poly
        # np.polyval is Horner; wants highest power first
        values = np.polyval(dpoly.coef[::-1], t / self.T)
        out = self.d * values / self.T**order
        return out if out.ndim else float(out)

    def scaled_forcing(self, which, omega0):
        """Polynomial ``F(s)`` with the physical forcing equal to ``d/T^2 * F(t/T)``.

        ``which`` is ``"B"`` (``P'' - (omega0 T)^2 P``) or ``"acc"`` (``P''``).
        """
        p2 = self.poly.deriv(2)
        if which == "acc":
            return p2
        if which == "B":
            return p2 - (omega0 * self.T) ** 2 * self.poly
        raise ValueError(f"unknown forcing {which!r}")


Trajectory = PolynomialTrajectory


def _boundary_coefficients(start, end):
    """Degree-5 polynomial on ``s in [0, 1]`` with prescribed value, slope and
    curvature at both ends."""
    A = np.zeros((6, 6))
    powers = np.arange(6)
    for row, (s, order) in enumerate([(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]):
        for j in powers[order:]:
            fall = np.prod(np.arange(j - order + 1, j + 1)) if order else 1
            A[row, j] = fall * s ** (j - order) if j > order else fall
    rhs = np.concatenate([start, end]).astype(float)
    return np.linalg.solve(A, rhs)


def design_polynomial(T: float, d: float) -> PolynomialTrajectory:
    """Minimum-degree polynomial shortcut from 0 to ``d`` in time ``T``.

    The six boundary conditions (rest at both ends with vanishing
    acceleration, so that the trap path starts at 0 and ends at ``d``) fix a
    unique quintic, ``q_c = d (10 s^3 - 15 s^4 + 6 s^5)``.
    """
    if not T > 0:
        raise ValueError(f"transport time must be positive, got {T!r}")
    coef = _boundary_coefficients([0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    return PolynomialTrajectory(float(T), float(d), tuple(float(c) for c in coef))


def eval_qc(traj: TransportTrajectory, t, order=0):
    return traj.qc(t, order)


def trap_trajectory(traj: TransportTrajectory, p: DerivedParams, t):
    return traj.trap_position(t, p)


def forcing_kernel_B(traj: TransportTrajectory, p: DerivedParams, t):
    return traj.forcing_kernel(t, p)
