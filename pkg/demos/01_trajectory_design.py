"""
Designing the transport trajectory
==================================

A cesium atom sits in one well of an 866 nm lattice, 850 recoil energies
deep. The lattice is moved by one site in a time T using the quintic that
starts and stops at rest with zero acceleration. For a harmonic trap the
trap has to lead the atom slightly so that it ends exactly at rest.
"""

import numpy as np

from lattice_shuttle import LatticeConfig, derive_params, design_polynomial
from lattice_shuttle.lattice import min_shuttle_time

cfg = LatticeConfig.from_recoil(866e-9, 850.0)
p = derive_params(cfg)
print(f"trap frequency omega0/2pi = {p.omega0 / 2 / np.pi / 1e3:.2f} kHz")
print(f"trap period T0 = {p.period * 1e6:.3f} us, hbar omega0 / E_R = {p.lamb_dicke_ratio:.2f}")

# %%
# The quintic in s = t/T, with the boundary values it was built to meet.
traj = design_polynomial(p.period, cfg.distance)
print("scaled coefficients (s^0 .. s^5):", np.round(traj.scaled, 12))
for order in range(3):
    scale = cfg.distance / traj.T**order
    start, end = (float(traj.qc(t, order)) / scale for t in (0.0, traj.T))
    print(f"  derivative {order} in units of d/T^{order}: start {start:+.1e}, end {end:+.1e}")

# %%
# The trap position q0 = qc + qc''/omega0^2 runs ahead during the first half
# and lags during the second. The lead grows quickly as T shrinks.
t = np.linspace(0, traj.T, 7)
lead = traj.trap_position(t, p) - traj.qc(t)
print("trap lead over the atom (nm) at T = T0:", np.round(lead * 1e9, 3))
for T_T0 in (0.25, 0.5, 1, 2):
    tr = design_polynomial(T_T0 * p.period, cfg.distance)
    tt = np.linspace(0, tr.T, 2001)
    print(f"  T = {T_T0:4} T0: max |q0 - qc| = {np.max(np.abs(tr.trap_position(tt, p) - tr.qc(tt))) * 1e9:7.2f} nm")

# %%
# Below about T0/2 the required lead is no longer small compared with the
# well, and the harmonic picture stops being trustworthy.
print(f"shortest sensible time ~ {min_shuttle_time(p, cfg) / p.period:.3f} T0")
