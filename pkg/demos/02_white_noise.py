"""
White-noise sensitivities
=========================

For delta-correlated noise every sensitivity is a closed form in T. This
script prints the static and dynamical parts of the three channels, the
transport time that minimises the accordion dynamical term and the time
where the two amplitude terms cross.
"""

import numpy as np

from lattice_shuttle import LatticeConfig, derive_params
from lattice_shuttle.sensitivity import find_amplitude_crossing, find_g2k_minimum, white_closed_forms

cfg = LatticeConfig.from_recoil(866e-9, 850.0)
p = derive_params(cfg)
D = p.period  # noise strength; everything below is in units of G0 = hbar omega0^2 D
G0 = p.g0(D)

# %%
# Sensitivities on a few transport times.
print(f"{'T/T0':>6} {'G1K':>10} {'G2K':>10} {'G1A':>10} {'G2A':>10} {'G2Q':>10}")
for T_T0 in (0.3, 0.63, 1, 3, 10, 30):
    T = T_T0 * p.period
    k, a, q = (white_closed_forms(p, T, cfg.distance, 0, ch, D) for ch in ("accordion", "amplitude", "position"))
    print(f"{T_T0:6g} {k.g1 / G0:10.4g} {k.g2 / G0:10.4g} {a.g1 / G0:10.4g} {a.g2 / G0:10.4g} {q.g2 / G0:10.4g}")

# %%
# The accordion dynamical term has a minimum: short transports need large
# accelerations, long ones spend more time exposed to the noise.
print(f"\nG2K is smallest at T = {find_g2k_minimum(p) / p.period:.4f} T0")

# %%
# Amplitude noise: the dynamical part falls as 1/T^3 and the static part
# grows linearly, so they cross once. Higher modes cross earlier.
for n in (0, 1, 5):
    print(f"amplitude crossing for n = {n}: T* = {find_amplitude_crossing(p, cfg.distance, n) / p.period:.4f} T0")

# %%
# Long-time slopes at a transport distance of one lattice site.
d = np.pi / p.wavenumber
T = 1e6 * p.period
k, a, q = (white_closed_forms(p, T, d, 0, ch, D) for ch in ("accordion", "amplitude", "position"))
print(f"\nG2K / G1K -> {k.g2 / k.g1:.3f} = {k.g2 / k.g1 / p.lamb_dicke_ratio:.4f} hbar omega0/E_R")
print(f"G2K / G2Q -> {k.g2 / q.g2:.4f}")
print(f"G2Q / G1A -> {q.g2 / a.g1:.4f}")
