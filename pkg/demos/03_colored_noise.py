"""
Colored noise
=============

Ornstein-Uhlenbeck noise with correlation time tau keeps the total strength
D but moves its spectral weight to low frequencies. The trap responds at
omega0 and 2 omega0, so slower noise heats less.
"""

from lattice_shuttle import LatticeConfig, derive_params, design_polynomial
from lattice_shuttle.noise import OU, NoiseSpec, White
from lattice_shuttle.sensitivity import heating_rate, sensitivity

cfg = LatticeConfig.from_recoil(866e-9, 850.0)
p = derive_params(cfg)
D = p.period

# %%
# Total sensitivity G / G0 on a small grid.
taus = (0.0, 0.1, 1.0, 10.0)
for channel in ("accordion", "amplitude", "position"):
    print(f"\n{channel}")
    print(f"{'T/T0':>6}" + "".join(f"{'tau=' + format(t, 'g') + ' T0':>14}" for t in taus))
    for T_T0 in (0.5, 1, 3, 10):
        traj = design_polynomial(T_T0 * p.period, cfg.distance)
        cells = []
        for tau in taus:
            model = White(D) if tau == 0 else OU(D, tau * p.period)
            cells.append(sensitivity(p, traj, NoiseSpec(channel, model)).total_over_g0)
        print(f"{T_T0:6g}" + "".join(f"{c:14.5g}" for c in cells))

# %%
# Long transports approach steady heating at the rate set by the noise
# spectrum at 2 omega0 (width channels) or omega0 (position).
for tau in (0.1, 1.0):
    spec = NoiseSpec("amplitude", OU(D, tau * p.period))
    rate = heating_rate(p, spec, 0, "amplitude")
    print(f"amplitude heating rate at tau = {tau} T0: {rate * p.period / p.hbar_omega0:.4g} hbar omega0 per T0")
