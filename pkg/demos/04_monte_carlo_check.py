"""
Checking the quadrature by simulation
=====================================

Two independent routes to the same number: a Monte-Carlo average of the
first-order response over sampled OU paths, and the fully nonlinear
Ermakov and Newton equations integrated at several noise amplitudes lambda.
"""

from lattice_shuttle import LatticeConfig, derive_params, design_polynomial
from lattice_shuttle.noise import OU, NoiseSpec
from lattice_shuttle.sensitivity import sensitivity
from lattice_shuttle.verify import estimate_sensitivity_mc, lambda_scaling_check

cfg = LatticeConfig.from_recoil(866e-9, 850.0)
p = derive_params(cfg)
traj = design_polynomial(3 * p.period, cfg.distance)

for channel in ("accordion", "amplitude", "position"):
    spec = NoiseSpec(channel, OU(p.period, p.period))
    quad = sensitivity(p, traj, spec)
    mc = estimate_sensitivity_mc(traj, p, spec, N=10_000, seed=2021)
    print(f"{channel:9s} quadrature {quad.total_over_g0:.5g}  "
          f"MC {mc.mean / quad.g0:.5g} +/- {mc.stderr / quad.g0:.2g}")

    # %%
    # The excess energy should scale as lambda^2 with the same coefficient.
    sc = lambda_scaling_check(traj, p, spec, N=200, seed=2021)
    print(f"          lambda exponent {sc.exponent:.4f}, "
          f"lambda^2 coefficient {sc.coefficient / quad.g0:.5g} (MC on the same paths {sc.mc.mean / quad.g0:.5g})")
