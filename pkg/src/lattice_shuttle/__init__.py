"""Noise sensitivities of shortcut-to-adiabaticity atom transport in a moving optical lattice."""

__version__ = "0.1.0"

from .lattice import (  # noqa: E402
    DerivedParams,
    FinalState,
    LatticeConfig,
    derive_params,
    excess_energy,
    final_energy,
    min_shuttle_time,
)
from .noise import (  # noqa: E402
    OU,
    Channel,
    NoiseRealization,
    NoiseSpec,
    Tabulated,
    White,
    correlation,
    sample_ou_path,
    spectral_density,
)
from .sensitivity import (  # noqa: E402
    SensitivityResult,
    find_amplitude_crossing,
    find_g2k_minimum,
    heating_rate,
    sensitivity,
    sensitivity_accordion,
    sensitivity_amplitude,
    sensitivity_position,
    white_closed_forms,
)
from .trajectory import (  # noqa: E402
    PolynomialTrajectory,
    Trajectory,
    design_polynomial,
    eval_qc,
    forcing_kernel_B,
    trap_trajectory,
)
