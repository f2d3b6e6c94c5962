"""Physical constants (SI, CODATA 2018).

======================  ==============================  =========
name                    value                           unit
======================  ==============================  =========
``PLANCK``              6.62607015e-34 (exact)          J s
``HBAR``                PLANCK / 2 pi                   J s
``ATOMIC_MASS_UNIT``    1.66053906660e-27               kg
``CS133_MASS_U``        132.905451961                   u
======================  ==============================  =========
"""

import math

PLANCK = 6.62607015e-34
HBAR = PLANCK / (2.0 * math.pi)
ATOMIC_MASS_UNIT = 1.66053906660e-27

CS133_MASS_U = 132.905451961
CS133_MASS = CS133_MASS_U * ATOMIC_MASS_UNIT
