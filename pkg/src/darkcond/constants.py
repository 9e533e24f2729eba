"""Unit system and physical constants.

Everything in this package is evaluated in meV / nm / ps. SI shows up only
when a conductance is converted to siemens for output.
"""

import math

HBAR = 0.6582119569            # hbar, meV ps
HBAR2_OVER_2ME = 38.0998       # hbar^2 / (2 m_e), meV nm^2
COULOMB = 1439.96              # e^2 / (4 pi eps0), meV nm
E2_OVER_EPS0 = 4.0 * math.pi * COULOMB   # e^2 / eps0, meV nm

# e^2 / (1 meV ps) expressed in siemens: multiplying a conductance computed
# with e^2 set to one in the meV/nm/ps system by this factor yields siemens.
E2_SIEMENS = 1.602176634e-4

# areal density conversion: 1 nm^-2 = 1e14 cm^-2
PER_NM2_TO_PER_CM2 = 1.0e14


def effective_mass(m_star):
    """Effective mass in meV ps^2 / nm^2, given its value in bare electron masses."""
    return m_star * HBAR**2 / (2.0 * HBAR2_OVER_2ME)
