"""Physical constants shared by every model in the package.

All light in the simulation is monochromatic at a single fixed wavelength,
and time advances in fixed segments of ``DELTA_T``.  Field amplitudes are
dimensionless Jones-vector components; the conversion to watts goes through
``PHOTON_ENERGY / DELTA_T``.
"""

import math

HBAR = 1.054571817e-34  # J*s
K_B = 1.380649e-23  # J/K

WAVELENGTH = 496.61e-9  # m
FREQUENCY = 603.68e12  # Hz
OMEGA = 2.0 * math.pi * FREQUENCY  # rad/s

DELTA_T = 1e-6  # s, one simulation step (also the detector dead time)

# Variance of each vacuum-mode quadrature pair: a vacuum segment is
# SIGMA0 * z with z a standard complex Gaussian.
SIGMA0_SQ = 0.5
SIGMA0 = math.sqrt(SIGMA0_SQ)

PHOTON_ENERGY = HBAR * OMEGA  # J, very nearly 4.0000e-19

# Power carried by a bare vacuum mode pair, ~2.0000e-13 W.
VACUUM_POWER = SIGMA0_SQ * PHOTON_ENERGY / DELTA_T

# Power meters record whole nanowatts; anything below one nW reads as zero.
POWER_QUANTUM = 1e-9  # W

# Grid propagation: steps a wavefront needs to cross one table cell.
CELL_LATENCY_STEPS = 10
