"""Physical constants (CODATA 2018) and unit helpers.

All internal quantities are SI; frequencies are angular (rad/s) unless a
name carries an explicit ``_hz`` suffix, in which case it is omega/2pi.
"""

import math

# --- exact SI defining constants -------------------------------------------
ELEMENTARY_CHARGE = 1.602_176_634e-19   # C (exact)
PLANCK = 6.626_070_15e-34               # J s (exact)
HBAR = PLANCK / (2.0 * math.pi)         # J s

# --- measured constants -----------------------------------------------------
VACUUM_PERMITTIVITY = 8.854_187_8128e-12   # F/m
ATOMIC_MASS = 1.660_539_066_60e-27         # kg

# --- species data ------------------------------------------------------------
MASS_BE9 = 9.012_1831 * ATOMIC_MASS        # kg, 9Be atomic mass

TWO_PI = 2.0 * math.pi


def hz(omega: float) -> float:
    """Angular frequency (rad/s) -> cyclic frequency (Hz)."""
    return omega / TWO_PI


def rad_per_s(f_hz: float) -> float:
    """Cyclic frequency (Hz) -> angular frequency (rad/s)."""
    return f_hz * TWO_PI
