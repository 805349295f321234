"""Two harmonic wells coupled by the Coulomb interaction.

A pair of singly charged ions sits in separate wells with curvatures
omega_l, omega_r and equilibrium spacing d0.  Expanding the Coulomb term to
second order in the ion displacements yields an exchange coupling

    Omega_ex = q^2 / (4 pi eps0 m sqrt(omega_l omega_r) d0^3)

between the local oscillators.  Diagonalizing the coupled quadratic form
gives two normal modes split symmetrically about the mean frequency; at
zero well asymmetry they are the (anti)symmetric combinations and a single
motional quantum hops between the ions at the exchange rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constants
from .errors import DomainError, ParameterError

__all__ = [
    "WellPair",
    "NormalModes",
    "exchange_rate",
    "exchange_time",
    "normal_modes",
    "modes_from_parameters",
    "eigenvector_approx",
    "spacing_for_exchange_rate",
    "beryllium_pair",
]

# Ratio of well frequencies beyond which the quadratic-coupling model is
# not trusted.  Configurable per WellPair.
DEFAULT_MAX_FREQ_RATIO = 2.0


@dataclass(frozen=True)
class WellPair:
    """Static double-well parameters.

    Parameters
    ----------
    mass_l, mass_r : float
        Ion masses in kg.  The normal-mode treatment assumes equal masses;
        both fields are kept so configs can state them explicitly.
    charge : float
        Ion charge in C (both ions).
    omega_l, omega_r : float
        Well curvatures as angular frequencies, rad/s.
    d0 : float
        Equilibrium ion spacing in m.
    max_freq_ratio : float
        Validity guard on omega_r / omega_l.
    """

    mass_l: float
    mass_r: float
    charge: float
    omega_l: float
    omega_r: float
    d0: float
    max_freq_ratio: float = DEFAULT_MAX_FREQ_RATIO

    def __post_init__(self):
        for name in ("mass_l", "mass_r", "charge", "omega_l", "omega_r", "d0"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ParameterError(f"{name} must be positive and finite, got {value!r}")
        ratio = max(self.omega_l, self.omega_r) / min(self.omega_l, self.omega_r)
        if ratio > self.max_freq_ratio:
            raise ParameterError(
                f"well frequencies differ by a factor {ratio:.3g} "
                f"(> {self.max_freq_ratio:g}); outside model validity"
            )
        # The exchange formula and mode geometry assume one mass value.
        if abs(self.mass_l - self.mass_r) > 1e-9 * self.mass_l:
            raise ParameterError("mass_l and mass_r must be equal for the coupled-mode model")

    @property
    def mass(self) -> float:
        return self.mass_l

    @property
    def omega_bar(self) -> float:
        """Mean well frequency, rad/s."""
        return 0.5 * (self.omega_l + self.omega_r)

    @property
    def asymmetry(self) -> float:
        """Half the well-frequency difference delta = (omega_r - omega_l)/2, rad/s."""
        return 0.5 * (self.omega_r - self.omega_l)


@dataclass(frozen=True)
class NormalModes:
    """Normal-mode decomposition of a coupled well pair.

    ``q_str`` and ``q_com`` hold the (left, right) ion amplitudes of each
    mode, q = (sin theta, cos theta) with theta in (-pi/2, pi/2) so the
    second component is always positive.
    """

    omega_bar: float
    delta: float
    omega_ex: float
    omega_str: float
    omega_com: float
    theta_str: float
    theta_com: float
    q_str: tuple[float, float]
    q_com: tuple[float, float]

    @property
    def splitting(self) -> float:
        """Mode splitting omega_str - omega_com = 2 sqrt(delta^2 + Omega_ex^2)."""
        return self.omega_str - self.omega_com


def exchange_rate(wells: WellPair) -> float:
    """Coulomb exchange coupling Omega_ex in rad/s.

    A single motional quantum initially localized in one well transfers to
    the other in tau_ex = pi / (2 Omega_ex) when the wells are degenerate.
    """
    return wells.charge**2 / (
        4.0
        * math.pi
        * constants.VACUUM_PERMITTIVITY
        * wells.mass
        * math.sqrt(wells.omega_l * wells.omega_r)
        * wells.d0**3
    )


def exchange_time(wells: WellPair) -> float:
    """Single-quantum transfer time tau_ex = pi / (2 Omega_ex), seconds."""
    return math.pi / (2.0 * exchange_rate(wells))


def _mode_angles(delta: float, omega_ex: float) -> tuple[float, float]:
    # Branch convention: plain arctan keeps theta in (-pi/2, pi/2), which
    # makes cos(theta) > 0, i.e. positive right-ion amplitude for both modes.
    root = math.hypot(delta, omega_ex)
    theta_str = math.atan((delta - root) / omega_ex)
    theta_com = math.atan((delta + root) / omega_ex)
    return theta_str, theta_com


def modes_from_parameters(omega_bar: float, delta: float, omega_ex: float) -> NormalModes:
    """Normal modes from (mean frequency, asymmetry, exchange rate) directly."""
    if omega_ex <= 0.0 or not math.isfinite(omega_ex):
        raise ParameterError(f"omega_ex must be positive, got {omega_ex!r}")
    if not math.isfinite(delta):
        raise ParameterError("delta must be finite")
    root = math.hypot(delta, omega_ex)
    if omega_bar - root <= 0.0:
        raise ParameterError("mode splitting exceeds the mean frequency; wells unphysical")
    theta_str, theta_com = _mode_angles(delta, omega_ex)
    return NormalModes(
        omega_bar=omega_bar,
        delta=delta,
        omega_ex=omega_ex,
        omega_str=omega_bar + root,
        omega_com=omega_bar - root,
        theta_str=theta_str,
        theta_com=theta_com,
        q_str=(math.sin(theta_str), math.cos(theta_str)),
        q_com=(math.sin(theta_com), math.cos(theta_com)),
    )


def normal_modes(wells: WellPair) -> NormalModes:
    """Diagonalize the coupled pair: frequencies, mixing angles, eigenvectors.

    The stretch-like branch lies at omega_bar + sqrt(delta^2 + Omega_ex^2),
    the common-like branch at omega_bar - sqrt(delta^2 + Omega_ex^2).  At
    delta = 0 the minimum splitting is 2 Omega_ex (avoided crossing).
    """
    return modes_from_parameters(wells.omega_bar, wells.asymmetry, exchange_rate(wells))


def eigenvector_approx(modes: NormalModes) -> tuple[np.ndarray, np.ndarray]:
    """First-order eigenvectors, valid for |delta| < Omega_ex.

    Returns (q_str, q_com) with components
    -+ (1 -+ delta / 2 Omega_ex) / sqrt(2)  and  (1 +- delta / 2 Omega_ex) / sqrt(2).
    """
    if abs(modes.delta) >= modes.omega_ex:
        raise DomainError(
            f"first-order eigenvectors need |delta| < Omega_ex "
            f"(got |{modes.delta:.6g}| >= {modes.omega_ex:.6g})"
        )
    x = modes.delta / (2.0 * modes.omega_ex)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    q_str = np.array([-(1.0 - x) * inv_sqrt2, (1.0 + x) * inv_sqrt2])
    q_com = np.array([(1.0 + x) * inv_sqrt2, (1.0 - x) * inv_sqrt2])
    return q_str, q_com


def spacing_for_exchange_rate(
    omega_ex: float,
    omega_l: float,
    omega_r: float,
    mass: float = constants.MASS_BE9,
    charge: float = constants.ELEMENTARY_CHARGE,
) -> float:
    """Invert the exchange-rate formula for the spacing d0 (m)."""
    if omega_ex <= 0.0:
        raise ParameterError(f"omega_ex must be positive, got {omega_ex!r}")
    return (
        charge**2
        / (
            4.0
            * math.pi
            * constants.VACUUM_PERMITTIVITY
            * mass
            * math.sqrt(omega_l * omega_r)
            * omega_ex
        )
    ) ** (1.0 / 3.0)


def beryllium_pair(
    omega_l: float,
    omega_r: float,
    d0: float,
    max_freq_ratio: float = DEFAULT_MAX_FREQ_RATIO,
) -> WellPair:
    """WellPair for two 9Be+ ions."""
    return WellPair(
        mass_l=constants.MASS_BE9,
        mass_r=constants.MASS_BE9,
        charge=constants.ELEMENTARY_CHARGE,
        omega_l=omega_l,
        omega_r=omega_r,
        d0=d0,
        max_freq_ratio=max_freq_ratio,
    )
