"""Dressed-frame analytics for the carrier + red-sideband drive.

With a strong carrier of Rabi frequency Omega_c and phase phi_c, the
eigenstates of sigma^phi_c = cos(phi_c) sigma_x - sin(phi_c) sigma_y,
|+-> = (|up> +- e^{-i phi_c} |down>)/sqrt(2), are good spin states.  A weak
red sideband near both normal modes then acts, per mode, as a pure
spin-dependent displacement with rate

  d_mode(s_l, s_r) = -(Omega_s/2) eta_mode (sin(theta) s_l e^{-i(ps-pc-phi)}
                                            + cos(theta) s_r e^{-i(ps-pc+phi)})

where s_l, s_r = +-1 label the dressed states, ps/pc are the sideband and
carrier phases at the ion midpoint, and +-phi accounts for the beat-note
phase gradient over the ion spacing.  Driving for a closed loop in phase
space leaves only a geometric phase proportional to s_l s_r, i.e. an
effective sigma^phi_c sigma^phi_c interaction of strength kappa.

A two-segment schedule that advances both drive phases by pi at the loop
closure time reverses the displacement sign, so residual loop-closure
errors that are constant across both segments cancel while the geometric
phase keeps accumulating.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from . import constants
from .errors import ClosureError, DomainError, ParameterError
from .spinops import sigma_phi
from .wells import NormalModes

__all__ = [
    "DriveConfig",
    "SpinPair",
    "LoopRecord",
    "DriveSegment",
    "GateSchedule",
    "lamb_dicke_eta",
    "drive_from_modes",
    "displacement_rate",
    "loop_integrals",
    "loop_duration",
    "loop_phase",
    "effective_kappa",
    "apply_effective_gate",
    "two_loop_schedule",
    "gate_schedule",
    "schedule_displacement",
    "schedule_spin_prediction",
    "SPIN_PAIRS",
]

RAMAN_WAVELENGTH = 313e-9   # m, two-photon drive; |k| = 2 sqrt(2) pi / lambda

# Loop-closure tolerance on |delta_mode * T mod 2pi|.
CLOSURE_TOL = 1e-6

# Relative slack accepted on eta*Omega_s = Omega_ex / (2 sqrt(2)) before a
# schedule is tagged as not maximally entangling.
RABI_CONDITION_TOL = 1e-3

MODES = ("str", "com")


@dataclass(frozen=True)
class DriveConfig:
    """Piecewise-constant drive parameters (all angular frequencies, rad/s).

    phi is half the beat-note phase difference between the ion sites
    (2 phi = k . d0); mask_l / mask_r scale the sideband amplitude per ion
    (ideal addressing sets one of them to zero).
    """

    omega_c: float
    omega_s: float
    phi_c: float
    phi_s: float
    phi: float
    delta_str: float
    delta_com: float
    eta_str: float
    eta_com: float
    theta_str: float
    theta_com: float
    mask_l: float = 1.0
    mask_r: float = 1.0

    def __post_init__(self):
        for name in ("omega_c", "omega_s"):
            if getattr(self, name) < 0.0:
                raise ParameterError(f"{name} must be non-negative")
        for name in ("eta_str", "eta_com"):
            if getattr(self, name) <= 0.0:
                raise ParameterError(f"{name} must be positive")

    def mode_params(self, mode: str) -> tuple[float, float, float]:
        """(delta, eta, theta) for 'str' or 'com'."""
        if mode == "str":
            return self.delta_str, self.eta_str, self.theta_str
        if mode == "com":
            return self.delta_com, self.eta_com, self.theta_com
        raise ParameterError(f"mode must be 'str' or 'com', got {mode!r}")

    @property
    def eta_omega_s(self) -> float:
        """Sideband coupling strength eta * Omega_s with the rms mode eta."""
        eta = math.sqrt(0.5 * (self.eta_str**2 + self.eta_com**2))
        return eta * self.omega_s


@dataclass(frozen=True)
class SpinPair:
    """Dressed-basis eigenvalue pair (s_l, s_r), each +-1."""

    s_l: int
    s_r: int

    def __post_init__(self):
        if self.s_l not in (-1, 1) or self.s_r not in (-1, 1):
            raise ParameterError(f"spin labels must be +-1, got ({self.s_l}, {self.s_r})")

    def flipped(self) -> "SpinPair":
        return SpinPair(-self.s_l, -self.s_r)


SPIN_PAIRS = (SpinPair(1, 1), SpinPair(1, -1), SpinPair(-1, 1), SpinPair(-1, -1))


@dataclass(frozen=True)
class LoopRecord:
    """Displacements and geometric phases accumulated over a drive interval."""

    spins: SpinPair
    duration: float
    alpha_str: complex
    alpha_com: complex
    phase_str: float
    phase_com: float

    @property
    def total_phase(self) -> float:
        return self.phase_str + self.phase_com


@dataclass(frozen=True)
class DriveSegment:
    """One piecewise-constant interval of a drive schedule."""

    duration: float
    drive: DriveConfig


@dataclass(frozen=True)
class GateSchedule:
    """Drive segments plus the derived gate bookkeeping."""

    segments: tuple[DriveSegment, ...]
    loop_duration: float
    kappa: float
    maximally_entangling: bool

    @property
    def total_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)


def lamb_dicke_eta(mass: float, omega: float, wavelength: float = RAMAN_WAVELENGTH) -> float:
    """eta = |k| sqrt(hbar / 2 m omega) with |k| = 2 sqrt(2) pi / lambda."""
    if mass <= 0.0 or omega <= 0.0 or wavelength <= 0.0:
        raise ParameterError("mass, omega and wavelength must be positive")
    k = 2.0 * math.sqrt(2.0) * math.pi / wavelength
    return k * math.sqrt(constants.HBAR / (2.0 * mass * omega))


def drive_from_modes(
    modes: NormalModes,
    *,
    omega_c: float,
    eta_omega_s: float,
    mass: float,
    phi_c: float = 0.0,
    phi_s: float = 0.0,
    phi: float = 0.0,
    sideband_offset: float = 0.0,
    wavelength: float = RAMAN_WAVELENGTH,
    mask_l: float = 1.0,
    mask_r: float = 1.0,
) -> DriveConfig:
    """DriveConfig with exact per-mode Lamb-Dicke factors and detunings.

    ``eta_omega_s`` is the quoted product eta * Omega_s evaluated with the
    mean-frequency eta; ``sideband_offset`` displaces the sideband beat note
    from the mean mode frequency (0 drives the midpoint of the doublet).
    """
    eta_bar = lamb_dicke_eta(mass, modes.omega_bar, wavelength)
    half_split = 0.5 * modes.splitting
    return DriveConfig(
        omega_c=omega_c,
        omega_s=eta_omega_s / eta_bar,
        phi_c=phi_c,
        phi_s=phi_s,
        phi=phi,
        delta_str=sideband_offset + half_split,
        delta_com=sideband_offset - half_split,
        eta_str=lamb_dicke_eta(mass, modes.omega_str, wavelength),
        eta_com=lamb_dicke_eta(mass, modes.omega_com, wavelength),
        theta_str=modes.theta_str,
        theta_com=modes.theta_com,
        mask_l=mask_l,
        mask_r=mask_r,
    )


def displacement_rate(drive: DriveConfig, spins: SpinPair, mode: str) -> complex:
    """Dressed-frame displacement rate d_mode(s_l, s_r), rad/s."""
    _, eta, theta = drive.mode_params(mode)
    common = drive.phi_s - drive.phi_c
    term_l = math.sin(theta) * spins.s_l * drive.mask_l * cmath.exp(-1j * (common - drive.phi))
    term_r = math.cos(theta) * spins.s_r * drive.mask_r * cmath.exp(-1j * (common + drive.phi))
    return -(drive.omega_s / 2.0) * eta * (term_l + term_r)


def loop_integrals(drive: DriveConfig, spins: SpinPair, t: float) -> LoopRecord:
    """Displacement alpha(t) and geometric phase Phi(t) for both modes.

    alpha = i (d/delta)(1 - e^{i delta t});
    Phi   = (|d|/delta)^2 (delta t - sin delta t).
    """
    if t < 0.0:
        raise ParameterError(f"t must be non-negative, got {t!r}")
    values = {}
    for mode in MODES:
        delta, _, _ = drive.mode_params(mode)
        if delta == 0.0:
            raise DomainError(f"delta_{mode} = 0: loop integrals are undefined on resonance")
        d = displacement_rate(drive, spins, mode)
        alpha = 1j * (d / delta) * (1.0 - cmath.exp(1j * delta * t))
        phase = (abs(d) / delta) ** 2 * (delta * t - math.sin(delta * t))
        values[mode] = (alpha, phase)
    return LoopRecord(
        spins=spins,
        duration=t,
        alpha_str=values["str"][0],
        alpha_com=values["com"][0],
        phase_str=values["str"][1],
        phase_com=values["com"][1],
    )


def loop_duration(modes: NormalModes, delta_c: int) -> float:
    """Simultaneous closure time T = pi delta_c / sqrt(delta^2 + Omega_ex^2).

    delta_c = c_str - c_com is the (integer) difference of the number of
    phase-space loops completed by the two modes.
    """
    if not isinstance(delta_c, int) or delta_c < 1:
        raise ParameterError(f"delta_c must be a positive integer, got {delta_c!r}")
    return math.pi * delta_c / math.hypot(modes.delta, modes.omega_ex)


def _closure_defect(delta: float, duration: float) -> float:
    r = math.remainder(delta * duration, 2.0 * math.pi)
    return abs(r)


def loop_phase(drive: DriveConfig, spins: SpinPair, mode: str, duration: float) -> float:
    """Geometric phase of one mode over a closed loop, Phi = |d|^2 T / delta.

    Raises ClosureError unless delta_mode * T is a multiple of 2 pi within
    CLOSURE_TOL (the loop must actually close).
    """
    delta, _, _ = drive.mode_params(mode)
    if delta == 0.0:
        raise DomainError(f"delta_{mode} = 0: no loop is traversed on resonance")
    defect = _closure_defect(delta, duration)
    if defect > CLOSURE_TOL:
        raise ClosureError(
            f"delta_{mode} * T is {defect:.3e} rad away from a multiple of 2 pi; "
            "loop_phase is only defined at closure"
        )
    d = displacement_rate(drive, spins, mode)
    return abs(d) ** 2 * duration / delta


def effective_kappa(drive: DriveConfig) -> float:
    """Strength of the effective sigma^phi_c sigma^phi_c interaction, rad/s.

    kappa = -(Omega_s/2)^2 cos(2 phi) sum_m eta_m^2 sin(2 theta_m) / delta_m.
    For the symmetric detuning choice (sideband midway between the modes at
    zero well asymmetry) this reduces to cos(2 phi) (eta Omega_s)^2 /
    (2 Omega_ex) > 0; other closure choices, e.g. (c_str, c_com) = (-1, -3),
    change both magnitude and sign through the per-mode detunings.
    """
    total = 0.0
    for mode in MODES:
        delta, eta, theta = drive.mode_params(mode)
        if delta == 0.0:
            raise DomainError(f"delta_{mode} = 0: dressed treatment undefined on resonance")
        total += eta**2 * math.sin(2.0 * theta) / delta
    return -((drive.omega_s / 2.0) ** 2) * math.cos(2.0 * drive.phi) * total


def apply_effective_gate(
    state4: np.ndarray,
    kappa: float,
    phi_c: float,
    t: float,
    loop_duration: float | None = None,
) -> np.ndarray:
    """Apply exp(-i kappa t sigma^phi_c x sigma^phi_c) to a two-spin ket.

    The result is only meaningful stroboscopically; if ``loop_duration`` is
    given, t must be an integer multiple of it.
    """
    state = np.asarray(state4, dtype=complex)
    if state.shape != (4,):
        raise ParameterError(f"state must be a 4-component ket, got shape {state.shape}")
    if loop_duration is not None:
        ratio = t / loop_duration
        if abs(ratio - round(ratio)) > 1e-6:
            raise ClosureError(
                f"t = {t:.6g} s is not an integer multiple of the loop duration "
                f"{loop_duration:.6g} s; the effective gate is stroboscopic"
            )
    s = sigma_phi(phi_c)
    ss = np.kron(s, s)
    # exp(-i a M) with M^2 = 1: cos(a) I - i sin(a) M.
    return math.cos(kappa * t) * state - 1j * math.sin(kappa * t) * (ss @ state)


def _shifted(drive: DriveConfig, dphi: float) -> DriveConfig:
    return replace(drive, phi_c=drive.phi_c + dphi, phi_s=drive.phi_s + dphi)


def two_loop_schedule(drive: DriveConfig, modes: NormalModes, delta_c: int = 2) -> GateSchedule:
    """Two equal loops with both drive phases advanced by pi in the second.

    Each segment lasts the closure time T = pi delta_c / sqrt(delta^2 +
    Omega_ex^2); the phase reversal flips every displacement rate while the
    entangling phase keeps growing.  The schedule is maximally entangling
    when eta Omega_s = Omega_ex / (2 sqrt 2); away from that it is still
    emitted, tagged accordingly.
    """
    period = loop_duration(modes, delta_c)
    for mode in MODES:
        delta, _, _ = drive.mode_params(mode)
        defect = _closure_defect(delta, period)
        if defect > CLOSURE_TOL:
            raise ClosureError(
                f"delta_{mode} does not close after T = {period:.6g} s "
                f"(defect {defect:.3e} rad); adjust the sideband offset or delta_c"
            )
    kappa = effective_kappa(drive)
    target = modes.omega_ex / (2.0 * math.sqrt(2.0))
    entangling = abs(drive.eta_omega_s / target - 1.0) <= RABI_CONDITION_TOL
    segments = (
        DriveSegment(period, drive),
        DriveSegment(period, _shifted(drive, math.pi)),
    )
    return GateSchedule(
        segments=segments,
        loop_duration=period,
        kappa=kappa,
        maximally_entangling=entangling,
    )


def gate_schedule(drive: DriveConfig, total_duration: float) -> tuple[DriveSegment, ...]:
    """Phase-reversed pair of segments spanning an arbitrary total duration.

    Mirrors the experimental sequence for population-evolution scans: the
    drive phases are advanced by pi at the midpoint of whatever coupling
    window is applied, so the carrier rotation always unwinds by the end.
    """
    if total_duration < 0.0:
        raise ParameterError("total_duration must be non-negative")
    half = 0.5 * total_duration
    return (DriveSegment(half, drive), DriveSegment(half, _shifted(drive, math.pi)))


def _segment_sign(reference: DriveConfig, drive: DriveConfig) -> int:
    """Dressed-label tracking across carrier phase jumps of 0 or pi."""
    dphi = math.remainder(drive.phi_c - reference.phi_c, 2.0 * math.pi)
    if abs(dphi) < 1e-9:
        return 1
    if abs(abs(dphi) - math.pi) < 1e-9:
        return -1
    raise DomainError(
        "dressed-state tracking requires carrier phase jumps of 0 or pi between "
        f"segments, got {dphi:.6g} rad"
    )


def schedule_displacement(
    segments: tuple[DriveSegment, ...] | list[DriveSegment],
    spins: SpinPair,
    mode: str,
    detuning_error: float = 0.0,
) -> tuple[complex, list[complex]]:
    """Net displacement of one mode over a schedule, with optional detuning error.

    Each segment is evaluated as its own loop integral (the drive phase is
    re-referenced at every segment boundary), following the dressed state of
    the first segment through carrier phase reversals.  ``detuning_error``
    is added to the segment detuning everywhere, modelling a mode-frequency
    offset constant over the whole schedule.
    """
    if not segments:
        raise ParameterError("schedule must contain at least one segment")
    reference = segments[0].drive
    per_segment: list[complex] = []
    for seg in segments:
        sign = _segment_sign(reference, seg.drive)
        eff_spins = spins if sign == 1 else spins.flipped()
        delta, _, _ = seg.drive.mode_params(mode)
        delta = delta + detuning_error
        if delta == 0.0:
            raise DomainError(f"delta_{mode} = 0 in a segment: displacement undefined")
        d = displacement_rate(seg.drive, eff_spins, mode)
        per_segment.append(1j * (d / delta) * (1.0 - cmath.exp(1j * delta * seg.duration)))
    return sum(per_segment), per_segment


def schedule_spin_prediction(
    segments: tuple[DriveSegment, ...] | list[DriveSegment],
    state4: np.ndarray,
    n_segments: int | None = None,
) -> np.ndarray:
    """Bare-frame spin ket predicted at a segment boundary.

    Per closed segment the evolution factorizes into the entangling phase
    exp(-i kappa T sigma^phi sigma^phi) and the carrier winding
    exp(-i Omega_c T (sigma^phi_l + sigma^phi_r)); both are diagonal in the
    segment's dressed basis and commute.
    """
    state = np.asarray(state4, dtype=complex)
    if state.shape != (4,):
        raise ParameterError(f"state must be a 4-component ket, got shape {state.shape}")
    use = list(segments if n_segments is None else segments[:n_segments])
    for seg in use:
        drive = seg.drive
        for mode in MODES:
            delta, _, _ = drive.mode_params(mode)
            defect = _closure_defect(delta, seg.duration)
            if defect > CLOSURE_TOL:
                raise ClosureError(
                    f"segment of {seg.duration:.6g} s does not close mode '{mode}' "
                    f"(defect {defect:.3e} rad); prediction is stroboscopic"
                )
        kappa = effective_kappa(drive)
        state = apply_effective_gate(state, kappa, drive.phi_c, seg.duration)
        s = sigma_phi(drive.phi_c)
        carrier = np.kron(s, np.eye(2)) + np.kron(np.eye(2), s)
        angle = drive.omega_c * seg.duration
        # exp(-i a (s_l + s_r)) via eigendecomposition of the 4x4 sum.
        vals, vecs = np.linalg.eigh(carrier)
        state = (vecs * np.exp(-1j * angle * vals)) @ (vecs.conj().T @ state)
    return state
