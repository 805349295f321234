"""Two-ion spin algebra helpers.

Basis convention used everywhere: per-ion index 0 = |up> (dark), 1 = |down>
(bright, fluorescing).  Two-ion basis order (l, r): uu, ud, du, dd.  With
this ordering sigma_z = diag(1, -1) assigns +1 to |up>, the raising operator
takes |down> to |up>, and the bright-ion count of basis state k is the
number of set bits of k.
"""

from __future__ import annotations

import math

import numpy as np

UP, DOWN = 0, 1

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)   # |up><down|
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |down><up|
IDENTITY_2 = np.eye(2, dtype=complex)

# Bright-ion count of each two-ion basis state (uu, ud, du, dd).
BRIGHT_COUNT = np.array([0, 1, 1, 2])


def sigma_phi(phi: float) -> np.ndarray:
    """Equatorial spin axis cos(phi) sigma_x - sin(phi) sigma_y.

    The dressed states (|up> +- e^{-i phi} |down>)/sqrt(2) are its +-1
    eigenstates.
    """
    return math.cos(phi) * SIGMA_X - math.sin(phi) * SIGMA_Y


def on_left(op: np.ndarray) -> np.ndarray:
    """Single-ion operator acting on the left ion of the pair."""
    return np.kron(op, IDENTITY_2)


def on_right(op: np.ndarray) -> np.ndarray:
    return np.kron(IDENTITY_2, op)


def carrier_rotation(angle: float, phi: float) -> np.ndarray:
    """exp(-i angle sigma^phi) for one ion: cos(angle) I - i sin(angle) sigma^phi."""
    return math.cos(angle) * IDENTITY_2 - 1.0j * math.sin(angle) * sigma_phi(phi)


def analysis_pulse(phi_a: float) -> np.ndarray:
    """Ideal pi/2 analysis rotation at phase phi_a applied to both ions."""
    u = carrier_rotation(math.pi / 4.0, phi_a)
    return np.kron(u, u)


def dressed_state(s_l: int, s_r: int, phi_c: float) -> np.ndarray:
    """Product of single-ion sigma^phi_c eigenstates with eigenvalues s_l, s_r."""
    kets = []
    for s in (s_l, s_r):
        kets.append(np.array([1.0, s * np.exp(-1.0j * phi_c)], dtype=complex) / math.sqrt(2.0))
    return np.kron(kets[0], kets[1])


def bell_target() -> np.ndarray:
    """(|dd> - i |uu>)/sqrt(2), the ideal maximally entangling gate output."""
    psi = np.zeros(4, dtype=complex)
    psi[3] = 1.0 / math.sqrt(2.0)
    psi[0] = -1.0j / math.sqrt(2.0)
    return psi


def basis_index(spins: str) -> int:
    """Index of a two-ion product state given as e.g. 'dd', 'ud'."""
    if len(spins) != 2 or any(c not in "ud" for c in spins):
        raise ValueError(f"spins must be two characters from 'u'/'d', got {spins!r}")
    return ((0 if spins[0] == "u" else 1) << 1) | (0 if spins[1] == "u" else 1)


def populations_by_bright(probs4: np.ndarray) -> tuple[float, float, float]:
    """(P0, P1, P2): probability of 0, 1, 2 bright (|down>) ions."""
    p = np.asarray(probs4, dtype=float)
    return (
        float(p[0]),
        float(p[1] + p[2]),
        float(p[3]),
    )


def spin_fidelity(rho4: np.ndarray, target: np.ndarray) -> float:
    """<target| rho |target> for a 4x4 spin density matrix."""
    return float(np.real(np.conj(target) @ rho4 @ target))


def trace_distance(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """(1/2) ||rho_a - rho_b||_1 via eigenvalues of the Hermitian difference."""
    diff = rho_a - rho_b
    vals = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return 0.5 * float(np.sum(np.abs(vals)))
