"""Figure rendering for scenario results.

One PNG per scan, written next to the CSV.  Rendering is deterministic:
fixed figure geometry, no timestamps in the PNG metadata, and all content
derived from the ScanResult alone.
"""

from __future__ import annotations

import io
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import ParameterError
from .harness import ScanResult, fit_parity

__all__ = ["render_scan", "render_scan_bytes"]

_KHZ = 1e-3 / (2.0 * math.pi)   # rad/s -> kHz quoted


def render_scan(result: ScanResult, path: str) -> None:
    """Render the scan to `path` (PNG)."""
    fig = _FIGURES.get(result.scenario)
    if fig is None:
        raise ParameterError(f"no figure defined for scenario {result.scenario!r}")
    figure = fig(result)
    try:
        figure.savefig(path, dpi=150, metadata={"Software": None})
    finally:
        plt.close(figure)


def render_scan_bytes(result: ScanResult) -> bytes:
    """PNG bytes for the scan; used by the determinism self-check."""
    fig = _FIGURES.get(result.scenario)
    if fig is None:
        raise ParameterError(f"no figure defined for scenario {result.scenario!r}")
    figure = fig(result)
    try:
        buf = io.BytesIO()
        figure.savefig(buf, format="png", dpi=150, metadata={"Software": None})
        return buf.getvalue()
    finally:
        plt.close(figure)


def _crossing_figure(result: ScanResult):
    asym = np.unique(result.column("asymmetry_rad_s"))
    offsets = np.unique(result.column("sideband_offset_rad_s"))
    signal = result.column("bright_sum").reshape(len(asym), len(offsets))

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    mesh = ax.pcolormesh(
        offsets * _KHZ, asym * _KHZ, signal, shading="nearest", cmap="viridis"
    )
    fig.colorbar(mesh, ax=ax, label="P1 + 2 P2")
    omega_ex = result.meta.get("omega_ex_rad_s")
    if omega_ex:
        fine = np.linspace(asym[0], asym[-1], 200)
        gap = np.hypot(fine, omega_ex)
        for sign in (-1.0, 1.0):
            ax.plot(sign * gap * _KHZ, fine * _KHZ, "w--", lw=0.8)
    ax.set_xlabel("sideband offset from $\\bar\\omega$ (kHz)")
    ax.set_ylabel("well asymmetry $\\delta/2\\pi$ (kHz)")
    ax.set_title("motional sideband doublet vs well asymmetry")
    fig.tight_layout()
    return fig


def _exchange_figure(result: ScanResult):
    delay = result.column("delay_s")
    bright = result.column("left_bright")
    err = result.column("left_bright_err")

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.errorbar(delay * 1e6, bright, yerr=err, fmt="o", ms=3.5, lw=1.0, capsize=2)
    tau_ex = result.meta.get("tau_ex_s")
    if tau_ex:
        fine = np.linspace(delay[0], delay[-1], 400)
        ax.plot(fine * 1e6, np.sin(math.pi / (2.0 * tau_ex) * fine) ** 2, "-", lw=0.8,
                color="gray", label="$\\sin^2(\\Omega_{ex}\\tau)$")
        ax.legend(frameon=False)
    ax.set_xlabel("delay between addressed pulses (us)")
    ax.set_ylabel("P(left ion bright)")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title("motional quantum exchange")
    fig.tight_layout()
    return fig


def _gate_evolution_figure(result: ScanResult):
    t = result.column("duration_s") * 1e6
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, color in (("p0", "tab:red"), ("p1", "tab:green"), ("p2", "tab:blue")):
        ax.errorbar(
            t,
            result.column(label),
            yerr=result.column(label + "_err"),
            fmt="o-",
            ms=3.0,
            lw=0.9,
            color=color,
            label="$P_%s$" % label[1],
        )
    loop = result.meta.get("loop_duration_s")
    if loop:
        ax.axvline(2.0 * loop * 1e6, color="gray", lw=0.8, ls=":")
    ax.set_xlabel("coupling duration (us)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(frameon=False, ncol=3)
    ax.set_title("populations through the entangling sequence")
    fig.tight_layout()
    return fig


def _parity_figure(result: ScanResult):
    phase = result.column("analysis_phase_rad")
    parity = result.column("parity")
    err = result.column("parity_err")

    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.errorbar(phase, parity, yerr=err, fmt="o", ms=3.5, lw=1.0, capsize=2)
    fit = fit_parity(phase, parity)
    fine = np.linspace(phase[0], phase[-1], 400)
    ax.plot(
        fine,
        fit.amplitude * np.cos(2.0 * fine + fit.phase) + fit.offset,
        "-",
        lw=0.9,
        color="gray",
        label=f"$A={fit.amplitude:.3f}$",
    )
    ax.legend(frameon=False)
    ax.set_xlabel("analysis phase $\\phi_a$ (rad)")
    ax.set_ylabel("parity $P_0 + P_2 - P_1$")
    ax.set_ylim(-1.1, 1.1)
    ax.set_title("parity oscillation after the entangling sequence")
    fig.tight_layout()
    return fig


_FIGURES = {
    "crossing": _crossing_figure,
    "exchange": _exchange_figure,
    "gate_evolution": _gate_evolution_figure,
    "parity": _parity_figure,
}
