"""Golden-value self-test suite.

Every check recomputes a quantity from scratch and compares it against a
value frozen from an independent derivation (closed-form evaluation,
analytic loop integrals, or statistical bands wide enough to be robust at
the reduced shot counts used here).  ``run_selftest`` prints one PASS/FAIL
line per check and returns a process exit code.

The statistical checks run fixed seeds, so they are deterministic; their
bands still mean something (a regression in the noise model or estimator
moves the frozen draw out of band) without being sensitive to the last
digit of any one trajectory.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import constants, detection, dressed, harness, propagator, spinops, wells

__all__ = ["CheckResult", "run_selftest", "CHECKS"]

TWO_PI = 2.0 * math.pi

# Reference operating point: both wells at 2 pi x 4 MHz and the spacing
# that puts the exchange coupling at 2 pi x 6.5 kHz.
REF_OMEGA = TWO_PI * 4.0e6
REF_OMEGA_EX = TWO_PI * 6.5e3

# Exchange coupling of the 30 um / 4 MHz beryllium pair, frozen from a
# by-hand evaluation of Q^2 / (4 pi eps0 m sqrt(w_l w_r) d0^3).
GOLDEN_OMEGA_EX_30UM = 22718.490170390262  # rad/s


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _reference_modes() -> wells.NormalModes:
    return wells.modes_from_parameters(REF_OMEGA, 0.0, REF_OMEGA_EX)


def _reference_drive(**overrides) -> dressed.DriveConfig:
    modes = _reference_modes()
    base = dict(
        omega_c=TWO_PI * 50e3,
        eta_omega_s=modes.omega_ex / (2.0 * math.sqrt(2.0)),
        mass=constants.MASS_BE9,
    )
    base.update(overrides)
    return dressed.drive_from_modes(modes, **base)


# --------------------------------------------------------------------------
# Checks
# --------------------------------------------------------------------------


def check_tau_ex() -> tuple[bool, str]:
    """Exchange time of the reference pair against the frozen golden value."""
    pair = wells.beryllium_pair(REF_OMEGA, REF_OMEGA, 30e-6)
    rate = wells.exchange_rate(pair)
    tau = wells.exchange_time(pair)
    ok = abs(rate / GOLDEN_OMEGA_EX_30UM - 1.0) <= 1e-9 and 68e-6 <= tau <= 72e-6
    return ok, f"tau_ex={tau * 1e6:.4f} us (want [68, 72], rate within 1e-9 of golden)"


def check_kappa() -> tuple[bool, str]:
    """Effective spin-spin strength at the quoted drive settings."""
    modes = wells.modes_from_parameters(REF_OMEGA, 0.0, TWO_PI * 6.5e3)
    drive = _reference_drive(eta_omega_s=TWO_PI * 2.4e3)
    assert abs(modes.splitting - TWO_PI * 13e3) < 1e-6
    kappa_hz = dressed.effective_kappa(drive) / TWO_PI
    ok = 430.0 <= kappa_hz <= 460.0
    return ok, f"kappa/2pi={kappa_hz:.2f} Hz (want [430, 460])"


def check_crossing() -> tuple[bool, str]:
    """Reduced avoided-crossing scan: splitting and peak positions."""
    base = harness.default_config("crossing", shots=1)
    cfg = replace(
        base,
        sweep=harness.SweepSpec(-TWO_PI * 15e3, TWO_PI * 15e3, 21),
        asym_sweep=harness.SweepSpec(-TWO_PI * 8e3, TWO_PI * 8e3, 3),
        n_str=6,
        n_com=6,
    )
    result = harness.run_crossing_scan(cfg)
    half_res = 0.5 * result.meta["fourier_width_rad_s"]
    expected = result.meta["expected_splitting_rad_s"]
    split_err = abs(result.meta["splitting_at_zero_rad_s"] / expected - 1.0)
    worst = max(
        abs(row["offset"] - row["expected_offset"]) for row in result.meta["peaks"]
    )
    ok = split_err <= 0.10 and worst <= half_res
    return ok, (
        f"splitting err={split_err * 100:.1f}% (want <= 10%), "
        f"peak offset={worst:.0f} rad/s (want <= {half_res:.0f})"
    )


def _noiseless_gate_states() -> tuple[dressed.GateSchedule, list[propagator.QuantumState]]:
    drive = _reference_drive()
    schedule = dressed.two_loop_schedule(drive, _reference_modes())
    state = propagator.QuantumState.basis("dd")
    out = []
    for seg in schedule.segments:
        state = propagator.evolve_exact(state, (seg,))
        out.append(state)
    return schedule, out


def check_gate_fidelity() -> tuple[bool, str]:
    """Noiseless two-loop gate against the analytic spin prediction."""
    schedule, states = _noiseless_gate_states()
    fid = propagator.fidelity(states[-1])
    start = np.zeros(4, dtype=complex)
    start[spinops.basis_index("dd")] = 1.0
    worst = 0.0
    for j, state in enumerate(states, start=1):
        pred = dressed.schedule_spin_prediction(schedule.segments, start, n_segments=j)
        dist = spinops.trace_distance(state.reduced_spin(), np.outer(pred, pred.conj()))
        worst = max(worst, dist)
    ok = fid >= 0.99 and worst <= 0.02
    return ok, f"F={fid:.5f} (want >= 0.99), max trace distance={worst:.4f} (want <= 0.02)"


def check_deep_regime() -> tuple[bool, str]:
    """Deep Lamb-Dicke oracle: geometric phase and residual entanglement.

    eta = 0.05 with the carrier 50x stronger than the sideband.  The
    dressed-product phases are compared through the four-state combination
    Phi(++) + Phi(--) - Phi(+-) - Phi(-+), which cancels every single-spin
    phase (carrier energy, light shifts) and isolates the loop phase.
    """
    modes = _reference_modes()
    eta = 0.05
    ratio = 50.0
    eta_omega_s = modes.omega_ex / (2.0 * math.sqrt(2.0))
    # Snap the carrier area per loop to an integer multiple of pi (shifts
    # eta Omega_s by 1%).  The dressed-frame residuals then sample the
    # carrier micromotion at its node instead of an arbitrary phase.
    period = math.pi * 2.0 / modes.omega_ex
    eta_omega_s = round(ratio * eta_omega_s * period / math.pi) * math.pi / (ratio * period)
    drive = dressed.DriveConfig(
        omega_c=ratio * eta_omega_s,
        omega_s=eta_omega_s / eta,
        phi_c=0.0,
        phi_s=0.0,
        phi=0.0,
        delta_str=0.5 * modes.splitting,
        delta_com=-0.5 * modes.splitting,
        eta_str=eta,
        eta_com=eta,
        theta_str=modes.theta_str,
        theta_com=modes.theta_com,
    )
    schedule = dressed.two_loop_schedule(drive, modes)
    period = schedule.loop_duration

    product = 1.0 + 0.0j
    analytic = 0.0
    for s_l, s_r in ((1, 1), (-1, -1), (1, -1), (-1, 1)):
        weight = 1.0 if s_l == s_r else -1.0
        spin4 = spinops.dressed_state(s_l, s_r, drive.phi_c)
        amps = np.zeros(4 * 8 * 8, dtype=complex)
        amps[:: 8 * 8] = spin4  # motion in |0, 0>
        state = propagator.QuantumState(amps=amps, n_str=8, n_com=8)
        final = propagator.evolve_exact(state, schedule.segments)
        overlap = complex(np.vdot(amps, final.amps))
        product *= overlap if weight > 0 else overlap.conjugate()
        spins = dressed.SpinPair(s_l, s_r)
        # Per segment the flipped dressed labels leave |d|^2 unchanged.
        for mode in ("str", "com"):
            analytic += 2.0 * weight * dressed.loop_phase(drive, spins, mode, period)
    phase_err = abs(math.remainder(cmath.phase(product) - analytic, TWO_PI))

    state = propagator.QuantumState.basis("dd")
    entropy = 0.0
    for seg in schedule.segments:
        state = propagator.evolve_exact(state, (seg,))
        entropy = max(entropy, propagator.spin_motion_entropy(state))
    ok = phase_err <= 1e-3 and entropy <= 1e-3
    return ok, (
        f"phase err={phase_err:.2e} rad (want <= 1e-3), "
        f"entropy at jT={entropy:.2e} (want <= 1e-3)"
    )


def check_echo() -> tuple[bool, str]:
    """Phase reversal cancels a constant detuning error's displacement."""
    drive = _reference_drive()
    schedule = dressed.two_loop_schedule(drive, _reference_modes())
    error = 0.05 * REF_OMEGA_EX
    worst_two, worst_one = 0.0, 0.0
    for s_l, s_r in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        spins = dressed.SpinPair(s_l, s_r)
        for mode in ("str", "com"):
            net, _ = dressed.schedule_displacement(schedule.segments, spins, mode, error)
            single, _ = dressed.schedule_displacement(schedule.segments[:1], spins, mode, error)
            worst_two = max(worst_two, abs(net))
            worst_one = max(worst_one, abs(single))
    ok = worst_two <= 1e-3 and worst_one > 0.05
    return ok, (
        f"two-loop |alpha|={worst_two:.2e} (want <= 1e-3), "
        f"single-loop |alpha|={worst_one:.3f} (want > 0.05)"
    )


def check_noise_budget() -> tuple[bool, str]:
    """Reduced-shot noisy gate lands near the calibrated operating point.

    150 engine-only shots; the bands are the full-run targets widened by
    four standard errors of this shot count, so a pass means the budget is
    still calibrated, not that one seed is lucky.
    """
    cfg = harness.default_config(
        "parity", shots=150, seed=2026, noise=harness.calibrated_noise_budget()
    )
    modes, drive = harness._gate_drive(cfg)
    result = propagator.run_two_loop_gate(
        drive,
        modes,
        cfg.noise,
        cfg.shots,
        cfg.seed,
        n_str=cfg.n_str,
        n_com=cfg.n_com,
        delta_c=cfg.delta_c,
        prep="dd",
    )
    s02 = float(result.populations[0] + result.populations[2])
    ok = 0.74 <= result.fidelity <= 0.90 and 0.80 <= s02 <= 0.97
    return ok, (
        f"F={result.fidelity:.4f} (want [0.74, 0.90]), "
        f"P0+P2={s02:.4f} (want [0.80, 0.97])"
    )


def check_detection() -> tuple[bool, str]:
    """Closed inference loop on synthetic histograms.

    Reduced coverage run (20 seeded trials instead of 100), full-size
    offset recovery, and the prep-error bias band.
    """
    dists = detection.CountDistribution.negative_binomial()
    rng = np.random.default_rng(411)

    hits = 0
    trials = 20
    for _ in range(trials):
        truth = rng.dirichlet((2.0, 2.0, 2.0))
        cal = detection.calibration_scan(dists, shots=400, seed=rng)
        hist = detection.synthesize_histogram(dists, truth, 400, rng)
        est = detection.fit_estimators(cal)
        inferred = detection.infer_probabilities(hist, est)
        errs = detection.bootstrap_errors(
            detection.probability_pipeline, cal, {"m": hist}, resamples=60, seed=rng
        )
        se = np.array([errs[f"m_p{b}"] for b in range(3)])
        if np.all(np.abs(inferred.p - truth) <= 3.0 * se + 1e-12):
            hits += 1

    injected = math.radians(5.0)
    cal = detection.calibration_scan(dists, shots=2000, seed=7, phase_offset=injected)
    _, offset = detection.phase_offset_correct(cal)
    offset_err = abs(math.degrees(offset) - 5.0)

    bias = detection.prep_error_bias(0.01, dists, seed=5)
    ok = hits >= 17 and offset_err <= 0.5 and 0.006 <= bias <= 0.017
    return ok, (
        f"coverage {hits}/{trials} (want >= 17), "
        f"offset err={offset_err:.3f} deg (want <= 0.5), "
        f"prep bias={bias:.4f} (want [0.006, 0.017])"
    )


def check_mode_sum() -> tuple[bool, str]:
    """Mode-frequency sum rule and eigenvector orthonormality."""
    rng = np.random.default_rng(3)
    worst_sum, worst_orth = 0.0, 0.0
    for _ in range(200):
        omega_bar = TWO_PI * rng.uniform(1e6, 8e6)
        delta = TWO_PI * rng.uniform(-40e3, 40e3)
        omega_ex = TWO_PI * rng.uniform(1e3, 40e3)
        m = wells.modes_from_parameters(omega_bar, delta, omega_ex)
        worst_sum = max(worst_sum, abs((m.omega_str + m.omega_com) / (2 * omega_bar) - 1.0))
        q = np.array([m.q_str, m.q_com])
        worst_orth = max(worst_orth, float(np.max(np.abs(q @ q.T - np.eye(2)))))
    ok = worst_sum <= 1e-12 and worst_orth <= 1e-12
    return ok, (
        f"sum-rule defect={worst_sum:.1e}, orthonormality defect={worst_orth:.1e} "
        "(want <= 1e-12)"
    )


def check_norm() -> tuple[bool, str]:
    """Stepped propagation conserves the norm over 1e4 steps."""
    drive = _reference_drive(omega_c=TWO_PI * 200e3)
    state = propagator.QuantumState.basis("du", n_str=2, n_com=2)
    duration = 4.0e-4
    h = propagator.build_hamiltonian(drive, 0.0, state.n_str, state.n_com)
    h_norm = float(np.max(np.abs(np.linalg.eigvalsh(h))))
    steps = 10_000
    segment = dressed.DriveSegment(duration, drive)
    final = propagator.evolve(state, (segment,), max_step_phase=h_norm * duration / steps)
    drift = abs(final.norm() - 1.0)
    ok = drift <= 1e-9
    return ok, f"|norm - 1| = {drift:.2e} after {steps} steps (want <= 1e-9)"


def check_truncation() -> tuple[bool, str]:
    """Adding two Fock levels moves the noiseless fidelity by < 1e-6."""
    drive = _reference_drive()
    modes = _reference_modes()
    values = []
    for n in (8, 10):
        result = propagator.run_two_loop_gate(
            drive, modes, propagator.NoiseConfig(), shots=1, seed=0, n_str=n, n_com=n
        )
        values.append(result.fidelity)
    shift = abs(values[1] - values[0])
    ok = shift < 1e-6
    return ok, f"fidelity shift={shift:.2e} for +2 levels (want < 1e-6)"


def check_parity_frequency() -> tuple[bool, str]:
    """Free-frequency parity fit returns 2 within 1%."""
    cfg = harness.default_config("parity", shots=1)
    result = harness.run_parity_scan(cfg)
    phases = result.column("analysis_phase_rad")
    parity = result.column("parity")
    fit = harness.fit_parity(phases, parity, free_frequency=True)
    ok = abs(fit.frequency - 2.0) <= 0.02
    return ok, f"fitted frequency={fit.frequency:.4f} (want 2.00 +- 0.02)"


def check_determinism() -> tuple[bool, str]:
    """Identical (config, seed) reproduce identical bytes, CSV and PNG."""
    from . import plots

    cfg = harness.default_config("exchange", shots=3, seed=11,
                                 noise=harness.calibrated_noise_budget())
    cfg = replace(cfg, sweep=harness.SweepSpec(0.0, 1e-4, 4), n_str=6, n_com=6)
    first = harness.run_scenario(cfg)
    second = harness.run_scenario(cfg)
    csv_same = first.to_csv() == second.to_csv()
    png_same = plots.render_scan_bytes(first) == plots.render_scan_bytes(second)
    ok = csv_same and png_same
    return ok, f"csv identical={csv_same}, png identical={png_same}"


# name, included in --quick, callable
CHECKS: list[tuple[str, bool, Callable[[], tuple[bool, str]]]] = [
    ("tau_ex", True, check_tau_ex),
    ("kappa", True, check_kappa),
    ("crossing", True, check_crossing),
    ("gate_fidelity", True, check_gate_fidelity),
    ("deep_regime", True, check_deep_regime),
    ("echo", True, check_echo),
    ("noise_budget", False, check_noise_budget),
    ("detection", False, check_detection),
    ("mode_sum", True, check_mode_sum),
    ("norm", False, check_norm),
    ("truncation", True, check_truncation),
    ("parity_frequency", True, check_parity_frequency),
    ("determinism", True, check_determinism),
]


def run_selftest(quick: bool = False, stream=None) -> int:
    """Run the suite; print one line per check; 0 iff everything passed."""
    import sys

    out = sys.stdout if stream is None else stream
    results: list[CheckResult] = []
    for name, in_quick, fn in CHECKS:
        if quick and not in_quick:
            continue
        t0 = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # noqa: BLE001 - a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - t0
        results.append(CheckResult(name, passed, detail, elapsed))
        status = "PASS" if passed else "FAIL"
        print(f"{status}  {name:<18} {detail}  [{elapsed:.2f} s]", file=out)
    failed = [r.name for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    if failed:
        print(f"{len(failed)}/{len(results)} checks failed: {', '.join(failed)} "
              f"[{total:.1f} s]", file=out)
        return 1
    print(f"all {len(results)} checks passed [{total:.1f} s]", file=out)
    return 0
