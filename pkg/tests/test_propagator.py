"""Truncated-space propagation and the Monte-Carlo shot loop."""

import math
from dataclasses import replace

import numpy as np
import pytest

from ioncoupler import constants, dressed, propagator, spinops, wells
from ioncoupler.errors import LeakageError, ParameterError

TWO_PI = 2.0 * math.pi


def reference_modes():
    return wells.modes_from_parameters(TWO_PI * 4e6, 0.0, TWO_PI * 6.5e3)


def gate_drive(modes=None, **overrides):
    modes = reference_modes() if modes is None else modes
    defaults = dict(
        omega_c=TWO_PI * 50e3,
        eta_omega_s=modes.omega_ex / (2.0 * math.sqrt(2.0)),
        mass=constants.MASS_BE9,
    )
    defaults.update(overrides)
    return dressed.drive_from_modes(modes, **defaults)


def carrier_only(omega_c=TWO_PI * 50e3, phi_c=0.0):
    return dressed.DriveConfig(
        omega_c=omega_c, omega_s=0.0, phi_c=phi_c, phi_s=0.0, phi=0.0,
        delta_str=TWO_PI * 3.25e3, delta_com=-TWO_PI * 3.25e3,
        eta_str=0.2, eta_com=0.2,
        theta_str=-math.pi / 4.0, theta_com=math.pi / 4.0,
    )


def test_basis_state_layout():
    state = propagator.QuantumState.basis("du", 1, 2, n_str=3, n_com=4)
    assert state.dim == 48
    idx = (spinops.basis_index("du") * 3 + 1) * 4 + 2
    assert state.amps[idx] == 1.0
    assert state.norm() == pytest.approx(1.0)
    assert state.spin_populations() == pytest.approx((0.0, 1.0, 0.0))
    assert state.mode_nbar("str") == pytest.approx(1.0)
    assert state.mode_nbar("com") == pytest.approx(2.0)
    assert state.top_level_population("str") == 0.0
    assert state.top_level_population("com") == 0.0
    with pytest.raises(ParameterError):
        propagator.QuantumState.basis("dd", 3, 0, n_str=3, n_com=4)
    with pytest.raises(ParameterError):
        state.mode_nbar("axial")


def test_hamiltonian_is_hermitian():
    rng = np.random.default_rng(21)
    for _ in range(10):
        modes = wells.modes_from_parameters(
            TWO_PI * 4e6, TWO_PI * rng.uniform(-8e3, 8e3), TWO_PI * 6.5e3
        )
        drive = gate_drive(
            modes,
            phi_c=rng.uniform(0.0, TWO_PI),
            phi_s=rng.uniform(0.0, TWO_PI),
            phi=rng.uniform(0.0, TWO_PI),
        )
        h = propagator.build_hamiltonian(drive, rng.uniform(0.0, 1e-4), 3, 3)
        assert h.shape == (36, 36)
        assert np.allclose(h, h.conj().T, atol=1e-9)
    with pytest.raises(ParameterError):
        propagator.build_hamiltonian(gate_drive(), 0.0, 1, 3)


def test_carrier_area_flips_both_spins():
    drive = carrier_only(phi_c=0.3)
    duration = (math.pi / 2.0) / drive.omega_c
    start = propagator.QuantumState.basis("uu", n_str=2, n_com=2)
    for engine in (propagator.evolve, propagator.evolve_exact):
        out = engine(start, [dressed.DriveSegment(duration, drive)])
        pops = out.spin_populations()
        assert pops[2] == pytest.approx(1.0, abs=1e-9)
    assert out.time == pytest.approx(duration)


def test_zero_drive_leaves_state_unchanged():
    quiet = replace(carrier_only(), omega_c=0.0)
    start = propagator.QuantumState.basis("ud", 1, 1, 3, 3)
    out = propagator.evolve_exact(start, [dressed.DriveSegment(3.7e-4, quiet)])
    assert np.max(np.abs(out.amps - start.amps)) < 1e-12
    out = propagator.evolve(start, [dressed.DriveSegment(3.7e-4, quiet)])
    assert np.max(np.abs(out.amps - start.amps)) < 1e-12


def test_stepped_propagation_matches_exact():
    modes = reference_modes()
    drive = gate_drive(modes)
    seg = dressed.DriveSegment(dressed.loop_duration(modes, 2) / 8.0, drive)
    start = propagator.QuantumState.basis("dd", n_str=6, n_com=6)
    exact = propagator.evolve_exact(start, [seg])
    stepped = propagator.evolve(start, [seg])
    assert np.max(np.abs(exact.amps - stepped.amps)) < 1e-6
    assert abs(stepped.norm() - 1.0) < 1e-9


def test_noiseless_gate_reaches_entangled_target():
    modes = reference_modes()
    result = propagator.run_two_loop_gate(
        gate_drive(modes), modes, propagator.NoiseConfig(), shots=3, seed=0
    )
    assert result.fidelity > 0.999
    assert result.fidelity_err < 1e-12
    assert result.populations[1] < 0.01
    assert result.nbar_str < 0.02 and result.nbar_com < 0.02
    # quiet configuration propagates one trajectory and broadcasts it
    assert np.array_equal(result.per_shot_fidelity, np.full(3, result.per_shot_fidelity[0]))
    assert np.all(result.populations_err == 0.0)


def test_shot_loop_is_deterministic():
    modes = reference_modes()
    noise = propagator.NoiseConfig(
        heating_rate=800.0,
        drift_sigma=TWO_PI * 2e3,
        intensity_rel_sigma=0.05,
        spont_emission_prob=0.02,
        spam_epsilon=0.03,
    )
    kwargs = dict(shots=6, n_str=6, n_com=6)
    a = propagator.run_two_loop_gate(gate_drive(modes), modes, noise, seed=17, **kwargs)
    b = propagator.run_two_loop_gate(gate_drive(modes), modes, noise, seed=17, **kwargs)
    assert np.array_equal(a.per_shot_rho, b.per_shot_rho)
    assert np.array_equal(a.per_shot_populations, b.per_shot_populations)
    assert np.array_equal(a.per_shot_fidelity, b.per_shot_fidelity)
    c = propagator.run_two_loop_gate(
        gate_drive(modes), modes, noise, seed=np.random.SeedSequence(17), **kwargs
    )
    assert np.array_equal(a.per_shot_rho, c.per_shot_rho)
    d = propagator.run_two_loop_gate(gate_drive(modes), modes, noise, seed=18, **kwargs)
    assert not np.array_equal(a.per_shot_rho, d.per_shot_rho)


def test_thread_count_does_not_change_results():
    modes = reference_modes()
    noise = propagator.NoiseConfig(drift_sigma=TWO_PI * 2e3, spam_epsilon=0.05)
    kwargs = dict(shots=4, n_str=6, n_com=6, seed=5)
    serial = propagator.run_two_loop_gate(gate_drive(modes), modes, noise, threads=1, **kwargs)
    pooled = propagator.run_two_loop_gate(gate_drive(modes), modes, noise, threads=2, **kwargs)
    assert np.array_equal(serial.per_shot_rho, pooled.per_shot_rho)


def test_spam_substitution_dominates_at_unit_epsilon():
    modes = reference_modes()
    noise = propagator.NoiseConfig(spam_epsilon=1.0)
    result = propagator.run_two_loop_gate(
        gate_drive(modes), modes, noise, shots=12, seed=3, n_str=6, n_com=6
    )
    # every shot starts from a wrong basis state, so the entangled-target
    # overlap collapses
    assert result.fidelity < 0.6


def test_truncation_headroom():
    modes = reference_modes()
    quiet = propagator.NoiseConfig()
    f8 = propagator.run_two_loop_gate(
        gate_drive(modes), modes, quiet, shots=1, seed=0, n_str=8, n_com=8
    ).fidelity
    f10 = propagator.run_two_loop_gate(
        gate_drive(modes), modes, quiet, shots=1, seed=0, n_str=10, n_com=10
    ).fidelity
    assert abs(f8 - f10) < 1e-6


def test_leakage_guard_raises():
    modes = reference_modes()
    drive = gate_drive(modes)
    seg = dressed.DriveSegment(dressed.loop_duration(modes, 2), drive)
    start = propagator.QuantumState.basis("dd", n_str=4, n_com=4)
    with pytest.raises(LeakageError):
        propagator.evolve_exact(start, [seg, seg])
    # a drive strong enough to overflow the ladder still leaks after the
    # shot loop retries with three extra levels
    strong = gate_drive(modes, eta_omega_s=10.0 * modes.omega_ex)
    with pytest.raises(LeakageError):
        propagator.run_two_loop_gate(
            strong, modes, propagator.NoiseConfig(), shots=1, seed=0, n_str=4, n_com=4
        )


def test_noise_config_validation():
    with pytest.raises(ParameterError):
        propagator.NoiseConfig(heating_rate=-1.0)
    with pytest.raises(ParameterError):
        propagator.NoiseConfig(spam_epsilon=1.5)
    assert propagator.NoiseConfig().is_quiet
    assert not propagator.NoiseConfig(drift_sigma=1.0).is_quiet
    with pytest.raises(ParameterError):
        propagator.run_two_loop_gate(
            gate_drive(), reference_modes(), propagator.NoiseConfig(), shots=0, seed=0
        )


def test_fidelity_and_entropy_helpers():
    target = spinops.bell_target()
    assert propagator.fidelity(target) == pytest.approx(1.0)
    start = propagator.QuantumState.basis("dd", n_str=2, n_com=2)
    assert propagator.fidelity(start) == pytest.approx(0.5)
    assert propagator.spin_motion_entropy(start) == pytest.approx(0.0, abs=1e-12)
    # equal split between spin blocks with orthogonal motion: entropy ln 2
    amps = np.zeros(16, dtype=complex)
    amps[(spinops.basis_index("uu") * 2 + 0) * 2 + 0] = 1.0 / math.sqrt(2.0)
    amps[(spinops.basis_index("dd") * 2 + 1) * 2 + 0] = 1.0 / math.sqrt(2.0)
    mixed = propagator.QuantumState(amps=amps, n_str=2, n_com=2)
    assert propagator.spin_motion_entropy(mixed) == pytest.approx(math.log(2.0), rel=1e-9)
