"""Well geometry and normal-mode decomposition.

Golden numbers were frozen from a 50-digit mpmath evaluation of the
closed-form expressions with CODATA 2018 constants.
"""

import math

import numpy as np
import pytest

from ioncoupler import constants, wells
from ioncoupler.errors import DomainError, ParameterError

TWO_PI = 2.0 * math.pi

# 9Be+ pair, both wells at 2 pi x 4 MHz, 30 um apart.
GOLDEN_RATE_30UM = 22718.490170390262     # rad/s
GOLDEN_TAU_30UM = 69.141757001183377e-6   # s
GOLDEN_RATE_27UM = 31163.909698752074     # rad/s
GOLDEN_D0_GATE = 24.67269943981026e-6     # m, for Omega_ex = 2 pi x 6.5 kHz

# Mixing angles at delta / Omega_ex = 0.2 (Omega_ex = 1, omega_bar = 100).
GOLDEN_THETA_STR = -0.68670038347250793
GOLDEN_THETA_COM = 0.88409594332238869
GOLDEN_ROOT = 1.019803902718557


def reference_pair(d0=30e-6):
    return wells.beryllium_pair(TWO_PI * 4e6, TWO_PI * 4e6, d0)


def test_exchange_rate_golden():
    assert wells.exchange_rate(reference_pair()) == pytest.approx(GOLDEN_RATE_30UM, rel=1e-12)
    assert wells.exchange_rate(reference_pair(27e-6)) == pytest.approx(
        GOLDEN_RATE_27UM, rel=1e-12
    )


def test_exchange_time_golden():
    assert wells.exchange_time(reference_pair()) == pytest.approx(GOLDEN_TAU_30UM, rel=1e-12)


def test_exchange_rate_cube_law():
    rng = np.random.default_rng(20)
    base = wells.exchange_rate(reference_pair()) * (30e-6) ** 3
    for d0 in rng.uniform(15e-6, 60e-6, size=8):
        assert wells.exchange_rate(reference_pair(d0)) * d0**3 == pytest.approx(
            base, rel=1e-12
        )


def test_spacing_inverts_rate():
    d0 = wells.spacing_for_exchange_rate(TWO_PI * 6.5e3, TWO_PI * 4e6, TWO_PI * 4e6)
    assert d0 == pytest.approx(GOLDEN_D0_GATE, rel=1e-12)
    assert wells.exchange_rate(reference_pair(d0)) == pytest.approx(TWO_PI * 6.5e3, rel=1e-12)


def test_mode_angles_at_unit_asymmetry():
    # delta = Omega_ex puts the stretch branch exactly at -pi/8
    m = wells.modes_from_parameters(100.0, 1.0, 1.0)
    assert m.theta_str == pytest.approx(-math.pi / 8.0, abs=1e-15)


def test_mode_angles_golden():
    m = wells.modes_from_parameters(100.0, 0.2, 1.0)
    assert m.theta_str == pytest.approx(GOLDEN_THETA_STR, abs=1e-15)
    assert m.theta_com == pytest.approx(GOLDEN_THETA_COM, abs=1e-15)
    assert m.omega_str - m.omega_bar == pytest.approx(GOLDEN_ROOT, rel=1e-14)
    assert m.q_str[0] == pytest.approx(math.sin(GOLDEN_THETA_STR), abs=1e-15)
    assert m.q_com[1] == pytest.approx(math.cos(GOLDEN_THETA_COM), abs=1e-15)


def test_mode_sum_and_orthonormality():
    rng = np.random.default_rng(3)
    for _ in range(300):
        omega_bar = TWO_PI * rng.uniform(0.5e6, 8e6)
        delta = TWO_PI * rng.uniform(-50e3, 50e3)
        omega_ex = TWO_PI * rng.uniform(0.5e3, 50e3)
        m = wells.modes_from_parameters(omega_bar, delta, omega_ex)
        assert m.omega_str + m.omega_com == pytest.approx(2.0 * omega_bar, rel=1e-14)
        assert m.omega_str >= m.omega_com
        q = np.array([m.q_str, m.q_com])
        np.testing.assert_allclose(q @ q.T, np.eye(2), atol=1e-12)


def test_splitting_minimum_at_zero_asymmetry():
    omega_ex = TWO_PI * 6.5e3
    at_zero = wells.modes_from_parameters(TWO_PI * 4e6, 0.0, omega_ex).splitting
    # the difference of the ~25 Mrad/s branch frequencies loses ~3 digits
    assert at_zero == pytest.approx(2.0 * omega_ex, rel=1e-11)
    for delta in (TWO_PI * 1e3, -TWO_PI * 4e3):
        m = wells.modes_from_parameters(TWO_PI * 4e6, delta, omega_ex)
        assert m.splitting > at_zero
        assert m.splitting == pytest.approx(
            2.0 * math.hypot(delta, omega_ex), rel=1e-11
        )


def test_degenerate_wells_give_symmetric_modes():
    m = wells.normal_modes(reference_pair())
    assert m.delta == 0.0
    np.testing.assert_allclose(np.abs(m.q_str), [1 / math.sqrt(2)] * 2, rtol=1e-14)
    np.testing.assert_allclose(m.q_com, [1 / math.sqrt(2)] * 2, rtol=1e-14)


def test_eigenvector_approx_matches_exact():
    omega_ex = 1.0
    for x in (0.02, 0.1, 0.3):
        m = wells.modes_from_parameters(100.0, x * omega_ex, omega_ex)
        q_str, q_com = wells.eigenvector_approx(m)
        np.testing.assert_allclose(q_str, m.q_str, atol=0.5 * x**2 + 1e-12)
        np.testing.assert_allclose(q_com, m.q_com, atol=0.5 * x**2 + 1e-12)


def test_eigenvector_approx_domain():
    m = wells.modes_from_parameters(100.0, 2.0, 1.0)
    with pytest.raises(DomainError):
        wells.eigenvector_approx(m)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        wells.WellPair(0.0, 1e-26, 1e-19, 1.0, 1.0, 1e-5)
    with pytest.raises(ParameterError):
        reference_pair(-1e-6)
    with pytest.raises(ParameterError):
        wells.beryllium_pair(TWO_PI * 1e6, TWO_PI * 3e6, 30e-6)  # ratio guard
    with pytest.raises(ParameterError):
        wells.WellPair(
            constants.MASS_BE9, 2.0 * constants.MASS_BE9,
            constants.ELEMENTARY_CHARGE, TWO_PI * 4e6, TWO_PI * 4e6, 30e-6,
        )
    with pytest.raises(ParameterError):
        wells.modes_from_parameters(1.0, 0.0, 2.0)  # splitting beyond mean
    with pytest.raises(ParameterError):
        wells.spacing_for_exchange_rate(0.0, TWO_PI * 4e6, TWO_PI * 4e6)


def test_beryllium_pair_uses_shared_constants():
    pair = reference_pair()
    assert pair.mass == constants.MASS_BE9
    assert pair.charge == constants.ELEMENTARY_CHARGE
    assert pair.asymmetry == 0.0
    assert pair.omega_bar == TWO_PI * 4e6
