"""JSON configuration documents for CLI runs.

Schema version 1.  All physical quantities carry explicit unit suffixes in
their key names; every `*_hz` key is an ordinary (omega / 2 pi) frequency.
A document resolves to a ScenarioConfig, and a resolved ScenarioConfig
serializes back to a document that reproduces the run exactly (the sidecar
emitted next to each CSV).

Sweep-axis units are per scenario: crossing sweeps the sideband offset in
hz (plus a well-asymmetry axis in hz), exchange and gate_evolution sweep
durations in us, parity sweeps the analysis phase in rad.
"""

from __future__ import annotations

import json
import math
from typing import Any, Mapping

from . import constants
from .errors import ConfigError, ConsistencyError
from .harness import ScenarioConfig, SweepSpec, default_config, calibrated_noise_budget
from .propagator import NoiseConfig
from .wells import WellPair, spacing_for_exchange_rate

__all__ = [
    "CONFIG_VERSION",
    "CLI_SCENARIOS",
    "load_document",
    "scenario_config",
    "wells_from_document",
    "resolved_document",
    "default_document",
]

CONFIG_VERSION = 1

_SWEEP_UNITS = {
    "crossing": "hz",
    "exchange": "us",
    "gate_evolution": "us",
    "parity": "rad",
}
_TO_SI = {
    "hz": constants.TWO_PI,
    "us": 1e-6,
    "rad": 1.0,
}

# Accepted scenario names on the CLI, mapped to their canonical form.
CLI_SCENARIOS = {
    "crossing": "crossing",
    "exchange": "exchange",
    "gate": "gate_evolution",
    "gate_evolution": "gate_evolution",
    "parity": "parity",
}

_NOISE_KEYS = {
    "heating_rate_quanta_per_s": "heating_rate",
    "drift_sigma_hz": "drift_sigma",
    "intensity_rel_sigma": "intensity_rel_sigma",
    "spont_emission_prob": "spont_emission_prob",
    "spam_epsilon": "spam_epsilon",
}


def load_document(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path!r} must be a JSON object")
    return doc


def _require(section: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in section:
        raise ConfigError(f"config is missing required field {where}.{key}")
    return section[key]


def _number(section: Mapping[str, Any], key: str, where: str, default=None):
    value = section.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config field {where}.{key} must be a number, got {value!r}")
    return float(value)


def wells_from_document(doc: Mapping[str, Any]) -> WellPair:
    section = doc.get("wells")
    if not isinstance(section, dict):
        raise ConfigError("config is missing the 'wells' object")
    mass_amu = _number(section, "mass_amu", "wells")
    if mass_amu is None:
        raise ConfigError("config is missing required field wells.mass_amu")
    charge_e = _number(section, "charge_e", "wells", 1.0)
    omega_l_hz = _require(section, "omega_l_hz", "wells")
    omega_r_hz = _require(section, "omega_r_hz", "wells")
    mass = mass_amu * constants.ATOMIC_MASS
    charge = charge_e * constants.ELEMENTARY_CHARGE
    omega_l = constants.TWO_PI * float(omega_l_hz)
    omega_r = constants.TWO_PI * float(omega_r_hz)

    d0_um = _number(section, "d0_um", "wells")
    omega_ex_hz = _number(section, "omega_ex_hz", "wells")
    if (d0_um is None) == (omega_ex_hz is None):
        raise ConfigError(
            "wells requires exactly one of d0_um or omega_ex_hz (got "
            + ("both" if d0_um is not None else "neither")
            + ")"
        )
    if d0_um is not None:
        d0 = d0_um * 1e-6
    else:
        d0 = spacing_for_exchange_rate(
            constants.TWO_PI * omega_ex_hz, omega_l, omega_r, mass=mass, charge=charge
        )
    return WellPair(
        mass_l=mass, mass_r=mass, charge=charge,
        omega_l=omega_l, omega_r=omega_r, d0=d0,
    )


def _noise_from_document(doc: Mapping[str, Any]) -> NoiseConfig:
    section = doc.get("noise")
    if section is None:
        return NoiseConfig()
    if section == "calibrated":
        return calibrated_noise_budget()
    if not isinstance(section, dict):
        raise ConfigError("config field 'noise' must be an object or the string \"calibrated\"")
    unknown = set(section) - set(_NOISE_KEYS)
    if unknown:
        raise ConfigError(f"unknown noise field(s): {sorted(unknown)}")
    kwargs = {}
    for key, attr in _NOISE_KEYS.items():
        value = _number(section, key, "noise")
        if value is not None:
            kwargs[attr] = constants.TWO_PI * value if key.endswith("_hz") else value
    return NoiseConfig(**kwargs)


def _sweep_from_document(section: Mapping[str, Any], prefix: str, unit: str, where: str) -> SweepSpec | None:
    keys = (f"{prefix}_start_{unit}", f"{prefix}_stop_{unit}", f"{prefix}_points")
    present = [k for k in keys if k in section]
    if not present:
        return None
    if len(present) != 3:
        raise ConfigError(f"config section {where} needs all of {keys} (got {present})")
    start = _number(section, keys[0], where)
    stop = _number(section, keys[1], where)
    points = section[keys[2]]
    if not isinstance(points, int) or isinstance(points, bool):
        raise ConfigError(f"config field {where}.{keys[2]} must be an integer")
    scale = _TO_SI[unit]
    return SweepSpec(start * scale, stop * scale, points)


def scenario_config(
    doc: Mapping[str, Any],
    scenario: str | None = None,
    *,
    seed: int | None = None,
    shots: int | None = None,
) -> ScenarioConfig:
    """Resolve a config document (plus CLI overrides) to a ScenarioConfig."""
    version = doc.get("version")
    if version != CONFIG_VERSION:
        raise ConfigError(f"config version must be {CONFIG_VERSION}, got {version!r}")
    name = scenario if scenario is not None else doc.get("scenario")
    if name not in CLI_SCENARIOS:
        raise ConfigError(
            f"unknown scenario {name!r}; expected one of {sorted(set(CLI_SCENARIOS))}"
        )
    name = CLI_SCENARIOS[name]

    wells = wells_from_document(doc)
    noise = _noise_from_document(doc)
    run = doc.get("run", {})
    if not isinstance(run, dict):
        raise ConfigError("config field 'run' must be an object")
    drive = doc.get("drive", {})
    if not isinstance(drive, dict):
        raise ConfigError("config field 'drive' must be an object")

    base = default_config(name)
    unit = _SWEEP_UNITS[name]
    sweep = _sweep_from_document(run, "sweep", unit, "run") or base.sweep
    asym = _sweep_from_document(run, "asym", "hz", "run")
    if name == "crossing" and asym is None:
        asym = base.asym_sweep

    omega_c_hz = _number(drive, "omega_c_hz", "drive")
    eta_omega_s_hz = _number(drive, "eta_omega_s_hz", "drive")
    phi_rad = _number(drive, "phi_rad", "drive", 0.0)
    sideband_offset_hz = _number(drive, "sideband_offset_hz", "drive", 0.0)
    delta_c = drive.get("delta_c", 2)
    if not isinstance(delta_c, int) or isinstance(delta_c, bool) or delta_c < 1:
        raise ConfigError("config field drive.delta_c must be a positive integer")

    n_str = run.get("n_str", base.n_str)
    n_com = run.get("n_com", base.n_com)
    for label, value in (("n_str", n_str), ("n_com", n_com)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 2:
            raise ConfigError(f"config field run.{label} must be an integer >= 2")
    run_shots = shots if shots is not None else run.get("shots", 400)
    if not isinstance(run_shots, int) or isinstance(run_shots, bool) or run_shots < 1:
        raise ConfigError("config field run.shots must be an integer >= 1")
    run_seed = seed if seed is not None else run.get("seed", 7)
    if not isinstance(run_seed, int) or isinstance(run_seed, bool) or run_seed < 0:
        raise ConfigError("config field run.seed must be a non-negative integer")
    detection = run.get("detection", False)
    if not isinstance(detection, bool):
        raise ConfigError("config field run.detection must be a boolean")

    # Present-but-null disables single-ion addressing; a missing key keeps
    # the default addressed pulse strength.
    if "addressed_eta_omega_s_hz" in run:
        raw = _number(run, "addressed_eta_omega_s_hz", "run")
        addressed = constants.TWO_PI * raw if raw is not None else None
    else:
        addressed = base.addressed_eta_omega_s
    probe_us = _number(run, "probe_duration_us", "run")

    return ScenarioConfig(
        scenario=name,
        wells=wells,
        noise=noise,
        sweep=sweep,
        shots=run_shots,
        seed=run_seed,
        omega_c=constants.TWO_PI * omega_c_hz if omega_c_hz is not None else base.omega_c,
        eta_omega_s=constants.TWO_PI * eta_omega_s_hz if eta_omega_s_hz is not None else None,
        phi=phi_rad,
        sideband_offset=constants.TWO_PI * sideband_offset_hz,
        delta_c=delta_c,
        n_str=n_str,
        n_com=n_com,
        nbar_str=_number(run, "nbar_str", "run", 0.0),
        nbar_com=_number(run, "nbar_com", "run", 0.0),
        detection_enabled=detection,
        asym_sweep=asym,
        probe_duration=probe_us * 1e-6 if probe_us is not None else base.probe_duration,
        addressed_eta_omega_s=addressed,
    )


def _unit_value(value: float, scale: float) -> float:
    """value/scale, nudged by ulps so that multiplying back is bit-exact.

    The emitted document must reproduce the run; a conversion that loses
    the last bit would silently change every derived number.
    """
    y = value / scale
    for _ in range(8):
        back = y * scale
        if back == value:
            return y
        y = math.nextafter(y, math.inf if back < value else -math.inf)
    raise ConsistencyError(f"unit conversion of {value!r} by {scale!r} does not round-trip")


def _sweep_to_document(sweep: SweepSpec | None, prefix: str, unit: str) -> dict:
    if sweep is None:
        return {}
    scale = _TO_SI[unit]
    return {
        f"{prefix}_start_{unit}": _unit_value(sweep.start, scale),
        f"{prefix}_stop_{unit}": _unit_value(sweep.stop, scale),
        f"{prefix}_points": sweep.points,
    }


def resolved_document(cfg: ScenarioConfig) -> dict:
    """Config document reproducing `cfg` exactly; raises if it would not."""
    noise = {
        "heating_rate_quanta_per_s": cfg.noise.heating_rate,
        "drift_sigma_hz": _unit_value(cfg.noise.drift_sigma, constants.TWO_PI),
        "intensity_rel_sigma": cfg.noise.intensity_rel_sigma,
        "spont_emission_prob": cfg.noise.spont_emission_prob,
        "spam_epsilon": cfg.noise.spam_epsilon,
    }
    unit = _SWEEP_UNITS[cfg.scenario]
    run: dict[str, Any] = {
        "shots": cfg.shots,
        "seed": cfg.seed,
        "detection": cfg.detection_enabled,
        "n_str": cfg.n_str,
        "n_com": cfg.n_com,
        "nbar_str": cfg.nbar_str,
        "nbar_com": cfg.nbar_com,
        "probe_duration_us": _unit_value(cfg.probe_duration, 1e-6),
    }
    run.update(_sweep_to_document(cfg.sweep, "sweep", unit))
    run.update(_sweep_to_document(cfg.asym_sweep, "asym", "hz"))
    run["addressed_eta_omega_s_hz"] = (
        _unit_value(cfg.addressed_eta_omega_s, constants.TWO_PI)
        if cfg.addressed_eta_omega_s is not None
        else None
    )
    drive: dict[str, Any] = {
        "omega_c_hz": _unit_value(cfg.omega_c, constants.TWO_PI),
        "phi_rad": cfg.phi,
        "sideband_offset_hz": (
            _unit_value(cfg.sideband_offset, constants.TWO_PI) if cfg.sideband_offset else 0.0
        ),
        "delta_c": cfg.delta_c,
    }
    if cfg.eta_omega_s is not None:
        drive["eta_omega_s_hz"] = _unit_value(cfg.eta_omega_s, constants.TWO_PI)
    doc = {
        "version": CONFIG_VERSION,
        "scenario": cfg.scenario,
        "wells": {
            "mass_amu": _unit_value(cfg.wells.mass_l, constants.ATOMIC_MASS),
            "charge_e": _unit_value(cfg.wells.charge, constants.ELEMENTARY_CHARGE),
            "omega_l_hz": _unit_value(cfg.wells.omega_l, constants.TWO_PI),
            "omega_r_hz": _unit_value(cfg.wells.omega_r, constants.TWO_PI),
            "d0_um": _unit_value(cfg.wells.d0, 1e-6),
        },
        "drive": drive,
        "noise": noise,
        "run": run,
    }
    # Unit conversions must invert bit-exactly or the sidecar would not
    # reproduce the run.
    if scenario_config(doc) != cfg:
        raise ConsistencyError("resolved config document does not round-trip")
    return doc


def default_document(scenario: str) -> dict:
    if scenario not in CLI_SCENARIOS:
        raise ConfigError(
            f"unknown scenario {scenario!r}; expected one of {sorted(set(CLI_SCENARIOS))}"
        )
    return resolved_document(default_config(CLI_SCENARIOS[scenario]))
