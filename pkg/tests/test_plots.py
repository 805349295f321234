"""Figure rendering: one deterministic PNG per scenario."""

import math
from dataclasses import replace

import numpy as np
import pytest

from ioncoupler import harness, plots
from ioncoupler.errors import ParameterError

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def tiny_result(scenario):
    if scenario == "crossing":
        cfg = replace(
            harness.default_config("crossing", shots=1),
            sweep=harness.SweepSpec(-2e4, 2e4, 15),
            asym_sweep=harness.SweepSpec(-1e4, 1e4, 3),
            n_str=4,
            n_com=4,
            probe_duration=20e-6,
        )
    elif scenario == "exchange":
        cfg = replace(
            harness.default_config("exchange", shots=1),
            sweep=harness.SweepSpec(0.0, 1.5e-4, 4),
            n_str=5,
            n_com=5,
        )
    elif scenario == "gate_evolution":
        cfg = replace(
            harness.default_config("gate_evolution", shots=1),
            sweep=harness.SweepSpec(0.0, 3.1e-4, 4),
            n_str=8,
            n_com=8,
        )
    else:
        cfg = replace(
            harness.default_config("parity", shots=2),
            sweep=harness.SweepSpec(0.0, math.pi * 4.0 / 5.0, 5),
        )
    return harness.run_scenario(cfg)


@pytest.mark.parametrize(
    "scenario", ["crossing", "exchange", "gate_evolution", "parity"]
)
def test_each_scenario_renders_png(scenario, tmp_path):
    result = tiny_result(scenario)
    data = plots.render_scan_bytes(result)
    assert data.startswith(PNG_MAGIC)
    assert len(data) > 5000
    path = tmp_path / f"{scenario}.png"
    plots.render_scan(result, str(path))
    assert path.read_bytes().startswith(PNG_MAGIC)


def test_rendering_is_byte_deterministic():
    result = tiny_result("parity")
    assert plots.render_scan_bytes(result) == plots.render_scan_bytes(result)


def test_unknown_scenario_rejected():
    result = tiny_result("parity")
    bogus = harness.ScanResult(
        scenario="mystery",
        columns=result.columns,
        rows=result.rows,
        meta=result.meta,
    )
    with pytest.raises(ParameterError):
        plots.render_scan_bytes(bogus)
