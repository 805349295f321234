"""Command-line front end.

Three commands: `modes` prints the normal-mode table for a well
configuration, `run` executes a scenario and writes its artifacts, and
`selftest` runs the golden-value suite.  Exit codes: 0 ok, 1 selftest
failure, 2 usage or config error, 3 engine error.

Every data file emitted by `run` is referenced (with a checksum) by a
manifest in the same directory, and the JSON sidecar re-ingests as a config
that reproduces the run byte for byte.  Wall-clock timing goes to stdout
only, never into the artifacts.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np
import scipy

from . import __version__, config, harness, wells
from .errors import ConfigError, EngineError, IonCouplerError, ParameterError

__all__ = ["main", "build_parser"]

_USAGE_EXIT = 2
_ENGINE_EXIT = 3


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage errors instead of calling sys.exit."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="ioncoupler")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    modes = sub.add_parser("modes", help="normal-mode table for a well configuration")
    modes.add_argument("--config", help="JSON config path (default: reference pair)")
    modes.add_argument("--json", action="store_true", help="machine-readable output")
    modes.add_argument("--out", help="directory to also write modes.csv into")

    run = sub.add_parser("run", help="execute a scenario and write CSV/JSON artifacts")
    run.add_argument("scenario", choices=sorted(config.CLI_SCENARIOS))
    run.add_argument("--config", help="JSON config path (default: built-in defaults)")
    run.add_argument("--seed", type=int, help="override the run seed")
    run.add_argument("--shots", type=int, help="override the per-point shot count")
    run.add_argument("--out", default=".", help="output directory (default: cwd)")
    run.add_argument("--json", action="store_true", help="print the manifest to stdout")
    run.add_argument("--plot", action="store_true", help="also render <scenario>.png")

    selftest = sub.add_parser("selftest", help="golden-value self-test suite")
    selftest.add_argument("--quick", action="store_true", help="fast subset (~seconds)")
    return parser


# --------------------------------------------------------------------------
# modes
# --------------------------------------------------------------------------


def _mode_rows(pair: wells.WellPair) -> list[tuple[str, str, str]]:
    m = wells.normal_modes(pair)
    tau = wells.exchange_time(pair)
    two_pi = 2.0 * math.pi

    def freq(label, value):
        return (label, f"{value:.6f}", f"{value / two_pi:.6f}")

    rows = [
        freq("omega_bar [rad/s | Hz]", m.omega_bar),
        freq("delta [rad/s | Hz]", m.delta),
        freq("omega_ex [rad/s | Hz]", m.omega_ex),
        freq("omega_str [rad/s | Hz]", m.omega_str),
        freq("omega_com [rad/s | Hz]", m.omega_com),
        freq("splitting [rad/s | Hz]", m.splitting),
        ("theta_str [rad]", f"{m.theta_str:.9f}", ""),
        ("theta_com [rad]", f"{m.theta_com:.9f}", ""),
        ("q_str [left, right]", f"{m.q_str[0]:.9f}", f"{m.q_str[1]:.9f}"),
        ("q_com [left, right]", f"{m.q_com[0]:.9f}", f"{m.q_com[1]:.9f}"),
        ("tau_ex [s | us]", f"{tau:.9e}", f"{tau * 1e6:.6f}"),
    ]
    return rows


def _modes_json(pair: wells.WellPair) -> dict:
    m = wells.normal_modes(pair)
    two_pi = 2.0 * math.pi
    out = {}
    for name in ("omega_bar", "delta", "omega_ex", "omega_str", "omega_com", "splitting"):
        value = getattr(m, name)
        out[f"{name}_rad_s"] = value
        out[f"{name}_hz"] = value / two_pi
    out["theta_str_rad"] = m.theta_str
    out["theta_com_rad"] = m.theta_com
    out["q_str"] = list(m.q_str)
    out["q_com"] = list(m.q_com)
    out["tau_ex_s"] = wells.exchange_time(pair)
    return out


def cmd_modes(args) -> int:
    doc = config.load_document(args.config) if args.config else config.default_document("parity")
    pair = config.wells_from_document(doc)
    if args.json:
        print(_dumps(_modes_json(pair)))
    else:
        rows = _mode_rows(pair)
        width = max(len(r[0]) for r in rows)
        for label, a, b in rows:
            print(f"{label:<{width}}  {a:>16}  {b:>16}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "modes.csv")
        data = _modes_json(pair)
        keys = sorted(k for k, v in data.items() if not isinstance(v, list))
        lines = [",".join(keys), ",".join(format(data[k], ".12g") for k in keys)]
        _write_text(path, "\n".join(lines) + "\n")
        _write_manifest(args.out, {"modes.csv": path}, extra={"command": "modes"})
        print(f"wrote {path}")
    return 0


# --------------------------------------------------------------------------
# run
# --------------------------------------------------------------------------


def _dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _sanitize(value):
    """JSON-safe copy: numpy scalars to floats, non-finite to None."""
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        digest.update(fh.read())
    return digest.hexdigest()


def _write_manifest(out_dir: str, files: dict[str, str], extra: dict | None = None) -> str:
    manifest = {
        "versions": {
            "ioncoupler": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
        "files": {name: _sha256(path) for name, path in sorted(files.items())},
    }
    manifest.update(extra or {})
    path = os.path.join(out_dir, "manifest.json")
    _write_text(path, _dumps(manifest) + "\n")
    return path


def cmd_run(args) -> int:
    doc = config.load_document(args.config) if args.config else config.default_document(args.scenario)
    cfg = config.scenario_config(doc, args.scenario, seed=args.seed, shots=args.shots)
    os.makedirs(args.out, exist_ok=True)

    started = time.perf_counter()
    result = harness.run_scenario(cfg)
    elapsed = time.perf_counter() - started

    base = cfg.scenario
    files: dict[str, str] = {}
    csv_path = os.path.join(args.out, f"{base}.csv")
    _write_text(csv_path, result.to_csv())
    files[f"{base}.csv"] = csv_path

    sidecar_path = os.path.join(args.out, f"{base}.json")
    _write_text(sidecar_path, _dumps(config.resolved_document(cfg)) + "\n")
    files[f"{base}.json"] = sidecar_path

    if args.plot:
        from . import plots

        png_path = os.path.join(args.out, f"{base}.png")
        plots.render_scan(result, png_path)
        files[f"{base}.png"] = png_path

    manifest_path = _write_manifest(
        args.out,
        files,
        extra={
            "command": "run",
            "scenario": cfg.scenario,
            "seed": cfg.seed,
            "metrics": {
                "rows": int(result.rows.shape[0]),
                "shots_per_point": cfg.shots,
                "derived": _sanitize(result.meta),
            },
        },
    )
    files["manifest.json"] = manifest_path

    if args.json:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            print(fh.read(), end="")
    else:
        names = ", ".join(sorted(files))
        print(f"{cfg.scenario}: wrote {names} to {args.out} in {elapsed:.1f} s")
    return 0


def cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run_selftest(quick=args.quick)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "modes":
            return cmd_modes(args)
        if args.command == "run":
            return cmd_run(args)
        return cmd_selftest(args)
    except (ConfigError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return _ENGINE_EXIT
    except IonCouplerError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return _ENGINE_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
