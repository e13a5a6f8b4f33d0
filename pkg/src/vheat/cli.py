"""Command-line front end.

Subcommands:

    vheat validate <config>
    vheat steady   <config> [--initial NAME] [--json]
    vheat thermo   <config> [--json]
    vheat sweep    <config> --axis NAME --values LIST --out FILE.csv
    vheat optimize <config> --omega-min X --omega-max Y
                   [--lambda-min X --lambda-max Y] [--json]
    vheat figure   {fig2b,fig2c,fig3} <config> --out FILE.csv

The config grammar lives in `configfile`.  Machine-readable output goes to
standard output (or the --out file); all error text goes to standard
error.  Exit codes: 0 success, 1 configuration/validation failure,
2 numerical failure (residual diagnostics on standard error).

Outputs carry no timestamps or environment state, so identical
invocations produce byte-identical bytes.  CSV files start with a
`#`-prefixed metadata header that echoes the config file.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from .configfile import load_config
from .model import (
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    MachineConfig,
    VheatError,
    validate_config,
)
from .steady import effective_inverse_temperature
from .sweep import (
    FIGURE_KINDS,
    SWEEP_AXES,
    figure_datasets,
    maximize_power,
    state_coordinates,
    sweep_grid,
)
from .thermo import ThermoReport, thermo_report

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2


class _Parser(argparse.ArgumentParser):
    """argparse maps usage errors to exit code 2; here 2 means a numerical
    failure, so usage errors are remapped onto the validation exit code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vheat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_validate = sub.add_parser("validate", help="check a config file and exit")
    p_validate.add_argument("config")
    p_validate.set_defaults(func=_cmd_validate)

    p_steady = sub.add_parser("steady", help="steady-state populations and coherence")
    p_steady.add_argument("config")
    p_steady.add_argument("--initial", default=None, metavar="NAME",
                          help="override initial.state from the config")
    p_steady.add_argument("--json", action="store_true")
    p_steady.set_defaults(func=_cmd_steady)

    p_thermo = sub.add_parser("thermo", help="steady-state heat currents and power")
    p_thermo.add_argument("config")
    p_thermo.add_argument("--json", action="store_true")
    p_thermo.set_defaults(func=_cmd_thermo)

    p_sweep = sub.add_parser("sweep", help="scan one parameter, write a CSV table")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True, metavar="LIST",
                         help="comma-separated numbers")
    p_sweep.add_argument("--out", required=True, metavar="FILE.csv")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_opt = sub.add_parser("optimize", help="maximize |W_dot| over the modulation rate")
    p_opt.add_argument("config")
    p_opt.add_argument("--omega-min", required=True, type=float)
    p_opt.add_argument("--omega-max", required=True, type=float)
    p_opt.add_argument("--lambda-min", type=float, default=None)
    p_opt.add_argument("--lambda-max", type=float, default=None)
    p_opt.add_argument("--json", action="store_true")
    p_opt.set_defaults(func=_cmd_optimize)

    p_fig = sub.add_parser("figure", help="emit a standard figure dataset as CSV")
    p_fig.add_argument("kind", choices=FIGURE_KINDS)
    p_fig.add_argument("config")
    p_fig.add_argument("--out", required=True, metavar="FILE.csv")
    p_fig.set_defaults(func=_cmd_figure)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConvergenceError, ConsistencyError) as exc:
        print(f"vheat: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except VheatError as exc:
        print(f"vheat: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"vheat: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _load(path: str, initial: str | None = None) -> MachineConfig:
    cfg = load_config(path)
    if initial is not None:
        cfg = cfg.with_updates(initial_state=initial)
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    return cfg


def _config_echo(path: str) -> list[str]:
    lines = [f"config: {path}"]
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh.read().splitlines():
            line = raw.rstrip()
            if line.strip():
                lines.append(f"  {line}")
    return lines


def _emit_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _emit_pairs(pairs: list[tuple[str, object]]) -> None:
    for key, value in pairs:
        if value is None:
            sys.stdout.write(f"{key}=\n")
        elif isinstance(value, float):
            sys.stdout.write(f"{key}={value!r}\n")
        else:
            sys.stdout.write(f"{key}={value}\n")


def _report_scalars(report: ThermoReport) -> dict[str, object]:
    return {
        "J_cold": report.J_cold,
        "J_hot": report.J_hot,
        "W_dot": report.W_dot,
        "efficiency": report.efficiency,
        "entropy_production": report.entropy_production,
        "mode": report.mode,
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    problems = validate_config(cfg)
    if problems:
        for msg in problems:
            print(f"vheat: invalid: {msg}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write("ok\n")
    return EXIT_OK


def _cmd_steady(args: argparse.Namespace) -> int:
    cfg = _load(args.config, initial=args.initial)
    report = thermo_report(cfg)
    rho = report.steady_state
    coords = state_coordinates(rho)
    populations = [float(np.real(rho.entries[k, k])) for k in range(rho.n)]
    payload: dict[str, object] = dict(coords)
    payload["populations"] = populations
    payload["beta_eff"] = effective_inverse_temperature(cfg)
    payload["W_dot"] = report.W_dot
    payload["mode"] = report.mode
    if args.json:
        _emit_json(payload)
    else:
        pairs = [(k, payload[k]) for k in ("rho00", "rho_bb", "rho_dd", "abs_rho21")]
        pairs.append(("populations", ",".join(repr(p) for p in populations)))
        pairs.extend((k, payload[k]) for k in ("beta_eff", "W_dot", "mode"))
        _emit_pairs(pairs)
    return EXIT_OK


def _cmd_thermo(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    report = thermo_report(cfg)
    scalars = _report_scalars(report)
    currents = {
        f"{bath_id}:{q}": value
        for (bath_id, q), value in sorted(report.subbath_currents.items())
    }
    if args.json:
        rho = report.steady_state.entries
        payload: dict[str, object] = {
            "steady_state": {
                "real": [[float(v) for v in row] for row in rho.real],
                "imag": [[float(v) for v in row] for row in rho.imag],
            },
            "subbath_currents": currents,
        }
        payload.update(scalars)
        _emit_json(payload)
    else:
        pairs: list[tuple[str, object]] = [
            (f"J[{key}]", value) for key, value in currents.items()
        ]
        pairs.extend(scalars.items())
        _emit_pairs(pairs)
    return EXIT_OK


def _parse_values(raw: str) -> list[float]:
    values = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(float(item))
        except ValueError as exc:
            raise ConfigError(f"--values entries must be numbers, got {item!r}") from exc
    return values


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    values = _parse_values(args.values)
    meta = _config_echo(args.config)
    table = sweep_grid(cfg, args.axis, values, metadata=meta)
    table.write_csv(args.out)
    sys.stdout.write(f"wrote {args.out} ({len(table.rows)} rows)\n")
    return EXIT_OK


def _cmd_optimize(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    if (args.lambda_min is None) != (args.lambda_max is None):
        raise ConfigError("--lambda-min and --lambda-max must be given together")
    lambda_bounds = None
    if args.lambda_min is not None:
        lambda_bounds = (args.lambda_min, args.lambda_max)
    best = maximize_power(cfg, (args.omega_min, args.omega_max), lambda_bounds)
    if best is None:
        if args.json:
            _emit_json({"found": False})
        else:
            sys.stdout.write("no engine-mode point within bounds\n")
        return EXIT_OK
    payload: dict[str, object] = {
        "found": True,
        "Omega": best.Omega,
        "lambda": best.lam,
        "W_dot": best.W_dot,
        "certified": best.certified,
    }
    payload.update(_report_scalars(best.report))
    if args.json:
        _emit_json(payload)
    else:
        _emit_pairs(list(payload.items()))
    return EXIT_OK


def _cmd_figure(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    meta = _config_echo(args.config)
    table = figure_datasets(args.kind, cfg, metadata=meta)
    table.write_csv(args.out)
    sys.stdout.write(f"wrote {args.out} ({len(table.rows)} rows)\n")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
