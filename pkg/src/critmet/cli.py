"""Command-line front end.

Settings are merged in the order built-in defaults, INI config file
(``--config``), then explicit flags. Recognised config keys::

    [params]  omega_c, omega_a, g, xi, kappa
    [scan]    model, state, subset, grid, g_min, g_max, n_points, slope, dump_qfim, output
    [table1]  gamma, slope, fixed_xi, output

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys

import numpy as np

from .errors import ConfigError, DomainError, NumericError
from .gs_qfim import gs_qfim
from .metrology import scalar_bound, sloppiness
from .models import Model, ModelParams, as_model, critical_coupling, in_normal_phase, k_max, triple_point
from .scan import DEFAULT_POINTS, DEFAULT_RANGE, ScanConfig, rows_to_csv, run_scan, run_table1
from .ss_qfim import ss_qfim

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

PARAM_KEYS = ("omega_c", "omega_a", "g", "xi", "kappa")
PARAM_DEFAULTS = {"omega_c": 1.0, "omega_a": 0.7, "g": 0.0, "xi": 0.0, "kappa": 0.0}
SCAN_DEFAULTS = {"model": "dm", "state": "gs", "subset": "1,2", "grid": "fixed-xi",
                 "g_min": DEFAULT_RANGE[0], "g_max": DEFAULT_RANGE[1], "n_points": DEFAULT_POINTS,
                 "slope": 1.0, "dump_qfim": False, "output": None}
TABLE_DEFAULTS = {"gamma": 0.1, "slope": 1.0, "fixed_xi": 0.4, "output": None}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parse_subset(text) -> tuple[int, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(int(i) for i in text)
    try:
        return tuple(int(tok) for tok in str(text).replace(" ", "").split(",") if tok)
    except ValueError:
        raise ConfigError(f"subset must be comma-separated indices, got {text!r}") from None


def _parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _read_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path is None:
        return cp
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from None
    known = {"params": PARAM_KEYS, "scan": tuple(SCAN_DEFAULTS), "table1": tuple(TABLE_DEFAULTS)}
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in known[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    return cp


def _merged(args, cp, section: str, defaults: dict) -> dict:
    out = dict(defaults)
    if cp.has_section(section):
        out.update(dict(cp[section]))
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def _float(values: dict, key: str) -> float:
    try:
        return float(values[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {values[key]!r}") from None


def _params(args, cp) -> ModelParams:
    values = _merged(args, cp, "params", PARAM_DEFAULTS)
    try:
        return ModelParams(**{k: _float(values, k) for k in PARAM_KEYS})
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _add_param_flags(p):
    g = p.add_argument_group("physical parameters")
    g.add_argument("--omega-c", dest="omega_c", type=float, help="cavity frequency (default 1)")
    g.add_argument("--omega-a", dest="omega_a", type=float, help="atomic frequency (default 0.7)")
    g.add_argument("--g", type=float, help="light-matter coupling (default 0)")
    g.add_argument("--xi", type=float, help="photon hopping, dimer only (default 0)")
    g.add_argument("--kappa", type=float, help="photon loss rate (default 0)")


def _add_point_flags(p):
    _add_param_flags(p)
    p.add_argument("--model", choices=["dm", "dd"], default="dm")
    p.add_argument("--subset", default=None, help="comma-separated parameter indices "
                   "(1 omega_c, 2 g, 3 omega_a, 4 xi, 5 kappa)")
    p.add_argument("--g-over-gc", dest="g_over_gc", type=float,
                   help="set g as this fraction of the critical coupling (overrides --g)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="critmet", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="INI config file; flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, text in (("gs-qfim", "ground-state QFIM at one point"),
                       ("ss-qfim", "steady-state QFIM at one point")):
        p = sub.add_parser(name, help=text)
        _add_point_flags(p)

    p = sub.add_parser("scan", help="QFIM diagnostics along an approach to criticality (CSV)")
    _add_param_flags(p)
    p.add_argument("--model", choices=["dm", "dd"])
    p.add_argument("--state", choices=["gs", "ss"])
    p.add_argument("--subset")
    p.add_argument("--grid", choices=["fixed-xi", "trajectory"])
    p.add_argument("--g-min", dest="g_min", type=float, help="smallest g/g_ref (default 0.9)")
    p.add_argument("--g-max", dest="g_max", type=float, help="largest g/g_ref (default 1-1e-5)")
    p.add_argument("--n-points", dest="n_points", type=int, help="grid size (default 60)")
    p.add_argument("--slope", type=float, help="trajectory slope k (default 1)")
    p.add_argument("--dump-qfim", dest="dump_qfim", action="store_const", const=True,
                   help="append QFIM entries to each row")
    p.add_argument("--output", "-o", help="CSV path (default stdout)")

    p = sub.add_parser("table1", help="time-normalised scaling class for every subset and strategy")
    _add_param_flags(p)
    p.add_argument("--gamma", type=float, help="adiabatic sweep constant (default 0.1)")
    p.add_argument("--slope", type=float, help="trajectory slope k (default 1)")
    p.add_argument("--fixed-xi", dest="fixed_xi", type=float,
                   help="hopping for the fixed-xi dimer columns (default 0.4)")
    p.add_argument("--output", "-o", help="text path (default stdout)")

    p = sub.add_parser("resources", help="critical couplings and preparation times")
    _add_point_flags(p)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--slope", type=float, default=None, help="trajectory slope for the dimer")

    p = sub.add_parser("oracle-check", help="compare the closed-form QFIM with independent oracles")
    _add_point_flags(p)
    p.add_argument("--state", choices=["gs", "ss"], default="gs")
    p.add_argument("--fock", action="store_true", help="include the Fock-truncation oracle (single cavity)")
    p.add_argument("--rtol", type=float, default=1e-3)
    return parser


def _point(args, cp, dissipative: bool) -> tuple[ModelParams, Model, tuple[int, ...]]:
    params = _params(args, cp)
    model = as_model(args.model)
    if args.g_over_gc is not None:
        params = params.replace(g=args.g_over_gc * critical_coupling(params, model, dissipative))
    default = (1, 2, 3) + ((4,) if model is Model.DD else ()) + ((5,) if dissipative else ())
    subset = _parse_subset(args.subset) if args.subset else default
    return params, model, subset


def _matrix_json(Q) -> dict:
    report = sloppiness(Q)
    out = {"subset": list(Q.subset), "qfim": Q.entries.tolist(),
           "normalized_determinant": report.normalized_determinant,
           "rank": report.numerical_rank, "sloppy": report.is_sloppy}
    out["C_S"] = None if report.numerical_rank < Q.dim else scalar_bound(Q, check=False).value
    return out


def _cmd_qfim(args, cp, out) -> int:
    dissipative = args.command == "ss-qfim"
    params, model, subset = _point(args, cp, dissipative)
    Q = ss_qfim(params, model, subset) if dissipative else gs_qfim(params, model, subset)
    json.dump(_matrix_json(Q), out, indent=2)
    out.write("\n")
    return EXIT_OK


def _cmd_scan(args, cp, out) -> int:
    values = _merged(args, cp, "scan", SCAN_DEFAULTS)
    config = ScanConfig(
        model=values["model"], state=values["state"], params=_params(args, cp),
        subset=_parse_subset(values["subset"]), grid=values["grid"],
        g_range=(_float(values, "g_min"), _float(values, "g_max")),
        n_points=int(_float(values, "n_points")), slope=_float(values, "slope"),
        dump_qfim=_parse_bool(values["dump_qfim"]), output=values["output"] or None)
    rows = run_scan(config)
    if not config.output:
        out.write(rows_to_csv(rows))
    return EXIT_OK


def _cmd_table1(args, cp, out) -> int:
    values = _merged(args, cp, "table1", TABLE_DEFAULTS)
    base = _params(args, cp)
    if base.kappa == 0 and args.kappa is None and not cp.has_option("params", "kappa"):
        base = base.replace(kappa=0.1)
    table = run_table1(base, gamma=_float(values, "gamma"), slope=_float(values, "slope"),
                       fixed_xi=_float(values, "fixed_xi"), output=values["output"] or None)
    if not values["output"]:
        out.write(table.to_text())
    return EXIT_OK


def _cmd_resources(args, cp, out) -> int:
    from .resources import adiabatic_time, relaxation_time

    params, model, _ = _point(args, cp, dissipative=False)
    report = {"g_c_closed": critical_coupling(params, model),
              "in_normal_phase_closed": in_normal_phase(params, model, False)}
    if model is Model.DD:
        report["triple_point_closed"] = list(triple_point(params))
        report["k_max_closed"] = k_max(params)
    if params.g > 0 and report["in_normal_phase_closed"]:
        report["adiabatic_time"] = adiabatic_time(params, model, args.gamma, args.slope).value
    if params.kappa > 0:
        report["g_c_dissipative"] = critical_coupling(params, model, True)
        if model is Model.DD:
            report["triple_point_dissipative"] = list(triple_point(params, True))
            report["k_max_dissipative"] = k_max(params, True)
        if params.g > 0 and in_normal_phase(params, model, True):
            report["relaxation_time"] = relaxation_time(params, model, args.slope).value
    json.dump(report, out, indent=2)
    out.write("\n")
    return EXIT_OK


def _cmd_oracle(args, cp, out) -> int:
    from .oracles import fidelity_qfim_oracle, fock_ground_state_qfi, gs_covariance_direct
    from .ss_qfim import steady_state

    dissipative = args.state == "ss"
    params, model, subset = _point(args, cp, dissipative)
    if dissipative:
        closed = ss_qfim(params, model, subset).entries
        oracle = fidelity_qfim_oracle(lambda p: steady_state(p, model), params, subset).entries
    else:
        closed = gs_qfim(params, model, subset).entries
        oracle = fidelity_qfim_oracle(lambda p: gs_covariance_direct(p, model), params, subset,
                                      pure=True).entries
    scale = np.abs(closed).max()
    report = {"subset": list(subset), "closed_form": closed.tolist(),
              "fidelity_oracle_rel_err": float(np.abs(oracle - closed).max() / scale)}
    if args.fock:
        if dissipative or model is not Model.DM:
            raise ConfigError("the Fock oracle covers the closed single cavity only")
        fock = fock_ground_state_qfi(params, subset).entries
        report["fock_oracle_rel_err"] = float(np.abs(fock - closed).max() / scale)
    report["agree"] = all(v <= args.rtol for k, v in report.items() if k.endswith("rel_err"))
    json.dump(report, out, indent=2)
    out.write("\n")
    return EXIT_OK if report["agree"] else EXIT_NUMERIC


COMMANDS = {"gs-qfim": _cmd_qfim, "ss-qfim": _cmd_qfim, "scan": _cmd_scan, "table1": _cmd_table1,
            "resources": _cmd_resources, "oracle-check": _cmd_oracle}


def main(argv=None, out=None) -> int:
    """Entry point; returns the process exit code."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cp = _read_config(args.config)
        return COMMANDS[args.command](args, cp, out)
    except (ConfigError, DomainError) as exc:
        print(f"critmet: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"critmet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
