"""Command-line front end.

Usage:
    instanton1d analyze --config cfg.json [--out report.json]
    instanton1d overlaps --config cfg.json --tau-max 40 --samples 200
    instanton1d sweep --config cfg.json --parameter lambda --values 0.2,0.25
    instanton1d oracle --config cfg.json [--format csv]
    instanton1d gy --config cfg.json [--window 30]
    instanton1d print-config

Configs are single JSON documents; `print-config` shows every default.
Exit codes: 0 ok, 1 numeric failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, Instanton1DError
from .pipeline import (AnalysisConfig, analyze, analyze_pairs, build_potential,
                       default_config_dict, overlap_series, sweep)

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2


def _load_config(path: str | None) -> AnalysisConfig:
    if path is None:
        raise ConfigError("--config PATH is required for this command")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return AnalysisConfig.from_dict(doc)


def _emit(payload, args, csv_columns=None) -> None:
    fmt = getattr(args, "format", "json")
    if fmt == "csv":
        if not isinstance(payload, list):
            raise ConfigError("csv format is only available for tabular output")
        cols = csv_columns or list(payload[0].keys())
        lines = [",".join(cols)]
        for row in payload:
            lines.append(",".join(_csv_cell(row.get(c)) for c in cols))
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        if not args.quiet:
            print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def cmd_analyze(args) -> int:
    config = _load_config(args.config)
    report = analyze(config)
    _emit(report, args)
    return EXIT_OK


def cmd_overlaps(args) -> int:
    config = _load_config(args.config)
    rows = overlap_series(config, args.tau_max, args.samples)
    _emit(rows, args, csv_columns=["tau", "odd", "even",
                                   "oracle_odd", "oracle_even"])
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load_config(args.config)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values list: {exc}") from exc
    if not values:
        raise ConfigError("--values must contain at least one number")
    rows = sweep(config, args.parameter, values)
    _emit(rows, args, csv_columns=["parameter", "value", "action_over_hbar",
                                   "predicted_gap", "oracle_gap",
                                   "relative_error", "status"])
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import diagonalize_schrodinger, default_grid, \
        endpoint_wavefunction_values
    from .potential import find_wells

    config = _load_config(args.config)
    model = build_potential(config.potential)
    wells = find_wells(model, level_tol=config.tolerances["level_tol"],
                       hbar=config.hbar)
    model = model.with_zero_level(wells)
    wells = find_wells(model, level_tol=config.tolerances["level_tol"],
                       hbar=config.hbar)
    grid = default_grid(model, wells, hbar=config.hbar,
                        n_points=int(config.grid.get("n_points", 8192)))
    res = diagonalize_schrodinger(model, grid, config.n_levels or len(wells))
    if getattr(args, "format", "json") == "csv":
        rows = [
            {"x": float(x), **{f"psi{k}": float(w[i])
                               for k, w in enumerate(res.wavefunctions)}}
            for i, x in enumerate(res.x)
        ]
        _emit(rows, args)
    else:
        _emit({
            "energies": res.energies,
            "error_estimates": res.error_estimates,
            "endpoint_wavefunction_values": endpoint_wavefunction_values(
                res, [w.position for w in wells]),
        }, args)
    return EXIT_OK


def cmd_gy(args) -> int:
    config = _load_config(args.config)
    if args.window is not None:
        config = AnalysisConfig(
            potential=config.potential, hbar=config.hbar, window=args.window,
            grid=config.grid, tolerances=config.tolerances,
            degeneracy=config.degeneracy, n_levels=config.n_levels)
    _, _, pair_results = analyze_pairs(config)
    _emit([{"pair": j, **res.gy.as_dict()}
           for j, res in enumerate(pair_results)], args)
    return EXIT_OK


def cmd_print_config(args) -> int:
    _emit(default_config_dict(), args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="instanton1d",
        description="Multi-instanton analysis of 1D same-level multi-well "
                    "potentials (config format: a single JSON document; see "
                    "print-config for all defaults).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="path to a JSON config document")
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("analyze", help="full pipeline -> JSON report")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("overlaps", help="overlap time series -> CSV/JSON")
    common(p)
    p.add_argument("--tau-max", type=float, default=40.0)
    p.add_argument("--samples", type=int, default=201)
    p.set_defaults(func=cmd_overlaps)

    p = sub.add_parser("sweep", help="parameter sweep of splitting accuracy")
    common(p)
    p.add_argument("--parameter", default="lambda")
    p.add_argument("--values", required=True,
                   help="comma-separated parameter values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="grid diagonalization only")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gy", help="Gelfand-Yaglom determinant pieces per pair")
    common(p)
    p.add_argument("--window", type=float, default=None)
    p.set_defaults(func=cmd_gy)

    p = sub.add_parser("print-config", help="show the default config document")
    common(p)
    p.set_defaults(func=cmd_print_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        json.dump({"error": "config", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_USAGE
    except Instanton1DError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
