"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__, bounds, oracle
from .config import ConfigError, OutputSection, json_schema, load_config
from .exceptions import ContractError, DimensionError
from .optimizer import BoundKind, verify_single_carrier_dominance
from .sensor import couplings
from .sweep import carrier_configs, emit, report_optimum, run_sweep, sensor_params, sweep_grid

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcqlimits", description="Quantum limits of multi-carrier interferometers.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="evaluate the configured bounds over the frequency sweep")
    s.add_argument("config")
    s.add_argument("--output", help="output file (default: config value, else stdout)")
    s.add_argument("--format", choices=["csv", "json-lines"])
    s.add_argument("--convention", choices=["variance", "psd", "amplitude"])

    o = sub.add_parser("optimum", help="optimal coupling and power at one frequency")
    o.add_argument("config")
    o.add_argument("--omega", type=float, help="sideband angular frequency in rad/s (default: config 'omega')")
    o.add_argument("--json", action="store_true", help="print a JSON object instead of key = value lines")
    o.add_argument("--no-verify", action="store_true", help="skip the dominance grid search")

    v = sub.add_parser("verify", help="cross-check closed forms against the state-level calculation")
    v.add_argument("config")
    v.add_argument("--points", type=int, default=5, help="sweep frequencies to check (default 5)")
    v.add_argument("--rtol", type=float, default=1e-9)

    sub.add_parser("schema", help="print the config JSON schema")
    return p


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    spec = config.output.model_copy(update={k: val for k, val in
                                            (("path", args.output), ("format", args.format),
                                             ("convention", args.convention)) if val is not None})
    rows = run_sweep(config, spec.convention)
    emit(rows, OutputSection(**spec.model_dump()))
    flagged = [r for r in rows if r.diagnostic]
    for r in flagged:
        print(f"warning: omega={r.omega:.6g}: {r.diagnostic}", file=sys.stderr)
    if len(flagged) == len(rows):
        print("error: every sweep point failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_optimum(args) -> int:
    config = load_config(args.config)
    summary = report_optimum(config, args.omega, verify=not args.no_verify)
    if args.json:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return str(x)
            return x
        payload = {k: clean(v) for k, v in summary.entries.items()}
        payload["notes"] = summary.notes
        print(json.dumps(payload, indent=2))
    else:
        sys.stdout.write(summary.text())
    failed = [k for k, v in summary.entries.items() if k.endswith("dominance") and v == "FAIL"]
    return EXIT_NUMERIC if failed else EXIT_OK


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def _cmd_verify(args) -> int:
    config = load_config(args.config)
    carriers = carrier_configs(config)
    grid = sweep_grid(config)
    picks = grid[np.unique(np.linspace(0, grid.size - 1, max(1, args.points)).round().astype(int))]
    eta = config.sensor.eta
    r = np.array([c.r for c in carriers])
    phi = np.array([c.phi for c in carriers])
    thetas = np.array([c.theta for c in carriers])
    ok = True
    for w in picks:
        cs = couplings(carriers, sensor_params(config, float(w)), config.coupling_model)
        q_closed = bounds.qcrb_general(cs.kappas, r, phi, eta, h_sql=cs.h_sql, chi=cs.chi).variance_bound
        q_oracle = 1 / oracle.qfi_numeric(cs.kappas, r, phi, eta, betas=cs.betas, chi=cs.chi, h_sql=cs.h_sql)
        h_closed = bounds.crb_homodyne_general(cs.kappas, r, phi, thetas, eta, h_sql=cs.h_sql,
                                               chi=cs.chi).variance_bound
        h_oracle = 1 / oracle.homodyne_cfi_numeric(cs.kappas, r, phi, thetas, eta, chi=cs.chi, h_sql=cs.h_sql)
        for name, a, b in (("qcrb", q_oracle, q_closed), ("homodyne", h_oracle, h_closed)):
            err = _rel(a, b)
            good = err < args.rtol
            ok &= good
            print(f"{'PASS' if good else 'FAIL'} {name} omega={w:.6g} rel_err={err:.3e}")
    if len(carriers) <= 4:
        for kind in BoundKind:
            dom = verify_single_carrier_dominance(kind, r, phi, eta, thetas if kind is BoundKind.HOMODYNE else None,
                                                  n_random=2000)
            if dom.passed is None:
                print(f"SKIP dominance {kind.value}: shot-noise regime, no finite optimum")
                continue
            ok &= dom.passed
            print(f"{'PASS' if dom.passed else 'FAIL'} dominance {kind.value} margin={dom.margin:.3e}")
    else:
        print("SKIP dominance: more than four carriers")
    return EXIT_OK if ok else EXIT_NUMERIC


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "schema":
            print(json.dumps(json_schema(), indent=2))
            return EXIT_OK
        handler = {"sweep": _cmd_sweep, "optimum": _cmd_optimum, "verify": _cmd_verify}[args.command]
        return handler(args)
    except (ConfigError, ContractError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
