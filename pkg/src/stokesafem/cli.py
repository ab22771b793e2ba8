"""Command-line experiment runner: ``afem run --config config.json``.

The JSON config uses hyphenated keys:

    domain            "square" or "l-shape"
    subdivisions      initial cells per unit edge (optional, default 4)
    scheme            taylor-hood | mini | stab-p1p0 | stab-p1p1
    alpha             weight exponent in (0, 2)
    sources           list of "x y Fx Fy" strings
    theta             marking factor (optional, default 0.5)
    max-iters         iteration bound (optional, default 25)
    ndof-cap          dof bound (optional, default 200000)
    exact             true to compare against the Stokeslet (single source)
    tau-div, tau-t, tau-s, ell   stabilization parameters (stab-* only)
    out-csv, dump-mesh, dump-indicators   output paths
"""

from __future__ import annotations

import argparse
import json
import sys

from .driver import RunConfig, plot_convergence, run_afem
from .elements import SchemeSpec, StabParams
from .mesh import DomainSpec


def _parse_sources(entries):
    sources = []
    for entry in entries:
        vals = [float(v) for v in str(entry).split()]
        if len(vals) != 4:
            raise ValueError("source %r is not 'x y Fx Fy'" % (entry,))
        sources.append(((vals[0], vals[1]), (vals[2], vals[3])))
    return tuple(sources)


def config_from_dict(raw: dict, overrides: dict | None = None) -> RunConfig:
    raw = dict(raw)
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    domain = DomainSpec(raw["domain"], int(raw.get("subdivisions", 4)))
    family = raw["scheme"]
    stab_keys = ("tau-div", "tau-t", "tau-s", "ell")
    if family.startswith("stab") and any(k in raw for k in stab_keys):
        defaults = SchemeSpec(family).stab
        scheme = SchemeSpec(family, StabParams(
            tau_div=float(raw.get("tau-div", defaults.tau_div)),
            tau_t=float(raw.get("tau-t", defaults.tau_t)),
            tau_s=float(raw.get("tau-s", defaults.tau_s)),
            ell=int(raw.get("ell", defaults.ell)),
        ))
    else:
        scheme = SchemeSpec(family)
    return RunConfig(
        domain=domain,
        scheme=scheme,
        alpha=float(raw["alpha"]),
        sources=_parse_sources(raw["sources"]),
        theta=float(raw.get("theta", 0.5)),
        max_iters=int(raw.get("max-iters", 25)),
        ndof_cap=int(raw.get("ndof-cap", 200_000)),
        exact=bool(raw.get("exact", False)),
        out_csv=raw.get("out-csv"),
        dump_mesh=raw.get("dump-mesh"),
        dump_indicators=raw.get("dump-indicators"),
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="afem",
        description="adaptive Stokes solver for point-force loads",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run the adaptive loop from a config")
    run_p.add_argument("--config", required=True, help="JSON config path")
    run_p.add_argument("--plot", help="write a log-log convergence SVG")
    run_p.add_argument("--out-csv", help="override the config's CSV path")
    run_p.add_argument("--dump-mesh", help="override the mesh dump path")
    run_p.add_argument("--dump-indicators",
                       help="override the indicator dump path")
    args = parser.parse_args(argv)

    with open(args.config) as fh:
        raw = json.load(fh)
    config = config_from_dict(raw, {
        "out-csv": args.out_csv,
        "dump-mesh": args.dump_mesh,
        "dump-indicators": args.dump_indicators,
    })
    table = run_afem(config)
    if args.plot:
        plot_convergence(table, args.plot)
    last = table.rows[-1]
    print("iterations %d  ndof %d  estimator %.6g"
          % (len(table.rows), last.ndof, last.estimator))
    if last.err_total is not None:
        print("err_u %.6g  err_p %.6g  err_total %.6g"
              % (last.err_u, last.err_p, last.err_total))
    return 0


if __name__ == "__main__":
    sys.exit(main())
