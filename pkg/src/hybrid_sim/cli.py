"""Command-line front end.

    hybrid-sim simulate CONFIG [--out DIR]
    hybrid-sim check-w CONFIG
    hybrid-sim scenario NAME [--set KEY=VALUE]... [--jobs N] [--variant V] [--out DIR]
    hybrid-sim list-scenarios

Exit codes: 0 success / pass / admissible, 1 failed scenario or
inadmissible W, 2 invalid configuration, 3 numerical-domain error.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import config as cfgmod
from . import experiments, io
from . import generator as gen
from . import potentials as pot
from .errors import ConfigurationError, NumericalDomainError
from .propagator import ehrenfest_residuals, evolve

logger = logging.getLogger("hybrid_sim")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def csv_columns(ts, cfg):
    """Recorded columns in output order; force columns only when asked for."""
    ev = cfg["evolve"]
    cols = [o.lower() for o in ev["observables"]]
    cols += [f"x2_minus_chi2^{k}" for k in range(1, ev["extras"]["moments"] + 1)]
    if ev["extras"]["forces"]:
        cols += sorted(c for c in ts.columns if c.startswith("force"))
    if ev["extras"]["energy"]:
        cols.append("energy")
    if ev["extras"]["norm"]:
        cols.append("norm")
    return cols


def summarize(ts, algebra):
    final = {name: float(np.asarray(col)[-1]) for name, col in ts.columns.items()}
    summary = {"final": final, "warnings": list(ts.warnings), "spec_hash": ts.metadata["spec_hash"],
               "n_records": len(ts.times)}
    if "norm" in ts.columns:
        summary["norm_drift"] = float(np.max(np.abs(ts["norm"] - ts["norm"][0])))
    try:
        res = ehrenfest_residuals(ts, algebra)
        summary["ehrenfest"] = {f"{kind}{j}": v for (kind, j), v in sorted(res.items())}
    except Exception as exc:  # too few points or missing columns; report instead of failing the run
        summary["ehrenfest"] = None
        summary["ehrenfest_note"] = str(exc)
    return summary


def cmd_simulate(args):
    cfg = cfgmod.normalize(cfgmod.load(args.config))
    if cfg["evolve"]["extras"]["moments"] and "x2" not in cfg["grid"]:
        raise ConfigurationError("x2 - chi2 moments need subsystem 2 on the grid", key="evolve.extras.moments")
    spec, grid, state, evolve_cfg = cfgmod.build_run(cfg)
    plan = gen.build_plan(spec, grid)
    ts = evolve(state, plan, evolve_cfg)
    out = args.out or cfg["output"]["dir"]
    csv_path = os.path.join(out, cfg["output"]["csv"])
    io.write_timeseries_csv(csv_path, ts, csv_columns(ts, cfg))
    summary = summarize(ts, spec.algebra)
    summary["config"] = cfg
    io.write_json(os.path.join(out, cfg["output"]["summary"]), summary)
    for w in ts.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_check_w(args):
    raw = cfgmod.load(args.config)
    cfgmod.validate(raw, cfgmod.CHECK_W_SCHEMA)
    algebra = cfgmod.build_algebra(raw["algebra"])
    w = cfgmod.build_w(raw.get("W"))
    bounds = raw.get("bounds", ((-10.0, 10.0),) * 4)
    verdict = pot.admissible_projection_exists(w, algebra, bounds, n_points=raw.get("n_points", 64))
    if verdict:
        print(f"admissible: max residual {verdict.residual:.6g}")
        return EXIT_OK
    print(f"inadmissible: max residual {verdict.residual:.6g} at {verdict.witness}")
    return EXIT_FAIL


def parse_override(text):
    if "=" not in text:
        raise ConfigurationError(f"override {text!r} is not KEY=VALUE", key="set")
    key, value = text.split("=", 1)
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    if isinstance(parsed, list):
        parsed = tuple(tuple(v) if isinstance(v, list) else v for v in parsed)
    return key.strip(), parsed


def job_count(requested):
    cap = os.environ.get("HYBRID_SIM_THREADS")
    if cap:
        try:
            return max(1, min(requested, int(cap)))
        except ValueError:
            raise ConfigurationError("HYBRID_SIM_THREADS must be an integer", key="HYBRID_SIM_THREADS") from None
    return max(1, requested)


def cmd_scenario(args):
    overrides = dict(parse_override(s) for s in args.set or ())
    report = experiments.run_scenario(args.name, overrides, jobs=job_count(args.jobs), variant=args.variant)
    out = os.path.join(args.out, args.name)
    for name, ts in report.artifacts.items():
        io.write_timeseries_csv(os.path.join(out, f"{name}.csv"), ts)
    payload = report.to_dict()
    payload["overrides"] = {k: overrides[k] for k in sorted(overrides)}
    io.write_json(os.path.join(out, "report.json"), payload)
    print(f"{report.scenario}: {report.verdict} ({report.runtime_s:.1f}s)")
    for c in report.checks:
        value = report.metrics.get(c.metric)
        mark = "ok  " if c.holds(value) else "FAIL"
        print(f"  {mark} {c.metric} = {value:.4g} (need {c.op} {c.threshold:g})")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_list(args):
    for name in sorted(experiments.SCENARIOS):
        fn = experiments.SCENARIOS[name]
        if name == "decoupling":
            fn = experiments.run_decoupling_suite
        doc = (fn.__doc__ or "").strip().splitlines()
        print(f"{name:16s} {doc[0] if doc else ''}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="hybrid-sim", description="Interpolating classical/quantum dynamics")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="evolve one configured run")
    s.add_argument("config")
    s.add_argument("--out", help="output directory (default: the config's output.dir)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("check-w", help="decide admissibility of an interaction potential")
    s.add_argument("config")
    s.set_defaults(func=cmd_check_w)

    s = sub.add_parser("scenario", help="run a named scenario")
    s.add_argument("name")
    s.add_argument("--set", action="append", metavar="KEY=VALUE")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--variant")
    s.add_argument("--out", default="scenario-output")
    s.set_defaults(func=cmd_scenario)

    s = sub.add_parser("list-scenarios", help="print the scenario registry")
    s.set_defaults(func=cmd_list)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except NumericalDomainError as exc:
        _err(str(exc))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
