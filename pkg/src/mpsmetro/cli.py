"""Command-line front end: ``mpsmetro {optimize,sweep,min-bond-dim,validate}``.

Exit codes: 0 on success, 1 on usage or input errors, 2 when validation
fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .errors import CapabilityError, DomainError, OptimizationFailed
from .mps import complementary_ordering, to_text
from .optimize import (
    GAUGES,
    ObjectiveSpec,
    OptimizerOptions,
    minimal_bond_dimension,
    optimize_direct,
    optimize_mps,
    relative_gap,
)
from .qfi import ORACLE_MAX_N, exact_qfi, precision_from_qfi
from .sweep import SweepSpec, format_records, parse_config, run_sweep
from .validation import run_checks

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}")


def _str_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _add_optimizer_flags(p, sweep=False):
    d = None if sweep else argparse.SUPPRESS
    p.add_argument("--gauge", choices=GAUGES, default=None)
    p.add_argument("--starts", type=int, default=d, help="random starts per point (default 16)")
    p.add_argument("--seed", type=int, default=d, help="global seed (default 0)")
    p.add_argument("--tol", type=float, default=d, help="relative convergence tolerance")
    p.add_argument("--method", choices=("gradient", "simplex"), default=d,
                   help="local search for MPS parameters")


def _options(args, base=None):
    base = base or OptimizerOptions()
    updates = {}
    for flag, name in (("starts", "starts"), ("seed", "seed"), ("tol", "rel_tol"), ("method", "method")):
        value = getattr(args, flag, None)
        if value is not None:
            updates[name] = value
    return replace(base, **updates)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mpsmetro", description="Optimal input states for lossy phase estimation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="optimize a single (N, D, eta) point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=2, help="bond dimension; 0 runs the direct optimizer")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--objective", choices=("qfi", "ramsey"), default="qfi")
    p.add_argument("--oracle", choices=("on", "off"), default="off",
                   help=f"exact-QFI cross-check of the result (N <= {ORACLE_MAX_N})")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None, help="also write the MPS record to this path")
    _add_optimizer_flags(p)

    p = sub.add_parser("sweep", help="grid over N, D, eta and objectives")
    p.add_argument("--config", default=None, help="key = value file; flags override it")
    p.add_argument("--n", type=_int_list, default=None)
    p.add_argument("--d", type=_int_list, default=None)
    p.add_argument("--eta", type=_float_list, default=None)
    p.add_argument("--objective", type=_str_list, default=None)
    p.add_argument("--direct", action="store_true", default=None,
                   help="add a direct-optimization record (D=0) per (N, eta, objective)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--dump-states", action="store_true", default=None,
                   help="write MPS records to <out>.states")
    p.add_argument("--no-timing", action="store_true",
                   help="write 0.0 for wall_time_s so repeated runs are byte-identical")
    _add_optimizer_flags(p, sweep=True)

    p = sub.add_parser("min-bond-dim", help="smallest D within a threshold of the direct optimum")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--objective", choices=("qfi", "ramsey"), default="qfi")
    p.add_argument("--threshold", type=float, default=0.01)
    p.add_argument("--d-cap", type=int, default=12)
    _add_optimizer_flags(p)

    p = sub.add_parser("validate", help="run the invariant checks")
    p.add_argument("--check", action="append", default=None, help="run only the named check")
    return parser


def _cmd_optimize(args, out):
    objective = ObjectiveSpec(args.objective, args.eta, args.gauge)
    opts = _options(args)
    if args.d < 0:
        raise UsageError("--d must be >= 0")
    if args.d == 0:
        res = optimize_direct(args.n, objective, opts)
    else:
        res = optimize_mps(args.n, args.d, objective, opts)
    report = {
        "N": args.n,
        "D": args.d,
        "eta": objective.eta,
        "objective": objective.short_name,
        "gauge": objective.gauge,
        "objective_value": res.objective_value,
        "delta_phi": res.delta_phi,
        "converged": res.converged,
        "iterations": res.iterations,
        "seed": opts.seed,
    }
    if res.certificate is not None:
        report["qfi_upper_bound"] = res.certificate
    if args.oracle == "on":
        try:
            F = exact_qfi(res.state, objective.eta)
            report["exact_qfi"] = F
            report["exact_delta_phi"] = precision_from_qfi(F)
            if objective.kind == "approx_qfi_max":
                report["approx_minus_exact"] = res.objective_value - F
        except CapabilityError as exc:
            report["exact_qfi"] = f"skipped ({exc})"
    if args.d > 0:
        if objective.kind == "approx_qfi_max" and args.d > 1:
            order = complementary_ordering(res.best_params)
            report["complementary_ordering"] = order["complementary"]
        report["mps"] = to_text(res.best_params)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(report["mps"])
    if args.format == "json":
        out.write(json.dumps(report, indent=2) + "\n")
    else:
        for key, value in report.items():
            if key == "mps":
                out.write("mps:\n" + value)
            else:
                out.write(f"{key} = {_fmt(value)}\n")
    return EXIT_OK


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sweep_spec(args):
    if args.config:
        with open(args.config) as fh:
            spec = parse_config(fh.read())
    else:
        if args.n is None or args.d is None or args.eta is None:
            raise UsageError("sweep needs --config or all of --n, --d, --eta")
        spec = SweepSpec(args.n, args.d, args.eta)
    updates = {}
    for flag, field in (("n", "n_list"), ("d", "d_list"), ("eta", "eta_list"), ("objective", "objectives"),
                        ("direct", "direct"), ("workers", "workers"), ("out", "out"),
                        ("format", "format"), ("dump_states", "dump_states"), ("gauge", "gauge")):
        value = getattr(args, flag)
        if value is not None:
            updates[field] = value
    if args.no_timing:
        updates["timing"] = False
    updates["options"] = _options(args, spec.options)
    return replace(spec, **updates)


def _cmd_sweep(args, out):
    spec = _sweep_spec(args)
    records = run_sweep(spec)
    if spec.out is None:
        out.write(format_records(records, spec.format))
    else:
        out.write(f"wrote {len(records)} records to {spec.out}\n")
    return EXIT_OK


def _cmd_min_bond_dim(args, out):
    objective = ObjectiveSpec(args.objective, args.eta, args.gauge)
    rep = minimal_bond_dimension(args.n, objective, args.threshold, _options(args), d_cap=args.d_cap)
    out.write(f"direct delta_phi = {rep.direct_delta_phi!r}\n")
    for D, dphi in rep.mps_delta_phi.items():
        out.write(f"D = {D}: delta_phi = {dphi!r}, relative gap = {relative_gap(dphi, rep.direct_delta_phi):.3e}\n")
    if rep.cap_exceeded:
        out.write(f"minimal_bond_dimension = none (cap {args.d_cap} exceeded)\n")
    else:
        out.write(f"minimal_bond_dimension = {rep.d_star}\n")
    return EXIT_OK


def _cmd_validate(args, out):
    results = run_checks(args.check)
    if args.check and not results:
        raise UsageError(f"unknown check name(s): {args.check}")
    for r in results:
        out.write(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}\n")
    failed = sum(not r.passed for r in results)
    out.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


COMMANDS = {
    "optimize": _cmd_optimize,
    "sweep": _cmd_sweep,
    "min-bond-dim": _cmd_min_bond_dim,
    "validate": _cmd_validate,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, DomainError, CapabilityError, OSError) as exc:
        print(f"mpsmetro: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OptimizationFailed as exc:
        print(f"mpsmetro: optimization failed: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
