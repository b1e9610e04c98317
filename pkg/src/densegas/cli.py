"""Command-line entry point: run verification suites, emit reports and CSV.

Verbs:
  verify CONFIG          run every check in a config, stream ndjson report
  validate-kernel CONFIG check the Povzner kernel assumptions
  moments CONFIG         tabulate macroscopic fields over an x-grid as CSV
  export-csv REPORT      flatten a report file to CSV

Exit status: 0 all checks passed, 1 some failed, 2 config error,
3 numerical failure.  Reports are line-delimited JSON, one object per
check plus a trailing summary; rerunning a config reproduces the report
byte-for-byte except for the wall_time fields, independent of the
--parallel worker count (results are ordered by check name).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .kernels import validate_kernel
from .moments import collision_corrections, compute_moments
from .quadrature import NodeFailureError
from .reporting import VerificationReport
from .verify import (
    check_divergence,
    check_global_conservation,
    check_weakform,
    entropy_production_povzner,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _expand_checks(config: RunConfig):
    """One work item per check; multi-seed weakform descriptors expand to
    one item per seed, named <name>_s<seed>."""
    items = []
    for check in config.checks:
        if check.kind == "weakform" and len(check.seeds) > 1:
            for seed in check.seeds:
                items.append((f"{check.name}_s{seed}", check, seed))
        else:
            seed = check.seeds[0] if check.seeds else None
            items.append((check.name, check, seed))
    return items


def _run_one(config: RunConfig, name, check, seed) -> VerificationReport:
    try:
        return _dispatch(config, name, check, seed)
    except NodeFailureError as exc:
        raise NodeFailureError(f"check {name!r}: {exc}") from exc


def _dispatch(config: RunConfig, name, check, seed) -> VerificationReport:
    spec = config.quadrature
    if seed is not None:
        spec = dataclasses.replace(spec, qmc_seed=seed)
    model, dist = config.model, config.distribution
    if check.kind == "divergence":
        return check_divergence(
            model, dist, check.moment, check.x, check.v, spec,
            h=check.h, c1=config.c1, c2=config.c2, name=name,
        )
    if check.kind == "weakform":
        return check_weakform(model, dist, check.moment, check.phi, spec, name=name)
    if check.kind == "global_conservation":
        return check_global_conservation(
            model, dist, spec, name=name, abs_tolerance=check.abs_tolerance
        )
    if check.kind == "entropy":
        return entropy_production_povzner(
            model, dist, spec, floor=check.floor, name=name
        )
    if check.kind == "kernel_validation":
        seed_val = seed if seed is not None else spec.qmc_seed
        report = validate_kernel(model.kernel, check.n_samples, seed_val)
        report.check = name
        return report
    raise ConfigError(f"unknown check kind {check.kind!r}")


def run(config: RunConfig, out_path=None, parallel: int = 1) -> int:
    """Execute all checks; write the ndjson report; return the exit status."""
    t0 = time.perf_counter()
    items = _expand_checks(config)
    reports = []
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            futs = [
                pool.submit(_run_one, config, name, check, seed)
                for name, check, seed in items
            ]
            reports = [f.result() for f in futs]
    else:
        reports = [_run_one(config, name, check, seed) for name, check, seed in items]
    reports.sort(key=lambda r: r.check)

    path = out_path or config.output
    passed = sum(1 for r in reports if r.passed)
    summary = {
        "total": len(reports),
        "passed": passed,
        "failed": len(reports) - passed,
        "wall_time": time.perf_counter() - t0,
    }
    with open(path, "w") as fh:
        for r in reports:
            fh.write(r.to_json() + "\n")
        fh.write(json.dumps({"summary": summary}, sort_keys=True) + "\n")
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.check}")
    print(
        f"{summary['passed']}/{summary['total']} checks passed"
        f" ({summary['wall_time']:.1f}s) -> {path}"
    )
    return EXIT_OK if passed == len(reports) else EXIT_CHECK_FAILED


def _cmd_verify(args) -> int:
    config = load_config(args.config)
    if args.qmc_samples is not None:
        config.quadrature = dataclasses.replace(
            config.quadrature, qmc_samples=args.qmc_samples
        )
    if args.seed is not None:
        config.quadrature = dataclasses.replace(config.quadrature, qmc_seed=args.seed)
    if args.h is not None:
        for check in config.checks:
            check.h = args.h
    return run(config, out_path=args.out, parallel=args.parallel)


def _cmd_validate_kernel(args) -> int:
    config = load_config(args.config)
    if config.model.kernel is None:
        raise ConfigError("model: validate-kernel needs a povzner model with a kernel")
    seed = args.seed if args.seed is not None else config.quadrature.qmc_seed
    report = validate_kernel(config.model.kernel, args.samples, seed)
    line = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(line + "\n")
    print(line)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


MOMENT_HEADERS = (
    ["x1", "x2", "x3", "rho", "u1", "u2", "u3"]
    + [f"P{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    + ["q1", "q2", "q3"]
    + [f"stress{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    + ["energy_corr1", "energy_corr2", "energy_corr3"]
)


def _cmd_moments(args) -> int:
    config = load_config(args.config)
    grid = config.grid
    center = np.asarray(grid.get("center", config.distribution.center), float)
    half = float(grid.get("half_width", 2.0 * config.distribution.width))
    pts = int(args.grid or grid.get("points", 5))
    axis = np.linspace(-half, half, pts)
    rows = []
    for gx in axis:
        for gy in axis:
            for gz in axis:
                x = center + np.array([gx, gy, gz])
                mom = compute_moments(config.distribution, x, config.quadrature)
                corr = collision_corrections(
                    config.model, config.distribution, x, config.quadrature
                )
                rows.append(
                    list(x)
                    + [mom.rho]
                    + list(mom.u)
                    + list(mom.P.reshape(-1))
                    + list(mom.q)
                    + list(corr.stress.reshape(-1))
                    + list(corr.energy)
                )
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MOMENT_HEADERS)
        writer.writerows(rows)
    print(f"{len(rows)} grid points -> {args.out}")
    return EXIT_OK


CSV_HEADERS = ["check", "moment", "model", "lhs", "rhs", "residual", "tolerance", "pass"]


def emit_csv(report_path, out_path, selector: str = "checks") -> int:
    """Flatten a report's check objects to CSV (selector: 'checks')."""
    if selector != "checks":
        print(f"unknown selector {selector!r}", file=sys.stderr)
        return EXIT_CONFIG
    rows = []
    with open(report_path) as fh:
        for line in fh:
            obj = json.loads(line)
            if "summary" in obj:
                continue
            rows.append(
                [
                    obj.get("check"), obj.get("moment"), obj.get("model"),
                    obj.get("lhs"), obj.get("rhs"), obj.get("residual"),
                    obj.get("tolerance"), obj.get("passed"),
                ]
            )
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADERS)
        writer.writerows(rows)
    print(f"{len(rows)} checks -> {out_path}")
    return EXIT_OK


def _cmd_export_csv(args) -> int:
    return emit_csv(args.report, args.out, args.select)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densegas",
        description="Dense-gas collision integrals in conservative form: "
        "verification suites, kernel validation, moment tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run every check in a config")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="report path (overrides config)")
    p.add_argument("--qmc-samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--parallel", type=int, default=1)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("validate-kernel", help="check the kernel assumptions")
    p.add_argument("config")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_validate_kernel)

    p = sub.add_parser("moments", help="tabulate fields over an x-grid")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=None, help="points per axis")
    p.set_defaults(fn=_cmd_moments)

    p = sub.add_parser("export-csv", help="flatten a report to CSV")
    p.add_argument("report")
    p.add_argument("--out", required=True)
    p.add_argument("--select", default="checks")
    p.set_defaults(fn=_cmd_export_csv)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NodeFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
