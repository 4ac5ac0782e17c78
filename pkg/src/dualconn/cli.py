"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 infeasible correlation.
Set ``DUALCONN_LOG`` (e.g. ``DEBUG``) for diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
import tempfile
import time
from pathlib import Path

from . import config as cfg
from .errors import DualConnError, FeasibilityError
from .gauss import event_correlation
from .mcsim import McConfig, estimate_e2e
from .relmodel import Architecture, breakdown, evaluate
from .sweeps import (
    Parameter,
    SweepAxis,
    build_cell,
    max_feasible_nodes,
    region_map,
    sweep,
)

log = logging.getLogger("dualconn")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 2, 3


def fmt_number(value) -> str:
    """17 significant digits, enough to round-trip any double."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format(value, ".17g")


def to_json(obj, indent=2, _level=0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{to_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj, ".17g")
        # keep floats recognisable as floats for round-tripping
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(obj.value if hasattr(obj, "value") else obj)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt_number(v) for v in row])
    return buf.getvalue()


def emit(text: str, output: str | None):
    """Write ``text`` to stdout or atomically to ``output``."""
    if output is None or output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(output)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    log.info("wrote %s", target)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _count(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a count, got {text!r}") from None
    if value != int(value) or value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return int(value)


def _arch_list(text):
    if text == "both":
        return list(Architecture)
    try:
        return [Architecture(a.strip()) for a in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"architectures must be ran_split, cn_split or both, got {text!r}"
        ) from None


def _output_args(p, default_format):
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def _scenario_args(p):
    g = p.add_argument_group("scenario")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--config", help="scenario JSON document")
    src.add_argument("--preset", default="paper-defaults", help="named preset (paper-defaults, zeros)")
    g.add_argument("--arch", choices=[a.value for a in Architecture])
    g.add_argument("--eps-ran", type=float, help="error rate of both radio legs")
    g.add_argument("--rho", type=float, help="event correlation of the legs")
    g.add_argument("--rho-h", type=float, help="shadowing cross-correlation of the legs")
    g.add_argument("--n-nodes", type=_count, help="intermediate core-network nodes per path")
    g.add_argument("--eps-node", type=float)
    g.add_argument("--eps-link", type=float)
    g.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                   help="override any document field, e.g. points.eps_xn=1e-3")


def _document(args) -> dict:
    doc = cfg.load_document(args.config) if args.config else cfg.preset(args.preset)
    return cfg.apply_overrides(
        doc,
        architecture=args.arch,
        eps_ran=args.eps_ran,
        rho=args.rho,
        rho_h=args.rho_h,
        n_nodes=args.n_nodes,
        eps_node=args.eps_node,
        eps_link=args.eps_link,
        assignments=args.set,
    )


def _axes(texts):
    return [SweepAxis.parse(t) for t in texts]


def cmd_map_correlation(args):
    try:
        rows = [(r, event_correlation(args.eps_ran, args.eps_ran, r)) for r in args.rho_h]
    except DualConnError as exc:
        raise type(exc)(f"--eps-ran/--rho-h: {exc}") from None
    if args.format == "json":
        return to_json([{"rho_h": r, "rho": v} for r, v in rows]) + "\n"
    return to_csv(["rho_h", "rho"], rows)


def cmd_eval(args):
    scenario = cfg.parse_scenario(_document(args))
    report = breakdown(scenario)
    if args.format == "csv":
        return to_csv(
            ["architecture", "reliability", "error_rate"],
            [(report["architecture"], report["reliability"], report["error_rate"])],
        )
    return to_json(report) + "\n"


def cmd_dump_config(args):
    doc = _document(args)
    cfg.parse_scenario(doc)
    return to_json(doc) + "\n"


def cmd_sweep(args):
    base = cfg.parse_scenario(_document(args))
    axes = _axes(args.axis)
    grid = sweep(base, axes, args.archs)
    header = [a.parameter.value for a in axes] + ["arch", "error_rate", "reliability", "status"]
    rows = [
        [v for _, v in r.coords] + [r.arch.value, r.error_rate, r.reliability, r.status]
        for r in grid.rows
    ]
    if args.format == "json":
        return to_json([dict(zip(header, row)) for row in rows]) + "\n"
    return to_csv(header, rows)


def cmd_region(args):
    base = cfg.parse_scenario(_document(args))
    axis1, axis2 = _axes(args.axis)
    cells = region_map(base, axis1, axis2, args.tie_rel_tol)
    header = [axis1.parameter.value, axis2.parameter.value, "winner",
              "error_rate_ran_split", "error_rate_cn_split"]
    rows = [
        [c.axis1_value, c.axis2_value, c.winner.value, c.error_rate_ran_split, c.error_rate_cn_split]
        for c in cells
    ]
    if args.format == "json":
        return to_json([dict(zip(header, row)) for row in rows]) + "\n"
    return to_csv(header, rows)


def cmd_max_nodes(args):
    base = cfg.parse_scenario(_document(args))
    axes = _axes(args.axis)
    if any(a.parameter is Parameter.N_INTERMEDIATE_NODES for a in axes):
        raise DualConnError("max-nodes searches over n_intermediate_nodes; it cannot be an axis")
    header = [a.parameter.value for a in axes] + ["arch", "max_nodes", "status"]
    rows = []
    for combo in itertools.product(*(a.values for a in axes)):
        scenario = build_cell(base, [(a.parameter, v) for a, v in zip(axes, combo)])
        for arch in args.archs:
            try:
                n = max_feasible_nodes(scenario.with_architecture(arch), args.requirement, args.n_cap)
                status = "ok" if n is not None else "infeasible"
            except FeasibilityError:
                n, status = None, "infeasible_correlation"
            rows.append(list(combo) + [arch.value, n, status])
    if args.format == "json":
        return to_json([dict(zip(header, row)) for row in rows]) + "\n"
    return to_csv(header, rows)


def cmd_simulate(args):
    scenario = cfg.parse_scenario(_document(args))
    mc = McConfig(n_samples=args.samples, seed=args.seed, batch_size=args.batch_size)
    started = time.perf_counter()
    est = estimate_e2e(scenario, mc, workers=args.workers)
    log.info("simulated %d samples in %.2fs", mc.n_samples, time.perf_counter() - started)
    analytic = evaluate(scenario).error_rate
    z = (est.error_rate_hat - analytic) / est.std_error if est.std_error > 0 else math.nan
    record = {
        "arch": scenario.architecture.value,
        "n_samples": est.n_samples,
        "n_failures": est.n_failures,
        "error_rate_hat": est.error_rate_hat,
        "std_error": est.std_error,
        "analytic_error_rate": analytic,
        "z_score": z,
        "seed": est.seed,
        "batch_size": mc.batch_size,
        "low_confidence": est.low_confidence,
    }
    if est.low_confidence:
        log.warning("only %d failures observed; normal-approximation error bar is unreliable",
                    est.n_failures)
    if args.format == "json":
        return to_json(record) + "\n"
    return to_csv(list(record), [list(record.values())])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualconn",
        description="End-to-end reliability of dual-connectivity architectures "
        "under correlated radio-link failures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map-correlation", help="shadowing correlation -> event correlation")
    p.add_argument("--eps-ran", type=float, required=True)
    p.add_argument("--rho-h", type=_float_list, required=True, help="comma-separated values")
    _output_args(p, "csv")
    p.set_defaults(func=cmd_map_correlation)

    p = sub.add_parser("eval", help="evaluate one scenario with its term breakdown")
    _scenario_args(p)
    _output_args(p, "json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("dump-config", help="print the resolved scenario document")
    _scenario_args(p)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_dump_config)

    axis_help = "NAME=v1,v2,... | NAME=log:a:b:n | NAME=lin:a:b:n | NAME=range:a:b"
    p = sub.add_parser("sweep", help="error-rate grid over one or more axes")
    _scenario_args(p)
    p.add_argument("--axis", action="append", required=True, help=axis_help)
    p.add_argument("--archs", type=_arch_list, default=list(Architecture))
    _output_args(p, "csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("region", help="winning architecture over a 2-D grid")
    _scenario_args(p)
    p.add_argument("--axis", action="append", required=True, help=axis_help)
    p.add_argument("--tie-rel-tol", type=float, default=1e-12)
    _output_args(p, "csv")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("max-nodes", help="largest node count meeting an error-rate requirement")
    _scenario_args(p)
    p.add_argument("--requirement", type=float, required=True)
    p.add_argument("--n-cap", type=_count, default=10_000)
    p.add_argument("--axis", action="append", default=[], help=axis_help)
    p.add_argument("--archs", type=_arch_list, default=list(Architecture))
    _output_args(p, "csv")
    p.set_defaults(func=cmd_max_nodes)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the error rate")
    _scenario_args(p)
    p.add_argument("--seed", type=_count, required=True)
    p.add_argument("--samples", type=_count, required=True)
    p.add_argument("--batch-size", type=_count, default=1 << 20)
    p.add_argument("--workers", type=_count, default=1)
    _output_args(p, "csv")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("DUALCONN_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logging.captureWarnings(True)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "region" and len(args.axis) != 2:
        parser.error("region needs exactly two --axis options")
    try:
        text = args.func(args)
        emit(text, args.output)
    except FeasibilityError as exc:
        print(f"error: infeasible correlation: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except DualConnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
