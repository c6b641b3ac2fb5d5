"""Command-line front end: run, compare, audit and serve.

Exit codes: 0 success, 1 configuration error, 2 simulation divergence,
3 audit violation under --strict.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from ific.config import ConfigError, parse_config
from ific.passivity import audit_trace
from ific.plant import SimulationDivergedError
from ific.scenarios import CONTROLLERS, metrics_report, run_scenario
from ific.trace import Trace

log = logging.getLogger("ific")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_AUDIT = 3

WORK_BUDGET = 10.0  # [J] human-work truncation used by the comparison protocol


def _setup_logging() -> None:
    level = os.environ.get("IFIC_LOG", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _audit_dict(report) -> dict:
    return {
        "passed": report.passed,
        "n_violations": report.n_violations,
        "first_violation_time": report.first_violation_time,
        "worst_margin": report.worst_margin,
        "supplied": report.supplied,
        "storage_delta": report.storage_delta,
        "dissipated": report.dissipated,
    }


def cmd_run(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as err:
        log.error("config error: %s", err)
        return EXIT_CONFIG
    controller_name = args.controller or cfg.controller
    try:
        controller = cfg.build_controller(controller_name)
    except ValueError as err:
        log.error("config error: %s", err)
        return EXIT_CONFIG
    log.info("running %s with %s for %.1f s",
             cfg.scenario.name, controller_name, cfg.scenario.duration)
    try:
        trace = run_scenario(cfg.scenario, controller)
    except SimulationDivergedError as err:
        log.error("simulation diverged: %s", err)
        partial = err.record.get("trace")
        if partial is not None and args.out:
            partial.save(args.out)
            log.info("partial trace written to %s", args.out)
        return EXIT_DIVERGED
    out = args.out or cfg.out_path
    if out:
        trace.save(out)
        log.info("trace written to %s", out)
    report = {
        "metrics": metrics_report(trace, WORK_BUDGET),
        "audit": _audit_dict(audit_trace(trace)),
        "trace_hash": trace.content_hash(),
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as err:
        log.error("config error: %s", err)
        return EXIT_CONFIG
    names = [c.strip() for c in args.controllers.split(",") if c.strip()]
    for name in names:
        if name not in CONTROLLERS:
            log.error("unknown controller %r", name)
            return EXIT_CONFIG
    rows = {}
    for name in names:
        controller = cfg.build_controller(name)
        log.info("comparing: %s on %s", name, cfg.scenario.name)
        try:
            trace = run_scenario(cfg.scenario, controller)
        except SimulationDivergedError as err:
            log.error("%s diverged: %s", name, err)
            rows[name] = {"diverged": True, "time": err.record.get("time")}
            continue
        rows[name] = {
            "metrics": metrics_report(trace, WORK_BUDGET),
            "audit": _audit_dict(audit_trace(trace)),
            "trace_hash": trace.content_hash(),
        }
    report = {
        "schema_version": 1,
        "scenario": cfg.scenario.name,
        "safety_bound": cfg.scenario.safety_bound,
        "controllers": rows,
    }
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text)
        log.info("report written to %s", args.out)
    else:
        print(text)
    return EXIT_OK


def cmd_audit(args) -> int:
    try:
        trace = Trace.load(args.trace)
    except (OSError, ValueError) as err:
        log.error("cannot load trace: %s", err)
        return EXIT_CONFIG
    report = audit_trace(trace)
    print(json.dumps(_audit_dict(report), indent=2))
    if args.strict and not report.passed:
        return EXIT_AUDIT
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as err:
        log.error("config error: %s", err)
        return EXIT_CONFIG
    from ific.serve import serve

    serve(cfg, port=args.port, host=args.host)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ific",
        description="force-impedance control simulator with energy-tank safety",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and report metrics")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--controller", choices=CONTROLLERS, default=None)
    p_run.add_argument("--out", default=None, help="trace CSV output path")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run several controllers on one scenario")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--controllers", default=",".join(CONTROLLERS))
    p_cmp.add_argument("--out", default=None, help="JSON report output path")
    p_cmp.set_defaults(func=cmd_compare)

    p_aud = sub.add_parser("audit", help="passivity-audit a recorded trace")
    p_aud.add_argument("trace")
    p_aud.add_argument("--strict", action="store_true",
                       help="exit nonzero when the audit finds violations")
    p_aud.set_defaults(func=cmd_audit)

    p_srv = sub.add_parser("serve", help="realtime simulation with WebSocket bridge")
    p_srv.add_argument("--config", required=True)
    p_srv.add_argument("--port", type=int, default=8750)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
