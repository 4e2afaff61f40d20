"""Command line front door.

    telemgmt serve               run the gateway
    telemgmt simulate            drive simulated patient hubs at a gateway
    telemgmt probe               measure a gateway's uptime, write a probe log
    telemgmt report reliability  analyze a probe log
    telemgmt report survey       analyze a Likert survey dataset

Exit codes: 0 success, 1 operational error, 2 the analyzed data contains
internal inconsistencies (reported on stdout).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional

from . import reliability as rel
from . import survey as surv
from .client import GatewayClient
from .clock import SimClock, SystemClock
from .config import ConfigError, FleetConfig, RunConfig
from .simulator import Hub

log = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="telemgmt",
                                description="vital-sign tele-management")
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the gateway")
    serve.add_argument("--config", help="JSON run configuration")
    serve.add_argument("--data-dir")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--admin-id")
    serve.add_argument("--admin-secret")
    serve.add_argument("--sms-outbox")
    serve.add_argument("--console-dir")

    sim = sub.add_parser("simulate", help="run simulated patient hubs")
    sim.add_argument("--fleet", required=True, help="JSON fleet definition")
    sim.add_argument("--gateway", help="override gateway base URL")
    sim.add_argument("--ticks", type=int, required=True)
    sim.add_argument("--fast", action="store_true",
                     help="simulated clock: no real sleeps")

    probe = sub.add_parser("probe", help="periodically check a gateway")
    probe.add_argument("--target", required=True, help="gateway base URL")
    probe.add_argument("--interval-s", type=int, default=60)
    probe.add_argument("--duration-s", type=int, required=True)
    probe.add_argument("--out", required=True, help="probe log output path")

    report = sub.add_parser("report", help="analyze recorded data")
    rsub = report.add_subparsers(dest="report_kind", required=True)

    rrel = rsub.add_parser("reliability", help="analyze a probe log")
    src = rrel.add_mutually_exclusive_group(required=True)
    src.add_argument("path", nargs="?", help="probe log file")
    src.add_argument("--bundled", action="store_true",
                     help="use the packaged 48-hour evaluation log")
    rrel.add_argument("--reference", action="store_true",
                      help="compare against the published evaluation table")
    rrel.add_argument("--json", action="store_true")

    rsur = rsub.add_parser("survey", help="analyze a Likert dataset")
    ssrc = rsur.add_mutually_exclusive_group(required=True)
    ssrc.add_argument("path", nargs="?", help="TSV dataset file")
    ssrc.add_argument("--bundled", action="store_true",
                      help="use the packaged questionnaire dataset")
    rsur.add_argument("--composites", help="JSON composite definitions")
    rsur.add_argument("--json", action="store_true")

    return p


# ---------------------------------------------------------------------------
# serve


def _cmd_serve(args) -> int:
    import uvicorn

    from .gateway.app import create_app
    from .gateway.service import GatewayConfig, build_gateway
    from .notifier import ConsoleSink, SmsSimSink, WebhookSink
    from .store import EmrStore

    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    for attr, arg in (("data_dir", "data_dir"), ("host", "host"),
                      ("port", "port"), ("admin_id", "admin_id"),
                      ("admin_secret", "admin_secret"),
                      ("sms_outbox", "sms_outbox"),
                      ("console_dir", "console_dir")):
        value = getattr(args, arg, None)
        if value is not None:
            setattr(cfg, attr, value)

    clock = SystemClock()
    store = EmrStore(cfg.data_dir)
    sinks: list = [ConsoleSink()]
    if cfg.sms_outbox:
        sinks.append(SmsSimSink(cfg.sms_outbox, clock))
    if cfg.webhook_url:
        sinks.append(WebhookSink(cfg.webhook_url))
    service, notifier = build_gateway(
        store, clock,
        config=GatewayConfig(token_lifetime_s=cfg.token_lifetime_s,
                             long_poll_max_s=cfg.long_poll_max_s),
        sinks=sinks)
    if cfg.admin_secret:
        service.ensure_bootstrap_admin(cfg.admin_secret, cfg.admin_id)
    app = create_app(service, clock, console_dir=cfg.console_dir)
    try:
        uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    finally:
        if notifier is not None:
            notifier.stop()
        store.close()
    return 0


# ---------------------------------------------------------------------------
# simulate


def _cmd_simulate(args) -> int:
    fleet = FleetConfig.load(args.fleet)
    gateway = args.gateway or fleet.gateway
    if not gateway:
        print("error: no gateway URL (give --gateway or set it in the fleet file)",
              file=sys.stderr)
        return 1
    ok = True
    for entry in fleet.patients:
        client = GatewayClient(base_url=gateway)
        try:
            client.login(entry.principal_id, entry.secret)
            clock = SimClock() if args.fast else SystemClock()
            hub = Hub(entry.profile, entry.hub or fleet.hub, client,
                      clock=clock)
            report = hub.run(args.ticks)
        finally:
            client.close()
        print(json.dumps(report.to_dict(), sort_keys=True))
        if report.halted or not report.conserved():
            ok = False
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# probe


def _cmd_probe(args) -> int:
    client = GatewayClient(base_url=args.target)
    try:
        probe_log = rel.probe_run(client.is_healthy, args.interval_s,
                                  args.duration_s, clock=SystemClock(),
                                  target=args.target)
    finally:
        client.close()
    probe_log.save(args.out)
    report = rel.analyze(probe_log)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# report


def _day_reports(log: rel.ProbeLog) -> list:
    return [rel.analyze(day, label=f"Day {i + 1}")
            for i, day in enumerate(rel.split_days(log))]


def _cmd_report_reliability(args) -> int:
    if args.bundled:
        probe_log = rel.bundled_reference_log()
    else:
        try:
            probe_log = rel.ProbeLog.load(args.path)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    overall = rel.analyze(probe_log)
    # day splits only make sense for the full evaluation shape
    days = _day_reports(probe_log) if len(probe_log.entries) and \
        len(probe_log.entries) % (rel.MINUTES_PER_DAY * 60 // probe_log.interval_s) == 0 \
        else None
    mismatches = None
    if args.reference:
        if days is None or len(days) != len(rel.REFERENCE_DAYS):
            print("error: --reference needs a log shaped like the 48-hour "
                  "evaluation (six 8-hour days)", file=sys.stderr)
            return 1
        mismatches = rel.compare_with_reference(days, overall)
    if args.json:
        sys.stdout.write(rel.report_as_json(overall, days, mismatches))
    else:
        sys.stdout.write(rel.render_report(overall, days, mismatches))
    return 2 if mismatches else 0


def _cmd_report_survey(args) -> int:
    if args.bundled:
        text = surv.bundled_dataset_text()
        items = surv.parse_dataset(text)
    else:
        try:
            items = surv.load_dataset(args.path)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    composites = (surv.load_composites(args.composites)
                  if args.composites else None)
    report = surv.analyze_survey(items, composites)
    if args.json:
        sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        sys.stdout.write(surv.render_survey_report(report))
    return 2 if report.discrepancies else 0


# ---------------------------------------------------------------------------


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "probe":
            return _cmd_probe(args)
        if args.command == "report":
            if args.report_kind == "reliability":
                return _cmd_report_reliability(args)
            return _cmd_report_survey(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (ConfigError, rel.ProbeLogFormatError, surv.SurveyFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
