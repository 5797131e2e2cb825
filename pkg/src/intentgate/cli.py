"""Command line entry points: serve, fuzz, verify-ledger, export-epa."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audit import Ledger, SQLiteBackend
from .config import GatewayConfig, build_gateway
from .epa import NO_SHARING_OVERWRITE, build_document_sharing_epa, export_dot, load_graph_file
from .fuzzer import FuzzConfig, render_report, report_to_json, run_campaign


def _add_serve(sub):
    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--config", help="JSON config file (defaults to packaged fixtures)")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)

    def run(args):
        config = GatewayConfig.from_file(args.config) if args.config else GatewayConfig()
        if args.host:
            config.host = args.host
        if args.port:
            config.port = args.port
        from .http_api import serve

        serve(build_gateway(config), host=config.host, port=config.port)
        return 0

    p.set_defaults(run=run)


def _add_fuzz(sub):
    p = sub.add_parser("fuzz", help="run a seeded fuzz campaign over a graph")
    p.add_argument("--graph", help="graph fixture JSON (defaults to the packaged workflow)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--buggy", action="store_true", help="include the known vulnerable edge")
    p.add_argument("--keep-going", action="store_true", help="collect all violations")
    p.add_argument("--json", dest="as_json", action="store_true", help="emit machine JSON")

    def run(args):
        if args.graph:
            graph = load_graph_file(args.graph, include_buggy=args.buggy)
            universe = None  # adversarial probes drawn from the graph's own tools
        else:
            graph = build_document_sharing_epa(buggy=args.buggy)
            from .config import fixture_path
            from .registry import load_registry_file

            universe = load_registry_file(fixture_path("tools.json")).names()
        config = FuzzConfig(seed=args.seed, max_iterations=args.max_iter,
                            keep_going=args.keep_going)
        report = run_campaign(graph, [NO_SHARING_OVERWRITE], config, tool_universe=universe)
        print(report_to_json(report) if args.as_json else render_report(report))
        return 1 if report.found_violation() else 0

    p.set_defaults(run=run)


def _add_verify_ledger(sub):
    p = sub.add_parser("verify-ledger", help="recheck an audit ledger's hash chain")
    p.add_argument("ledger", help="path to the ledger database file")

    def run(args):
        if not Path(args.ledger).exists():
            print(f"no such ledger: {args.ledger}", file=sys.stderr)
            return 2
        status = Ledger(SQLiteBackend(args.ledger)).verify_chain()
        print(str(status))
        return 0 if status.valid else 1

    p.set_defaults(run=run)


def _add_export_epa(sub):
    p = sub.add_parser("export-epa", help="write a graph as DOT")
    p.add_argument("--graph", help="graph fixture JSON (defaults to the packaged workflow)")
    p.add_argument("--buggy", action="store_true")
    p.add_argument("--out", help="output path (stdout when omitted)")

    def run(args):
        if args.graph:
            graph = load_graph_file(args.graph, include_buggy=args.buggy)
        else:
            graph = build_document_sharing_epa(buggy=args.buggy)
        dot = export_dot(graph)
        if args.out:
            Path(args.out).write_text(dot, "utf-8")
        else:
            print(dot, end="")
        return 0

    p.set_defaults(run=run)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="intentgate")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_serve(sub)
    _add_fuzz(sub)
    _add_verify_ledger(sub)
    _add_export_epa(sub)
    args = parser.parse_args(argv)
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main())
