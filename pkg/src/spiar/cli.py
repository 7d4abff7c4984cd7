"""Command-line entry point: serve the demo app, inspect or size traffic logs.

Exit codes: 0 ok, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import traffic
from .demo import demo_app
from .transport import ServerConfig, make_server
from .traffic import TrafficRecorder
from .updates import ApplyError


def _port(value: str) -> int:
    try:
        port = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid port {value!r}")
    if not 0 <= port <= 65535:
        raise argparse.ArgumentTypeError(f"invalid port {value!r}")
    return port


def _timeout(value: str) -> float:
    try:
        secs = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid timeout {value!r}")
    if secs <= 0:
        raise argparse.ArgumentTypeError("timeout must be positive")
    return secs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiar",
        description="Serve the demo application or analyze recorded delta traffic.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the demo application over HTTP")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=_port, default=8080)
    serve.add_argument("--record", metavar="FILE", help="append delta traffic to FILE")
    serve.add_argument("--assets", metavar="DIR", help="static asset directory")
    serve.add_argument("--timeout-secs", type=_timeout, default=1800.0,
                       help="session idle timeout")

    inspect = sub.add_parser("inspect", help="print a recorded log as a readable trace")
    inspect.add_argument("logfile")

    stats = sub.add_parser("stats", help="delta vs full-render sizes for a recorded log")
    stats.add_argument("logfile")
    return parser


def _apply_bind_env(args) -> None:
    bind = os.environ.get("SPIAR_BIND")
    if not bind:
        return
    host, _, port = bind.rpartition(":")
    if not host:
        raise SystemExit(f"SPIAR_BIND must be host:port, got {bind!r}")
    args.host = host
    args.port = _port(port)


def _cmd_serve(args) -> int:
    try:
        _apply_bind_env(args)
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    recorder = TrafficRecorder(args.record) if args.record else None
    config = ServerConfig(
        app=demo_app(),
        host=args.host,
        port=args.port,
        asset_dir=Path(args.assets) if args.assets else None,
        session_idle_timeout=args.timeout_secs,
    )
    try:
        server = make_server(config, recorder=recorder)
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    print(f"serving on http://{args.host}:{server.bound_port}/app", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        if recorder is not None:
            recorder.close()
    return 0


def _read_records(path: str):
    if not Path(path).is_file():
        print(f"error: no such file: {path}", file=sys.stderr)
        return None
    return traffic.read_log(path)


def _cmd_inspect(args) -> int:
    try:
        records = _read_records(args.logfile)
        if records is None:
            return 1
        for line in traffic.trace_lines(records):
            print(line)
    except traffic.TrafficLogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _cmd_stats(args) -> int:
    try:
        records = _read_records(args.logfile)
        if records is None:
            return 1
        for line in traffic.format_stats(traffic.stats_rows(records)):
            print(line)
    except (traffic.TrafficLogError, ApplyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "serve":
        return _cmd_serve(args)
    if args.command == "inspect":
        return _cmd_inspect(args)
    return _cmd_stats(args)


if __name__ == "__main__":
    sys.exit(main())
