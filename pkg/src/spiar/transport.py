"""HTTP delta connectors: bootstrap page, delta endpoint, static assets.

A thin request/response layer over the session runtime. Requests are
handled concurrently (one thread each); per-session ordering is entirely
the runtime's job, so the transport adds and removes nothing — the same
messages driven directly through the runtime produce the same trees.
"""

from __future__ import annotations

import mimetypes
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from . import codec, session as session_mod
from .session import ApplicationDefinition, SessionRuntime
from .traffic import TrafficRecorder

_PAGE = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>spiar</title>
</head>
<body>
<div id="app"></div>
<script type="application/json" id="bootstrap">{bootstrap}</script>
<script type="module" src="/assets/main.js"></script>
</body>
</html>
"""


@dataclass
class ServerConfig:
    app: ApplicationDefinition
    host: str = "127.0.0.1"
    port: int = 0
    asset_dir: Path | None = None
    session_idle_timeout: float = 1800.0

    def __post_init__(self):
        if self.session_idle_timeout <= 0:
            raise ValueError("session_idle_timeout must be positive")
        if self.asset_dir is not None:
            self.asset_dir = Path(self.asset_dir)


class DeltaServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, config: ServerConfig, runtime: SessionRuntime | None = None,
                 recorder: TrafficRecorder | None = None):
        self.config = config
        self.runtime = runtime or SessionRuntime(
            config.app, idle_timeout=config.session_idle_timeout
        )
        self.recorder = recorder
        super().__init__((config.host, config.port), _Handler)

    @property
    def bound_port(self) -> int:
        return self.server_address[1]


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: DeltaServer

    def log_message(self, format, *args):  # quiet by default
        pass

    # -- plumbing ---------------------------------------------------------------

    def _reply(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _reply_json(self, status: int, body: bytes) -> None:
        self._reply(status, body, "application/json; charset=utf-8")

    def _error(self, status: int, name: str, **fields) -> None:
        self._reply_json(status, codec.encode_error({"error": name, **fields}))

    def _record(self, direction: str, raw: bytes) -> None:
        if self.server.recorder is not None:
            self.server.recorder.record(direction, raw)

    # -- routes -----------------------------------------------------------------

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/app":
            self._bootstrap_page(url)
        elif url.path.startswith("/assets/"):
            self._asset(url.path[len("/assets/"):])
        else:
            self._error(404, "not_found", path=url.path)

    def do_POST(self):
        if urlparse(self.path).path != "/app/delta":
            self._error(404, "not_found", path=self.path)
            return
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        self._record("C2S", raw)
        try:
            msg = codec.decode_client(raw)
        except codec.MalformedMessage as exc:
            self._error(400, "malformed_message", reason=exc.reason)
            return
        try:
            response = self.server.runtime.process(msg.session, msg)
        except session_mod.OutOfOrder as exc:
            self._error(409, "out_of_order", expected=exc.expected, got=exc.got)
            return
        except session_mod.UnknownSession:
            self._error(404, "unknown_session")
            return
        except session_mod.UnknownView as exc:
            self._error(404, "unknown_view", view=str(exc))
            return
        except session_mod.UnknownComponent as exc:
            self._error(400, "unknown_component", id=exc.component_id)
            return
        except session_mod.UnknownEvent as exc:
            self._error(400, "unknown_event", reason=str(exc))
            return
        except codec.MalformedMessage as exc:
            self._error(400, "malformed_message", reason=exc.reason)
            return
        body = codec.encode_server(response)
        self._record("S2C", body)
        self._reply_json(200, body)

    def _bootstrap_page(self, url) -> None:
        params = parse_qs(url.query)
        fragment = params.get("view", [None])[0]
        try:
            _, bootstrap = self.server.runtime.create_session(fragment)
        except session_mod.UnknownView:
            self._error(404, "unknown_view", view=fragment)
            return
        raw = codec.encode_server(bootstrap)
        self._record("S2C", raw)
        # "</" must not appear inside an inline script element; the JSON
        # escape form decodes to the same message.
        embedded = raw.decode("utf-8").replace("</", "<\\/")
        page = _PAGE.format(bootstrap=embedded)
        self._reply(200, page.encode("utf-8"), "text/html; charset=utf-8")

    def _asset(self, rel: str) -> None:
        root = self.server.config.asset_dir
        if root is None:
            self._error(404, "not_found", path=self.path)
            return
        rel = unquote(rel)
        base = root.resolve()
        target = (base / rel).resolve()
        if base != target and base not in target.parents:
            self._error(403, "forbidden", path=self.path)
            return
        if not target.is_file():
            self._error(404, "not_found", path=self.path)
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._reply(200, target.read_bytes(), ctype)


def make_server(
    config: ServerConfig,
    runtime: SessionRuntime | None = None,
    recorder: TrafficRecorder | None = None,
) -> DeltaServer:
    return DeltaServer(config, runtime, recorder)
