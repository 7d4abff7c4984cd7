"""Traffic logs: append-only capture of delta exchanges, plus replay tools.

Log format is line-delimited and greppable:

    <C2S|S2C> <ISO-8601 timestamp> <raw message json>

Replaying the server-to-client lines through the generic directive applier
reconstructs each session's representational model, which is how ``trace``
stays honest and how ``stats`` compares delta sizes against the size of a
full render at the same point.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import codec
from .model import ModelNode, clone_node
from .updates import Create, Remove, SetListeners, SetProperty, apply_directives

C2S = "C2S"
S2C = "S2C"


class TrafficLogError(Exception):
    def __init__(self, lineno: int, reason: str):
        super().__init__(f"line {lineno}: {reason}")
        self.lineno = lineno
        self.reason = reason


@dataclass(frozen=True)
class TrafficRecord:
    direction: str
    timestamp: str
    raw: bytes


class TrafficRecorder:
    """Thread-safe append-only writer; one line per recorded message."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._handle = open(self.path, "ab")

    def record(self, direction: str, raw: bytes) -> None:
        stamp = datetime.now(timezone.utc).isoformat()
        line = direction.encode("ascii") + b" " + stamp.encode("ascii") + b" " + raw + b"\n"
        with self._lock:
            self._handle.write(line)
            self._handle.flush()

    def close(self) -> None:
        with self._lock:
            self._handle.close()


def read_log(path: str | Path) -> list[TrafficRecord]:
    records = []
    with open(path, "rb") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip(b"\n")
            if not line:
                continue
            parts = line.split(b" ", 2)
            if len(parts) != 3 or parts[0] not in (b"C2S", b"S2C"):
                raise TrafficLogError(lineno, "expected '<C2S|S2C> <timestamp> <json>'")
            records.append(
                TrafficRecord(parts[0].decode("ascii"), parts[1].decode("ascii"), parts[2])
            )
    return records


# --- human-readable trace -----------------------------------------------------

def _describe_value(value) -> str:
    return codec.encode_error({"_": value}).decode("utf-8")[5:-1]


def _describe_directive(d) -> str:
    if isinstance(d, Create):
        nodes = sum(1 for _ in _walk(d.node))
        return (
            f"create {d.node.id} ({d.node.type}, {nodes} node(s)) "
            f"under {d.parent_id or '<root>'} at {d.index}"
        )
    if isinstance(d, Remove):
        return f"remove {d.id}"
    if isinstance(d, SetProperty):
        return f"set {d.id}.{d.name} = {_describe_value(d.value)}"
    if isinstance(d, SetListeners):
        return f"listeners {d.id} = {sorted(d.events)}"
    return repr(d)


def _walk(node: ModelNode):
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(current.children)


def trace_lines(records: list[TrafficRecord]) -> list[str]:
    """Decode every record into a deterministic textual trace.

    Raises TrafficLogError on the first record that does not decode.
    """
    lines = []
    for lineno, record in enumerate(records, start=1):
        try:
            if record.direction == C2S:
                msg = codec.decode_client(record.raw)
                lines.append(f"-> seq={msg.seq} session={msg.session}")
                for write in msg.state_changes:
                    lines.append(
                        f"   change {write.id}.{write.name} = {_describe_value(write.value)}"
                    )
                if msg.action is not None:
                    payload = (
                        "" if msg.action.payload is None
                        else f" payload={_describe_value(msg.action.payload)}"
                    )
                    lines.append(f"   action {msg.action.event} on {msg.action.id}{payload}")
                if msg.fragment is not None:
                    lines.append(f"   fragment {msg.fragment}")
            else:
                msg = codec.decode_server(record.raw)
                fragment = "" if msg.fragment is None else f" fragment={msg.fragment}"
                lines.append(f"<- ack={msg.ack} session={msg.session}{fragment}")
                for directive in msg.directives:
                    lines.append(f"   {_describe_directive(directive)}")
        except codec.MalformedMessage as exc:
            raise TrafficLogError(lineno, exc.reason) from exc
    return lines


# --- size statistics ----------------------------------------------------------

@dataclass(frozen=True)
class StatsRow:
    ack: int
    session: str
    delta_bytes: int
    full_bytes: int

    @property
    def ratio(self) -> float:
        return self.delta_bytes / self.full_bytes


def replay_models(records: list[TrafficRecord]) -> dict[str, ModelNode | None]:
    """Reconstruct the final per-session model from the S2C half of a log."""
    models, _ = _replay(records)
    return models


def stats_rows(records: list[TrafficRecord]) -> list[StatsRow]:
    _, rows = _replay(records)
    return rows


def _replay(records):
    models: dict[str, ModelNode | None] = {}
    applied_ack: dict[str, int] = {}
    rows: list[StatsRow] = []
    for lineno, record in enumerate(records, start=1):
        if record.direction != S2C:
            continue
        try:
            msg = codec.decode_server(record.raw)
        except codec.MalformedMessage as exc:
            raise TrafficLogError(lineno, exc.reason) from exc
        seen = applied_ack.get(msg.session)
        if seen is None or msg.ack > seen:
            # Retries repeat a previous ack; apply each response once.
            models[msg.session] = apply_directives(
                models.get(msg.session), msg.directives
            )
            applied_ack[msg.session] = msg.ack
        model = models[msg.session]
        full_directives = () if model is None else (Create(None, 0, clone_node(model)),)
        full = codec.encode_server(
            codec.ServerDelta(
                session=msg.session,
                ack=msg.ack,
                directives=full_directives,
                fragment=msg.fragment,
            )
        )
        rows.append(StatsRow(msg.ack, msg.session, len(record.raw), len(full)))
    return models, rows


def format_stats(rows: list[StatsRow]) -> list[str]:
    lines = []
    for i, row in enumerate(rows, start=1):
        lines.append(
            f"#{i} ack={row.ack} delta={row.delta_bytes} "
            f"full={row.full_bytes} ratio={row.ratio:.4f}"
        )
    total_delta = sum(r.delta_bytes for r in rows)
    total_full = sum(r.full_bytes for r in rows)
    ratio = total_delta / total_full if total_full else 0.0
    lines.append(f"total delta={total_delta} full={total_full} ratio={ratio:.4f}")
    return lines
