"""Bit-exact encoder/decoder for the client/server delta wire messages.

The wire format is canonical UTF-8 JSON: lexicographically sorted object
keys, no insignificant whitespace, finite numbers only, and a top-level
schema version key ``"v"``. Canonical form makes encode deterministic, so
byte equality is a meaningful test and recorded traffic is replayable.
Decoding is total: any byte input either yields a message or raises
``MalformedMessage`` (never anything else).

Every field is self-describing (named keys, ``kind``-tagged directives) so
an external mediator can interpret captured traffic without this library.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .model import ModelNode
from .updates import Create, Directive, Remove, SetListeners, SetProperty
from .widgets import INT64_MAX, INT64_MIN

WIRE_VERSION = 1

_CLIENT_KEYS = frozenset({"action", "fragment", "seq", "session", "state_changes", "v"})
_SERVER_KEYS = frozenset({"ack", "directives", "fragment", "session", "v"})
_NODE_KEYS = frozenset({"id", "type", "properties", "listened_events", "children"})
_CREATE_KEYS = frozenset({"kind", "parent_id", "index"}) | _NODE_KEYS

_MAX_NESTING = 512


class MalformedMessage(Exception):
    def __init__(self, reason: str, position: int | None = None):
        super().__init__(reason if position is None else f"{reason} (at {position})")
        self.reason = reason
        self.position = position


class UnknownDirectiveKind(MalformedMessage):
    pass


class UnknownValueTag(MalformedMessage):
    pass


@dataclass(frozen=True)
class PropertyWrite:
    """One client-side state change: a property the user edited."""

    id: str
    name: str
    value: object


@dataclass(frozen=True)
class ActionEvent:
    """The user interaction that triggered the round-trip."""

    id: str
    event: str
    payload: object = None


@dataclass(frozen=True)
class ClientDelta:
    session: str
    seq: int
    state_changes: tuple[PropertyWrite, ...] = ()
    action: ActionEvent | None = None
    fragment: str | None = None


@dataclass(frozen=True)
class ServerDelta:
    session: str
    ack: int
    directives: tuple[Directive, ...] = ()
    fragment: str | None = None


# --- encoding ----------------------------------------------------------------

def _dumps(obj) -> bytes:
    return json.dumps(
        obj,
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    ).encode("utf-8")


def encode_error(fields: dict) -> bytes:
    """Canonical encoding for machine-readable error bodies."""
    return _dumps(fields)


def _check_value(value):
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, int):
        if not INT64_MIN <= value <= INT64_MAX:
            raise MalformedMessage("integer exceeds 64-bit signed range")
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise MalformedMessage("non-finite real on the wire")
        return value
    if isinstance(value, list):
        if not all(isinstance(x, str) for x in value):
            raise UnknownValueTag("lists may contain only text entries")
        return list(value)
    raise UnknownValueTag(f"unsupported value type {type(value).__name__}")


def _node_to_wire(node: ModelNode) -> dict:
    return {
        "id": node.id,
        "type": node.type,
        "properties": {k: _check_value(v) for k, v in node.properties.items()},
        "listened_events": sorted(node.listened_events),
        "children": [_node_to_wire(c) for c in node.children],
    }


def _directive_to_wire(d: Directive) -> dict:
    if isinstance(d, Create):
        wire = _node_to_wire(d.node)
        wire["kind"] = "create"
        wire["parent_id"] = d.parent_id
        wire["index"] = d.index
        return wire
    if isinstance(d, Remove):
        return {"kind": "remove", "id": d.id}
    if isinstance(d, SetProperty):
        return {
            "kind": "set_property",
            "id": d.id,
            "name": d.name,
            "value": _check_value(d.value),
        }
    if isinstance(d, SetListeners):
        return {"kind": "set_listeners", "id": d.id, "listened_events": sorted(d.events)}
    raise UnknownDirectiveKind(f"cannot encode {type(d).__name__}")


def encode_client(msg: ClientDelta) -> bytes:
    if not isinstance(msg.seq, int) or isinstance(msg.seq, bool) or msg.seq < 0:
        raise MalformedMessage("seq must be a non-negative integer")
    if msg.seq > 0 and not (msg.state_changes or msg.action or msg.fragment):
        raise MalformedMessage("non-bootstrap message carries no changes")
    action = None
    if msg.action is not None:
        action = {
            "id": msg.action.id,
            "event": msg.action.event,
            "payload": _check_value(msg.action.payload),
        }
    return _dumps(
        {
            "session": msg.session,
            "seq": msg.seq,
            "state_changes": [
                {"id": w.id, "name": w.name, "value": _check_value(w.value)}
                for w in msg.state_changes
            ],
            "action": action,
            "fragment": msg.fragment,
            "v": WIRE_VERSION,
        }
    )


def encode_server(msg: ServerDelta) -> bytes:
    if not isinstance(msg.ack, int) or isinstance(msg.ack, bool) or msg.ack < 0:
        raise MalformedMessage("ack must be a non-negative integer")
    return _dumps(
        {
            "session": msg.session,
            "ack": msg.ack,
            "directives": [_directive_to_wire(d) for d in msg.directives],
            "fragment": msg.fragment,
            "v": WIRE_VERSION,
        }
    )


# --- decoding ----------------------------------------------------------------

def _reject_constant(token):
    raise MalformedMessage(f"non-finite constant {token}")


def _parse(data: bytes):
    if not isinstance(data, (bytes, bytearray)):
        raise MalformedMessage("input is not bytes")
    try:
        text = bytes(data).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedMessage("invalid UTF-8", exc.start) from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except RecursionError as exc:
        raise MalformedMessage("nesting too deep") from exc
    except json.JSONDecodeError as exc:
        raise MalformedMessage(exc.msg, exc.pos) from exc


def _expect_keys(obj, keys: frozenset, what: str) -> None:
    if not isinstance(obj, dict):
        raise MalformedMessage(f"{what} must be an object")
    if set(obj) != keys:
        missing = sorted(keys - set(obj))
        extra = sorted(set(obj) - keys)
        detail = []
        if missing:
            detail.append(f"missing {missing}")
        if extra:
            detail.append(f"unexpected {extra}")
        raise MalformedMessage(f"{what}: " + ", ".join(detail))


def _expect_str(value, what: str) -> str:
    if not isinstance(value, str):
        raise MalformedMessage(f"{what} must be text")
    return value


def _expect_count(value, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise MalformedMessage(f"{what} must be a non-negative integer")
    return value


def _expect_opt_str(value, what: str) -> str | None:
    if value is None:
        return None
    return _expect_str(value, what)


def _check_version(obj) -> None:
    if obj.get("v") != WIRE_VERSION:
        raise MalformedMessage(f"unsupported wire version {obj.get('v')!r}")


def _decode_value(value):
    return _check_value(value)


def _decode_events(value, what: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise MalformedMessage(f"{what} must be a list of event names")
    return value


def _decode_node(obj, depth: int) -> ModelNode:
    if depth > _MAX_NESTING:
        raise MalformedMessage("nesting too deep")
    _expect_keys(obj, _NODE_KEYS, "node")
    props = obj["properties"]
    if not isinstance(props, dict):
        raise MalformedMessage("properties must be an object")
    children = obj["children"]
    if not isinstance(children, list):
        raise MalformedMessage("children must be a list")
    return ModelNode(
        id=_nonempty_id(obj["id"]),
        type=_expect_str(obj["type"], "type"),
        properties={
            _expect_str(k, "property name"): _decode_value(v) for k, v in props.items()
        },
        listened_events=set(_decode_events(obj["listened_events"], "listened_events")),
        children=[_decode_node(c, depth + 1) for c in children],
    )


def _nonempty_id(value) -> str:
    out = _expect_str(value, "id")
    if not out:
        raise MalformedMessage("id must be nonempty")
    return out


def _decode_directive(obj) -> Directive:
    if not isinstance(obj, dict):
        raise MalformedMessage("directive must be an object")
    kind = obj.get("kind")
    if kind == "create":
        _expect_keys(obj, _CREATE_KEYS, "create directive")
        node = _decode_node({k: obj[k] for k in _NODE_KEYS}, 0)
        parent_id = obj["parent_id"]
        if parent_id is not None:
            parent_id = _nonempty_id(parent_id)
        return Create(parent_id, _expect_count(obj["index"], "index"), node)
    if kind == "remove":
        _expect_keys(obj, frozenset({"kind", "id"}), "remove directive")
        return Remove(_nonempty_id(obj["id"]))
    if kind == "set_property":
        _expect_keys(obj, frozenset({"kind", "id", "name", "value"}), "set_property directive")
        return SetProperty(
            _nonempty_id(obj["id"]),
            _expect_str(obj["name"], "name"),
            _decode_value(obj["value"]),
        )
    if kind == "set_listeners":
        _expect_keys(obj, frozenset({"kind", "id", "listened_events"}), "set_listeners directive")
        return SetListeners(
            _nonempty_id(obj["id"]),
            frozenset(_decode_events(obj["listened_events"], "listened_events")),
        )
    raise UnknownDirectiveKind(f"unknown directive kind {kind!r}")


def decode_client(data: bytes) -> ClientDelta:
    try:
        obj = _parse(data)
        _expect_keys(obj, _CLIENT_KEYS, "client message")
        _check_version(obj)
        session = _expect_str(obj["session"], "session")
        seq = _expect_count(obj["seq"], "seq")
        raw_changes = obj["state_changes"]
        if not isinstance(raw_changes, list):
            raise MalformedMessage("state_changes must be a list")
        changes = []
        for entry in raw_changes:
            _expect_keys(entry, frozenset({"id", "name", "value"}), "state change")
            changes.append(
                PropertyWrite(
                    _nonempty_id(entry["id"]),
                    _expect_str(entry["name"], "name"),
                    _decode_value(entry["value"]),
                )
            )
        action = None
        if obj["action"] is not None:
            _expect_keys(obj["action"], frozenset({"id", "event", "payload"}), "action")
            action = ActionEvent(
                _nonempty_id(obj["action"]["id"]),
                _expect_str(obj["action"]["event"], "event"),
                _decode_value(obj["action"]["payload"]),
            )
        fragment = _expect_opt_str(obj["fragment"], "fragment")
        if seq > 0 and not (changes or action or fragment):
            raise MalformedMessage("non-bootstrap message carries no changes")
        return ClientDelta(session, seq, tuple(changes), action, fragment)
    except RecursionError as exc:
        raise MalformedMessage("nesting too deep") from exc


def decode_server(data: bytes) -> ServerDelta:
    try:
        obj = _parse(data)
        _expect_keys(obj, _SERVER_KEYS, "server message")
        _check_version(obj)
        session = _expect_str(obj["session"], "session")
        ack = _expect_count(obj["ack"], "ack")
        raw_directives = obj["directives"]
        if not isinstance(raw_directives, list):
            raise MalformedMessage("directives must be a list")
        directives = tuple(_decode_directive(d) for d in raw_directives)
        fragment = _expect_opt_str(obj["fragment"], "fragment")
        return ServerDelta(session, ack, directives, fragment)
    except RecursionError as exc:
        raise MalformedMessage("nesting too deep") from exc
