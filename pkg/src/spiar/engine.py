"""Headless client engine: the reference state machine driving the protocol.

Maintains the representational model, decides per event whether a
round-trip is needed, buffers local state changes, and applies server
deltas. Send and receive are separate transitions, so the state stays
usable for local events while a message is outstanding; at most one
message may be in flight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .codec import ActionEvent, ClientDelta, PropertyWrite, ServerDelta
from .model import ModelNode, find_node
from .updates import MalformedDirective, UnknownComponent, apply_directives
from .widgets import VALUE_CHANGE, VALUE_PROPERTIES

__all__ = [
    "ClientEngine",
    "UserEvent",
    "builtin_handlers",
    "EngineError",
    "AckMismatch",
    "Busy",
    "MalformedDirective",
    "UnknownComponent",
]


class EngineError(Exception):
    pass


class AckMismatch(EngineError):
    pass


class Busy(EngineError):
    """A round-trip was requested while another message is outstanding."""


@dataclass(frozen=True)
class UserEvent:
    target: str
    event: str
    payload: object = None


# A client handler runs entirely locally: (engine, node, event) -> None.
Handler = Callable[["ClientEngine", ModelNode, UserEvent], None]


def _validate_nonempty_text(engine, node, ev):
    # Local form validation: flag empty input without a server round-trip.
    node.properties["style"] = "" if node.properties.get("value") else "invalid"


def _toggle_checkbox(engine, node, ev):
    # A payload-less click toggles the checkbox locally.
    if ev.payload is None:
        node.properties["checked"] = not node.properties.get("checked", False)


def builtin_handlers() -> dict[tuple[str, str], Handler]:
    return {
        ("textfield", VALUE_CHANGE): _validate_nonempty_text,
        ("checkbox", VALUE_CHANGE): _toggle_checkbox,
    }


class ClientEngine:
    """Non-blocking protocol state machine over a representational model."""

    def __init__(
        self,
        session: str,
        model: ModelNode,
        fragment: str | None = None,
        handlers: dict[tuple[str, str], Handler] | None = None,
    ):
        self.session = session
        self.model = model
        self.fragment = fragment
        self.next_seq = 1
        self.in_flight = False
        # (component id, property name) -> buffered value; later writes
        # overwrite in place, so at most one entry per key.
        self.pending: dict[tuple[str, str], object] = {}
        self.handlers = dict(handlers) if handlers else {}

    # -- transitions ------------------------------------------------------------

    @classmethod
    def bootstrap(
        cls,
        response: ServerDelta,
        fragment: str | None = None,
        handlers: dict[tuple[str, str], Handler] | None = None,
    ) -> "ClientEngine":
        """Build the model from the bootstrap delta against the empty model."""
        if response.ack != 0:
            raise AckMismatch(f"bootstrap requires ack 0, got {response.ack}")
        model = apply_directives(None, response.directives)
        if model is None:
            raise MalformedDirective("bootstrap produced no model")
        chosen = response.fragment if response.fragment is not None else fragment
        return cls(response.session, model, chosen, handlers)

    def simulate_event(self, ev: UserEvent) -> ClientDelta | None:
        """Run the round-trip decision procedure for one user event.

        Returns the message to send when the event is server-listened,
        None when it was absorbed locally.
        """
        node = find_node(self.model, ev.target)
        if node is None:
            raise UnknownComponent(ev.target)
        needs_roundtrip = ev.event in node.listened_events
        if needs_roundtrip and self.in_flight:
            raise Busy(ev.event)
        if ev.event == VALUE_CHANGE and ev.payload is not None:
            prop = VALUE_PROPERTIES.get(node.type)
            if prop is not None:
                # Optimistic local echo; buffered for the next round-trip.
                node.properties[prop] = ev.payload
                self.pending[(node.id, prop)] = ev.payload
        if needs_roundtrip:
            return self._send(action=ActionEvent(node.id, ev.event, ev.payload))
        handler = self.handlers.get((node.type, ev.event))
        if handler is not None:
            handler(self, node, ev)
        return None

    def navigate(self, fragment: str) -> ClientDelta:
        """Request the named view; pending changes ride along."""
        if self.in_flight:
            raise Busy("navigate")
        return self._send(fragment=fragment)

    def apply_server_delta(self, response: ServerDelta) -> None:
        if not self.in_flight:
            raise AckMismatch("no message outstanding")
        if response.ack != self.next_seq:
            raise AckMismatch(f"expected ack {self.next_seq}, got {response.ack}")
        self.model = apply_directives(self.model, response.directives)
        self.pending.clear()
        self.in_flight = False
        self.next_seq += 1
        self.fragment = response.fragment

    # -- internals ---------------------------------------------------------------

    def _send(self, action: ActionEvent | None = None, fragment: str | None = None) -> ClientDelta:
        writes = tuple(
            PropertyWrite(comp_id, name, value)
            for (comp_id, name), value in self.pending.items()
        )
        msg = ClientDelta(
            session=self.session,
            seq=self.next_seq,
            state_changes=writes,
            action=action,
            fragment=fragment,
        )
        self.pending.clear()
        self.in_flight = True
        return msg
