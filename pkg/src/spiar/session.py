"""Per-client sessions: state application, event dispatch, delta rendering.

Each session owns a component tree and an update log. Requests for one
session are processed strictly sequentially (per-session mutex) while
distinct sessions proceed concurrently; the last response is cached so a
retry of the previous sequence number is answered byte-identically without
touching the tree.
"""

from __future__ import annotations

import re
import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

from . import tree as tree_mod
from .codec import ClientDelta, MalformedMessage, ServerDelta
from .tree import ComponentTree
from .updates import Create, UpdateLog
from .widgets import CLIENT_WRITABLE, VALUE_CHANGE, WIDGET_TYPES, value_matches_kind

# Safe view states are addressed by URI fragments, so names are restricted
# to RFC 3986 unreserved characters.
_FRAGMENT_RE = re.compile(r"^[A-Za-z0-9._~-]+$")


class SessionError(Exception):
    pass


class UnknownSession(SessionError):
    pass


class OutOfOrder(SessionError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected seq {expected}, got {got}")
        self.expected = expected
        self.got = got


class UnknownComponent(SessionError):
    def __init__(self, component_id: str):
        super().__init__(f"unknown component {component_id!r}")
        self.component_id = component_id


class UnknownEvent(SessionError):
    pass


class UnknownView(SessionError):
    pass


@dataclass
class ApplicationDefinition:
    """Server application: initial tree builder plus named safe view states.

    ``init`` receives a fresh tree (root window already present) and builds
    the UI, registering listeners as closures over that tree. Each view
    procedure mutates the tree to the named state and must be a function of
    tree state only, so a view reached by navigation equals the same view
    reached at bootstrap.
    """

    init: Callable[[ComponentTree], None]
    views: dict[str, Callable[[ComponentTree], None]] = field(default_factory=dict)

    def __post_init__(self):
        for name in self.views:
            if not _FRAGMENT_RE.match(name):
                raise ValueError(f"view name {name!r} is not a valid URI fragment")


class Session:
    def __init__(self, session_id: str, tree: ComponentTree, now: float):
        self.id = session_id
        self.tree = tree
        self.log = UpdateLog()
        self.expected_seq = 1
        self.last_response: ServerDelta | None = None
        self.current_view: str | None = None
        self.lock = threading.Lock()
        self.last_access = now
        tree.change_hook = self.log.notify


def _default_id_factory() -> str:
    return secrets.token_hex(16)  # 128 random bits


class SessionRuntime:
    """Owns every live session; serializes processing within each one.

    ``id_factory`` and ``clock`` are injectable for deterministic replay in
    tests. ``idle_timeout`` (seconds) lazily expires sessions at lookup.
    """

    def __init__(
        self,
        app: ApplicationDefinition,
        *,
        id_factory: Callable[[], str] | None = None,
        clock: Callable[[], float] = time.monotonic,
        idle_timeout: float | None = None,
    ):
        if idle_timeout is not None and idle_timeout <= 0:
            raise ValueError("idle_timeout must be positive")
        self.app = app
        self._id_factory = id_factory or _default_id_factory
        self._clock = clock
        self._idle_timeout = idle_timeout
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- lifecycle ------------------------------------------------------------

    def create_session(self, fragment: str | None = None) -> tuple[str, ServerDelta]:
        """Fresh session; the response is a delta against the empty model."""
        if fragment is not None and fragment not in self.app.views:
            raise UnknownView(fragment)
        tree = ComponentTree()
        self.app.init(tree)
        if fragment is not None:
            self.app.views[fragment](tree)
        now = self._clock()
        session = Session(self._id_factory(), tree, now)
        session.current_view = fragment
        bootstrap = ServerDelta(
            session=session.id,
            ack=0,
            directives=(Create(None, 0, tree.render_full()),),
            fragment=fragment,
        )
        session.last_response = bootstrap
        with self._registry_lock:
            self._sessions[session.id] = session
        return session.id, bootstrap

    def expire_session(self, session_id: str) -> None:
        with self._registry_lock:
            if self._sessions.pop(session_id, None) is None:
                raise UnknownSession(session_id)

    def session_count(self) -> int:
        with self._registry_lock:
            return len(self._sessions)

    def session_tree(self, session_id: str) -> ComponentTree:
        """Test/inspection access to a session's live tree."""
        return self._lookup(session_id).tree

    def _lookup(self, session_id: str) -> Session:
        now = self._clock()
        with self._registry_lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(session_id)
            if (
                self._idle_timeout is not None
                and now - session.last_access > self._idle_timeout
            ):
                del self._sessions[session_id]
                raise UnknownSession(session_id)
            session.last_access = now
            return session

    # -- request processing ----------------------------------------------------

    def process(self, session_id: str, msg: ClientDelta) -> ServerDelta:
        session = self._lookup(session_id)
        if msg.session != session_id:
            raise UnknownSession(msg.session)
        with session.lock:
            if msg.seq == session.expected_seq - 1:
                return session.last_response  # idempotent retry, tree untouched
            if msg.seq != session.expected_seq:
                raise OutOfOrder(session.expected_seq, msg.seq)
            self._validate_writes(session.tree, msg)
            session.log.open(session.tree)
            try:
                response = self._run_cycle(session, msg)
            except BaseException:
                session.log.discard()
                raise
            session.last_response = response
            session.expected_seq += 1
            return response

    def _run_cycle(self, session: Session, msg: ClientDelta) -> ServerDelta:
        tree = session.tree
        changed: dict[str, object] = {}  # component id -> last written value
        for write in msg.state_changes:
            tree.set_property(write.id, write.name, write.value)
            changed[write.id] = write.value
        # Batch-then-notify: listeners observe all client writes at once.
        for comp_id, value in changed.items():
            tree.fire(comp_id, VALUE_CHANGE, value)
        if msg.fragment is not None:
            view = self.app.views.get(msg.fragment)
            if view is None:
                raise UnknownView(msg.fragment)
            view(tree)
            session.current_view = msg.fragment
        if msg.action is not None:
            self._dispatch_action(tree, msg, changed)
        directives = session.log.drain(tree)
        return ServerDelta(
            session=session.id,
            ack=msg.seq,
            directives=tuple(directives),
            fragment=session.current_view,
        )

    def _dispatch_action(self, tree: ComponentTree, msg: ClientDelta, changed) -> None:
        action = msg.action
        try:
            comp = tree.get(action.id)
        except tree_mod.UnknownId:
            raise UnknownComponent(action.id) from None
        vocabulary = WIDGET_TYPES[comp.type].events
        if action.event not in vocabulary:
            raise UnknownEvent(f"{comp.type} does not emit {action.event!r}")
        if action.event == VALUE_CHANGE and action.id in changed:
            return  # already fired once during state-change application
        tree.fire(action.id, action.event, action.payload)

    def _validate_writes(self, tree: ComponentTree, msg: ClientDelta) -> None:
        """Reject the whole message before applying any of its writes."""
        for write in msg.state_changes:
            try:
                comp = tree.get(write.id)
            except tree_mod.UnknownId:
                raise UnknownComponent(write.id) from None
            if (comp.type, write.name) not in CLIENT_WRITABLE:
                raise MalformedMessage(
                    f"property {comp.type}.{write.name} is not client-writable"
                )
            kind = WIDGET_TYPES[comp.type].properties[write.name]
            if not value_matches_kind(kind, write.value):
                raise MalformedMessage(
                    f"value for {comp.type}.{write.name} has the wrong type"
                )
