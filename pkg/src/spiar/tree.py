"""Server-side stateful UI component tree.

Typed components with properties, hierarchy, and event listeners; every
mutation is reported to an attached change hook so the update manager can
render deltas. ``render_full`` produces the client representational model
and is the oracle all delta machinery is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

from . import updates
from .model import ModelNode
from .widgets import WIDGET_TYPES, copy_value, value_matches_kind


class TreeError(Exception):
    pass


class UnknownType(TreeError):
    pass


class UnknownProperty(TreeError):
    pass


class PropertyTypeMismatch(TreeError):
    pass


class UnknownId(TreeError):
    pass


class NotDetached(TreeError):
    pass


class NotAContainer(TreeError):
    pass


class IndexOutOfRange(TreeError):
    pass


class CannotDetachRoot(TreeError):
    pass


class UnknownEventType(TreeError):
    pass


class WouldCycle(TreeError):
    """Attaching here would make the component an ancestor of itself."""


@dataclass(frozen=True)
class ListenerEvent:
    """Passed to server-side listeners when an event fires."""

    target: str
    event: str
    payload: object = None


Listener = Callable[[ListenerEvent], None]


@dataclass(frozen=True)
class ListenerHandle:
    component_id: str
    event: str
    slot: int


@dataclass
class Component:
    id: str
    type: str
    properties: dict
    listeners: dict[str, list[Listener]] = field(default_factory=dict)
    children: list[str] = field(default_factory=list)
    parent: str | None = None


class ComponentTree:
    """Holds the root ``window`` plus every live component, indexed by id.

    Ids are server-issued, ``c<n>`` from a monotone counter, and are never
    reused within the tree's lifetime. Not thread-safe: confined to one
    session under the runtime's serialization contract.
    """

    def __init__(self):
        self._counter = 0
        self.index: dict[str, Component] = {}
        self.change_hook: Callable[[updates.StateChange], None] | None = None
        self.root = self._new_component("window", {})

    # -- internals ----------------------------------------------------------

    def _new_component(self, type_name: str, properties: dict) -> str:
        widget = WIDGET_TYPES.get(type_name)
        if widget is None:
            raise UnknownType(type_name)
        for name, value in properties.items():
            kind = widget.properties.get(name)
            if kind is None:
                raise UnknownProperty(name)
            if not value_matches_kind(kind, value):
                raise PropertyTypeMismatch(f"{type_name}.{name}")
        props = {k: copy_value(v) for k, v in widget.defaults.items()}
        props.update({k: copy_value(v) for k, v in properties.items()})
        self._counter += 1
        comp_id = f"c{self._counter}"
        self.index[comp_id] = Component(comp_id, type_name, props)
        return comp_id

    def _notify(self, change: updates.StateChange) -> None:
        if self.change_hook is not None:
            self.change_hook(change)

    def get(self, comp_id: str) -> Component:
        comp = self.index.get(comp_id)
        if comp is None:
            raise UnknownId(comp_id)
        return comp

    # -- mutation operations --------------------------------------------------

    def create(self, type_name: str, properties: dict | None = None) -> str:
        """New detached component with defaults filled; returns its fresh id."""
        return self._new_component(type_name, properties or {})

    def attach(self, parent_id: str, child_id: str, index: int) -> None:
        parent = self.get(parent_id)
        child = self.get(child_id)
        if not WIDGET_TYPES[parent.type].container:
            raise NotAContainer(parent_id)
        if child_id == self.root or child.parent is not None:
            raise NotDetached(child_id)
        if parent_id in self._subtree_ids(child_id):
            raise WouldCycle(f"{parent_id} is inside {child_id}")
        if not 0 <= index <= len(parent.children):
            raise IndexOutOfRange(index)
        parent.children.insert(index, child_id)
        child.parent = parent_id
        self._notify(updates.ChildAttached(parent_id, child_id, index))

    def detach(self, comp_id: str) -> None:
        """Remove the component and its whole subtree from the tree."""
        comp = self.get(comp_id)
        if comp_id == self.root:
            raise CannotDetachRoot(comp_id)
        if comp.parent is not None:
            self.index[comp.parent].children.remove(comp_id)
        for removed in self._subtree_ids(comp_id):
            del self.index[removed]
        self._notify(updates.ChildDetached(comp_id))

    def set_property(self, comp_id: str, name: str, value) -> None:
        comp = self.get(comp_id)
        kind = WIDGET_TYPES[comp.type].properties.get(name)
        if kind is None:
            raise UnknownProperty(name)
        if not value_matches_kind(kind, value):
            raise PropertyTypeMismatch(f"{comp.type}.{name}")
        if comp.properties[name] == value:
            return  # no-op writes are invisible to the update manager
        comp.properties[name] = copy_value(value)
        self._notify(updates.PropertyChanged(comp_id, name, copy_value(value)))

    def add_listener(self, comp_id: str, event: str, listener: Listener) -> ListenerHandle:
        comp = self.get(comp_id)
        if event not in WIDGET_TYPES[comp.type].events:
            raise UnknownEventType(f"{comp.type} does not emit {event!r}")
        slots = comp.listeners.setdefault(event, [])
        slots.append(listener)
        self._notify(updates.ListenersChanged(comp_id, frozenset(comp.listeners)))
        return ListenerHandle(comp_id, event, len(slots) - 1)

    def fire(self, comp_id: str, event: str, payload=None) -> int:
        """Invoke listeners in registration order; returns how many ran."""
        comp = self.get(comp_id)
        listeners = list(comp.listeners.get(event, ()))
        for listener in listeners:
            listener(ListenerEvent(comp_id, event, payload))
        return len(listeners)

    # -- traversal and rendering ----------------------------------------------

    def _subtree_ids(self, comp_id: str) -> list[str]:
        out = []
        stack = [comp_id]
        while stack:
            current = stack.pop()
            out.append(current)
            stack.extend(reversed(self.index[current].children))
        return out

    def reachable_ids(self) -> set[str]:
        return set(self._subtree_ids(self.root))

    def iter_preorder(self) -> Iterator[str]:
        yield from self._subtree_ids(self.root)

    def parent_of(self, comp_id: str) -> str | None:
        return self.get(comp_id).parent

    def child_index(self, parent_id: str, child_id: str) -> int:
        return self.get(parent_id).children.index(child_id)

    def listened_events(self, comp_id: str) -> frozenset[str]:
        return frozenset(self.get(comp_id).listeners)

    def render_subtree(self, comp_id: str) -> ModelNode:
        comp = self.get(comp_id)
        return ModelNode(
            id=comp.id,
            type=comp.type,
            properties={k: copy_value(v) for k, v in comp.properties.items()},
            listened_events=set(comp.listeners),
            children=[self.render_subtree(c) for c in comp.children],
        )

    def render_full(self) -> ModelNode:
        """Pure structural copy of the whole tree as the client should see it."""
        return self.render_subtree(self.root)
