"""Update manager: records component-tree changes and renders them as deltas.

During one processing cycle the tree reports every mutation into an
``UpdateLog``; ``drain`` coalesces the log into the minimal ordered list of
directives that transforms the client model from its pre-cycle state to a
mirror of the post-cycle tree. ``apply_directives`` is the generic applier
used by the client engine and by log replay.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

from .model import ModelNode, clone_node, find_node, find_parent, walk

if TYPE_CHECKING:
    from .tree import ComponentTree


# --- state changes (what the tree reports) ---------------------------------

@dataclass(frozen=True)
class PropertyChanged:
    id: str
    name: str
    value: object


@dataclass(frozen=True)
class ChildAttached:
    parent_id: str
    child_id: str
    index: int


@dataclass(frozen=True)
class ChildDetached:
    id: str


@dataclass(frozen=True)
class ListenersChanged:
    id: str
    events: frozenset[str]


StateChange = Union[PropertyChanged, ChildAttached, ChildDetached, ListenersChanged]


# --- directives (what the client applies) -----------------------------------

@dataclass(frozen=True)
class Create:
    parent_id: str | None  # None only for the bootstrap root
    index: int
    node: ModelNode  # carries the entire subtree being attached


@dataclass(frozen=True)
class Remove:
    id: str


@dataclass(frozen=True)
class SetProperty:
    id: str
    name: str
    value: object


@dataclass(frozen=True)
class SetListeners:
    id: str
    events: frozenset[str]


Directive = Union[Create, Remove, SetProperty, SetListeners]


class CycleClosed(Exception):
    """Recording attempted outside an open processing cycle."""


class UpdateLog:
    """Ordered per-cycle change log; empty between cycles."""

    def __init__(self):
        self.changes: list[StateChange] = []
        self.cycle_open = False
        # Ids root-reachable (client-visible) when the cycle opened; needed
        # to tell removals of client-known components from removals of
        # components the client never saw.
        self._visible_at_open: set[str] = set()

    def open(self, tree: "ComponentTree") -> None:
        if self.cycle_open:
            raise RuntimeError("processing cycle already open")
        assert not self.changes
        self._visible_at_open = tree.reachable_ids()
        self.cycle_open = True

    def record(self, change: StateChange) -> None:
        if not self.cycle_open:
            raise CycleClosed("no processing cycle is open")
        self.changes.append(change)

    def notify(self, change: StateChange) -> None:
        """Tree-side hook: silently ignored outside a cycle (e.g. app init)."""
        if self.cycle_open:
            self.changes.append(change)

    def discard(self) -> None:
        """Abort the cycle, dropping any recorded changes."""
        self.changes.clear()
        self.cycle_open = False

    def drain(self, tree: "ComponentTree") -> list[Directive]:
        """Coalesce the cycle into ordered directives and close the cycle.

        Draining a closed log yields [] so a double drain is harmless.
        """
        if not self.cycle_open:
            return []
        visible_pre = self._visible_at_open
        visible_post = tree.reachable_ids()
        new_ids = visible_post - visible_pre

        # Removals of client-known subtree roots, in record order. Record
        # order (not pre-order) keeps nested detach sequences applicable.
        removes: list[Directive] = [
            Remove(c.id)
            for c in self.changes
            if isinstance(c, ChildDetached) and c.id in visible_pre
        ]

        # Newly visible subtree roots: nodes whose post-cycle parent was
        # already known to the client. Pre-order traversal of the post tree
        # yields them parent-first, siblings left to right, so creation
        # indices are valid as applied.
        creates: list[Directive] = []
        for comp_id in tree.iter_preorder():
            if comp_id in new_ids and tree.parent_of(comp_id) in visible_pre:
                parent_id = tree.parent_of(comp_id)
                index = tree.child_index(parent_id, comp_id)
                creates.append(Create(parent_id, index, tree.render_subtree(comp_id)))

        # Residual property/listener updates on components the client knew
        # before and still knows after: first record position, last value.
        # Changes to removed components are dropped; changes inside created
        # subtrees are already folded into the Create payload.
        residual: dict[tuple, Directive] = {}
        surviving = visible_pre & visible_post
        for c in self.changes:
            if isinstance(c, PropertyChanged) and c.id in surviving:
                residual[("p", c.id, c.name)] = SetProperty(c.id, c.name, c.value)
            elif isinstance(c, ListenersChanged) and c.id in surviving:
                residual[("l", c.id)] = SetListeners(c.id, c.events)

        self.changes.clear()
        self.cycle_open = False
        self._visible_at_open = set()
        return removes + creates + list(residual.values())


# --- directive application ---------------------------------------------------

class ApplyError(Exception):
    """Base for failures while applying directives to a model."""


class MalformedDirective(ApplyError):
    pass


class UnknownComponent(ApplyError):
    def __init__(self, component_id: str):
        super().__init__(f"unknown component {component_id!r}")
        self.component_id = component_id


def apply_directives(root: ModelNode | None, directives) -> ModelNode | None:
    """Apply directives in order to a model, returning the new root.

    The model is mutated in place except when a bootstrap Create replaces an
    empty model. Nodes carried by Create are cloned, never aliased.
    """
    for d in directives:
        if isinstance(d, Create):
            if d.parent_id is None:
                if root is not None:
                    raise MalformedDirective("root create on a non-empty model")
                root = clone_node(d.node)
                continue
            existing = {n.id for n in walk(root)}
            carried = {n.id for n in walk(d.node)}
            if existing & carried:
                raise MalformedDirective(
                    f"duplicate ids {sorted(existing & carried)!r}"
                )
            parent = find_node(root, d.parent_id)
            if parent is None:
                raise UnknownComponent(d.parent_id)
            if not 0 <= d.index <= len(parent.children):
                raise MalformedDirective(
                    f"index {d.index} out of range for {d.parent_id!r}"
                )
            parent.children.insert(d.index, clone_node(d.node))
        elif isinstance(d, Remove):
            if root is not None and root.id == d.id:
                raise MalformedDirective("cannot remove the root")
            found = find_parent(root, d.id)
            if found is None:
                raise UnknownComponent(d.id)
            parent, index = found
            del parent.children[index]
        elif isinstance(d, SetProperty):
            node = find_node(root, d.id)
            if node is None:
                raise UnknownComponent(d.id)
            node.properties[d.name] = d.value
        elif isinstance(d, SetListeners):
            node = find_node(root, d.id)
            if node is None:
                raise UnknownComponent(d.id)
            node.listened_events = set(d.events)
        else:
            raise MalformedDirective(f"unknown directive {d!r}")
    return root
