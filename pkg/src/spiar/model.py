"""Client-side representational model: the run-time tree mirroring the UI.

The server renders a ``ModelNode`` tree from its component tree; the client
engine holds one and mutates it by applying delta directives. Structural
equality between the two is the framework's master oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .widgets import copy_value


@dataclass
class ModelNode:
    id: str
    type: str
    properties: dict = field(default_factory=dict)
    listened_events: set = field(default_factory=set)
    children: list["ModelNode"] = field(default_factory=list)


def clone_node(node: ModelNode) -> ModelNode:
    return ModelNode(
        id=node.id,
        type=node.type,
        properties={k: copy_value(v) for k, v in node.properties.items()},
        listened_events=set(node.listened_events),
        children=[clone_node(c) for c in node.children],
    )


def walk(root: ModelNode | None) -> Iterator[ModelNode]:
    """Depth-first pre-order traversal."""
    if root is None:
        return
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def find_node(root: ModelNode | None, node_id: str) -> ModelNode | None:
    for node in walk(root):
        if node.id == node_id:
            return node
    return None


def find_parent(root: ModelNode | None, node_id: str) -> tuple[ModelNode, int] | None:
    """Parent node and child index of ``node_id``, or None for root/missing."""
    for node in walk(root):
        for i, child in enumerate(node.children):
            if child.id == node_id:
                return node, i
    return None


def node_count(root: ModelNode | None) -> int:
    return sum(1 for _ in walk(root))
