"""Seeded generators shared by the test modules and the acceptance suite.

Everything here is driven by an explicit ``random.Random`` so failures
reproduce exactly. Message generators exercise the full wire grammar;
tree/app generators build random-but-valid component trees whose server
listeners perform deterministic mutations.
"""

from __future__ import annotations

import random
import string

from spiar.codec import ActionEvent, ClientDelta, PropertyWrite, ServerDelta
from spiar.model import ModelNode
from spiar.session import ApplicationDefinition
from spiar.tree import ComponentTree
from spiar.updates import Create, Remove, SetListeners, SetProperty
from spiar.widgets import (
    INT64_MAX,
    INT64_MIN,
    TEXT,
    TEXT_LIST,
    BOOLEAN,
    INTEGER,
    REAL,
    VALUE_PROPERTIES,
    WIDGET_TYPES,
)

_TEXT_POOL = string.ascii_letters + string.digits + " _-.,:;!?/\\\"'{}[]<>«µσ✓\n\t"


def rand_text(rng: random.Random, max_len: int = 12) -> str:
    return "".join(rng.choice(_TEXT_POOL) for _ in range(rng.randint(0, max_len)))


def rand_value(rng: random.Random):
    tag = rng.choice(("text", "int", "real", "bool", "null", "list"))
    if tag == "text":
        return rand_text(rng)
    if tag == "int":
        return rng.choice(
            (0, 1, -1, 42, INT64_MIN, INT64_MAX, rng.randint(-(10**12), 10**12))
        )
    if tag == "real":
        return rng.choice((0.0, -0.0, 1.5, -2.25, 1e-9, 3.141592653589793,
                           rng.uniform(-1e6, 1e6)))
    if tag == "bool":
        return rng.choice((True, False))
    if tag == "null":
        return None
    return [rand_text(rng, 6) for _ in range(rng.randint(0, 4))]


def rand_value_for_kind(rng: random.Random, kind: str):
    if kind == TEXT:
        return rand_text(rng)
    if kind == BOOLEAN:
        return rng.choice((True, False))
    if kind == INTEGER:
        return rng.randint(-100, 100)
    if kind == REAL:
        return rng.uniform(-100.0, 100.0)
    if kind == TEXT_LIST:
        return [rand_text(rng, 6) for _ in range(rng.randint(0, 4))]
    raise AssertionError(kind)


def rand_id(rng: random.Random) -> str:
    return f"c{rng.randint(1, 999)}"


# --- wire messages -------------------------------------------------------------

def rand_client_message(rng: random.Random) -> ClientDelta:
    seq = rng.choice((0, rng.randint(1, 10**6)))
    changes = tuple(
        PropertyWrite(rand_id(rng), rand_text(rng, 8) or "p", rand_value(rng))
        for _ in range(rng.randint(0, 4))
    )
    action = None
    if rng.random() < 0.5:
        action = ActionEvent(
            rand_id(rng),
            rng.choice(("action", "value-change")),
            rand_value(rng) if rng.random() < 0.5 else None,
        )
    fragment = rand_text(rng, 6).strip() or None if rng.random() < 0.3 else None
    if seq > 0 and not (changes or action or fragment):
        action = ActionEvent(rand_id(rng), "action")
    return ClientDelta(
        session=rng.getrandbits(64).to_bytes(8, "big").hex() if seq else "",
        seq=seq,
        state_changes=changes,
        action=action,
        fragment=fragment,
    )


def rand_model_node(rng: random.Random, depth: int = 0, counter=None) -> ModelNode:
    if counter is None:
        counter = [0]
    counter[0] += 1
    type_name = rng.choice(list(WIDGET_TYPES))
    widget = WIDGET_TYPES[type_name]
    n_children = 0 if depth >= 3 or rng.random() < 0.5 else rng.randint(1, 3)
    return ModelNode(
        id=f"c{counter[0]}",
        type=type_name,
        properties={name: rand_value(rng) for name in widget.properties},
        listened_events=set(
            rng.sample(sorted(widget.events), rng.randint(0, len(widget.events)))
        ),
        children=[rand_model_node(rng, depth + 1, counter) for _ in range(n_children)],
    )


def rand_directive(rng: random.Random):
    kind = rng.choice(("create", "remove", "set_property", "set_listeners"))
    if kind == "create":
        parent = None if rng.random() < 0.2 else rand_id(rng)
        return Create(parent, rng.randint(0, 5), rand_model_node(rng))
    if kind == "remove":
        return Remove(rand_id(rng))
    if kind == "set_property":
        return SetProperty(rand_id(rng), rand_text(rng, 8) or "p", rand_value(rng))
    return SetListeners(
        rand_id(rng), frozenset(rng.sample(("action", "value-change"), rng.randint(0, 2)))
    )


def rand_server_message(rng: random.Random) -> ServerDelta:
    return ServerDelta(
        session=rng.getrandbits(64).to_bytes(8, "big").hex(),
        ack=rng.randint(0, 10**6),
        directives=tuple(rand_directive(rng) for _ in range(rng.randint(0, 4))),
        fragment=rand_text(rng, 6).strip() or None if rng.random() < 0.3 else None,
    )


# --- random component trees ------------------------------------------------------

_CHILD_TYPES = ("panel", "label", "button", "textfield", "checkbox", "listbox")


def grow_random_tree(tree: ComponentTree, rng: random.Random, extra: int) -> list[str]:
    """Attach ``extra`` randomly-typed components; returns their ids."""
    added = []
    for _ in range(extra):
        containers = [
            cid for cid in tree.iter_preorder()
            if WIDGET_TYPES[tree.get(cid).type].container
        ]
        parent = rng.choice(containers)
        type_name = rng.choice(_CHILD_TYPES)
        widget = WIDGET_TYPES[type_name]
        props = {
            name: rand_value_for_kind(rng, kind)
            for name, kind in widget.properties.items()
            if rng.random() < 0.5
        }
        comp = tree.create(type_name, props)
        tree.attach(parent, comp, rng.randint(0, len(tree.get(parent).children)))
        added.append(comp)
    return added


def random_tree(rng: random.Random, size: int) -> ComponentTree:
    """A fresh tree with ``size`` components in total (root included)."""
    tree = ComponentTree()
    grow_random_tree(tree, rng, size - 1)
    return tree


# --- random applications with deterministic server listeners ---------------------

def random_app(seed: int, size: int, listener_count: int) -> ApplicationDefinition:
    """App whose init grows a seeded tree and wires seeded mutating listeners.

    Each listener owns its own ``Random`` stream (re-created per session in
    init), so a fixed message sequence always produces the same tree. The
    listeners mutate freely but only ever detach subtrees they created
    themselves, keeping user-facing widgets stable.
    """

    def init(tree: ComponentTree) -> None:
        rng = random.Random(seed)
        grow_random_tree(tree, rng, size - 1)
        originals = list(tree.iter_preorder())
        server_created: list[str] = []

        def make_listener(listener_seed: int):
            listener_rng = random.Random(listener_seed)

            def listener(event):
                for _ in range(listener_rng.randint(1, 3)):
                    _random_mutation(tree, listener_rng, originals, server_created)

            return listener

        eligible = [
            (cid, event)
            for cid in originals
            for event in sorted(WIDGET_TYPES[tree.get(cid).type].events)
        ]
        rng.shuffle(eligible)
        for i, (cid, event) in enumerate(eligible[:listener_count]):
            tree.add_listener(cid, event, make_listener(seed * 1000 + i))

    return ApplicationDefinition(init=init)


def _random_mutation(tree, rng, originals, server_created) -> None:
    choice = rng.random()
    live_created = [cid for cid in server_created if cid in tree.index]
    if choice < 0.45:
        # tweak a property on any live component
        live = [cid for cid in tree.iter_preorder()]
        cid = rng.choice(live)
        widget = WIDGET_TYPES[tree.get(cid).type]
        if widget.properties:
            name = rng.choice(sorted(widget.properties))
            tree.set_property(cid, name, rand_value_for_kind(rng, widget.properties[name]))
    elif choice < 0.75:
        # grow a small server-owned subtree
        containers = [
            cid for cid in tree.iter_preorder()
            if WIDGET_TYPES[tree.get(cid).type].container
        ]
        parent = rng.choice(containers)
        root = tree.create(rng.choice(_CHILD_TYPES))
        tree.attach(parent, root, rng.randint(0, len(tree.get(parent).children)))
        server_created.append(root)
        if WIDGET_TYPES[tree.get(root).type].container and rng.random() < 0.5:
            leaf = tree.create("label", {"text": rand_text(rng, 6)})
            tree.attach(root, leaf, 0)
    elif choice < 0.9 and live_created:
        tree.detach(rng.choice(live_created))
    else:
        # arm a listener on an original widget (no-op body is fine here)
        candidates = [
            cid for cid in originals
            if WIDGET_TYPES[tree.get(cid).type].events
        ]
        if candidates:
            cid = rng.choice(candidates)
            event = rng.choice(sorted(WIDGET_TYPES[tree.get(cid).type].events))
            tree.add_listener(cid, event, lambda ev: None)
