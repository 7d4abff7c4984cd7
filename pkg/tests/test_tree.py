"""Component tree: operation contracts, invariants, and the render oracle."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from spiar import tree as tree_mod
from spiar.tree import ComponentTree
from spiar.widgets import WIDGET_TYPES

from generators import random_tree


def brute_force_reachable(tree: ComponentTree) -> set[str]:
    """Independent traversal: follows children lists only, never the index."""
    seen = set()
    stack = [tree.root]
    while stack:
        cid = stack.pop()
        assert cid not in seen, "cycle detected"
        seen.add(cid)
        stack.extend(tree.index[cid].children)
    return seen


def assert_tree_valid(tree: ComponentTree) -> None:
    reachable = brute_force_reachable(tree)
    for cid, comp in tree.index.items():
        assert comp.id == cid
        assert len(set(comp.children)) == len(comp.children), "duplicate children"
        for child in comp.children:
            assert tree.index[child].parent == cid, "parent/child link broken"
        if comp.parent is not None:
            assert cid in tree.index[comp.parent].children
        numeric = int(cid[1:])
        assert numeric < tree._counter + 1
    assert tree.index[tree.root].type == "window"
    assert tree.index[tree.root].parent is None
    assert reachable <= set(tree.index)


# --- create ---------------------------------------------------------------------

def test_create_fills_defaults_and_counts_up():
    tree = ComponentTree()
    for _ in range(5):
        tree.create("panel")
    button = tree.create("button", {"text": "OK"})
    assert button == "c7"
    assert tree.get(button).properties == {"text": "OK", "enabled": True}


def test_create_label_all_defaults():
    tree = ComponentTree()
    label = tree.create("label")
    assert tree.get(label).properties == {"text": ""}


def test_create_rejects_foreign_property():
    tree = ComponentTree()
    with pytest.raises(tree_mod.UnknownProperty):
        tree.create("button", {"checked": True})


def test_create_rejects_unknown_type():
    tree = ComponentTree()
    with pytest.raises(tree_mod.UnknownType):
        tree.create("slider")


def test_create_rejects_bad_value_type():
    tree = ComponentTree()
    with pytest.raises(tree_mod.PropertyTypeMismatch):
        tree.create("button", {"enabled": "yes"})


# --- attach / detach ---------------------------------------------------------------

def test_attach_inserts_at_index():
    tree = ComponentTree()
    panel = tree.create("panel")
    tree.attach(tree.root, panel, 0)
    button = tree.create("button")
    tree.attach(panel, button, 0)
    assert tree.get(panel).children == [button]
    assert tree.get(button).parent == panel


def test_attach_index_out_of_range():
    tree = ComponentTree()
    panel = tree.create("panel")
    tree.attach(tree.root, panel, 0)
    button = tree.create("button")
    tree.attach(panel, button, 0)
    straggler = tree.create("button")
    with pytest.raises(tree_mod.IndexOutOfRange):
        tree.attach(panel, straggler, 5)


def test_attach_to_leaf_rejected():
    tree = ComponentTree()
    label = tree.create("label")
    tree.attach(tree.root, label, 0)
    button = tree.create("button")
    with pytest.raises(tree_mod.NotAContainer):
        tree.attach(label, button, 0)


def test_attach_attached_component_rejected():
    tree = ComponentTree()
    button = tree.create("button")
    tree.attach(tree.root, button, 0)
    with pytest.raises(tree_mod.NotDetached):
        tree.attach(tree.root, button, 0)


def test_attach_inside_own_subtree_rejected():
    tree = ComponentTree()
    outer = tree.create("panel")
    inner = tree.create("panel")
    tree.attach(outer, inner, 0)  # detached fragment outer > inner
    with pytest.raises(tree_mod.WouldCycle):
        tree.attach(inner, outer, 0)


def test_detach_closes_up_children():
    tree = ComponentTree()
    panel = tree.create("panel")
    tree.attach(tree.root, panel, 0)
    button = tree.create("button")
    tree.attach(panel, button, 0)
    tree.detach(button)
    assert tree.get(panel).children == []


def test_detach_root_rejected():
    tree = ComponentTree()
    with pytest.raises(tree_mod.CannotDetachRoot):
        tree.detach(tree.root)


def test_detach_removes_whole_subtree_from_index():
    # Oracle: count the reachable set with a brute-force traversal.
    tree = ComponentTree()
    panel = tree.create("panel")
    tree.attach(tree.root, panel, 0)
    for _ in range(3):
        child = tree.create("label")
        tree.attach(panel, child, 0)
    before = len(brute_force_reachable(tree))
    assert before == len(tree.index)
    tree.detach(panel)
    after = len(brute_force_reachable(tree))
    assert before - after == 4
    assert len(tree.index) == after


def test_detached_id_unknown_afterwards():
    tree = ComponentTree()
    label = tree.create("label")
    tree.attach(tree.root, label, 0)
    tree.detach(label)
    with pytest.raises(tree_mod.UnknownId):
        tree.detach(label)


# --- set_property / listeners ----------------------------------------------------

def test_set_property_updates():
    tree = ComponentTree()
    button = tree.create("button", {"text": "OK"})
    tree.set_property(button, "text", "Cancel")
    assert tree.get(button).properties["text"] == "Cancel"


def test_set_property_idempotent():
    tree = ComponentTree()
    button = tree.create("button")
    tree.set_property(button, "text", "Cancel")
    snapshot = dict(tree.get(button).properties)
    tree.set_property(button, "text", "Cancel")
    assert tree.get(button).properties == snapshot


def test_set_property_type_mismatch():
    tree = ComponentTree()
    field = tree.create("textfield")
    with pytest.raises(tree_mod.PropertyTypeMismatch):
        tree.set_property(field, "value", 42)


def test_add_listener_action_on_button():
    tree = ComponentTree()
    button = tree.create("button")
    tree.add_listener(button, "action", lambda ev: None)
    assert tree.listened_events(button) == frozenset({"action"})


def test_add_listener_value_change_on_textfield():
    tree = ComponentTree()
    field = tree.create("textfield")
    tree.add_listener(field, "value-change", lambda ev: None)
    assert tree.listened_events(field) == frozenset({"value-change"})


def test_add_listener_rejected_on_label():
    tree = ComponentTree()
    label = tree.create("label")
    with pytest.raises(tree_mod.UnknownEventType):
        tree.add_listener(label, "action", lambda ev: None)


def test_fire_runs_listeners_in_registration_order():
    tree = ComponentTree()
    button = tree.create("button")
    calls = []
    tree.add_listener(button, "action", lambda ev: calls.append("first"))
    tree.add_listener(button, "action", lambda ev: calls.append("second"))
    assert tree.fire(button, "action") == 2
    assert calls == ["first", "second"]


# --- render_full -------------------------------------------------------------------

def test_render_full_structural_copy():
    tree = ComponentTree()
    button = tree.create("button", {"text": "go"})
    tree.attach(tree.root, button, 0)
    tree.add_listener(button, "action", lambda ev: None)
    model = tree.render_full()
    assert model.id == tree.root and model.type == "window"
    (node,) = model.children
    assert node.id == button
    assert node.properties == {"text": "go", "enabled": True}
    assert node.listened_events == {"action"}


def test_render_full_is_pure():
    tree = ComponentTree()
    button = tree.create("button", {"text": "before"})
    tree.attach(tree.root, button, 0)
    first = tree.render_full()
    tree.set_property(button, "text", "after")
    assert first.children[0].properties["text"] == "before"
    again = tree.render_full()
    assert again.children[0].properties["text"] == "after"


def test_render_full_deterministic():
    tree = random_tree(random.Random(7), 40)
    assert tree.render_full() == tree.render_full()


def test_render_count_matches_reachability_oracle():
    # 200 random trees: rendered node count == brute-force reachable count.
    rng = random.Random(2024)
    for _ in range(200):
        tree = random_tree(rng, rng.randint(1, 30))
        rendered = sum(1 for _ in _walk_model(tree.render_full()))
        assert rendered == len(brute_force_reachable(tree))
        assert rendered == len(tree.index)


def _walk_model(node):
    yield node
    for child in node.children:
        yield from _walk_model(child)


# --- invariants under random operation sequences -----------------------------------

@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_op_sequences_preserve_invariants(seed):
    rng = random.Random(seed)
    tree = ComponentTree()
    issued = {tree.root}
    for _ in range(rng.randint(1, 40)):
        op = rng.random()
        live = list(tree.iter_preorder())
        if op < 0.5:
            containers = [c for c in live if WIDGET_TYPES[tree.get(c).type].container]
            comp = tree.create(rng.choice(list(WIDGET_TYPES)))
            assert comp not in issued, "id reuse"
            issued.add(comp)
            parent = rng.choice(containers)
            tree.attach(parent, comp, rng.randint(0, len(tree.get(parent).children)))
        elif op < 0.7 and len(live) > 1:
            tree.detach(rng.choice([c for c in live if c != tree.root]))
        elif op < 0.9:
            comp = rng.choice(live)
            widget = WIDGET_TYPES[tree.get(comp).type]
            if widget.properties:
                name = rng.choice(sorted(widget.properties))
                if widget.properties[name] == "text":
                    tree.set_property(comp, name, str(rng.random()))
        else:
            comp = rng.choice(live)
            events = sorted(WIDGET_TYPES[tree.get(comp).type].events)
            if events:
                tree.add_listener(comp, rng.choice(events), lambda ev: None)
        assert_tree_valid(tree)
        assert brute_force_reachable(tree) == set(tree.index)
