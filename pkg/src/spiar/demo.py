"""Bundled demo application: a form view and a list view.

The form copies validated input into a status label on the server; the
list view grows a listbox. Between them the demo exercises every directive
kind, both event categories, and both safe view states.
"""

from __future__ import annotations

from .session import ApplicationDefinition
from .tree import ComponentTree
from .widgets import ACTION


def _content_panel(tree: ComponentTree) -> str:
    root = tree.get(tree.root)
    for child_id in root.children:
        if tree.get(child_id).type == "panel":
            return child_id
    raise LookupError("demo tree has no content panel")


def _clear(tree: ComponentTree, panel_id: str) -> None:
    for child_id in list(tree.get(panel_id).children):
        tree.detach(child_id)


def build_form_view(tree: ComponentTree) -> None:
    panel = _content_panel(tree)
    _clear(tree, panel)
    field = tree.create("textfield")
    button = tree.create("button", {"text": "Validate"})
    status = tree.create("label")
    tree.attach(panel, field, 0)
    tree.attach(panel, button, 1)
    tree.attach(panel, status, 2)

    def on_validate(event):
        value = tree.get(field).properties["value"]
        if value.strip():
            tree.set_property(status, "text", f"ok: {value}")
            # First valid submit also arms Enter-to-revalidate on the field,
            # which surfaces a listener change to the client.
            if ACTION not in tree.get(field).listeners:
                tree.add_listener(field, ACTION, on_validate)
        else:
            tree.set_property(status, "text", "invalid: empty input")

    tree.add_listener(button, ACTION, on_validate)


def build_list_view(tree: ComponentTree) -> None:
    panel = _content_panel(tree)
    _clear(tree, panel)
    box = tree.create("listbox")
    button = tree.create("button", {"text": "Add"})
    tree.attach(panel, box, 0)
    tree.attach(panel, button, 1)

    def on_add(event):
        items = list(tree.get(box).properties["items"])
        items.append(f"item {len(items) + 1}")
        tree.set_property(box, "items", items)

    tree.add_listener(button, ACTION, on_add)


def _init(tree: ComponentTree) -> None:
    title = tree.create("label", {"text": "delta demo"})
    panel = tree.create("panel", {"style": "content"})
    tree.attach(tree.root, title, 0)
    tree.attach(tree.root, panel, 1)
    build_form_view(tree)  # default view on a plain bootstrap


def demo_app() -> ApplicationDefinition:
    return ApplicationDefinition(
        init=_init,
        views={"form": build_form_view, "list": build_list_view},
    )
