"""Built-in widget vocabulary: property schemas, defaults, and event types.

Every property name and event type the framework ever accepts is declared
here; the component tree, the wire codec, and the client engine all consult
the same table, so nothing outside it can appear on the wire.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Value kinds a widget property may hold.
TEXT = "text"
INTEGER = "integer"
REAL = "real"
BOOLEAN = "boolean"
TEXT_LIST = "text-list"

# Integers must survive a 64-bit signed wire representation.
INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

# PropertyValue: str | int | float | bool | None | list[str]
PropertyValue = object

ACTION = "action"
VALUE_CHANGE = "value-change"


@dataclass(frozen=True)
class WidgetType:
    name: str
    properties: dict[str, str]  # property name -> value kind
    defaults: dict[str, object]
    events: frozenset[str]
    container: bool


def _widget(name, properties, defaults, events, container=False):
    return WidgetType(name, properties, defaults, frozenset(events), container)


WIDGET_TYPES: dict[str, WidgetType] = {
    w.name: w
    for w in (
        _widget("window", {}, {}, (), container=True),
        _widget("panel", {"style": TEXT}, {"style": ""}, (), container=True),
        _widget("label", {"text": TEXT}, {"text": ""}, ()),
        _widget(
            "button",
            {"text": TEXT, "enabled": BOOLEAN},
            {"text": "", "enabled": True},
            (ACTION,),
        ),
        _widget(
            "textfield",
            {"value": TEXT, "enabled": BOOLEAN},
            {"value": "", "enabled": True},
            (VALUE_CHANGE, ACTION),
        ),
        _widget(
            "checkbox",
            {"checked": BOOLEAN, "text": TEXT},
            {"checked": False, "text": ""},
            (VALUE_CHANGE,),
        ),
        _widget(
            "listbox",
            {"items": TEXT_LIST, "selected-index": INTEGER},
            {"items": [], "selected-index": -1},
            (VALUE_CHANGE,),
        ),
    )
}

# The one property per type that carries the widget's user-editable value.
# These are exactly the properties a client is allowed to write.
VALUE_PROPERTIES: dict[str, str] = {
    "textfield": "value",
    "checkbox": "checked",
    "listbox": "selected-index",
}

CLIENT_WRITABLE: frozenset[tuple[str, str]] = frozenset(
    VALUE_PROPERTIES.items()
)


def value_matches_kind(kind: str, value) -> bool:
    """True when ``value`` inhabits the given property kind."""
    if kind == TEXT:
        return isinstance(value, str)
    if kind == BOOLEAN:
        return isinstance(value, bool)
    if kind == INTEGER:
        return (
            isinstance(value, int)
            and not isinstance(value, bool)
            and INT64_MIN <= value <= INT64_MAX
        )
    if kind == REAL:
        return isinstance(value, float) and math.isfinite(value)
    if kind == TEXT_LIST:
        return isinstance(value, list) and all(isinstance(x, str) for x in value)
    return False


def is_wire_value(value) -> bool:
    """True when ``value`` belongs to the codec's value domain at all.

    Scalars, null, and lists of text; reals must be finite and integers
    fit in 64 signed bits.
    """
    if value is None or isinstance(value, (str, bool)):
        return True
    if isinstance(value, int):
        return INT64_MIN <= value <= INT64_MAX
    if isinstance(value, float):
        return math.isfinite(value)
    if isinstance(value, list):
        return all(isinstance(x, str) for x in value)
    return False


def copy_value(value):
    """Snapshot a property value (lists are the only mutable kind)."""
    if isinstance(value, list):
        return list(value)
    return value
