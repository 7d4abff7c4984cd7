"""Single-page application framework built on client/server delta messages.

Server-side component trees render a client representational model; the two
stay synchronized exclusively through canonical delta messages, with one
message in flight per session and per-session sequential processing.
"""

from .codec import (
    ActionEvent,
    ClientDelta,
    MalformedMessage,
    PropertyWrite,
    ServerDelta,
    decode_client,
    decode_server,
    encode_client,
    encode_server,
)
from .engine import ClientEngine, UserEvent, builtin_handlers
from .model import ModelNode
from .session import ApplicationDefinition, SessionRuntime
from .transport import DeltaServer, ServerConfig, make_server
from .tree import ComponentTree

__all__ = [
    "ActionEvent",
    "ApplicationDefinition",
    "ClientDelta",
    "ClientEngine",
    "ComponentTree",
    "DeltaServer",
    "MalformedMessage",
    "ModelNode",
    "PropertyWrite",
    "ServerConfig",
    "ServerDelta",
    "SessionRuntime",
    "UserEvent",
    "builtin_handlers",
    "decode_client",
    "decode_server",
    "encode_client",
    "encode_server",
    "make_server",
]
