from .messages import Conversation, Message, Role, ToolCall, message_from_json, message_to_json
from .providers import (
    HttpChatProvider,
    ProviderAdapter,
    ScriptedProvider,
    complete,
    wire_roundtrip,
)
from .tools import (
    ToolDescriptor,
    ToolParam,
    ToolRegistry,
    invoke_tool,
    validate_tool_args,
)

__all__ = [
    "Conversation",
    "Message",
    "Role",
    "ToolCall",
    "message_from_json",
    "message_to_json",
    "HttpChatProvider",
    "ProviderAdapter",
    "ScriptedProvider",
    "complete",
    "wire_roundtrip",
    "ToolDescriptor",
    "ToolParam",
    "ToolRegistry",
    "invoke_tool",
    "validate_tool_args",
]
