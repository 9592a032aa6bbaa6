"""Canonical conversation messages.

The provider-neutral message shape every adapter encodes from and decodes
to. Its JSON form (see ``message_to_json``) is the stable internal contract:

    {"role": "system" | "user" | "assistant" | "tool",
     "content": str,
     "tool_calls": [{"id": str, "name": str, "arguments": str}],   # assistant only
     "tool_call_id": str}                                          # tool only

``tool_calls`` and ``tool_call_id`` are omitted when empty/absent.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

from ..db import new_id
from ..errors import InvalidConversation, InvalidMessage


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"
    TOOL = "tool"


@dataclass(frozen=True)
class ToolCall:
    id: str
    name: str
    raw_arguments: str  # JSON object text, validated separately by design


@dataclass(frozen=True)
class Message:
    role: Role
    content: str = ""
    tool_calls: tuple[ToolCall, ...] = ()
    tool_call_id: str | None = None

    def __post_init__(self) -> None:
        if self.tool_calls and self.role is not Role.ASSISTANT:
            raise InvalidMessage("only ASSISTANT messages may carry tool_calls")
        if self.tool_call_id is not None and self.role is not Role.TOOL:
            raise InvalidMessage("only TOOL messages may carry tool_call_id")
        if self.role is Role.TOOL and not self.tool_call_id:
            raise InvalidMessage("TOOL messages must reference a tool_call_id")


def message_to_json(m: Message) -> dict:
    wire: dict = {"role": m.role.value, "content": m.content}
    if m.tool_calls:
        wire["tool_calls"] = [
            {"id": c.id, "name": c.name, "arguments": c.raw_arguments}
            for c in m.tool_calls
        ]
    if m.tool_call_id is not None:
        wire["tool_call_id"] = m.tool_call_id
    return wire


def message_from_json(wire: dict) -> Message:
    calls = tuple(
        ToolCall(id=c["id"], name=c["name"], raw_arguments=c["arguments"])
        for c in wire.get("tool_calls", ())
    )
    return Message(
        role=Role(wire["role"]),
        content=wire.get("content", "") or "",
        tool_calls=calls,
        tool_call_id=wire.get("tool_call_id"),
    )


class Conversation:
    """Ordered message history with structural invariants enforced on append.

    A non-empty system prompt is materialized as a leading SYSTEM message.
    The first appended message must be USER, and every tool call issued by an
    ASSISTANT message must be answered by exactly one TOOL message before the
    next ASSISTANT or USER message.
    """

    def __init__(self, system_prompt: str = "", conversation_id: str | None = None):
        self.id = conversation_id or new_id()
        self.system_prompt = system_prompt
        self.created_at = datetime.now(timezone.utc)
        self._messages: list[Message] = []
        if system_prompt:
            self._messages.append(Message(role=Role.SYSTEM, content=system_prompt))
        self._pending_tool_calls: set[str] = set()
        self._has_user_message = False

    @property
    def messages(self) -> tuple[Message, ...]:
        return tuple(self._messages)

    def append(self, message: Message) -> int:
        """Append and return the message's index. Raises InvalidConversation
        when the message would break the conversation structure."""
        if message.role is Role.SYSTEM:
            raise InvalidConversation("the system prompt is fixed at creation")
        if message.role is Role.TOOL:
            if message.tool_call_id not in self._pending_tool_calls:
                raise InvalidConversation(
                    f"TOOL message answers unknown or already-answered call "
                    f"{message.tool_call_id!r}"
                )
            self._pending_tool_calls.discard(message.tool_call_id)
        else:
            if self._pending_tool_calls:
                raise InvalidConversation(
                    "pending tool calls must be answered before the next turn"
                )
            if not self._has_user_message:
                if message.role is not Role.USER:
                    raise InvalidConversation("conversations must start with a USER message")
                self._has_user_message = True
            if message.role is Role.ASSISTANT and message.tool_calls:
                ids = [c.id for c in message.tool_calls]
                if len(set(ids)) != len(ids):
                    raise InvalidConversation("duplicate tool call ids in one message")
                self._pending_tool_calls.update(ids)
        self._messages.append(message)
        return len(self._messages) - 1
