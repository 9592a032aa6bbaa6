"""Provider adapters.

Two are bundled: a scripted provider that replays a deterministic turn
script (all desk-scale tests run offline against it) and a generic HTTP
chat-completions adapter with configurable base URL, model and key, which
also covers locally hosted model servers. Both expose a message-level
encode/decode pair whose round trip preserves role, content and tool calls.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from typing import Callable, Sequence

import requests

from ..errors import EncodingUnsupported, ProviderError, ProviderTimeout
from .messages import Conversation, Message, Role, ToolCall
from .tools import ToolDescriptor

OnToken = Callable[[str], None]


class ProviderAdapter(ABC):
    provider_id: str = "abstract"
    supports_streaming: bool = False

    @abstractmethod
    def to_wire(self, conversation: Conversation, tools: Sequence[ToolDescriptor]) -> dict:
        """Provider request payload for the conversation."""

    @abstractmethod
    def from_wire(self, response: dict) -> Message:
        """Decode a provider response into an ASSISTANT message."""

    @abstractmethod
    def encode_message(self, message: Message) -> dict: ...

    @abstractmethod
    def decode_message(self, wire: dict) -> Message: ...

    @abstractmethod
    def complete(
        self,
        conversation: Conversation,
        tools: Sequence[ToolDescriptor] = (),
        on_token: OnToken | None = None,
    ) -> Message:
        """One completion. Streaming adapters additionally call ``on_token``
        with incremental content."""


def wire_roundtrip(adapter: ProviderAdapter, message: Message) -> Message:
    """Encode then decode; identity on role/content/tool_calls by contract."""
    return adapter.decode_message(adapter.encode_message(message))


def complete(
    conversation: Conversation,
    tools: Sequence[ToolDescriptor],
    adapter: ProviderAdapter,
    on_token: OnToken | None = None,
) -> Message:
    return adapter.complete(conversation, tools, on_token=on_token)


class ScriptedProvider(ProviderAdapter):
    """Replays a fixed script of assistant turns.

    Script entries (dicts) support:
      {"content": "text"}                               plain reply
      {"content_chunks": ["par", "tial"]}               streamed reply
      {"tool_calls": [{"name": n, "arguments": {...}}]} tool-call reply
      {"error": {"status": 502, "body": "..."}}         provider failure

    Its wire format is the canonical message JSON itself.
    """

    provider_id = "scripted"
    supports_streaming = True

    def __init__(self, script: Sequence[dict]):
        self._script = list(script)
        self._cursor = 0
        self.completions_issued = 0

    @classmethod
    def from_file(cls, path: str) -> "ScriptedProvider":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def reset(self) -> None:
        self._cursor = 0
        self.completions_issued = 0

    def complete(
        self,
        conversation: Conversation,
        tools: Sequence[ToolDescriptor] = (),
        on_token: OnToken | None = None,
    ) -> Message:
        self.completions_issued += 1
        if self._cursor >= len(self._script):
            raise ProviderError(500, "scripted provider: script exhausted")
        turn = self._script[self._cursor]
        self._cursor += 1
        if "error" in turn:
            raise ProviderError(
                int(turn["error"].get("status", 502)), turn["error"].get("body", "")
            )
        if "tool_calls" in turn:
            calls = tuple(
                ToolCall(
                    id=c.get("id", f"call-{self._cursor}-{i}"),
                    name=c["name"],
                    raw_arguments=(
                        c["arguments"]
                        if isinstance(c.get("arguments"), str)
                        else json.dumps(c.get("arguments", {}))
                    ),
                )
                for i, c in enumerate(turn["tool_calls"])
            )
            return Message(role=Role.ASSISTANT, content=turn.get("content", ""), tool_calls=calls)
        if "content_chunks" in turn:
            chunks = list(turn["content_chunks"])
            if on_token is not None:
                for chunk in chunks:
                    on_token(chunk)
            return Message(role=Role.ASSISTANT, content="".join(chunks))
        return Message(role=Role.ASSISTANT, content=turn.get("content", ""))

    def to_wire(self, conversation: Conversation, tools: Sequence[ToolDescriptor]) -> dict:
        return {
            "messages": [self.encode_message(m) for m in conversation.messages],
            "tools": [
                {"name": t.name, "description": t.description, "parameters": t.json_schema()}
                for t in tools
            ],
        }

    def from_wire(self, response: dict) -> Message:
        return self.decode_message(response["message"])

    def encode_message(self, message: Message) -> dict:
        from .messages import message_to_json

        return message_to_json(message)

    def decode_message(self, wire: dict) -> Message:
        from .messages import message_from_json

        return message_from_json(wire)


class HttpChatProvider(ProviderAdapter):
    """Generic chat-completions HTTP adapter (OpenAI-compatible shape).

    Works against hosted APIs and local model servers alike; only base URL,
    model name and (optionally) an API key are configurable. Non-streaming;
    server-sent-event streaming is an extension point.
    """

    provider_id = "http-chat"
    supports_streaming = False

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 120.0,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self._api_key = api_key
        self._timeout = timeout
        self._session = session or requests.Session()

    def complete(
        self,
        conversation: Conversation,
        tools: Sequence[ToolDescriptor] = (),
        on_token: OnToken | None = None,
    ) -> Message:
        payload = self.to_wire(conversation, tools)
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        try:
            resp = self._session.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=headers,
                timeout=self._timeout,
            )
        except requests.Timeout as e:
            raise ProviderTimeout(f"provider timed out after {self._timeout}s") from e
        except requests.RequestException as e:
            raise ProviderError(0, f"connection failed: {e}") from e
        if resp.status_code != 200:
            raise ProviderError(resp.status_code, resp.text)
        try:
            body = resp.json()
        except ValueError as e:
            raise ProviderError(resp.status_code, f"non-JSON response: {e}") from e
        message = self.from_wire(body)
        if on_token is not None and message.content:
            on_token(message.content)
        return message

    def to_wire(self, conversation: Conversation, tools: Sequence[ToolDescriptor]) -> dict:
        payload: dict = {
            "model": self.model,
            "messages": [self.encode_message(m) for m in conversation.messages],
        }
        if tools:
            payload["tools"] = [
                {
                    "type": "function",
                    "function": {
                        "name": t.name,
                        "description": t.description,
                        "parameters": t.json_schema(),
                    },
                }
                for t in tools
            ]
        return payload

    def from_wire(self, response: dict) -> Message:
        try:
            wire = response["choices"][0]["message"]
        except (KeyError, IndexError, TypeError) as e:
            raise ProviderError(200, f"malformed completion response: {e}") from e
        return self.decode_message(wire)

    def encode_message(self, message: Message) -> dict:
        if message.role not in (Role.SYSTEM, Role.USER, Role.ASSISTANT, Role.TOOL):
            raise EncodingUnsupported(f"role {message.role!r} has no wire form")
        wire: dict = {"role": message.role.value, "content": message.content}
        if message.tool_calls:
            wire["tool_calls"] = [
                {
                    "id": c.id,
                    "type": "function",
                    "function": {"name": c.name, "arguments": c.raw_arguments},
                }
                for c in message.tool_calls
            ]
        if message.tool_call_id is not None:
            wire["tool_call_id"] = message.tool_call_id
        return wire

    def decode_message(self, wire: dict) -> Message:
        calls = tuple(
            ToolCall(
                id=c["id"],
                name=c["function"]["name"],
                raw_arguments=c["function"]["arguments"],
            )
            for c in wire.get("tool_calls") or ()
        )
        role = Role(wire.get("role", "assistant"))
        return Message(
            role=role,
            content=wire.get("content") or "",
            tool_calls=calls,
            tool_call_id=wire.get("tool_call_id"),
        )
