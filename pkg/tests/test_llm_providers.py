import json

import pytest
import requests

from grouprag.errors import ProviderError, ProviderTimeout
from grouprag.llm import (
    Conversation,
    HttpChatProvider,
    Message,
    Role,
    ScriptedProvider,
    ToolCall,
    ToolParam,
    wire_roundtrip,
)
from grouprag.llm.tools import ToolDescriptor


def _conv():
    conv = Conversation(system_prompt="sys")
    conv.append(Message(role=Role.USER, content="question"))
    return conv


MESSAGE_CORPUS = [
    Message(role=Role.SYSTEM, content="be helpful"),
    Message(role=Role.USER, content="hello"),
    Message(role=Role.USER, content=""),
    Message(role=Role.ASSISTANT, content="plain answer"),
    Message(
        role=Role.ASSISTANT,
        content="",
        tool_calls=(ToolCall("c1", "search", '{"query": "stars", "k": 3}'),),
    ),
    Message(
        role=Role.ASSISTANT,
        content="thinking...",
        tool_calls=(
            ToolCall("c1", "search", '{"query": "a"}'),
            ToolCall("c2", "search", '{"query": "b"}'),
        ),
    ),
    Message(role=Role.TOOL, content='{"chunks": []}', tool_call_id="c1"),
    Message(role=Role.TOOL, content="", tool_call_id="c2"),
]


class TestScriptedProvider:
    def test_plain_content(self):
        provider = ScriptedProvider([{"content": "hi there"}])
        msg = provider.complete(_conv())
        assert msg.role is Role.ASSISTANT
        assert msg.content == "hi there"

    def test_tool_call_turn(self):
        provider = ScriptedProvider(
            [{"tool_calls": [{"name": "search", "arguments": {"query": "x", "k": 3}}]}]
        )
        msg = provider.complete(_conv())
        assert msg.content == ""
        assert len(msg.tool_calls) == 1
        assert msg.tool_calls[0].name == "search"
        assert json.loads(msg.tool_calls[0].raw_arguments) == {"query": "x", "k": 3}

    def test_streaming_chunks(self):
        provider = ScriptedProvider([{"content_chunks": ["par", "tial"]}])
        seen = []
        msg = provider.complete(_conv(), on_token=seen.append)
        assert seen == ["par", "tial"]
        assert msg.content == "partial"

    def test_scripted_error(self):
        provider = ScriptedProvider([{"error": {"status": 503, "body": "overloaded"}}])
        with pytest.raises(ProviderError) as exc:
            provider.complete(_conv())
        assert exc.value.status == 503

    def test_script_exhausted(self):
        provider = ScriptedProvider([])
        with pytest.raises(ProviderError):
            provider.complete(_conv())

    @pytest.mark.parametrize("message", MESSAGE_CORPUS)
    def test_roundtrip(self, message):
        back = wire_roundtrip(ScriptedProvider([]), message)
        assert back == message


class _FakeResponse:
    def __init__(self, status_code=200, payload=None, text=""):
        self.status_code = status_code
        self._payload = payload
        self.text = text or json.dumps(payload or {})

    def json(self):
        if self._payload is None:
            raise ValueError("not json")
        return self._payload


class _FakeSession:
    def __init__(self, response=None, exc=None):
        self.response = response
        self.exc = exc
        self.captured = None

    def post(self, url, **kwargs):
        self.captured = (url, kwargs)
        if self.exc is not None:
            raise self.exc
        return self.response


def _completion(content=None, tool_calls=None):
    message = {"role": "assistant", "content": content}
    if tool_calls:
        message["tool_calls"] = tool_calls
    return {"choices": [{"message": message}]}


class TestHttpChatProvider:
    def _provider(self, session):
        return HttpChatProvider(
            base_url="http://llm.local/v1", model="test-model", api_key="sk-1", session=session
        )

    def test_plain_completion(self):
        session = _FakeSession(response=_FakeResponse(payload=_completion("answer")))
        msg = self._provider(session).complete(_conv())
        assert msg.role is Role.ASSISTANT
        assert msg.content == "answer"
        url, kwargs = session.captured
        assert url == "http://llm.local/v1/chat/completions"
        assert kwargs["headers"]["Authorization"] == "Bearer sk-1"
        sent = kwargs["json"]
        assert sent["model"] == "test-model"
        assert sent["messages"][0] == {"role": "system", "content": "sys"}

    def test_tool_call_completion(self):
        payload = _completion(
            None,
            tool_calls=[
                {
                    "id": "call-9",
                    "type": "function",
                    "function": {"name": "search", "arguments": '{"query": "q"}'},
                }
            ],
        )
        session = _FakeSession(response=_FakeResponse(payload=payload))
        msg = self._provider(session).complete(_conv())
        assert msg.content == ""
        assert msg.tool_calls == (ToolCall("call-9", "search", '{"query": "q"}'),)

    def test_tools_serialized_in_request(self):
        session = _FakeSession(response=_FakeResponse(payload=_completion("ok")))
        descriptor = ToolDescriptor("search", "find", (ToolParam("query", "string"),))
        self._provider(session).complete(_conv(), [descriptor])
        sent = session.captured[1]["json"]
        assert sent["tools"][0]["function"]["name"] == "search"
        assert sent["tools"][0]["function"]["parameters"]["required"] == ["query"]

    def test_http_error(self):
        session = _FakeSession(response=_FakeResponse(status_code=500, text="boom"))
        with pytest.raises(ProviderError) as exc:
            self._provider(session).complete(_conv())
        assert exc.value.status == 500

    def test_timeout(self):
        session = _FakeSession(exc=requests.Timeout("slow"))
        with pytest.raises(ProviderTimeout):
            self._provider(session).complete(_conv())

    def test_connection_error(self):
        session = _FakeSession(exc=requests.ConnectionError("refused"))
        with pytest.raises(ProviderError):
            self._provider(session).complete(_conv())

    @pytest.mark.parametrize("message", MESSAGE_CORPUS)
    def test_roundtrip(self, message):
        provider = self._provider(_FakeSession())
        assert wire_roundtrip(provider, message) == message
