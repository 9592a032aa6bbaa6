import json

import pytest

from grouprag import catalog
from grouprag.agent import (
    ChatAgent,
    ErrorEvent,
    FinalEvent,
    TokenEvent,
    ToolCallEvent,
    ToolResultEvent,
)
from grouprag.embedders import HashEmbedder
from grouprag.errors import ConcurrentTurn, PermissionDenied
from grouprag.llm import Role, ScriptedProvider
from grouprag.search import FusionWeights, SearchIndex

from corpus import build_corpus
from eventcheck import assert_event_grammar


@pytest.fixture
def rag(store):
    index = SearchIndex(HashEmbedder(64))
    collection_ids, rows = build_corpus(store, index, 20, name="chat", seed=11)
    return store, index, collection_ids, rows


def make_agent(store, index, script, **kwargs):
    return ChatAgent(
        store,
        index,
        ScriptedProvider(script),
        weights=FusionWeights(alpha=0.7, k=4, n_vec=20, n_lex=20),
        **kwargs,
    )


SEARCH_THEN_ANSWER = [
    {"tool_calls": [{"name": "search_collections", "arguments": {"query": "galaxy", "k": 3}}]},
    {"content": "answer"},
]


class TestNewSession:
    def test_fresh_session_has_only_system_message(self, rag):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, [])
        session = agent.new_session("owner", collection_ids)
        assert len(session.conversation.messages) == 1
        assert session.conversation.messages[0].role is Role.SYSTEM

    def test_none_permission_rejected(self, rag, principals):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, [])
        with pytest.raises(PermissionDenied):
            agent.new_session("carol", collection_ids)

    def test_empty_selection_allowed(self, rag):
        store, index, _, _ = rag
        agent = make_agent(store, index, [])
        session = agent.new_session("owner", [])
        assert session.selected_collections == set()

    def test_system_prompt_override(self, rag):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, [])
        session = agent.new_session("owner", collection_ids, system_prompt="custom")
        assert session.conversation.messages[0].content == "custom"


class TestSearchTool:
    def _call_tool(self, agent, session, arguments):
        registry = agent.registry_for(session)
        func = registry.callable_for("search_collections")
        return func(**arguments)

    def test_tool_matches_direct_hybrid_search(self, rag):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, [])
        session = agent.new_session("owner", collection_ids)
        result = self._call_tool(agent, session, {"query": "galaxy kinematics", "k": 4})
        with store.session() as s:
            hits = index.hybrid_search(
                s, "galaxy kinematics", set(collection_ids), "owner",
                FusionWeights(alpha=0.7, k=4, n_vec=20, n_lex=20),
            )
        assert [c["chunk_id"] for c in result["chunks"]] == [h.chunk_id for h in hits]
        assert [c["snippet"] for c in result["chunks"]] == [h.snippet for h in hits]
        assert all(c["title"] for c in result["chunks"])

    def test_k_clamped(self, rag):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, [])
        session = agent.new_session("owner", collection_ids)
        result = self._call_tool(agent, session, {"query": "galaxy", "k": 999})
        assert len(result["chunks"]) <= 20

    def test_no_collections_selected(self, rag):
        store, index, _, _ = rag
        agent = make_agent(store, index, [])
        session = agent.new_session("owner", [])
        result = self._call_tool(agent, session, {"query": "anything"})
        assert result["error"]["message"] == "no collections selected"


class TestRunTurn:
    def test_search_then_answer_event_sequence(self, rag):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, SEARCH_THEN_ANSWER)
        session = agent.new_session("owner", collection_ids)
        events = list(agent.run_turn(session, "what about galaxies?"))

        assert [type(e) for e in events] == [
            ToolCallEvent,
            ToolResultEvent,
            TokenEvent,
            FinalEvent,
        ]
        assert events[0].name == "search_collections"
        assert events[0].arguments == {"query": "galaxy", "k": 3}
        assert len(events[1].chunk_refs) >= 1
        assert events[2].text == "answer"
        assert_event_grammar([e.to_wire() for e in events])

    def test_plain_reply(self, rag):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, [{"content": "hello"}])
        session = agent.new_session("owner", collection_ids)
        events = list(agent.run_turn(session, "hi"))
        assert [type(e) for e in events] == [TokenEvent, FinalEvent]

    def test_streamed_chunks(self, rag):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, [{"content_chunks": ["par", "tial"]}])
        session = agent.new_session("owner", collection_ids)
        events = list(agent.run_turn(session, "hi"))
        assert [e.text for e in events[:-1]] == ["par", "tial"]
        assert isinstance(events[-1], FinalEvent)

    def test_tool_limit_at_exactly_max_rounds(self, rag):
        store, index, collection_ids, _ = rag
        always_tooling = [
            {"tool_calls": [{"name": "search_collections", "arguments": {"query": "x"}}]}
        ] * 10
        agent = make_agent(store, index, always_tooling, max_tool_rounds=2)
        session = agent.new_session("owner", collection_ids)
        events = list(agent.run_turn(session, "loop forever"))

        pairs = [e for e in events if isinstance(e, (ToolCallEvent, ToolResultEvent))]
        assert len(pairs) == 4  # exactly 2 call/result pairs
        assert isinstance(events[-1], ErrorEvent)
        assert events[-1].code == "TOOL_LIMIT"
        # bounded: max_tool_rounds completions plus one
        assert agent.provider.completions_issued == 3
        # the conversation ends with the apology so later turns stay valid
        assert session.conversation.messages[-1].role is Role.ASSISTANT
        assert_event_grammar([e.to_wire() for e in events])

    def test_provider_error_becomes_error_event(self, rag):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, [{"error": {"status": 502, "body": "bad gateway"}}])
        session = agent.new_session("owner", collection_ids)
        events = list(agent.run_turn(session, "hi"))
        assert len(events) == 1
        assert isinstance(events[0], ErrorEvent)
        assert events[0].code == "PROVIDER_ERROR"

    def test_tool_error_is_contained_and_loop_continues(self, rag):
        store, index, collection_ids, _ = rag
        script = [
            {"tool_calls": [{"name": "no_such_tool", "arguments": {}}]},
            {"content": "recovered"},
        ]
        agent = make_agent(store, index, script)
        session = agent.new_session("owner", collection_ids)
        events = list(agent.run_turn(session, "hi"))
        assert isinstance(events[0], ToolCallEvent)
        assert isinstance(events[1], ToolResultEvent)
        assert events[1].chunk_refs == ()
        assert isinstance(events[2], TokenEvent)
        assert events[2].text == "recovered"

    def test_concurrent_turn_rejected(self, rag):
        store, index, collection_ids, _ = rag
        agent = make_agent(store, index, SEARCH_THEN_ANSWER)
        session = agent.new_session("owner", collection_ids)
        stream = agent.run_turn(session, "first")
        next(stream)
        with pytest.raises(ConcurrentTurn):
            agent.run_turn(session, "second")
        list(stream)  # drain; lock released
        agent.provider.reset()
        events = list(agent.run_turn(session, "third"))
        assert events

    def test_search_error_content_keeps_loop_alive(self, rag):
        store, index, _, _ = rag
        agent = make_agent(store, index, SEARCH_THEN_ANSWER)
        session = agent.new_session("owner", [])
        events = list(agent.run_turn(session, "search please"))
        assert isinstance(events[1], ToolResultEvent)
        assert events[1].chunk_refs == ()
        tool_message = session.conversation.messages[-2]
        assert json.loads(tool_message.content)["error"]["message"] == "no collections selected"
        assert isinstance(events[-1], FinalEvent)


class TestPermissionRecheck:
    def test_revoked_collection_excluded_mid_session(self, store, principals):
        index = SearchIndex(HashEmbedder(64))
        collection_ids, rows = build_corpus(
            store, index, 12, name="revoke", n_collections=2
        )
        with store.begin() as s:
            for cid in collection_ids:
                catalog.grant_permission(s, cid, "bob", "VIEW", "owner")

        agent = make_agent(store, index, [])
        session = agent.new_session("bob", collection_ids)
        registry = agent.registry_for(session)
        func = registry.callable_for("search_collections")

        first = func(query="galaxy", k=12)
        assert {c["chunk_id"] for c in first["chunks"]} & {
            r[0] for r in rows if r[2] == collection_ids[0]
        }

        # revoke VIEW on the first collection mid-session
        with store.begin() as s:
            from grouprag.db import PermissionGrant

            s.query(PermissionGrant).filter_by(
                collection_id=collection_ids[0], principal_id="bob"
            ).delete()

        second = func(query="galaxy", k=12)
        assert second["chunks"]  # the other collection still searched
        assert all(
            row[2] != collection_ids[0]
            for row in rows
            if row[0] in {c["chunk_id"] for c in second["chunks"]}
        )
