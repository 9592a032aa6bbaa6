"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them inline).

Everything here runs offline: deterministic hash embedder, scripted LLM
provider, recorded arXiv fixtures, in-process object-store stub.
"""

import json
import math
import random
import string
import time
from contextlib import contextmanager

import jsonschema
import pytest

from grouprag import catalog
from grouprag.agent import (
    CHAT_EVENT_SCHEMA,
    ChatAgent,
    ErrorEvent,
    FinalEvent,
    TokenEvent,
    ToolCallEvent,
    ToolResultEvent,
)
from grouprag.blobs import BlobStore, FilesystemBackend, S3Backend
from grouprag.chunking import ChunkPolicy, chunk_text
from grouprag.db import Document, IndexEntry, Store, TextChunk
from grouprag.embedders import HashEmbedder
from grouprag.errors import (
    BlobNotFound,
    DuplicateContentInCollection,
    IntegrityError,
    MalformedJson,
    MissingRequired,
    TypeMismatch,
    UnknownField,
)
from grouprag.ingest import IngestionPipeline
from grouprag.llm import (
    HttpChatProvider,
    Message,
    Role,
    ScriptedProvider,
    ToolCall,
    ToolParam,
    ToolRegistry,
    validate_tool_args,
    wire_roundtrip,
)
from grouprag.search import FusionWeights, SearchIndex
from grouprag.similarity import cosine_similarity, trigram_set, trigram_similarity

from corpus import build_corpus, oracle_search
from eventcheck import assert_event_grammar
from s3stub import S3Stub
from servicesetup import make_service
from test_catalog import build_random_tree, oracle_effective_permission


@contextmanager
def criterion(name):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL ({time.monotonic() - start:.2f}s)")
        raise
    print(f"\nACCEPTANCE {name}: PASS ({time.monotonic() - start:.2f}s)")


# ---------------------------------------------------------------------------
# Criterion: chunker suite (1,000 randomized cases, < 5 s)
# ---------------------------------------------------------------------------


def test_chunker_suite():
    with criterion("chunker-suite"):
        rng = random.Random(20260810)
        alphabet = string.ascii_letters + string.digits + " \n.,"
        start = time.monotonic()
        for case in range(1000):
            n = rng.randint(0, 10_000)
            text = "".join(rng.choices(alphabet, k=n))
            size = rng.randint(1, 2000)
            overlap = rng.randint(0, size - 1)
            policy = ChunkPolicy(size=size, overlap=overlap)
            spans = chunk_text(text, policy)

            if n == 0:
                assert spans == []
                continue
            # coverage of [0, len) with no gaps
            assert spans[0].start == 0
            assert spans[-1].end == n
            for span in spans:
                assert 0 <= span.start < span.end <= n
            for prev, cur in zip(spans, spans[1:]):
                assert cur.start > prev.start
            # exact overlap between adjacent spans (final pair may exceed)
            for i, (prev, cur) in enumerate(zip(spans, spans[1:])):
                got = prev.end - cur.start
                if i < len(spans) - 2:
                    assert got == overlap, (case, i, got, overlap)
                else:
                    assert got >= overlap
            # exact reconstruction
            chunks = [text[s.start : s.end] for s in spans]
            rebuilt = chunks[0] + "".join(c[overlap:] for c in chunks[1:])
            assert rebuilt == text, case
        elapsed = time.monotonic() - start
        assert elapsed < 5.0, f"chunker suite took {elapsed:.2f}s (limit 5s)"


# ---------------------------------------------------------------------------
# Criterion: search oracle equivalence (50 / 500 / 1,000 chunks, < 30 s)
# ---------------------------------------------------------------------------


def test_search_oracle_equivalence():
    with criterion("search-oracle-equivalence"):
        start = time.monotonic()
        queries = [
            "galaxy kinematics survey",
            "meeting notes pipeline dataset",
            "redshift calibration",
            "stellar orbit dispersion",
            "unrelated zebra words",
        ]
        for size, seed in ((50, 1), (500, 2), (1000, 3)):
            store = Store("sqlite://")
            index = SearchIndex(HashEmbedder(64))
            collection_ids, rows = build_corpus(
                store, index, size, name=f"acc{size}", seed=seed
            )
            weights = FusionWeights(alpha=0.7, k=25, n_vec=size, n_lex=size)
            with store.session() as session:
                for query in queries:
                    expected = oracle_search(
                        rows, query, index.embedder.embed([query])[0], alpha=0.7, k=25
                    )
                    hits = index.hybrid_search(
                        session, query, set(collection_ids), "owner", weights
                    )
                    assert [h.chunk_id for h in hits] == [r[0] for r in expected], (
                        size,
                        query,
                    )
                    for hit, (_, cos, tri, fused) in zip(hits, expected):
                        assert hit.cosine_score == cos
                        assert hit.trigram_score == tri
                        assert hit.fused_score == fused
        elapsed = time.monotonic() - start
        assert elapsed < 30.0, f"oracle equivalence took {elapsed:.2f}s (limit 30s)"


# ---------------------------------------------------------------------------
# Criterion: similarity unit values (cosine 1e-8, trigram exact)
# ---------------------------------------------------------------------------


def test_similarity_unit_values():
    with criterion("similarity-unit-values"):
        assert cosine_similarity((1.0, 0.0), (1.0, 0.0)) == 1.0
        assert cosine_similarity((1.0, 0.0), (0.0, 1.0)) == 0.0
        half_sqrt2 = math.sqrt(2) / 2
        assert abs(
            cosine_similarity((1.0, 0.0), (half_sqrt2, half_sqrt2)) - 0.70710678
        ) <= 1e-8
        assert trigram_set("") == frozenset()
        assert trigram_set("cat") == frozenset({"  c", " ca", "cat", "at "})
        assert trigram_set("Cat!") == trigram_set("cat")
        assert trigram_similarity("cat", "cats") == 0.5  # exactly 3/6
        assert trigram_similarity("", "") == 0.0
        assert trigram_similarity("x", "x") == 1.0


# ---------------------------------------------------------------------------
# Criterion: lifecycle constraints (>= 200 randomized attach/delete ops)
# ---------------------------------------------------------------------------


def test_lifecycle_constraints(tmp_path):
    with criterion("lifecycle-constraints"):
        store = Store("sqlite://")
        embedder = HashEmbedder(64)
        index = SearchIndex(embedder)
        blobs = BlobStore(FilesystemBackend(tmp_path / "blobs"), store)
        pipeline = IngestionPipeline(
            store, blobs, embedder, index, policy=ChunkPolicy(size=200, overlap=40)
        )
        from grouprag.db import Principal

        with store.begin() as s:
            s.add(Principal(id="owner", display_name="owner"))
            s.flush()
            collections = [
                catalog.create_collection(s, f"life-{i}", "owner") for i in range(3)
            ]
        collection_ids = [c.id for c in collections]

        rng = random.Random(77)
        live = []
        ops = 0
        for _ in range(220):
            ops += 1
            if live and rng.random() < 0.45:
                doc_id = live.pop(rng.randrange(len(live)))
                with store.session() as s:
                    expected_chunks = catalog.chunk_count(s, doc_id)
                    entries_before = index.entry_count(s)
                removed = pipeline.delete_document("owner", doc_id)
                assert removed == expected_chunks
                with store.session() as s:
                    # deleting removes exactly its chunk count from the index
                    assert index.entry_count(s) == entries_before - expected_chunks
            else:
                target = rng.choice(collection_ids)
                words = rng.randint(0, 250)
                body = " ".join(
                    rng.choice(["nu", "xi", "rho", "phi", "psi"]) for _ in range(words)
                ).encode()
                try:
                    doc = pipeline.ingest_upload(
                        "owner", target, f"doc-{ops}", body, "NOTE"
                    )
                    live.append(doc.id)
                except DuplicateContentInCollection:
                    pass
        assert ops >= 200

        with store.session() as s:
            doc_ids = {r[0] for r in s.query(Document.id)}
            chunk_doc_ids = {r[0] for r in s.query(TextChunk.document_id)}
            assert chunk_doc_ids <= doc_ids  # zero orphan chunks
            chunk_ids = {r[0] for r in s.query(TextChunk.id)}
            entry_ids = {r[0] for r in s.query(IndexEntry.chunk_id)}
            assert entry_ids == chunk_ids  # zero dangling index entries
            pairs = list(s.query(Document.collection_id, Document.content_hash))
            assert len(pairs) == len(set(pairs))  # per-collection dedup


# ---------------------------------------------------------------------------
# Criterion: permission lattice vs independent oracle
# ---------------------------------------------------------------------------


def test_permission_lattice():
    with criterion("permission-lattice"):
        rng = random.Random(424242)
        for trial in range(10):
            store = Store("sqlite://")
            with store.begin() as session:
                parents, owners, grants, principal_ids, ids = build_random_tree(
                    session,
                    rng,
                    n_collections=rng.randint(10, 50),
                    n_principals=rng.randint(2, 10),
                    n_grants=rng.randint(0, 30),
                )
                for pid in principal_ids:
                    for cid in ids:
                        expected = oracle_effective_permission(
                            parents, owners, grants, pid, cid
                        )
                        actual = catalog.effective_permission(session, pid, cid)
                        assert int(actual) == expected, (trial, pid, cid)
                        # private by default: no grant anywhere, no ownership -> NONE
                        node, has_any = cid, False
                        while node is not None:
                            if owners[node] == pid or (node, pid) in grants:
                                has_any = True
                            node = parents[node]
                        if not has_any:
                            assert int(actual) == 0, (trial, pid, cid)


# ---------------------------------------------------------------------------
# Criterion: tool schema fuzzing (100 payloads per mutation class per tool)
# ---------------------------------------------------------------------------


def _fuzz_tools():
    registry = ToolRegistry()
    registry.register(
        "search",
        "search things",
        [ToolParam("query", "string"), ToolParam("k", "integer")],
        lambda **kw: kw,
    )
    registry.register(
        "filter",
        "filter by tags",
        [
            ToolParam("tags", "array", item_type="string"),
            ToolParam("exact", "boolean"),
            ToolParam("limit", "number", required=False),
        ],
        lambda **kw: kw,
    )
    registry.register(
        "set_mode",
        "set the mode",
        [
            ToolParam("mode", "enum", choices=("fast", "slow", "careful")),
            ToolParam("note", "string", required=False),
        ],
        lambda **kw: kw,
    )
    return registry


def _valid_value(rng, param):
    if param.type == "string":
        return rng.choice(["words", "galaxy survey", "", "ünïcødé"])
    if param.type == "integer":
        return rng.randint(-50, 50)
    if param.type == "number":
        return rng.choice([0.5, -2.25, 3, 100.0])
    if param.type == "boolean":
        return rng.choice([True, False])
    if param.type == "array":
        return [rng.choice(["a", "b", "c"]) for _ in range(rng.randint(0, 4))]
    if param.type == "enum":
        return rng.choice(list(param.choices))
    raise AssertionError(param.type)


def _wrong_typed(rng, param):
    # value whose JSON type can never satisfy the declared type
    pools = {
        "string": [123, 1.5, True, ["x"]],
        "integer": ["five", 1.5, True, ["x"]],
        "number": ["five", True, ["x"]],
        "boolean": ["yes", 1, 0.0],
        "array": ["not-a-list", 7, True],
        "enum": ["zz-not-a-choice", 42, False],
    }
    return rng.choice(pools[param.type])


def test_tool_schema_fuzzing():
    with criterion("tool-schema-fuzzing"):
        rng = random.Random(9001)
        registry = _fuzz_tools()
        for descriptor in registry.descriptors():
            required = [p for p in descriptor.params if p.required]

            def valid_payload():
                payload = {p.name: _valid_value(rng, p) for p in required}
                for p in descriptor.params:
                    if not p.required and rng.random() < 0.5:
                        payload[p.name] = _valid_value(rng, p)
                return payload

            for _ in range(100):  # valid payloads accepted
                payload = valid_payload()
                typed = validate_tool_args(descriptor, json.dumps(payload))
                assert set(payload) == set(typed)

            for _ in range(100):  # missing required
                payload = valid_payload()
                victim = rng.choice(required)
                del payload[victim.name]
                with pytest.raises(MissingRequired):
                    validate_tool_args(descriptor, json.dumps(payload))

            for _ in range(100):  # retyped
                payload = valid_payload()
                victim = rng.choice(descriptor.params)
                payload[victim.name] = _wrong_typed(rng, victim)
                with pytest.raises(TypeMismatch):
                    validate_tool_args(descriptor, json.dumps(payload))

            for _ in range(100):  # unknown field
                payload = valid_payload()
                payload[f"zz_extra_{rng.randint(0, 999)}"] = 1
                with pytest.raises(UnknownField):
                    validate_tool_args(descriptor, json.dumps(payload))

            for _ in range(100):  # malformed JSON
                base = json.dumps(valid_payload())
                malformed = rng.choice(
                    [base[:-1], "not json" + base, base + "}", "", "[1, 2]", "42"]
                )
                with pytest.raises(MalformedJson):
                    validate_tool_args(descriptor, malformed)


# ---------------------------------------------------------------------------
# Criterion: wire round-trip identity for both adapters (>= 50 messages)
# ---------------------------------------------------------------------------


def _roundtrip_corpus():
    rng = random.Random(31415)
    contents = ["", "plain", "ünïcødé ✨", "line\nbreaks", "x" * 500, " lead/trail "]
    corpus = [
        Message(role=Role.SYSTEM, content="system prompt"),
        Message(role=Role.USER, content="user question"),
        Message(role=Role.ASSISTANT, content="assistant answer"),
        Message(role=Role.TOOL, content='{"chunks": []}', tool_call_id="c0"),
    ]
    for i, content in enumerate(contents):
        corpus.append(Message(role=Role.USER, content=content))
        corpus.append(Message(role=Role.ASSISTANT, content=content))
        corpus.append(Message(role=Role.TOOL, content=content, tool_call_id=f"t{i}"))
        corpus.append(Message(role=Role.SYSTEM, content=content))
    for n_calls in (1, 2, 3, 5):
        calls = tuple(
            ToolCall(
                id=f"call-{n_calls}-{j}",
                name=rng.choice(["search_collections", "echo"]),
                raw_arguments=json.dumps(
                    {"query": f"q{j}", "k": j, "flag": bool(j % 2)}
                ),
            )
            for j in range(n_calls)
        )
        corpus.append(
            Message(
                role=Role.ASSISTANT,
                content=rng.choice(contents),
                tool_calls=calls,
            )
        )
    while len(corpus) < 50:
        corpus.append(Message(role=Role.USER, content=f"filler {len(corpus)}"))
    return corpus


def test_wire_roundtrip_identity():
    with criterion("wire-roundtrip"):
        corpus = _roundtrip_corpus()
        assert len(corpus) >= 50
        roles = {m.role for m in corpus}
        assert roles == {Role.SYSTEM, Role.USER, Role.ASSISTANT, Role.TOOL}
        assert any(m.tool_calls for m in corpus)
        adapters = [
            ScriptedProvider([]),
            HttpChatProvider(base_url="http://llm.local/v1", model="m"),
        ]
        for adapter in adapters:
            for message in corpus:
                back = wire_roundtrip(adapter, message)
                assert back.role == message.role, adapter.provider_id
                assert back.content == message.content, adapter.provider_id
                assert back.tool_calls == message.tool_calls, adapter.provider_id


# ---------------------------------------------------------------------------
# Criterion: end-to-end scripted RAG turn + TOOL_LIMIT boundary
# ---------------------------------------------------------------------------


def _rag_fixture(tmp_path, script, max_tool_rounds=8):
    store = Store("sqlite://")
    embedder = HashEmbedder(64)
    index = SearchIndex(embedder)
    blobs = BlobStore(FilesystemBackend(tmp_path / "blobs"), store)
    pipeline = IngestionPipeline(
        store, blobs, embedder, index, policy=ChunkPolicy(size=300, overlap=60)
    )
    from grouprag.db import Principal

    with store.begin() as s:
        s.add(Principal(id="owner", display_name="owner"))
        s.flush()
        collection = catalog.create_collection(s, "fixture", "owner")
    topics = [
        "galaxy rotation curves and dark matter",
        "stellar accretion disks around young stars",
        "meeting notes about the survey pipeline",
        "telescope calibration procedures",
        "redshift measurements of distant clusters",
        "spectrograph instrument manual excerpts",
        "photometry of variable stars",
        "orbital dynamics of binary systems",
        "training session on the data archive",
        "notes on nebular emission lines",
    ]
    for i, topic in enumerate(topics):
        pipeline.ingest_upload(
            "owner",
            collection.id,
            f"doc {i}: {topic[:20]}",
            (topic + " ").encode() * 12,
            "NOTE",
        )
    agent = ChatAgent(
        store,
        index,
        ScriptedProvider(script),
        weights=FusionWeights(alpha=0.7, k=5, n_vec=100, n_lex=100),
        max_tool_rounds=max_tool_rounds,
    )
    return agent, collection.id


def test_end_to_end_scripted_rag_turn(tmp_path):
    with criterion("e2e-scripted-rag-turn"):
        script = [
            {
                "tool_calls": [
                    {
                        "name": "search_collections",
                        "arguments": {"query": "galaxy rotation", "k": 4},
                    }
                ]
            },
            {"content": "Rotation curves stay flat at large radii."},
        ]
        agent, collection_id = _rag_fixture(tmp_path, script)
        session = agent.new_session("owner", [collection_id])
        events = list(agent.run_turn(session, "what do we know about rotation?"))

        assert [type(e) for e in events] == [
            ToolCallEvent,
            ToolResultEvent,
            TokenEvent,
            FinalEvent,
        ]
        assert events[0].name == "search_collections"
        assert len(events[1].chunk_refs) >= 1
        assert events[2].text == "Rotation curves stay flat at large radii."
        wire = [e.to_wire() for e in events]
        assert_event_grammar(wire)
        for frame in wire:
            jsonschema.validate(frame, CHAT_EVENT_SCHEMA)


def test_tool_limit_triggers_at_exactly_max_rounds(tmp_path):
    with criterion("e2e-tool-limit"):
        looping = [
            {
                "tool_calls": [
                    {"name": "search_collections", "arguments": {"query": "more"}}
                ]
            }
        ] * 12
        agent, collection_id = _rag_fixture(tmp_path, looping, max_tool_rounds=3)
        session = agent.new_session("owner", [collection_id])
        events = list(agent.run_turn(session, "never stop searching"))
        calls = [e for e in events if isinstance(e, ToolCallEvent)]
        results = [e for e in events if isinstance(e, ToolResultEvent)]
        assert len(calls) == 3 and len(results) == 3  # exactly max_tool_rounds pairs
        assert isinstance(events[-1], ErrorEvent) and events[-1].code == "TOOL_LIMIT"
        assert agent.provider.completions_issued == 4  # bounded: rounds + 1

        # one round below the cap completes normally
        below = [
            {
                "tool_calls": [
                    {"name": "search_collections", "arguments": {"query": "q"}}
                ]
            }
        ] * 2 + [{"content": "done"}]
        agent2, cid2 = _rag_fixture(tmp_path / "b", below, max_tool_rounds=3)
        session2 = agent2.new_session("owner", [cid2])
        events2 = list(agent2.run_turn(session2, "bounded"))
        assert isinstance(events2[-1], FinalEvent)
        assert not any(isinstance(e, ErrorEvent) for e in events2)


# ---------------------------------------------------------------------------
# Criterion: service conformance (permission matrix + frame schema, offline)
# ---------------------------------------------------------------------------


def test_service_permission_matrix(tmp_path):
    with criterion("service-permission-matrix"):
        env = make_service(tmp_path, users=())
        rng = random.Random(2026)
        with env.components.store.begin() as s:
            parents, owners, grants, principal_ids, ids = build_random_tree(
                s, rng, n_collections=20, n_principals=6, n_grants=18
            )
        tokens = {
            pid: env.components.tokens.create_token(pid) for pid in principal_ids
        }

        def hdr(pid):
            return {"Authorization": f"Bearer {tokens[pid]}"}

        def expected_level(pid, cid):
            return oracle_effective_permission(parents, owners, grants, pid, cid)

        for pid in principal_ids:
            for cid in ids:
                level = expected_level(pid, cid)
                # read endpoints gate on VIEW
                detail = env.client.get(f"/collections/{cid}", headers=hdr(pid))
                assert detail.status_code == (200 if level >= 1 else 403), (pid, cid)
                search = env.client.post(
                    "/search",
                    json={"query": "q", "collection_ids": [cid]},
                    headers=hdr(pid),
                )
                assert search.status_code == (200 if level >= 1 else 403), (pid, cid)

        sample = [(pid, cid) for pid in principal_ids for cid in ids]
        rng.shuffle(sample)
        for pid, cid in sample[:40]:
            level = expected_level(pid, cid)
            # uploads gate on EDIT
            upload = env.client.post(
                "/documents",
                files={"file": ("f.txt", f"body {pid} {cid} {rng.random()}".encode())},
                data={"kind": "NOTE", "collection_id": cid, "title": "t"},
                headers=hdr(pid),
            )
            assert upload.status_code == (201 if level >= 2 else 403), (pid, cid)
            # child creation gates on EDIT of the parent
            child = env.client.post(
                "/collections",
                json={"name": f"child-{pid}-{cid}-{rng.random()}", "parent_id": cid},
                headers=hdr(pid),
            )
            assert child.status_code == (201 if level >= 2 else 403), (pid, cid)
            # granting gates on ownership; grant-to-owner keeps the lattice fixed
            grant = env.client.post(
                f"/collections/{cid}/grants",
                json={"principal_id": owners[cid], "level": "VIEW"},
                headers=hdr(pid),
            )
            assert grant.status_code == (201 if owners[cid] == pid else 403), (pid, cid)

        # visibility listing equals the oracle's VIEW+ set over original nodes
        for pid in principal_ids:
            listed = env.client.get("/collections", headers=hdr(pid)).json()
            visible = {c["id"] for c in listed["collections"] if c["id"] in set(ids)}
            oracle_visible = {cid for cid in ids if expected_level(pid, cid) >= 1}
            assert visible == oracle_visible, pid


def test_service_socket_frames_validate(tmp_path):
    with criterion("service-socket-schema"):
        env = make_service(tmp_path)
        from test_service_http import create_collection, upload_note

        c = create_collection(env, "alice", "socket-corpus")
        upload_note(env, "alice", c["id"], b"galaxies rotate " * 40)
        frames = []
        with env.client.websocket_connect(
            f"/ws/chat?token={env.tokens['alice']}&collections={c['id']}"
        ) as ws:
            ws.send_json({"type": "user_message", "text": "hi"})
            while True:
                frame = ws.receive_json()
                frames.append(frame)
                if frame["type"] in ("final", "error"):
                    break
            ws.send_text("{broken")
            frames.append(ws.receive_json())
        for frame in frames:
            jsonschema.validate(frame, CHAT_EVENT_SCHEMA)
        assert frames[-1]["code"] == "BAD_FRAME"
        assert_event_grammar(frames[:-1])


# ---------------------------------------------------------------------------
# Criterion: blob backends (identical suite on fs and S3-compatible)
# ---------------------------------------------------------------------------

EMPTY_DIGEST = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def _blob_suite(blobs, object_count, tamper):
    ref = blobs.put_blob(b"")
    assert ref.digest == EMPTY_DIGEST and ref.size == 0

    rng = random.Random(8)
    for size in (1, 257, 65_536):
        payload = rng.randbytes(size)
        assert blobs.get_blob(blobs.put_blob(payload)) == payload

    data = b"dedup me"
    before = object_count()
    r1 = blobs.put_blob(data)
    r2 = blobs.put_blob(data)
    assert r1 == r2
    assert object_count() == before + 1

    assert blobs.release_blob(r1) == 1
    assert blobs.get_blob(r1) == data
    assert blobs.release_blob(r1) == 0
    with pytest.raises(BlobNotFound):
        blobs.get_blob(r1)
    with pytest.raises(BlobNotFound):
        blobs.release_blob("0" * 64)

    victim = blobs.put_blob(b"to be corrupted")
    tamper(victim.digest, b"evil bytes")
    with pytest.raises(IntegrityError):
        blobs.get_blob(victim)


def test_blob_backend_equivalence(tmp_path):
    with criterion("blob-backends"):
        fs_store = Store("sqlite://")
        fs = FilesystemBackend(tmp_path / "accept-blobs")

        def fs_count():
            return sum(1 for p in (tmp_path / "accept-blobs").rglob("*") if p.is_file())

        def fs_tamper(digest, data):
            (tmp_path / "accept-blobs" / digest[:2] / digest).write_bytes(data)

        _blob_suite(BlobStore(fs, fs_store), fs_count, fs_tamper)

        stub = S3Stub()
        try:
            s3_store = Store("sqlite://")
            s3 = S3Backend(
                endpoint=stub.endpoint, bucket="accept",
                access_key="ak", secret_key="sk",
            )

            def s3_tamper(digest, data):
                stub.objects[f"/accept/{digest}"] = data

            _blob_suite(BlobStore(s3, s3_store), lambda: len(stub.objects), s3_tamper)
        finally:
            stub.stop()
