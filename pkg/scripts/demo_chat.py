#!/usr/bin/env python3
"""Offline end-to-end demo: seed a collection, run one scripted RAG turn,
print the chat event stream as JSON lines.

Usage: python scripts/demo_chat.py [--pretty]

The stream on stdout is exactly what the websocket endpoint would send, so
redirecting it to a file records a replayable fixture for UI work.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from grouprag import catalog
from grouprag.agent import ChatAgent
from grouprag.blobs import BlobStore, FilesystemBackend
from grouprag.chunking import ChunkPolicy
from grouprag.db import Principal, Store
from grouprag.embedders import HashEmbedder
from grouprag.ingest import IngestionPipeline
from grouprag.llm import ScriptedProvider
from grouprag.search import FusionWeights, SearchIndex

NOTES = [
    ("galaxy rotation", "Rotation curves of spiral galaxies stay flat far beyond "
     "the visible disk, which is why we model a dark matter halo. "),
    ("accretion disks", "Young stellar objects accrete gas from circumstellar "
     "disks; accretion rates drop with stellar age. "),
    ("pipeline meeting", "Meeting notes: the survey pipeline needs recalibrated "
     "photometry before the next data release. "),
    ("archive training", "Training session notes on querying the data archive "
     "and exporting spectra. "),
]

SCRIPT = [
    {
        "tool_calls": [
            {
                "name": "search_collections",
                "arguments": {"query": "galaxy rotation dark matter", "k": 3},
            }
        ]
    },
    {
        "content_chunks": [
            "Rotation curves stay flat at large radii, ",
            "which the group's notes attribute to a dark matter halo.",
        ]
    },
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pretty", action="store_true", help="indent the JSON output")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        store = Store("sqlite://")
        embedder = HashEmbedder(64)
        index = SearchIndex(embedder)
        blobs = BlobStore(FilesystemBackend(Path(tmp) / "blobs"), store)
        pipeline = IngestionPipeline(
            store, blobs, embedder, index, policy=ChunkPolicy(size=300, overlap=60)
        )

        with store.begin() as session:
            session.add(Principal(id="demo", display_name="Demo User"))
            session.flush()
            collection = catalog.create_collection(session, "group notes", "demo")
        for title, body in NOTES:
            pipeline.ingest_upload("demo", collection.id, title, (body * 10).encode(), "NOTE")

        agent = ChatAgent(
            store,
            index,
            ScriptedProvider(SCRIPT),
            weights=FusionWeights(alpha=0.7, k=3, n_vec=50, n_lex=50),
        )
        session_obj = agent.new_session("demo", [collection.id])
        for event in agent.run_turn(session_obj, "why are rotation curves flat?"):
            wire = event.to_wire()
            print(json.dumps(wire, indent=2 if args.pretty else None))
    return 0


if __name__ == "__main__":
    sys.exit(main())
