"""Command-line surface: serve the API, mint tokens, ingest and reindex.

Exit codes: 0 success, 1 usage error, 2 configuration error, 3 operation
failed (message on stderr).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .. import catalog
from ..config import ServiceConfig, load_config
from ..errors import ConfigError, GroupRagError
from .app import build_components, create_app

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_OPERATION = 3



class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this CLI reserves 2 for config.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="grouprag", description="Group RAG service")
    parser.add_argument(
        "--config",
        default=os.environ.get("GROUPRAG_CONFIG"),
        help="path to the flat key=value config file (or set GROUPRAG_CONFIG)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("serve", help="run the HTTP/WebSocket server")

    token = sub.add_parser("token", help="API token management")
    token_sub = token.add_subparsers(dest="token_command", required=True)
    token_create = token_sub.add_parser("create", help="mint a token, creating the user if needed")
    token_create.add_argument("--user", required=True, help="principal id")

    ingest = sub.add_parser("ingest", help="ingest a local file into a collection")
    ingest.add_argument("path", help="file to ingest")
    ingest.add_argument("--collection", required=True, help="target collection id")
    ingest.add_argument(
        "--kind", required=True, choices=sorted(catalog.DOCUMENT_KINDS),
        help="document kind",
    )
    ingest.add_argument("--title", default=None, help="document title (defaults to filename)")
    ingest.add_argument(
        "--user", default=None,
        help="acting principal id (defaults to the collection owner)",
    )

    arxiv = sub.add_parser("import-arxiv", help="import a paper from arXiv")
    arxiv.add_argument("arxiv_id", help="arXiv identifier")
    arxiv.add_argument("--collection", required=True, help="target collection id")
    arxiv.add_argument(
        "--user", default=None,
        help="acting principal id (defaults to the collection owner)",
    )

    sub.add_parser(
        "reindex",
        help="re-embed all chunks with the configured embedder and rebuild the index",
    )
    return parser


def _load(args) -> ServiceConfig:
    if args.config is None:
        raise ConfigError("config", "no config file given (use --config or GROUPRAG_CONFIG)")
    if not Path(args.config).is_file():
        raise ConfigError("config", f"config file not found: {args.config}")
    return load_config(args.config)


def _collection_owner(components, collection_id: str) -> str:
    with components.store.session() as session:
        return catalog.get_collection(session, collection_id).owner_id


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load(args)
        components = build_components(config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "serve":
            import uvicorn

            uvicorn.run(
                create_app(components), host=config.bind_host, port=config.bind_port
            )
            return EXIT_OK

        if args.command == "token":
            components.tokens.ensure_principal(args.user)
            print(components.tokens.create_token(args.user))
            return EXIT_OK

        if args.command == "ingest":
            path = Path(args.path)
            if not path.is_file():
                print(f"file not found: {args.path}", file=sys.stderr)
                return EXIT_OPERATION
            caller = args.user or _collection_owner(components, args.collection)
            doc = components.pipeline.ingest_upload(
                caller_id=caller,
                collection_id=args.collection,
                title=args.title or path.name,
                data=path.read_bytes(),
                kind=args.kind,
                media_type=_media_type_for(path, args.kind),
            )
            print(doc.id)
            return EXIT_OK

        if args.command == "import-arxiv":
            caller = args.user or _collection_owner(components, args.collection)
            doc = components.pipeline.ingest_arxiv(
                caller_id=caller,
                collection_id=args.collection,
                record_or_id=args.arxiv_id,
            )
            print(doc.id)
            return EXIT_OK

        if args.command == "reindex":
            count = components.pipeline.reindex()
            print(f"reindexed {count} chunks with {components.index.embedder.embedder_id}")
            return EXIT_OK
    except GroupRagError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_OPERATION
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_OPERATION
    return EXIT_USAGE


def _media_type_for(path: Path, kind: str) -> str:
    if kind == "PDF_TEXT" or path.suffix.lower() == ".pdf":
        return "application/pdf"
    return "text/plain"


if __name__ == "__main__":
    sys.exit(main())
