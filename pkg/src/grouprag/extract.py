"""Raw bytes to canonical text.

Canonical text is UTF-8 with line endings normalized to "\\n" and NUL
characters removed; the content hash, chunk spans and trigram sets are all
defined over it. Extraction is pluggable per document kind so a deployment
can swap in a higher-fidelity PDF extractor without touching ingestion.
"""

from __future__ import annotations

from typing import Callable, Mapping

from .errors import ExtractionFailed, GroupRagError, UnsupportedKind
from .pdftext import extract_pdf_text

Extractor = Callable[[bytes], str]


def normalize_text(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n").replace("\x00", "")


def _decode_utf8(blob: bytes) -> str:
    try:
        return blob.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ExtractionFailed(f"blob is not valid UTF-8: {e}") from e


DEFAULT_EXTRACTORS: Mapping[str, Extractor] = {
    "NOTE": _decode_utf8,
    "TEX": _decode_utf8,
    "TRANSCRIPT": _decode_utf8,
    "PDF_TEXT": extract_pdf_text,
}


def extract_text(
    blob: bytes,
    kind: str,
    extractors: Mapping[str, Extractor] | None = None,
) -> str:
    """Run the registered extractor for the kind, then normalize."""
    registry = extractors if extractors is not None else DEFAULT_EXTRACTORS
    extractor = registry.get(kind)
    if extractor is None:
        raise UnsupportedKind(f"no extractor registered for kind {kind!r}")
    try:
        text = extractor(blob)
    except GroupRagError:
        raise
    except Exception as e:
        raise ExtractionFailed(f"extractor for {kind} failed: {e}") from e
    return normalize_text(text)
