"""Best-effort text extraction for simple PDFs.

Handles the common case of text-only PDFs whose content streams are stored
plain or behind FlateDecode / ASCII85Decode filters: decodes each stream,
walks BT..ET text blocks, and collects the strings shown by Tj, ', and TJ
operators. Layout, fonts, CID encodings and images are out of scope; swap in
a production extractor through the ingestion extractor registry when
fidelity matters.
"""

from __future__ import annotations

import base64
import re
import zlib

from .errors import ExtractionFailed

_STREAM_RE = re.compile(rb"<<(.*?)>>\s*stream\r?\n(.*?)endstream", re.S)
_TEXT_BLOCK_RE = re.compile(rb"BT(.*?)ET", re.S)

_ESCAPES = {
    b"n": "\n",
    b"r": "\r",
    b"t": "\t",
    b"b": "\b",
    b"f": "\f",
    b"(": "(",
    b")": ")",
    b"\\": "\\",
}


def extract_pdf_text(data: bytes) -> str:
    """Extract shown text from a simple PDF; blocks are joined with newlines."""
    if not data.startswith(b"%PDF"):
        raise ExtractionFailed("not a PDF file (missing %PDF header)")
    lines: list[str] = []
    for match in _STREAM_RE.finditer(data):
        stream_dict, body = match.group(1), match.group(2)
        content = _decode_stream(stream_dict, body)
        if content is None:
            continue
        for block in _TEXT_BLOCK_RE.finditer(content):
            text = _shown_text(block.group(1))
            if text:
                lines.append(text)
    return "\n".join(lines)


def _decode_stream(stream_dict: bytes, body: bytes) -> bytes | None:
    """Apply the filters named in the stream dict; None if undecodable."""
    content = body.strip(b"\r\n")
    if b"ASCII85Decode" in stream_dict:
        try:
            payload = content.strip()
            if payload.endswith(b"~>"):
                payload = payload[:-2]
            if payload.startswith(b"<~"):
                payload = payload[2:]
            content = base64.a85decode(payload)
        except ValueError:
            return None
    if b"FlateDecode" in stream_dict:
        try:
            content = zlib.decompress(content)
        except zlib.error:
            return None
    return content


def _shown_text(block: bytes) -> str:
    """Strings passed to text-showing operators inside one BT..ET block."""
    parts: list[str] = []
    pending: list[str] = []
    i = 0
    n = len(block)
    while i < n:
        c = block[i : i + 1]
        if c == b"(":
            literal, i = _parse_literal_string(block, i)
            pending.append(literal)
            continue
        if c == b"<" and block[i + 1 : i + 2] != b"<":
            hex_text, i = _parse_hex_string(block, i)
            pending.append(hex_text)
            continue
        if block.startswith((b"Tj", b"TJ"), i) or c == b"'":
            parts.extend(pending)
            pending.clear()
            i += 2 if c != b"'" else 1
            continue
        i += 1
    return "".join(parts)


def _parse_literal_string(block: bytes, start: int) -> tuple[str, int]:
    """Parse a (...) literal starting at ``start``; handles escapes and
    balanced nested parens."""
    out: list[str] = []
    depth = 1
    i = start + 1
    n = len(block)
    while i < n and depth > 0:
        c = block[i : i + 1]
        if c == b"\\":
            nxt = block[i + 1 : i + 2]
            if nxt in _ESCAPES:
                out.append(_ESCAPES[nxt])
                i += 2
            elif nxt.isdigit():
                j = i + 1
                while j < min(i + 4, n) and block[j : j + 1].isdigit():
                    j += 1
                out.append(chr(int(block[i + 1 : j], 8) & 0xFF))
                i = j
            elif nxt in (b"\n", b"\r"):  # line continuation
                i += 2
            else:
                i += 1
        elif c == b"(":
            depth += 1
            out.append("(")
            i += 1
        elif c == b")":
            depth -= 1
            if depth > 0:
                out.append(")")
            i += 1
        else:
            out.append(c.decode("latin-1"))
            i += 1
    return "".join(out), i


def _parse_hex_string(block: bytes, start: int) -> tuple[str, int]:
    end = block.find(b">", start)
    if end == -1:
        return "", len(block)
    digits = re.sub(rb"\s", b"", block[start + 1 : end])
    if len(digits) % 2:
        digits += b"0"
    try:
        raw = bytes.fromhex(digits.decode("ascii"))
    except ValueError:
        return "", end + 1
    return raw.decode("latin-1"), end + 1
