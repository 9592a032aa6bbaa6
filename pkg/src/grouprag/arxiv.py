"""arXiv identifier parsing and Atom API client.

The client's HTTP transport is injectable so tests run against recorded
fixture responses instead of the live export API.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Callable
from urllib.parse import quote

import requests

from .errors import ArxivNotFound, InvalidArxivId, MalformedResponse, NetworkError

ARXIV_API_URL = "https://export.arxiv.org/api/query"

_ATOM_NS = {
    "atom": "http://www.w3.org/2005/Atom",
    "arxiv": "http://arxiv.org/schemas/atom",
}

# New-style ids: YYMM.NNNNN with optional version. Old-style ids:
# archive(.subject)?/YYMMNNN with optional version, e.g. astro-ph/0601001v2.
_NEW_STYLE = re.compile(r"^\d{4}\.\d{4,5}(v\d+)?$")
_OLD_STYLE = re.compile(r"^[a-z-]+(\.[a-z]{2})?/\d{7}(v\d+)?$")


def parse_arxiv_id(raw: str) -> str:
    """Normalize an arXiv identifier to canonical lowercase form.

    Accepts surrounding whitespace and an optional leading "arXiv:" prefix.
    """
    s = raw.strip()
    if s.lower().startswith("arxiv:"):
        s = s[len("arxiv:") :].lstrip()
    s = s.lower()
    if _NEW_STYLE.match(s) or _OLD_STYLE.match(s):
        return s
    raise InvalidArxivId(f"not a valid arXiv identifier: {raw!r}")


@dataclass(frozen=True)
class ArxivRecord:
    arxiv_id: str
    title: str
    abstract: str
    pdf_url: str
    authors: list[str] = field(default_factory=list)


Transport = Callable[[str], bytes]


def _http_get(url: str) -> bytes:
    resp = requests.get(url, timeout=30, headers={"User-Agent": "grouprag/0.1"})
    resp.raise_for_status()
    return resp.content


class ArxivClient:
    """Fetch paper metadata (and the PDF) for one arXiv id."""

    def __init__(self, transport: Transport | None = None):
        self._transport = transport or _http_get

    def fetch(self, arxiv_id: str) -> ArxivRecord:
        arxiv_id = parse_arxiv_id(arxiv_id)
        url = f"{ARXIV_API_URL}?id_list={quote(arxiv_id, safe='')}&max_results=1"
        data = self._get(url)
        try:
            root = ET.fromstring(data)
        except ET.ParseError as e:
            raise MalformedResponse(f"unparseable Atom feed: {e}") from e
        entries = root.findall("atom:entry", _ATOM_NS)
        if not entries:
            raise ArxivNotFound(f"no arXiv entry for {arxiv_id}")
        entry = entries[0]

        title = _text(entry, "atom:title")
        abstract = _text(entry, "atom:summary")
        if title is None:
            raise MalformedResponse("entry is missing a title")
        authors = [
            name.text.strip()
            for author in entry.findall("atom:author", _ATOM_NS)
            if (name := author.find("atom:name", _ATOM_NS)) is not None and name.text
        ]
        pdf_url = None
        for link in entry.findall("atom:link", _ATOM_NS):
            if link.get("title") == "pdf" or link.get("type") == "application/pdf":
                pdf_url = link.get("href")
                break
        if pdf_url is None:
            pdf_url = f"https://arxiv.org/pdf/{arxiv_id}"
        return ArxivRecord(
            arxiv_id=arxiv_id,
            title=title,
            abstract=abstract or "",
            pdf_url=pdf_url,
            authors=authors,
        )

    def fetch_pdf(self, record: ArxivRecord) -> bytes:
        return self._get(record.pdf_url)

    def _get(self, url: str) -> bytes:
        try:
            return self._transport(url)
        except requests.RequestException as e:
            raise NetworkError(f"arXiv request failed: {e}") from e


def _text(entry: ET.Element, tag: str) -> str | None:
    el = entry.find(tag, _ATOM_NS)
    if el is None or el.text is None:
        return None
    # The API folds long titles/abstracts with newline + indent.
    return re.sub(r"\s+", " ", el.text).strip()
