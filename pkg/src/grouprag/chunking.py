"""Fixed-stride character chunking.

Spans are generated at stride (size - overlap) from offset 0; each span is
[start, min(start + size, len)) and generation stops with the first span
whose end reaches the text length. Chunk boundaries deliberately ignore
sentence structure: the rule is deterministic and needs no tokenizer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidPolicy

DEFAULT_CHUNK_SIZE = 1600
DEFAULT_CHUNK_OVERLAP = 200


@dataclass(frozen=True)
class ChunkPolicy:
    """Chunk size and overlap, both in characters."""

    size: int = DEFAULT_CHUNK_SIZE
    overlap: int = DEFAULT_CHUNK_OVERLAP

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise InvalidPolicy(f"chunk size must be positive, got {self.size}")
        if self.overlap < 0 or self.overlap >= self.size:
            raise InvalidPolicy(
                f"overlap must satisfy 0 <= overlap < size, got overlap={self.overlap} size={self.size}"
            )

    @property
    def stride(self) -> int:
        return self.size - self.overlap


@dataclass(frozen=True)
class ChunkSpan:
    """Half-open [start, end) character span."""

    start: int
    end: int


def chunk_text(text: str, policy: ChunkPolicy) -> list[ChunkSpan]:
    """Split text into overlapping spans covering [0, len) exactly.

    Empty text yields the empty list. Adjacent spans overlap by exactly
    policy.overlap characters; the final span is clipped at the text end.
    """
    n = len(text)
    if n == 0:
        return []
    spans: list[ChunkSpan] = []
    start = 0
    while True:
        end = min(start + policy.size, n)
        spans.append(ChunkSpan(start, end))
        if end >= n:
            return spans
        start += policy.stride
