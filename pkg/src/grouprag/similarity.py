"""Scoring primitives for hybrid retrieval.

Cosine similarity over embedding vectors and Jaccard similarity over
character-trigram sets. Both are written with plain left-to-right float
accumulation so results are bit-for-bit reproducible across runs and
machines, which the exact-oracle tests rely on.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import DimensionMismatch, ZeroVector


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """dot(u, v) / (|u| * |v|), clamped to [-1, 1] against float drift."""
    if len(u) != len(v):
        raise DimensionMismatch(f"vector dimensions differ: {len(u)} vs {len(v)}")
    dot = 0.0
    nu = 0.0
    nv = 0.0
    for a, b in zip(u, v):
        dot += a * b
        nu += a * a
        nv += b * b
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for the zero vector")
    value = dot / (math.sqrt(nu) * math.sqrt(nv))
    if value > 1.0:
        return 1.0
    if value < -1.0:
        return -1.0
    return value


def _normalize(text: str) -> str:
    return "".join(c if c.isalnum() else " " for c in text.lower())


def trigram_set(text: str) -> frozenset[str]:
    """3-grams of each word, padded with two leading and one trailing space."""
    grams: set[str] = set()
    for word in _normalize(text).split():
        padded = "  " + word + " "
        for i in range(len(padded) - 2):
            grams.add(padded[i : i + 3])
    return frozenset(grams)


def jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def trigram_similarity(a: str, b: str) -> float:
    """Jaccard overlap of the two texts' trigram sets; 0.0 when both are empty."""
    return jaccard(trigram_set(a), trigram_set(b))
