"""grouprag: self-hostable retrieval-augmented generation for research groups.

Documents live in permissioned, nestable collections; ingestion chunks and
embeds them into a hybrid (vector + trigram) index; a tool-calling LLM agent
searches that index on the user's behalf and streams cited answers.
"""

__version__ = "0.1.0"

from .chunking import ChunkPolicy, ChunkSpan, chunk_text
from .db import Store
from .search import ChunkHit, FusionWeights, SearchIndex
from .similarity import cosine_similarity, trigram_set, trigram_similarity

__all__ = [
    "__version__",
    "ChunkPolicy",
    "ChunkSpan",
    "chunk_text",
    "Store",
    "ChunkHit",
    "FusionWeights",
    "SearchIndex",
    "cosine_similarity",
    "trigram_set",
    "trigram_similarity",
]
