"""Two-stage retrieval: cosine prefetch, then sentence-level re-ranking.

Stage one pre-fetches the top-n documents by cosine similarity between the
query embedding and the document embeddings. Stage two re-scores each
candidate from its sentence embeddings: similarity is the negated Euclidean
distance (so larger is closer), and the document score blends the best and
the average sentence similarity with weight ``alpha`` (default 0.7) on the
best. The top-k of the re-ranked list is returned.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingClient, EmbeddingVector
from .errors import DimensionMismatch, EmptyDocumentError
from .index import IndexedCorpus, ScoredDoc

log = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.7
DEFAULT_PREFETCH = 50
DEFAULT_TOP_K = 5


@dataclass(frozen=True)
class RetrievalConfig:
    """Prefetch width n, final count k, and max/avg blend weight alpha."""

    n: int = DEFAULT_PREFETCH
    k: int = DEFAULT_TOP_K
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be >= 1")
        if self.k > self.n:
            raise ValueError(f"k ({self.k}) must not exceed n ({self.n})")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class RetrievedDoc:
    """A re-ranked retrieval hit with its scores and best-sentence evidence."""

    doc_id: str
    prefetch_score: float
    rerank_score: float
    final_rank: int
    best_sentence: tuple[int, str] | None
    best_paragraph: str
    metadata: dict


def sentence_similarity(q: EmbeddingVector, s: EmbeddingVector) -> float:
    """Negated Euclidean distance; 0.0 is maximal (identical vectors)."""
    if q.dim != s.dim:
        raise DimensionMismatch(f"similarity over dims {q.dim} and {s.dim}")
    diff = q.values.astype(np.float64) - s.values.astype(np.float64)
    return -float(np.linalg.norm(diff))


def combine_similarities(sims, alpha: float) -> float:
    """alpha * max(sims) + (1 - alpha) * avg(sims)."""
    sims = np.asarray(sims, dtype=np.float64)
    if sims.size == 0:
        raise EmptyDocumentError("no sentence similarities to combine")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    return float(alpha * np.max(sims) + (1.0 - alpha) * np.mean(sims))


def relevance_score(
    q: EmbeddingVector, sentences: list[EmbeddingVector], alpha: float = DEFAULT_ALPHA
) -> float:
    """Document relevance from its sentence embeddings."""
    if not sentences:
        raise EmptyDocumentError("document has no sentence embeddings")
    return combine_similarities([sentence_similarity(q, s) for s in sentences], alpha)


class Retriever:
    """Read-only retrieval pipeline over an immutable index."""

    def __init__(self, index: IndexedCorpus, embed_client: EmbeddingClient):
        self.index = index
        self.embed_client = embed_client

    def retrieve(self, query_text: str, config: RetrievalConfig | None = None) -> list[RetrievedDoc]:
        if not query_text or not query_text.strip():
            raise ValueError("query must be non-empty")
        config = config or RetrievalConfig()
        query = self.embed_client.embed_query(query_text)
        prefetched = self.index.top_n(query, config.n)
        scored = [self._rescore(query, hit, config.alpha) for hit in prefetched]
        scored.sort(key=lambda t: (-t[0], -t[1].score, t[1].doc_id))
        results = []
        for rank, (rerank, hit, best) in enumerate(scored[: config.k], start=1):
            best_sentence, best_paragraph = best
            results.append(
                RetrievedDoc(
                    doc_id=hit.doc_id,
                    prefetch_score=hit.score,
                    rerank_score=rerank,
                    final_rank=rank,
                    best_sentence=best_sentence,
                    best_paragraph=best_paragraph,
                    metadata=dict(self.index.metadata[hit.doc_id]),
                )
            )
        return results

    def _rescore(self, query: EmbeddingVector, hit: ScoredDoc, alpha: float):
        content = self.index.content.get(hit.doc_id, {})
        rows = self.index.sentence_rows(hit.doc_id)
        if rows.size == 0:
            # Archival noise tolerance: fall back to the prefetch cosine.
            log.warning("%s has no sentence embeddings; using prefetch score", hit.doc_id)
            paragraphs = content.get("paragraphs", [])
            return hit.score, hit, (None, paragraphs[0] if paragraphs else "")
        q = query.values.astype(np.float64)
        sents = self.index.sentence_vectors.rows[rows].astype(np.float64)
        sims = -np.linalg.norm(sents - q, axis=1)
        rerank = float(alpha * np.max(sims) + (1.0 - alpha) * np.mean(sims))
        best_row = rows[int(np.argmax(sims))]  # ties: lowest sentence index
        _, sent_idx = self.index.sentence_vectors.row_keys[best_row]
        para_idx, text = content["sentences"][sent_idx]
        best_paragraph = content["paragraphs"][para_idx]
        return rerank, hit, ((sent_idx, text), best_paragraph)
