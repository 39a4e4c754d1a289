"""Retrieval-augmented question answering over archived resolution documents."""

__version__ = "0.1.0"

from .corpus import DocumentRecord, ingest_corpus, parse_record, parse_user_pdf
from .embedding import EmbeddingClient, EmbeddingMatrix, EmbeddingVector
from .generation import AnswerGenerator, GenerationClient, assemble_prompt
from .index import IndexedCorpus, build_index, cosine, load_index, save_index
from .retrieval import RetrievalConfig, RetrievedDoc, Retriever, relevance_score

__all__ = [
    "AnswerGenerator",
    "DocumentRecord",
    "EmbeddingClient",
    "EmbeddingMatrix",
    "EmbeddingVector",
    "GenerationClient",
    "IndexedCorpus",
    "RetrievalConfig",
    "RetrievedDoc",
    "Retriever",
    "__version__",
    "assemble_prompt",
    "build_index",
    "cosine",
    "ingest_corpus",
    "load_index",
    "parse_record",
    "parse_user_pdf",
    "relevance_score",
    "save_index",
]
