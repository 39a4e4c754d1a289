from .pdf import ParsedUpload, extract_text_pages, parse_user_pdf
from .records import (
    BASE_DOMAINS,
    CORPUS_WINDOW,
    DOMAINS,
    LANGUAGES,
    CorpusStats,
    DocumentRecord,
    IngestResult,
    compute_stats,
    ingest_corpus,
    parse_record,
    serialize_record,
)
from .sentences import load_abbreviations, split_sentences

__all__ = [
    "BASE_DOMAINS",
    "CORPUS_WINDOW",
    "DOMAINS",
    "LANGUAGES",
    "CorpusStats",
    "DocumentRecord",
    "IngestResult",
    "ParsedUpload",
    "compute_stats",
    "extract_text_pages",
    "ingest_corpus",
    "load_abbreviations",
    "parse_record",
    "parse_user_pdf",
    "serialize_record",
    "split_sentences",
]
