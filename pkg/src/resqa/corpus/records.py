"""Parsing and validation of archived resolution records.

One record per UTF-8 JSON file:
``{"doc_id", "title", "date", "domain", "languages", "subjects", "paragraphs"}``.
Sentences are derived per paragraph with the rule-based splitter.
"""

from __future__ import annotations

import datetime
import json
import logging
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DateRangeError, DuplicateIdError, SchemaError
from .sentences import split_sentences

log = logging.getLogger(__name__)

DOMAINS = ("health_rs", "education", "both")
BASE_DOMAINS = ("health_rs", "education")
LANGUAGES = ("ar", "de", "en", "es", "fr", "ru", "zh")

# Publication window of the bundled resolution archive.
CORPUS_WINDOW = (datetime.date(1990, 1, 1), datetime.date(2025, 3, 31))

_REQUIRED_FIELDS = ("doc_id", "title", "date", "domain", "languages", "subjects", "paragraphs")


@dataclass(frozen=True)
class DocumentRecord:
    """One archived resolution: identity, metadata, and chunked text."""

    doc_id: str
    title: str
    date: datetime.date
    domain: str
    languages: frozenset[str]
    subjects: tuple[str, ...]
    paragraphs: tuple[str, ...]
    sentences: tuple[tuple[int, str], ...]

    def declares_domain(self, domain: str) -> bool:
        return self.domain == domain or self.domain == "both"


@dataclass
class CorpusStats:
    """Document and unique-subject counts per (language, base domain)."""

    cells: dict[tuple[str, str], tuple[int, int]] = field(default_factory=dict)

    def doc_count(self, language: str, domain: str) -> int:
        return self.cells.get((language, domain), (0, 0))[0]

    def subject_count(self, language: str, domain: str) -> int:
        return self.cells.get((language, domain), (0, 0))[1]

    def as_rows(self) -> list[dict]:
        rows = []
        for (language, domain), (docs, subjects) in sorted(self.cells.items()):
            rows.append(
                {
                    "language": language,
                    "domain": domain,
                    "doc_count": docs,
                    "subject_count": subjects,
                }
            )
        return rows


@dataclass
class IngestResult:
    records: list[DocumentRecord]
    stats: CorpusStats
    errors: list[tuple[str, str]]  # (filename, message), non-fatal per-file failures


def parse_record(
    raw: str,
    *,
    enforce_window: bool = False,
    abbreviations: frozenset[str] | None = None,
) -> DocumentRecord:
    """Parse one JSON record into a validated :class:`DocumentRecord`.

    Raises :class:`SchemaError` for missing/invalid fields. A date outside
    the archive window is logged as a warning, or raised as
    :class:`DateRangeError` when ``enforce_window`` is set.
    """
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"record is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("record must be a JSON object")

    for name in _REQUIRED_FIELDS:
        if name not in data:
            raise SchemaError(f"missing required field: {name}")

    doc_id = data["doc_id"]
    if not isinstance(doc_id, str) or not doc_id:
        raise SchemaError("doc_id must be a non-empty string")
    title = data["title"]
    if not isinstance(title, str):
        raise SchemaError("title must be a string")

    try:
        date = datetime.date.fromisoformat(data["date"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"date must be YYYY-MM-DD: {data['date']!r}") from exc
    if not CORPUS_WINDOW[0] <= date <= CORPUS_WINDOW[1]:
        if enforce_window:
            raise DateRangeError(f"{doc_id}: date {date} outside corpus window")
        log.warning("%s: date %s outside corpus window", doc_id, date)

    domain = data["domain"]
    if domain not in DOMAINS:
        raise SchemaError(f"domain must be one of {DOMAINS}: {domain!r}")

    languages = data["languages"]
    if not isinstance(languages, list) or not all(isinstance(x, str) for x in languages):
        raise SchemaError("languages must be a list of strings")
    unknown = set(languages) - set(LANGUAGES)
    if unknown:
        raise SchemaError(f"unknown language codes: {sorted(unknown)}")

    subjects = data["subjects"]
    if not isinstance(subjects, list) or not all(isinstance(x, str) for x in subjects):
        raise SchemaError("subjects must be a list of strings")
    if len(set(subjects)) != len(subjects):
        raise SchemaError(f"{doc_id}: duplicate subject tags")

    paragraphs = data["paragraphs"]
    if not isinstance(paragraphs, list) or not all(isinstance(x, str) for x in paragraphs):
        raise SchemaError("paragraphs must be a list of strings")

    sentences = tuple(
        (idx, sentence)
        for idx, paragraph in enumerate(paragraphs)
        for sentence in split_sentences(paragraph, abbreviations)
    )
    return DocumentRecord(
        doc_id=doc_id,
        title=title,
        date=date,
        domain=domain,
        languages=frozenset(languages),
        subjects=tuple(subjects),
        paragraphs=tuple(paragraphs),
        sentences=sentences,
    )


def serialize_record(record: DocumentRecord) -> str:
    """Render a record back to its canonical JSON form (sentences re-derivable)."""
    return json.dumps(
        {
            "doc_id": record.doc_id,
            "title": record.title,
            "date": record.date.isoformat(),
            "domain": record.domain,
            "languages": sorted(record.languages),
            "subjects": list(record.subjects),
            "paragraphs": list(record.paragraphs),
        },
        ensure_ascii=False,
    )


def compute_stats(records: list[DocumentRecord]) -> CorpusStats:
    docs: dict[tuple[str, str], int] = {}
    tags: dict[tuple[str, str], set[str]] = {}
    for record in records:
        for domain in BASE_DOMAINS:
            if not record.declares_domain(domain):
                continue
            for language in record.languages:
                key = (language, domain)
                docs[key] = docs.get(key, 0) + 1
                tags.setdefault(key, set()).update(record.subjects)
    return CorpusStats(
        cells={key: (docs[key], len(tags.get(key, ()))) for key in docs}
    )


def ingest_corpus(
    path: str | Path,
    *,
    enforce_window: bool = False,
    abbreviations: frozenset[str] | None = None,
) -> IngestResult:
    """Ingest every ``*.json`` record under ``path``.

    Malformed files are collected into the error report and skipped; a
    duplicate doc_id across otherwise-valid files raises
    :class:`DuplicateIdError`. Records are returned sorted by doc_id so
    repeated ingestion of the same directory is byte-for-byte identical.
    """
    root = Path(path)
    records: dict[str, DocumentRecord] = {}
    errors: list[tuple[str, str]] = []
    for file in sorted(root.glob("*.json")):
        try:
            record = parse_record(
                file.read_text(encoding="utf-8"),
                enforce_window=enforce_window,
                abbreviations=abbreviations,
            )
        except (SchemaError, DateRangeError) as exc:
            errors.append((file.name, str(exc)))
            continue
        if record.doc_id in records:
            raise DuplicateIdError(f"duplicate doc_id: {record.doc_id} (in {file.name})")
        records[record.doc_id] = record
    ordered = [records[doc_id] for doc_id in sorted(records)]
    return IngestResult(records=ordered, stats=compute_stats(ordered), errors=errors)


RECORDS_MAGIC = b"SRRC"
RECORDS_VERSION = 1


def save_records(records: list[DocumentRecord], path: str | Path) -> None:
    """Checksummed binary container of canonical record JSON blobs."""
    parts = [RECORDS_MAGIC, struct.pack("<HI", RECORDS_VERSION, len(records))]
    for record in records:
        blob = serialize_record(record).encode("utf-8")
        parts.append(struct.pack("<I", len(blob)))
        parts.append(blob)
    payload = b"".join(parts)
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))


def load_records(path: str | Path) -> list[DocumentRecord]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 14 or blob[:4] != RECORDS_MAGIC:
        raise SchemaError("not a records file (bad magic)")
    if zlib.crc32(blob[:-4]) != struct.unpack_from("<I", blob, len(blob) - 4)[0]:
        raise SchemaError("records file failed checksum")
    version, count = struct.unpack_from("<HI", blob, 4)
    if version > RECORDS_VERSION:
        raise SchemaError(f"records file version {version} is newer than {RECORDS_VERSION}")
    offset = 10
    out = []
    for _ in range(count):
        (length,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        out.append(parse_record(blob[offset : offset + length].decode("utf-8")))
        offset += length
    return out
