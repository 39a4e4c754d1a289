"""Exact flat similarity index over document and sentence embeddings.

Brute-force cosine search (the corpus is small enough that exact search runs
in milliseconds) with a checksummed little-endian binary file format, so a
saved index reloads to bit-identical query results.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .corpus.records import DocumentRecord
from .embedding import EmbeddingClient, EmbeddingMatrix, EmbeddingVector
from .errors import (
    CorruptIndexError,
    DimensionMismatch,
    EmptyIndexError,
    VersionError,
    ZeroVectorError,
)

MAGIC = b"SRIX"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ScoredDoc:
    """One cosine-prefetch hit with its competition rank."""

    doc_id: str
    score: float
    rank: int


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity between two vectors, computed in float64."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"cosine over dims {a.dim} and {b.dim}")
    av = a.values.astype(np.float64)
    bv = b.values.astype(np.float64)
    na = float(np.linalg.norm(av))
    nb = float(np.linalg.norm(bv))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine is undefined for an all-zero vector")
    return float(np.dot(av, bv) / (na * nb))


def competition_ranks(scores: np.ndarray) -> np.ndarray:
    """rank(i) = |{j : score_j > score_i}| + 1; ties share, next rank skips."""
    scores = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.int64)
    current = 1
    for position, idx in enumerate(order):
        if position and scores[idx] < scores[order[position - 1]]:
            current = position + 1
        ranks[idx] = current
    return ranks


@dataclass
class IndexedCorpus:
    """Immutable searchable corpus: vectors, metadata, and chunked content."""

    doc_vectors: EmbeddingMatrix
    sentence_vectors: EmbeddingMatrix
    metadata: dict[str, dict]
    content: dict[str, dict]
    model_id: str
    _doc_row: dict[str, int] = field(init=False, repr=False)
    _sentence_rows: dict[str, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        if self.doc_vectors.model_id != self.model_id or (
            self.sentence_vectors.model_id != self.model_id
        ):
            raise ValueError("index must not mix embedding model ids")
        if len(self.sentence_vectors) and self.doc_vectors.dim != self.sentence_vectors.dim:
            raise DimensionMismatch("document and sentence embedding dims differ")
        doc_ids = set(self.doc_vectors.row_keys)
        if set(self.metadata) != doc_ids:
            raise ValueError("metadata must cover exactly the indexed doc_ids")
        for doc_id, _ in self.sentence_vectors.row_keys:
            if doc_id not in doc_ids:
                raise ValueError(f"sentence vectors reference unknown doc_id {doc_id}")
        for name, matrix in (("document", self.doc_vectors), ("sentence", self.sentence_vectors)):
            if len(matrix) and not np.all(np.linalg.norm(matrix.rows, axis=1) > 0):
                raise ZeroVectorError(f"zero {name} vector rejected at build time")
        self._doc_row = {k: i for i, k in enumerate(self.doc_vectors.row_keys)}
        by_doc: dict[str, list[int]] = {}
        for row, (doc_id, _) in enumerate(self.sentence_vectors.row_keys):
            by_doc.setdefault(doc_id, []).append(row)
        self._sentence_rows = {k: np.asarray(v, dtype=np.int64) for k, v in by_doc.items()}

    @property
    def num_docs(self) -> int:
        return len(self.doc_vectors)

    @property
    def num_sentences(self) -> int:
        return len(self.sentence_vectors)

    @property
    def dim(self) -> int:
        return self.doc_vectors.dim

    def doc_ids(self) -> list[str]:
        return list(self.doc_vectors.row_keys)

    def sentence_rows(self, doc_id: str) -> np.ndarray:
        return self._sentence_rows.get(doc_id, np.empty(0, dtype=np.int64))

    def top_n(self, query: EmbeddingVector, n: int) -> list[ScoredDoc]:
        """Top-n documents by cosine similarity, competition-ranked.

        Ties in score share a rank and are ordered by ascending doc_id so
        results are deterministic.
        """
        if self.num_docs == 0:
            raise EmptyIndexError("index contains no documents")
        if n < 1:
            raise ValueError("n must be >= 1")
        if query.dim != self.dim:
            raise DimensionMismatch(f"query dim {query.dim} vs index dim {self.dim}")
        q = query.values.astype(np.float64)
        qn = float(np.linalg.norm(q))
        if qn == 0.0:
            raise ZeroVectorError("cosine is undefined for an all-zero query")
        rows = self.doc_vectors.rows.astype(np.float64)
        scores = rows @ q / (np.linalg.norm(rows, axis=1) * qn)
        ranks = competition_ranks(scores)
        order = sorted(
            range(self.num_docs),
            key=lambda i: (-scores[i], self.doc_vectors.row_keys[i]),
        )
        return [
            ScoredDoc(
                doc_id=self.doc_vectors.row_keys[i],
                score=float(scores[i]),
                rank=int(ranks[i]),
            )
            for i in order[: min(n, self.num_docs)]
        ]


def doc_metadata(record: DocumentRecord) -> dict:
    return {
        "title": record.title,
        "date": record.date.isoformat(),
        "subjects": list(record.subjects),
        "languages": sorted(record.languages),
        "domain": record.domain,
    }


def build_index(records: list[DocumentRecord], client: EmbeddingClient) -> IndexedCorpus:
    """Embed records (title + first paragraph per document, every sentence)
    and assemble the searchable corpus."""
    doc_keys, doc_texts = [], []
    sent_keys, sent_texts = [], []
    metadata, content = {}, {}
    for record in records:
        doc_keys.append(record.doc_id)
        first_para = record.paragraphs[0] if record.paragraphs else ""
        doc_texts.append(f"{record.title} {first_para}".strip() or record.doc_id)
        for idx, (para_idx, sentence) in enumerate(record.sentences):
            sent_keys.append((record.doc_id, idx))
            sent_texts.append(sentence)
        metadata[record.doc_id] = doc_metadata(record)
        content[record.doc_id] = {
            "paragraphs": list(record.paragraphs),
            "sentences": [[p, s] for p, s in record.sentences],
        }
    doc_matrix = client.embed_batch(doc_texts, keys=doc_keys)
    sent_matrix = client.embed_batch(sent_texts, keys=sent_keys)
    return IndexedCorpus(
        doc_vectors=doc_matrix,
        sentence_vectors=sent_matrix,
        metadata=metadata,
        content=content,
        model_id=client.model_id,
    )


def save_index(index: IndexedCorpus, path: str) -> None:
    """Write the index: magic, version, model_id, dims, float32 blocks,
    JSON metadata block, CRC32 trailer."""
    model_bytes = index.model_id.encode("utf-8")
    meta_json = json.dumps(
        {
            "doc_ids": index.doc_vectors.row_keys,
            "sentence_keys": [[d, i] for d, i in index.sentence_vectors.row_keys],
            "metadata": index.metadata,
            "content": index.content,
        },
        ensure_ascii=False,
    ).encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<H", FORMAT_VERSION),
        struct.pack("<H", len(model_bytes)),
        model_bytes,
        struct.pack("<I", index.dim),
        struct.pack("<I", index.num_docs),
        struct.pack("<Q", index.num_sentences),
        np.ascontiguousarray(index.doc_vectors.rows, dtype="<f4").tobytes(),
        np.ascontiguousarray(index.sentence_vectors.rows, dtype="<f4").tobytes(),
        struct.pack("<Q", len(meta_json)),
        meta_json,
    ]
    blob = b"".join(parts)
    with open(path, "wb") as fh:
        fh.write(blob)
        fh.write(struct.pack("<I", zlib.crc32(blob)))


def load_index(path: str) -> IndexedCorpus:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise CorruptIndexError("bad magic: not an index file")
    (version,) = struct.unpack_from("<H", blob, 4)
    if version > FORMAT_VERSION:
        raise VersionError(f"index format version {version} is newer than {FORMAT_VERSION}")
    if len(blob) < 10:
        raise CorruptIndexError("truncated index file")
    stored_crc = struct.unpack_from("<I", blob, len(blob) - 4)[0]
    if zlib.crc32(blob[:-4]) != stored_crc:
        raise CorruptIndexError("checksum mismatch: index file is corrupt")
    try:
        offset = 6
        (model_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        model_id = blob[offset : offset + model_len].decode("utf-8")
        offset += model_len
        dim, doc_count = struct.unpack_from("<II", blob, offset)
        offset += 8
        (sentence_count,) = struct.unpack_from("<Q", blob, offset)
        offset += 8
        doc_bytes = dim * doc_count * 4
        doc_rows = np.frombuffer(blob, dtype="<f4", count=dim * doc_count, offset=offset)
        doc_rows = doc_rows.reshape(doc_count, dim).copy()
        offset += doc_bytes
        sent_rows = np.frombuffer(blob, dtype="<f4", count=dim * sentence_count, offset=offset)
        sent_rows = sent_rows.reshape(sentence_count, dim).copy()
        offset += dim * sentence_count * 4
        (meta_len,) = struct.unpack_from("<Q", blob, offset)
        offset += 8
        meta = json.loads(blob[offset : offset + meta_len].decode("utf-8"))
    except (struct.error, ValueError, KeyError) as exc:
        raise CorruptIndexError(f"malformed index payload: {exc}") from exc
    return IndexedCorpus(
        doc_vectors=EmbeddingMatrix(doc_rows, meta["doc_ids"], model_id),
        sentence_vectors=EmbeddingMatrix(
            sent_rows, [(d, int(i)) for d, i in meta["sentence_keys"]], model_id
        ),
        metadata=meta["metadata"],
        content=meta["content"],
        model_id=model_id,
    )
