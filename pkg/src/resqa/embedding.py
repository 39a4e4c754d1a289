"""Client for the external embedding provider.

Wire protocol: ``POST {EMBED_URL}/embed`` with ``{"model": str, "texts": [str]}``
returning ``{"dim": int, "vectors": [[float]]}``; errors arrive as non-2xx with
``{"error": str}``. The embedding dimension is provider-declared on the first
successful response, never hard-coded. Vectors are stored as 32-bit floats.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import requests

from .errors import DimensionMismatch, PartialBatchError, ProviderUnavailable

DEFAULT_BATCH_SIZE = 64
DEFAULT_CONCURRENCY = 8
DEFAULT_RETRIES = 3
DEFAULT_BACKOFF_S = 0.25


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """A fixed-dimension float32 vector tagged with its producing model."""

    values: np.ndarray
    model_id: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 1 or values.size == 0:
            raise DimensionMismatch("embedding must be a non-empty 1-D vector")
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


@dataclass(eq=False)
class EmbeddingMatrix:
    """Row-per-key float32 matrix; keys are doc_ids or (doc_id, sentence_index)."""

    rows: np.ndarray
    row_keys: list
    model_id: str

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float32)
        if self.rows.ndim != 2:
            raise DimensionMismatch("rows must be a 2-D array")
        if self.rows.shape[0] != len(self.row_keys):
            raise DimensionMismatch(
                f"{self.rows.shape[0]} rows vs {len(self.row_keys)} keys"
            )
        if len(set(self.row_keys)) != len(self.row_keys):
            raise ValueError("row keys must be unique")

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])

    def vector(self, i: int) -> EmbeddingVector:
        return EmbeddingVector(self.rows[i], self.model_id)


def _requests_transport(url: str, payload: dict, timeout_s: float):
    response = requests.post(url, json=payload, timeout=timeout_s)
    try:
        body = response.json()
    except ValueError:
        body = {}
    return response.status_code, body


def _cache_key(model_id: str, text: str) -> str:
    normalized = " ".join(text.split())
    return hashlib.sha256(f"{model_id}\x00{normalized}".encode()).hexdigest()


@dataclass
class _Cache:
    """Thread-safe vector cache, in-memory with optional on-disk mirror."""

    directory: str | None = None
    _memory: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def get(self, key: str) -> np.ndarray | None:
        with self._lock:
            hit = self._memory.get(key)
        if hit is not None:
            return hit
        if self.directory:
            path = os.path.join(self.directory, key[:2], key + ".npy")
            if os.path.exists(path):
                vector = np.load(path)
                with self._lock:
                    self._memory[key] = vector
                return vector
        return None

    def put(self, key: str, vector: np.ndarray) -> None:
        with self._lock:
            self._memory[key] = vector
        if self.directory:
            subdir = os.path.join(self.directory, key[:2])
            os.makedirs(subdir, exist_ok=True)
            np.save(os.path.join(subdir, key + ".npy"), vector)


class EmbeddingClient:
    """Computes query embeddings on the fly and batch-precomputes with caching."""

    def __init__(
        self,
        base_url: str,
        model_id: str,
        *,
        batch_size: int = DEFAULT_BATCH_SIZE,
        concurrency: int = DEFAULT_CONCURRENCY,
        retries: int = DEFAULT_RETRIES,
        backoff_s: float = DEFAULT_BACKOFF_S,
        timeout_s: float = 30.0,
        cache_dir: str | None = None,
        transport=None,
        sleep=time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.batch_size = max(1, batch_size)
        self.concurrency = max(1, concurrency)
        self.retries = max(1, retries)
        self.backoff_s = backoff_s
        self.timeout_s = timeout_s
        self._transport = transport or _requests_transport
        self._sleep = sleep
        self._cache = _Cache(cache_dir)
        self._dim: int | None = None
        self._dim_lock = threading.Lock()

    @classmethod
    def from_env(cls, **overrides) -> "EmbeddingClient":
        return cls(
            base_url=os.environ["EMBED_URL"],
            model_id=os.environ.get("EMBED_MODEL", "default"),
            batch_size=int(os.environ.get("EMBED_BATCH_SIZE", DEFAULT_BATCH_SIZE)),
            concurrency=int(os.environ.get("EMBED_CONCURRENCY", DEFAULT_CONCURRENCY)),
            **overrides,
        )

    @property
    def dim(self) -> int | None:
        """Provider-declared dimensionality; known after the first response."""
        return self._dim

    def embed_query(self, text: str) -> EmbeddingVector:
        if not text or not text.strip():
            raise ValueError("query text must be non-empty")
        key = _cache_key(self.model_id, text)
        cached = self._cache.get(key)
        if cached is None:
            cached = self._call([text])[0]
            self._cache.put(key, cached)
        return EmbeddingVector(cached, self.model_id)

    def embed_batch(self, texts: list[str], keys: list | None = None) -> EmbeddingMatrix:
        if keys is None:
            keys = list(range(len(texts)))
        if len(keys) != len(texts):
            raise ValueError("keys must align with texts")
        if any(not t or not t.strip() for t in texts):
            raise ValueError("all texts must be non-empty")
        if not texts:
            dim = self._dim or 0
            return EmbeddingMatrix(np.zeros((0, dim), dtype=np.float32), [], self.model_id)

        vectors: list[np.ndarray | None] = [None] * len(texts)
        miss_positions = []
        for i, text in enumerate(texts):
            hit = self._cache.get(_cache_key(self.model_id, text))
            if hit is None:
                miss_positions.append(i)
            else:
                vectors[i] = hit

        if miss_positions:
            chunks = [
                miss_positions[i : i + self.batch_size]
                for i in range(0, len(miss_positions), self.batch_size)
            ]
            failed: list[int] = []

            def run(chunk: list[int]):
                return chunk, self._call([texts[i] for i in chunk])

            with ThreadPoolExecutor(max_workers=self.concurrency) as pool:
                futures = [pool.submit(run, chunk) for chunk in chunks]
                for future in futures:
                    try:
                        chunk, rows = future.result()
                    except ProviderUnavailable:
                        continue
                    for i, row in zip(chunk, rows):
                        vectors[i] = row
                        self._cache.put(_cache_key(self.model_id, texts[i]), row)
            failed = [i for i in miss_positions if vectors[i] is None]
            if failed:
                if len(failed) == len(miss_positions):
                    raise ProviderUnavailable(
                        f"all {len(chunks)} embedding batches failed"
                    )
                raise PartialBatchError(
                    f"{len(failed)} of {len(texts)} texts failed to embed", failed
                )

        return EmbeddingMatrix(np.stack(vectors), list(keys), self.model_id)

    def _call(self, texts: list[str]) -> np.ndarray:
        """One provider round-trip with bounded retries; returns float32 rows."""
        url = self.base_url + "/embed"
        payload = {"model": self.model_id, "texts": texts}
        last_error = None
        for attempt in range(self.retries):
            if attempt:
                self._sleep(self.backoff_s * (2 ** (attempt - 1)))
            try:
                status, body = self._transport(url, payload, self.timeout_s)
            except requests.RequestException as exc:
                last_error = str(exc)
                continue
            if status // 100 == 5:
                last_error = str(body.get("error", f"HTTP {status}"))
                continue
            if status // 100 != 2:
                raise ProviderUnavailable(
                    f"embedding provider rejected request: HTTP {status}: "
                    f"{body.get('error', '')}"
                )
            return self._validate(body, len(texts))
        raise ProviderUnavailable(
            f"embedding provider unavailable after {self.retries} attempts: {last_error}"
        )

    def _validate(self, body: dict, expected: int) -> np.ndarray:
        try:
            dim = int(body["dim"])
            rows = np.asarray(body["vectors"], dtype=np.float32)
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderUnavailable(f"malformed provider response: {exc}") from exc
        if rows.ndim != 2 or rows.shape[0] != expected or rows.shape[1] != dim:
            raise DimensionMismatch(
                f"provider returned shape {rows.shape}, declared dim {dim}, "
                f"expected {expected} rows"
            )
        with self._dim_lock:
            if self._dim is None:
                self._dim = dim
            elif dim != self._dim:
                raise DimensionMismatch(
                    f"provider dim changed from {self._dim} to {dim}"
                )
        if not np.all(np.isfinite(rows)):
            raise ProviderUnavailable("provider returned non-finite values")
        return rows
