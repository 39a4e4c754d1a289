"""Prompt assembly and provider-backed answer generation.

The prompt is rendered from the fixed template shipped as ``data/prompt.tmpl``;
slot substitution is the only transformation, so golden-file tests can check
the output byte for byte. When no PDF is attached the optional section is
omitted entirely, making the short prompt a strict prefix of the long one.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import requests

from .corpus.pdf import ParsedUpload
from .corpus.sentences import split_sentences
from .errors import BudgetTooSmall, ContextOverflow, ProviderTimeout, ProviderUnavailable
from .retrieval import RetrievedDoc

DEFAULT_BUDGET = 24_000
EXCERPT_CAP = 1_200
UPLOAD_SHARE = 0.20
BLOCK_SEP = "\n\n"

QUERY_SLOT = "{query}"
DOCS_SLOT = "{retrieved_docs}"
PDF_SLOT = "{parsed_pdf}"
OPTIONAL_SECTION = (
    "\n\nRelevant information from the user uploaded PDF (optional): " + PDF_SLOT
)


@lru_cache(maxsize=1)
def load_template() -> str:
    text = resources.files("resqa.data").joinpath("prompt.tmpl").read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    if not text.endswith(OPTIONAL_SECTION):
        raise RuntimeError("prompt template is missing the optional PDF section")
    return text


@dataclass(frozen=True)
class PromptBundle:
    """Assembled prompt plus the blocks that went into it."""

    query: str
    retrieved_blocks: tuple[tuple[str, str], ...]
    upload_blocks: tuple[str, ...] | None
    rendered: str


@dataclass(frozen=True)
class GeneratedAnswer:
    text: str
    sources: tuple[dict, ...]
    provider_model: str
    latency_ms: int
    retries: int = 0


def _trim_to_sentences(text: str, cap: int) -> str:
    """Longest prefix of whole sentences fitting in ``cap`` characters."""
    if len(text) <= cap:
        return text
    joined = ""
    for sentence in split_sentences(text):
        candidate = sentence if not joined else f"{joined} {sentence}"
        if len(candidate) > cap:
            break
        joined = candidate
    return joined


def build_excerpt(doc: RetrievedDoc, cap: int = EXCERPT_CAP) -> str:
    """Best sentence plus its surrounding paragraph, capped at ``cap`` chars.

    Oversized paragraphs shed whole sentences farthest from the best one.
    """
    paragraph = doc.best_paragraph or doc.metadata.get("title", "")
    if len(paragraph) <= cap:
        return paragraph
    sentences = split_sentences(paragraph)
    if not sentences:
        return paragraph[:cap]
    anchor = 0
    if doc.best_sentence is not None:
        text = doc.best_sentence[1]
        anchor = next((i for i, s in enumerate(sentences) if s == text), 0)
    lo = hi = anchor
    picked = sentences[anchor]
    while True:
        extended = False
        if hi + 1 < len(sentences) and len(picked) + 1 + len(sentences[hi + 1]) <= cap:
            hi += 1
            picked = f"{picked} {sentences[hi]}"
            extended = True
        if lo > 0 and len(picked) + 1 + len(sentences[lo - 1]) <= cap:
            lo -= 1
            picked = f"{sentences[lo]} {picked}"
            extended = True
        if not extended:
            return picked if len(picked) <= cap else sentences[anchor][:cap]


def _render(query: str, docs_text: str, pdf_text: str | None) -> str:
    template = load_template()
    if pdf_text is None:
        template = template[: -len(OPTIONAL_SECTION)]
    rendered = template.replace(QUERY_SLOT, query).replace(DOCS_SLOT, docs_text)
    if pdf_text is not None:
        rendered = rendered.replace(PDF_SLOT, pdf_text)
    return rendered


def assemble_prompt(
    query: str,
    retrieved: list[RetrievedDoc],
    upload: ParsedUpload | None = None,
    budget: int = DEFAULT_BUDGET,
) -> PromptBundle:
    """Fill the template within a character budget.

    Retrieved blocks are added in final-rank order; when space runs out,
    trailing sentences are dropped first and whole blocks last. A present
    upload gets a reserved 20% of the budget. Raises :class:`BudgetTooSmall`
    when the query plus a single block cannot fit.
    """
    if not retrieved:
        raise ValueError("retrieved documents must be non-empty")
    ordered = sorted(retrieved, key=lambda d: d.final_rank)

    upload_text: str | None = None
    if upload is not None:
        upload_text = _trim_to_sentences(BLOCK_SEP.join(upload.chunks), int(budget * UPLOAD_SHARE))

    overhead = len(_render(query, "", upload_text))
    docs_room = budget - overhead

    blocks: list[tuple[str, str]] = []
    used = 0
    for doc in ordered:
        excerpt = build_excerpt(doc)
        prefix = len(BLOCK_SEP) if blocks else 0
        block_text = f"[{doc.doc_id}] {excerpt}"
        if used + prefix + len(block_text) > docs_room:
            room = docs_room - used - prefix - len(f"[{doc.doc_id}] ")
            trimmed = _trim_to_sentences(excerpt, room) if room > 0 else ""
            if not trimmed:
                break  # whole-block drop; lower ranks cannot fit either
            excerpt, block_text = trimmed, f"[{doc.doc_id}] {trimmed}"
        blocks.append((doc.doc_id, excerpt))
        used += prefix + len(block_text)

    if not blocks:
        raise BudgetTooSmall(
            f"budget {budget} cannot fit the query and one retrieved block"
        )
    docs_text = BLOCK_SEP.join(f"[{doc_id}] {text}" for doc_id, text in blocks)
    rendered = _render(query, docs_text, upload_text)
    return PromptBundle(
        query=query,
        retrieved_blocks=tuple(blocks),
        upload_blocks=tuple(upload.chunks) if upload is not None else None,
        rendered=rendered,
    )


def _requests_transport(url: str, payload: dict, timeout_s: float):
    response = requests.post(url, json=payload, timeout=timeout_s)
    try:
        body = response.json()
    except ValueError:
        body = {}
    return response.status_code, body


class GenerationClient:
    """Minimal chat-completions client (the widely deployed schema)."""

    def __init__(self, base_url: str, model_id: str, *, timeout_s: float = 120.0, transport=None):
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.timeout_s = timeout_s
        self._transport = transport or _requests_transport

    @classmethod
    def from_env(cls, **overrides) -> "GenerationClient":
        return cls(
            base_url=os.environ["GEN_URL"],
            model_id=os.environ.get("GEN_MODEL", "default"),
            timeout_s=float(os.environ.get("GEN_TIMEOUT_S", 120.0)),
            **overrides,
        )

    def complete(self, prompt: str) -> tuple[str, int]:
        payload = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": prompt}],
        }
        started = time.monotonic()
        try:
            status, body = self._transport(
                self.base_url + "/v1/chat/completions", payload, self.timeout_s
            )
        except requests.Timeout as exc:
            raise ProviderTimeout(f"no answer within {self.timeout_s:.0f}s") from exc
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"generation provider unreachable: {exc}") from exc
        latency_ms = int((time.monotonic() - started) * 1000)
        if status // 100 != 2:
            error = str(body.get("error", f"HTTP {status}"))
            if status == 413 or "context" in error.lower():
                raise ContextOverflow(error)
            raise ProviderUnavailable(f"generation failed: {error}")
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderUnavailable(f"malformed completion response: {exc}") from exc
        if not text:
            raise ProviderUnavailable("provider returned an empty answer")
        return text, latency_ms


class AnswerGenerator:
    """Assembles prompts and obtains answers, with one halved-budget retry
    when the provider reports a context overflow."""

    def __init__(self, client: GenerationClient, budget: int = DEFAULT_BUDGET):
        self.client = client
        self.budget = budget

    def answer(
        self,
        query: str,
        retrieved: list[RetrievedDoc],
        upload: ParsedUpload | None = None,
    ) -> GeneratedAnswer:
        bundle = assemble_prompt(query, retrieved, upload, self.budget)
        retries = 0
        try:
            text, latency_ms = self.client.complete(bundle.rendered)
        except ContextOverflow:
            retries = 1
            bundle = assemble_prompt(query, retrieved, upload, self.budget // 2)
            text, latency_ms = self.client.complete(bundle.rendered)
        by_id = {doc.doc_id: doc for doc in retrieved}
        sources = tuple(
            {"doc_id": doc_id, **by_id[doc_id].metadata}
            for doc_id, _ in bundle.retrieved_blocks
        )
        return GeneratedAnswer(
            text=text,
            sources=sources,
            provider_model=self.client.model_id,
            latency_ms=latency_ms,
            retries=retries,
        )
