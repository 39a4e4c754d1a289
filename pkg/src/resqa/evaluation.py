"""Likert evaluation harness: test set, rating capture, and aggregation.

The 100-question test set (50 health+R/S, 50 education) ships as package
data. Ratings are appended to a durable NDJSON log (fsync per write; human
labels are expensive) and aggregated into per-dimension means for the
document-retrieval and answer-generation sides.
"""

from __future__ import annotations

import datetime
import json
import os
import threading
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import CountError, SchemaError, ValidationError

QUESTION_TYPES = (
    "list_finite",
    "yes_no",
    "closed",
    "open_ended",
    "open_ended_diachronic",
    "yes_no_plus_open",
)
QUESTION_DOMAINS = ("health_rs", "education")

DOC_DIMENSIONS = ("relevance", "accuracy", "usefulness", "temporality", "actionability")
ANSWER_DIMENSIONS = ("congruence", "coherence", "relevance", "creativity", "engagement")

DOC_SECTION = "documents"
ANSWER_SECTION = "answer"

EXPECTED_TOTAL = 100
EXPECTED_PER_DOMAIN = 50


@dataclass(frozen=True)
class TestQuestion:
    id: int
    domain: str
    text: str
    qtype: str
    time_bound: bool


def load_test_set(path: str | Path | None = None) -> list[TestQuestion]:
    """Load and validate the question file (100 questions, 50 per domain)."""
    if path is None:
        raw = resources.files("resqa.data").joinpath("test_questions.json").read_text("utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    try:
        entries = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"test set is not valid JSON: {exc}") from exc
    if not isinstance(entries, list):
        raise SchemaError("test set must be a JSON array")

    questions = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise SchemaError(f"entry {i} is not an object")
        try:
            question = TestQuestion(
                id=entry["id"],
                domain=entry["domain"],
                text=entry["text"],
                qtype=entry["qtype"],
                time_bound=entry["time_bound"],
            )
        except KeyError as exc:
            raise SchemaError(f"entry {i} missing field {exc}") from exc
        if not isinstance(question.id, int) or isinstance(question.id, bool):
            raise SchemaError(f"entry {i}: id must be an integer")
        if question.domain not in QUESTION_DOMAINS:
            raise SchemaError(f"entry {i}: unknown domain {question.domain!r}")
        if question.qtype not in QUESTION_TYPES:
            raise SchemaError(f"entry {i}: unknown qtype {question.qtype!r}")
        if not isinstance(question.text, str) or not question.text:
            raise SchemaError(f"entry {i}: text must be a non-empty string")
        if not isinstance(question.time_bound, bool):
            raise SchemaError(f"entry {i}: time_bound must be a boolean")
        questions.append(question)

    if len(questions) != EXPECTED_TOTAL:
        raise CountError(f"expected {EXPECTED_TOTAL} questions, found {len(questions)}")
    for domain in QUESTION_DOMAINS:
        count = sum(1 for q in questions if q.domain == domain)
        if count != EXPECTED_PER_DOMAIN:
            raise CountError(f"expected {EXPECTED_PER_DOMAIN} {domain} questions, found {count}")
    return questions


def _check_ratings(ratings: dict, dimensions: tuple[str, ...], where: str) -> dict:
    if not isinstance(ratings, dict):
        raise ValidationError(where, f"{where} must be an object")
    for dim in dimensions:
        if dim not in ratings:
            raise ValidationError(dim, f"missing dimension {dim!r} in {where}")
    for key, value in ratings.items():
        if key not in dimensions:
            raise ValidationError(key, f"unexpected dimension {key!r} in {where}")
        if isinstance(value, bool) or not isinstance(value, int) or not 1 <= value <= 5:
            raise ValidationError(key, f"rating {value!r} for {key!r} must be an integer in 1..5")
    return {dim: ratings[dim] for dim in dimensions}


def validate_record(payload: dict) -> dict:
    """Validate one rating sheet; returns the canonical record dict."""
    if not isinstance(payload, dict):
        raise ValidationError("record", "rating record must be an object")
    for name in ("question_id", "config_id", "doc_ratings", "answer_ratings", "rater_id"):
        if name not in payload:
            raise ValidationError(name, f"missing field {name!r}")
    if not isinstance(payload["question_id"], int) or isinstance(payload["question_id"], bool):
        raise ValidationError("question_id", "question_id must be an integer")
    config = payload["config_id"]
    if (
        not isinstance(config, dict)
        or not isinstance(config.get("retriever"), str)
        or not isinstance(config.get("generator"), str)
    ):
        raise ValidationError("config_id", "config_id must carry retriever and generator tags")
    doc_ratings = payload["doc_ratings"]
    if not isinstance(doc_ratings, dict):
        raise ValidationError("doc_ratings", "doc_ratings must map doc_id to a rating sheet")
    checked_docs = {
        doc_id: _check_ratings(sheet, DOC_DIMENSIONS, f"doc_ratings[{doc_id}]")
        for doc_id, sheet in doc_ratings.items()
    }
    answer_ratings = _check_ratings(payload["answer_ratings"], ANSWER_DIMENSIONS, "answer_ratings")
    if not isinstance(payload["rater_id"], str) or not payload["rater_id"]:
        raise ValidationError("rater_id", "rater_id must be a non-empty string")
    timestamp = payload.get("timestamp")
    if timestamp is None:
        timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    elif not isinstance(timestamp, str):
        raise ValidationError("timestamp", "timestamp must be an ISO-8601 string")
    return {
        "question_id": payload["question_id"],
        "config_id": {"retriever": config["retriever"], "generator": config["generator"]},
        "doc_ratings": checked_docs,
        "answer_ratings": answer_ratings,
        "rater_id": payload["rater_id"],
        "timestamp": timestamp,
    }


class RatingLog:
    """Append-only NDJSON rating log; one fsync per accepted record."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, payload: dict) -> dict:
        record = validate_record(payload)
        line = json.dumps(record, ensure_ascii=False)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        return record

    def records(self) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    out.append(json.loads(line))
        return out

    def __len__(self) -> int:
        return len(self.records())


@dataclass
class EvalReport:
    """Mean and count per (config tag, section, dimension)."""

    cells: dict[tuple[str, str, str], tuple[float, int]] = field(default_factory=dict)
    by_rater: dict[tuple[str, str, str, str], tuple[float, int]] | None = None

    def mean(self, config: str, section: str, dimension: str) -> float | None:
        cell = self.cells.get((config, section, dimension))
        return cell[0] if cell else None

    def count(self, config: str, section: str, dimension: str) -> int:
        cell = self.cells.get((config, section, dimension))
        return cell[1] if cell else 0

    def rows(self) -> list[dict]:
        return [
            {"config": c, "section": s, "dimension": d, "mean": mean, "count": count}
            for (c, s, d), (mean, count) in sorted(self.cells.items())
        ]


def aggregate(records: list[dict], by_rater: bool = False) -> EvalReport:
    """Arithmetic mean per cell; an empty log yields an empty report."""
    sums: dict[tuple, float] = {}
    counts: dict[tuple, int] = {}
    rater_sums: dict[tuple, float] = {}
    rater_counts: dict[tuple, int] = {}

    def add(key: tuple, rater: str, value: int):
        sums[key] = sums.get(key, 0.0) + value
        counts[key] = counts.get(key, 0) + 1
        if by_rater:
            rkey = (rater, *key)
            rater_sums[rkey] = rater_sums.get(rkey, 0.0) + value
            rater_counts[rkey] = rater_counts.get(rkey, 0) + 1

    for record in records:
        retriever = record["config_id"]["retriever"]
        generator = record["config_id"]["generator"]
        rater = record.get("rater_id", "")
        for sheet in record["doc_ratings"].values():
            for dim, value in sheet.items():
                add((retriever, DOC_SECTION, dim), rater, value)
        for dim, value in record["answer_ratings"].items():
            add((generator, ANSWER_SECTION, dim), rater, value)

    cells = {key: (sums[key] / counts[key], counts[key]) for key in sums}
    report = EvalReport(cells=cells)
    if by_rater:
        report.by_rater = {
            key: (rater_sums[key] / rater_counts[key], rater_counts[key]) for key in rater_sums
        }
    return report


def merge_reports(first: EvalReport, second: EvalReport) -> EvalReport:
    """Count-weighted merge; equals aggregating the concatenated logs."""
    cells = dict(first.cells)
    for key, (mean, count) in second.cells.items():
        if key in cells:
            prev_mean, prev_count = cells[key]
            total = prev_count + count
            cells[key] = ((prev_mean * prev_count + mean * count) / total, total)
        else:
            cells[key] = (mean, count)
    return EvalReport(cells=cells)


def render_report(report: EvalReport, fmt: str = "table") -> str:
    """Two-section layout: retriever rows over the document dimensions,
    generator rows over the answer dimensions."""
    if fmt == "csv":
        lines = ["config,section,dimension,mean,count"]
        for row in report.rows():
            lines.append(
                f"{row['config']},{row['section']},{row['dimension']},"
                f"{row['mean']:.4f},{row['count']}"
            )
        return "\n".join(lines) + "\n"
    if fmt != "table":
        raise ValueError(f"unknown format: {fmt}")

    def section(title: str, section_key: str, dimensions: tuple[str, ...]) -> list[str]:
        configs = sorted({c for (c, s, _) in report.cells if s == section_key})
        width = max([len(title)] + [len(c) for c in configs]) + 2
        header = title.ljust(width) + "".join(d.capitalize().rjust(14) for d in dimensions)
        lines = [header]
        for config in configs:
            row = config.ljust(width)
            for dim in dimensions:
                mean = report.mean(config, section_key, dim)
                row += ("-" if mean is None else f"{mean:.2f}").rjust(14)
            lines.append(row)
        return lines

    lines = section("Document Retriever", DOC_SECTION, DOC_DIMENSIONS)
    lines.append("")
    lines += section("Answer Generator", ANSWER_SECTION, ANSWER_DIMENSIONS)
    return "\n".join(lines) + "\n"
