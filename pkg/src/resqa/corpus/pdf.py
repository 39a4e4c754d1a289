"""Real-time parsing of user-uploaded PDFs into text chunks.

Extraction sits behind a small callable interface so alternative parsers can
be plugged in; the built-in extractor reads the text layer only (Flate or
plain content streams, BT/ET text operators). No OCR.
"""

from __future__ import annotations

import base64
import datetime
import re
import time
import uuid
import zlib
from dataclasses import dataclass

from ..errors import EmptyDocumentError, UnparsablePdfError, UploadTimeoutError

DEFAULT_TIMEOUT_S = 30.0

_STREAM_DICT = re.compile(rb"<<.*?>>\s*stream\r?\n", re.DOTALL)
_LENGTH_DIRECT = re.compile(rb"/Length\s+(\d+)(?!\s+\d+\s+R)")
_FILTER_SPEC = re.compile(rb"/Filter\s*(/\w+|\[[^\]]*\])")


@dataclass(frozen=True)
class ParsedUpload:
    """A user upload reduced to ordered text chunks."""

    upload_id: str
    filename: str
    chunks: tuple[str, ...]
    created_at: datetime.datetime


def parse_user_pdf(
    data: bytes,
    *,
    filename: str = "upload.pdf",
    extractor=None,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    clock=time.monotonic,
) -> ParsedUpload:
    """Parse PDF bytes into a :class:`ParsedUpload` within the time budget.

    Raises :class:`UnparsablePdfError` for corrupt or encrypted input,
    :class:`EmptyDocumentError` when no text layer exists, and
    :class:`UploadTimeoutError` when extraction exceeds ``timeout_s``.
    """
    if extractor is None:
        extractor = extract_text_pages
    deadline = clock() + timeout_s
    pages = extractor(data, deadline=deadline, clock=clock)
    if clock() > deadline:
        raise UploadTimeoutError(f"PDF parsing exceeded {timeout_s:.0f}s budget")
    chunks = tuple(_normalize(page) for page in pages if page.strip())
    if not chunks:
        raise EmptyDocumentError("no extractable text (image-only or empty PDF)")
    return ParsedUpload(
        upload_id=uuid.uuid4().hex,
        filename=filename,
        chunks=chunks,
        created_at=datetime.datetime.now(datetime.timezone.utc),
    )


def extract_text_pages(data: bytes, deadline: float | None = None, clock=time.monotonic) -> list[str]:
    """Built-in text-layer extractor: one string per text-bearing content stream."""
    if b"%PDF-" not in data[:1024]:
        raise UnparsablePdfError("missing %PDF header")
    if b"/Encrypt" in data:
        raise UnparsablePdfError("encrypted PDFs are not supported")

    pages = []
    for match in _STREAM_DICT.finditer(data):
        if deadline is not None and clock() > deadline:
            raise UploadTimeoutError("PDF parsing exceeded time budget")
        stream_dict = match.group(0)
        body = _stream_body(data, match.end(), stream_dict)
        if body is None:
            continue
        body = _decode_filters(stream_dict, body)
        if body is None:
            continue
        if b"BT" not in body:
            continue
        text = _text_from_content(body)
        if text.strip():
            pages.append(text)
    return pages


def _decode_filters(stream_dict: bytes, body: bytes) -> bytes | None:
    """Apply the /Filter chain in order; None when a filter is unsupported."""
    spec = _FILTER_SPEC.search(stream_dict)
    if not spec:
        return body
    for name in re.findall(rb"/(\w+)", spec.group(1)):
        try:
            if name == b"FlateDecode":
                body = zlib.decompress(body)
            elif name == b"ASCII85Decode":
                body = _ascii85(body)
            else:
                return None  # image or other non-text encoding
        except (zlib.error, ValueError):
            return None
    return body


def _ascii85(data: bytes) -> bytes:
    data = data.strip()
    if data.endswith(b"~>"):
        data = data[:-2]
    if data.startswith(b"<~"):
        data = data[2:]
    return base64.a85decode(re.sub(rb"\s", b"", data))


def _stream_body(data: bytes, start: int, stream_dict: bytes) -> bytes | None:
    length = _LENGTH_DIRECT.search(stream_dict)
    if length:
        end = start + int(length.group(1))
        if end > len(data):
            return None
        return data[start:end]
    end = data.find(b"endstream", start)
    if end < 0:
        return None
    return data[start:end].rstrip(b"\r\n")


def _text_from_content(content: bytes) -> str:
    """Walk content-stream tokens and collect text-showing operators."""
    out: list[str] = []
    operands: list[object] = []
    i, n = 0, len(content)

    def newline():
        if out and not out[-1].endswith("\n"):
            out.append("\n")

    def show(value: object):
        if isinstance(value, bytes):
            out.append(value.decode("latin-1"))

    while i < n:
        c = content[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"(":
            value, i = _literal_string(content, i)
            operands.append(value)
        elif c == b"<" and content[i : i + 2] != b"<<":
            value, i = _hex_string(content, i)
            operands.append(value)
        elif c == b"<":  # dict start, skip balanced
            depth, i = 1, i + 2
            while i < n and depth:
                if content[i : i + 2] == b"<<":
                    depth, i = depth + 1, i + 2
                elif content[i : i + 2] == b">>":
                    depth, i = depth - 1, i + 2
                else:
                    i += 1
        elif c == b"[":
            array, i = _array(content, i)
            operands.append(array)
        elif c == b"/":
            j = i + 1
            while j < n and not content[j : j + 1].isspace() and content[j : j + 1] not in b"()<>[]/%":
                j += 1
            operands.append(content[i:j])
            i = j
        elif c == b"%":  # comment to end of line
            j = content.find(b"\n", i)
            i = n if j < 0 else j + 1
        else:
            j = i
            while j < n and not content[j : j + 1].isspace() and content[j : j + 1] not in b"()<>[]/%":
                j += 1
            token = content[i:j]
            i = j
            try:
                operands.append(float(token))
                continue
            except ValueError:
                pass
            op = token.decode("latin-1", "replace")
            if op == "Tj" and operands:
                show(operands[-1])
            elif op == "TJ" and operands and isinstance(operands[-1], list):
                for element in operands[-1]:
                    if isinstance(element, bytes):
                        show(element)
                    elif isinstance(element, float) and element <= -180:
                        out.append(" ")
            elif op == "'":
                newline()
                if operands:
                    show(operands[-1])
            elif op == '"':
                newline()
                if operands:
                    show(operands[-1])
            elif op in ("Td", "TD", "T*", "Tm", "ET"):
                newline()
            elif op == "BI":  # inline image: skip to EI
                end = content.find(b"EI", i)
                i = n if end < 0 else end + 2
            operands = []
    return "".join(out)


def _literal_string(content: bytes, i: int) -> tuple[bytes, int]:
    out = bytearray()
    depth = 1
    i += 1
    n = len(content)
    while i < n and depth:
        b = content[i : i + 1]
        if b == b"\\":
            nxt = content[i + 1 : i + 2]
            if nxt in b"nrtbf":
                out += {b"n": b"\n", b"r": b"\r", b"t": b"\t", b"b": b"\b", b"f": b"\f"}[nxt]
                i += 2
            elif nxt.isdigit():
                j = i + 1
                while j < min(i + 4, n) and content[j : j + 1].isdigit():
                    j += 1
                out.append(int(content[i + 1 : j], 8) & 0xFF)
                i = j
            elif nxt in (b"\n", b"\r"):
                i += 2
            else:
                out += nxt
                i += 2
        elif b == b"(":
            depth += 1
            out += b
            i += 1
        elif b == b")":
            depth -= 1
            if depth:
                out += b
            i += 1
        else:
            out += b
            i += 1
    return bytes(out), i


def _hex_string(content: bytes, i: int) -> tuple[bytes, int]:
    end = content.find(b">", i)
    if end < 0:
        end = len(content)
    digits = re.sub(rb"\s", b"", content[i + 1 : end])
    if len(digits) % 2:
        digits += b"0"
    try:
        return bytes.fromhex(digits.decode("ascii")), end + 1
    except ValueError:
        return b"", end + 1


def _array(content: bytes, i: int) -> tuple[list, int]:
    out: list[object] = []
    i += 1
    n = len(content)
    while i < n:
        c = content[i : i + 1]
        if c == b"]":
            return out, i + 1
        if c.isspace():
            i += 1
        elif c == b"(":
            value, i = _literal_string(content, i)
            out.append(value)
        elif c == b"<" and content[i : i + 2] != b"<<":
            value, i = _hex_string(content, i)
            out.append(value)
        else:
            j = i
            while j < n and not content[j : j + 1].isspace() and content[j : j + 1] not in b"()<>[]/%":
                j += 1
            try:
                out.append(float(content[i:j]))
            except ValueError:
                pass
            i = j if j > i else i + 1
    return out, i


def _normalize(text: str) -> str:
    lines = [re.sub(r"[ \t]+", " ", line).strip() for line in text.splitlines()]
    return "\n".join(line for line in lines if line)
