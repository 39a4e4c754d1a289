import pytest

from resqa.corpus import parse_user_pdf
from resqa.errors import EmptyDocumentError, UnparsablePdfError, UploadTimeoutError


def test_text_pdf_round_trip(text_pdf_bytes):
    upload = parse_user_pdf(text_pdf_bytes, filename="fixture.pdf")
    assert len(upload.chunks) >= 1
    joined = "\n".join(upload.chunks)
    assert "Resolution adopted by the Assembly." in joined
    assert "Second page content here." in joined
    assert upload.filename == "fixture.pdf"
    assert upload.upload_id


def test_corrupt_bytes():
    with pytest.raises(UnparsablePdfError):
        parse_user_pdf(b"\x00\x01\x02 definitely not a pdf")


def test_image_only_pdf(image_only_pdf_bytes):
    with pytest.raises(EmptyDocumentError):
        parse_user_pdf(image_only_pdf_bytes)


def test_encrypted_pdf_rejected(text_pdf_bytes):
    doctored = text_pdf_bytes.replace(b"trailer", b"trailer\n/Encrypt 9 0 R", 1)
    assert b"/Encrypt" in doctored
    with pytest.raises(UnparsablePdfError, match="encrypt"):
        parse_user_pdf(doctored)


def test_upload_ids_unique(text_pdf_bytes):
    a = parse_user_pdf(text_pdf_bytes)
    b = parse_user_pdf(text_pdf_bytes)
    assert a.upload_id != b.upload_id


def test_timeout_enforced(text_pdf_bytes):
    clock = iter([0.0, 31.0, 32.0, 33.0]).__next__

    def slow_extractor(data, deadline, clock):
        return ["some text"]  # pretends to be slow via the fake clock

    with pytest.raises(UploadTimeoutError):
        parse_user_pdf(text_pdf_bytes, extractor=slow_extractor, timeout_s=30.0, clock=clock)
