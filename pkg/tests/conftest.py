import io
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from providers import MOCK_DIM, MockEmbedTransport  # noqa: E402

from resqa.corpus import ingest_corpus  # noqa: E402
from resqa.embedding import EmbeddingClient  # noqa: E402
from resqa.index import build_index  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return FIXTURES / "corpus20"


@pytest.fixture(scope="session")
def corpus(corpus_dir):
    result = ingest_corpus(corpus_dir)
    assert not result.errors
    return result


def make_embed_client(**kwargs) -> EmbeddingClient:
    transport = kwargs.pop("transport", None) or MockEmbedTransport()
    return EmbeddingClient(
        "http://embed.invalid",
        "mock-embedder",
        transport=transport,
        backoff_s=0.0,
        sleep=lambda s: None,
        **kwargs,
    )


@pytest.fixture()
def embed_client() -> EmbeddingClient:
    return make_embed_client()


@pytest.fixture(scope="session")
def fixture_index(corpus):
    return build_index(corpus.records, make_embed_client())


@pytest.fixture(scope="session")
def text_pdf_bytes() -> bytes:
    from reportlab.pdfgen import canvas

    buf = io.BytesIO()
    c = canvas.Canvas(buf)
    c.drawString(72, 720, "Resolution adopted by the Assembly.")
    c.drawString(72, 700, "It calls upon all members to act.")
    c.showPage()
    c.drawString(72, 720, "Second page content here.")
    c.save()
    return buf.getvalue()


@pytest.fixture(scope="session")
def image_only_pdf_bytes() -> bytes:
    from reportlab.pdfgen import canvas

    buf = io.BytesIO()
    c = canvas.Canvas(buf)
    c.rect(100, 100, 200, 200, fill=1)
    c.showPage()
    c.save()
    return buf.getvalue()


assert MOCK_DIM == 8  # acceptance harness assumes m=8
