"""Acceptance suite: one test per release criterion, at the stated tolerance.

Each test prints a single PASS line on success (pytest itself reports the
failures), so a `pytest -v -s tests/test_acceptance.py` run reads as a
checklist.
"""

import json
import math
import os
import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import requests
from providers import MockGenTransport, start_provider_server

from conftest import make_embed_client
from resqa.corpus import ingest_corpus
from resqa.embedding import EmbeddingMatrix, EmbeddingVector
from resqa.errors import CorruptIndexError, VersionError
from resqa.evaluation import aggregate, merge_reports, render_report
from resqa.generation import GenerationClient, assemble_prompt
from resqa.index import IndexedCorpus, competition_ranks, cosine, load_index, save_index
from resqa.retrieval import RetrievalConfig, Retriever, relevance_score
from resqa.service import create_app

from test_analytics import naive_ward_partition, partition_of, rec
from test_evaluation import make_record, synthesize_426_log
from test_retrieval import make_synthetic_index

FIXTURES = Path(__file__).parent / "fixtures"


def _report(name: str) -> None:
    print(f"PASS {name}", flush=True)


def test_retrieval_oracle_equivalence():
    """1,000 random corpora: retrieve == no-prefetch brute-force oracle
    whenever the oracle's top-k is contained in the cosine top-n."""
    rng = np.random.RandomState(20250401)
    started = time.monotonic()
    checked = missed = 0
    client = make_embed_client()
    for trial in range(1000):
        n_docs = rng.randint(1, 201)
        index = make_synthetic_index(rng, n_docs)
        query_text = f"acceptance query {trial}"
        qv = client.embed_query(query_text)
        k = rng.randint(1, 6)
        if rng.rand() < 0.5:
            n = max(k, n_docs)
        else:
            n = rng.randint(k, max(k, min(n_docs, 50)) + 1)

        got = Retriever(index, client).retrieve(query_text, RetrievalConfig(n=n, k=k, alpha=0.7))

        # Oracle: score every document, no prefetch truncation, full sort.
        q = qv.values.astype(np.float64)
        qn = math.sqrt(float((q * q).sum()))
        oracle = []
        for row, doc_id in zip(index.doc_vectors.rows, index.doc_vectors.row_keys):
            r64 = row.astype(np.float64)
            cos = float((r64 * q).sum()) / (math.sqrt(float((r64 * r64).sum())) * qn)
            sent = index.sentence_vectors.rows[index.sentence_rows(doc_id)].astype(np.float64)
            sims = -np.sqrt(((sent - q) ** 2).sum(axis=1))
            score = 0.7 * sims.max() + 0.3 * sims.mean() if len(sims) else cos
            oracle.append((doc_id, cos, float(score)))
        oracle.sort(key=lambda t: (-t[2], -t[1], t[0]))
        oracle_top = oracle[:k]

        prefetch_ids = {h.doc_id for h in index.top_n(qv, n)}
        if not all(doc_id in prefetch_ids for doc_id, _, _ in oracle_top):
            missed += 1
            continue
        checked += 1
        assert [d.doc_id for d in got] == [doc_id for doc_id, _, _ in oracle_top]
        assert [d.final_rank for d in got] == list(range(1, len(got) + 1))
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"runtime {elapsed:.1f}s exceeds 60s budget"
    assert checked >= 400
    print(f"prefetch-miss rate: {missed}/1000 trials (checked {checked})", flush=True)
    _report(f"retrieval oracle equivalence ({checked} contained trials, {elapsed:.1f}s)")


def test_formula_fidelity():
    """relevance_score vs direct recomputation: 1e-9 over 10,000 cases;
    alpha 0 and 1 reduce exactly to mean and max."""
    rng = np.random.RandomState(7)
    for _ in range(10_000):
        n_sentences = rng.randint(1, 21)
        q_values = rng.uniform(-2, 2, 8)
        rows = rng.uniform(-2, 2, (n_sentences, 8))
        alpha = float(rng.uniform(0, 1))
        q = EmbeddingVector(q_values, "m")
        sentences = [EmbeddingVector(row, "m") for row in rows]
        got = relevance_score(q, sentences, alpha)

        sims = []
        for row in rows:
            total = 0.0
            for a, b in zip(q_values, row):
                d = float(np.float32(a)) - float(np.float32(b))
                total += d * d
            sims.append(-math.sqrt(total))
        expected = alpha * max(sims) + (1 - alpha) * (sum(sims) / len(sims))
        assert abs(got - expected) < 1e-9

        # Degenerate weights reduce exactly to the best / mean sentence score.
        from resqa.retrieval import sentence_similarity

        impl_sims = [sentence_similarity(q, s) for s in sentences]
        assert relevance_score(q, sentences, 1.0) == max(impl_sims)
        assert relevance_score(q, sentences, 0.0) == float(np.mean(impl_sims))
    _report("formula fidelity (10,000 cases at 1e-9; alpha 0/1 exact)")


def test_rank_semantics():
    """Competition ranking == set-cardinality definition on 10,000 tied vectors."""
    rng = np.random.RandomState(11)
    for _ in range(10_000):
        n = rng.randint(1, 50)
        scores = rng.randint(0, max(2, n // 3), size=n).astype(np.float64)
        got = competition_ranks(scores)
        expected = (scores[None, :] > scores[:, None]).sum(axis=1) + 1
        assert np.array_equal(got, expected)
    _report("rank semantics (10,000 tied score vectors, exact)")


def test_cosine_properties():
    """Symmetry, [-1,1] range within 1e-6, scale invariance of values and
    of top-n ordering; 10,000 trials."""
    rng = np.random.RandomState(23)
    for trial in range(10_000):
        dim = rng.randint(2, 16)
        a = EmbeddingVector(rng.uniform(-3, 3, dim), "m")
        b = EmbeddingVector(rng.uniform(-3, 3, dim), "m")
        value = cosine(a, b)
        assert value == cosine(b, a)
        assert -1.0 - 1e-6 <= value <= 1.0 + 1e-6
        c = float(rng.uniform(0.01, 100.0))
        scaled = EmbeddingVector(c * a.values.astype(np.float64), "m")
        assert abs(cosine(scaled, b) - value) < 1e-6

    from test_index import build_corpus

    for _ in range(500):
        index = build_corpus(rng, rng.randint(2, 60))
        q = rng.uniform(-1, 1, 8)
        c = float(rng.uniform(0.01, 100.0))
        base = index.top_n(EmbeddingVector(q, "m"), 10)
        scaled = index.top_n(EmbeddingVector(c * q, "m"), 10)
        assert [h.doc_id for h in base] == [h.doc_id for h in scaled]
        assert [h.rank for h in base] == [h.rank for h in scaled]
    _report("cosine properties (10,000 pair trials + 500 ordering trials)")


def test_prompt_golden_files():
    """Assembled prompts byte-equal the golden fixtures."""
    from test_generation import make_doc, make_upload

    no_upload = assemble_prompt("Q", [make_doc()], None)
    assert no_upload.rendered.encode() == (FIXTURES / "golden_prompt_no_upload.txt").read_bytes()
    with_upload = assemble_prompt("Q", [make_doc()], make_upload("P"))
    assert with_upload.rendered.encode() == (FIXTURES / "golden_prompt_with_upload.txt").read_bytes()
    _report("prompt golden tests (with/without upload, byte-exact)")


def test_corpus_statistics():
    """Published-archive statistics when available, else the bundled
    20-document fixture's hand-fixed counts, exactly."""
    published = os.environ.get("UN_RES_DIR")
    if published:
        result = ingest_corpus(published)
        assert result.stats.cells[("en", "health_rs")] == (4781, 2383)
        assert result.stats.cells[("en", "education")] == (2718, 1944)
        _report("corpus statistics (published archive)")
        return
    result = ingest_corpus(FIXTURES / "corpus20")
    assert len(result.records) == 20
    from test_ingest import EXPECTED_CELLS

    assert result.stats.cells == EXPECTED_CELLS
    _report("corpus statistics (bundled 20-doc fixture, exact)")


def test_index_persistence(fixture_index, tmp_path):
    """100 random queries bit-identical across save/load; corruption rejected."""
    path = str(tmp_path / "acceptance.srix")
    save_index(fixture_index, path)
    loaded = load_index(path)
    rng = np.random.RandomState(31)
    for _ in range(100):
        query = EmbeddingVector(rng.uniform(-1, 1, fixture_index.dim), "m")
        before = fixture_index.top_n(query, 8)
        after = loaded.top_n(query, 8)
        assert [(h.doc_id, h.rank) for h in before] == [(h.doc_id, h.rank) for h in after]
        assert all(a.score == b.score for a, b in zip(before, after))

    data = Path(path).read_bytes()
    truncated = tmp_path / "t.srix"
    truncated.write_bytes(data[: len(data) // 3])
    with pytest.raises(CorruptIndexError):
        load_index(str(truncated))
    flipped = bytearray(data)
    flipped[len(flipped) // 2] ^= 0x01
    corrupted = tmp_path / "c.srix"
    corrupted.write_bytes(bytes(flipped))
    with pytest.raises(CorruptIndexError):
        load_index(str(corrupted))
    future = bytearray(data)
    future[4:6] = (99).to_bytes(2, "little")
    newer = tmp_path / "v.srix"
    newer.write_bytes(bytes(future))
    with pytest.raises(VersionError):
        load_index(str(newer))
    _report("index persistence (100 queries bit-identical; corruption rejected)")


def test_eval_aggregation():
    """Permutation invariance and merge consistency at 1e-9; the rendering
    fixture reproduces the 4.26 document-relevance cell."""
    rng = np.random.RandomState(5)
    records = [
        make_record(
            question_id=int(rng.randint(1, 51)),
            doc_relevance=int(rng.randint(1, 6)),
            retriever=rng.choice(["r1", "r2"]),
            generator=rng.choice(["g1", "g2"]),
            rater=rng.choice(["a", "b"]),
        )
        for _ in range(300)
    ]
    base = aggregate(records)
    permutation = rng.permutation(len(records))
    shuffled = aggregate([records[i] for i in permutation])
    assert set(base.cells) == set(shuffled.cells)
    for key in base.cells:
        assert abs(base.cells[key][0] - shuffled.cells[key][0]) < 1e-9
        assert base.cells[key][1] == shuffled.cells[key][1]

    for split in (1, 57, 150, 299):
        merged = merge_reports(aggregate(records[:split]), aggregate(records[split:]))
        for key in base.cells:
            assert abs(base.cells[key][0] - merged.cells[key][0]) < 1e-9
            assert base.cells[key][1] == merged.cells[key][1]

    report = aggregate(synthesize_426_log())
    table = render_report(report, "table")
    row = next(line for line in table.splitlines() if line.startswith("qwen3-emb-0.6b"))
    assert row.split()[1] == "4.26"
    assert table.splitlines()[0].startswith("Document Retriever")
    _report("eval aggregation (permutation + merge at 1e-9; 4.26 rendering cell)")


def test_clustering_oracle():
    """Ward partition equals the naive O(n^3) reference on inputs up to 50
    points; the per-100-resolutions normalization matches hand fixtures."""
    from resqa.analytics import SubjectCluster, cluster_subjects, cluster_temporal_profile

    rng = np.random.RandomState(17)
    for trial in range(40):
        n = rng.randint(2, 51)
        dim = rng.randint(2, 9)
        points = rng.uniform(-3, 3, size=(n, dim))
        threshold = float(rng.uniform(0.3, 6.0))
        tags = [f"t{i}" for i in range(n)]
        matrix = EmbeddingMatrix(points.astype(np.float32), tags, "m")
        got = partition_of(cluster_subjects(matrix, threshold), tags)
        expected = naive_ward_partition(matrix.rows, threshold)
        assert got == expected, f"trial {trial} (n={n})"

    records = []
    for i in range(50):
        subjects = []
        if i < 7:
            subjects.append("a")
        if i < 3:
            subjects.append("b")
        records.append(rec(f"d{i}", 1990 + i % 10, subjects or ["other"]))
    clusters = [SubjectCluster(0, ("a", "b")), SubjectCluster(1, ("other",))]
    profile = cluster_temporal_profile(records, clusters, 10)[0]
    assert profile.normalized_freq[0] == 10.0  # (10/50)*100/2, exact
    assert profile.normalized_freq[1] == (43 / 50) * 100.0  # 43 docs tagged "other"
    _report("clustering oracle (40 random inputs <= 50 points; normalization exact)")


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_end_to_end_with_mock_providers(corpus, tmp_path):
    """`serve` (real subprocess) + scripted client: one chat turn with <= k
    sources and a round-trippable history export, under 5 s wall time."""
    from resqa.corpus.records import save_records
    from resqa.index import build_index

    provider_url, provider_server = start_provider_server()
    index = build_index(corpus.records, make_embed_client())
    index_path = tmp_path / "e2e.srix"
    save_index(index, str(index_path))
    save_records(corpus.records, tmp_path / "records.bin")

    port = _free_port()
    env = dict(
        os.environ,
        EMBED_URL=provider_url,
        EMBED_MODEL="mock-embedder",
        GEN_URL=provider_url,
        GEN_MODEL="mock-gen",
    )
    process = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "resqa.cli",
            "serve",
            "--index",
            str(index_path),
            "--eval-log",
            str(tmp_path / "eval.ndjson"),
            "--port",
            str(port),
        ],
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )
    base = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 20
        while True:
            try:
                if requests.get(base + "/healthz", timeout=1).status_code == 200:
                    break
            except requests.RequestException:
                pass
            if time.monotonic() > deadline:
                process.kill()
                out = process.stdout.read().decode(errors="replace")
                raise AssertionError(f"service did not become ready:\n{out}")
            time.sleep(0.05)

        started = time.monotonic()
        chat = requests.post(
            base + "/api/chat",
            json={"query": "What do resolutions say about spiritual care?", "k": 3, "n": 10},
            timeout=10,
        )
        assert chat.status_code == 200
        body = chat.json()
        assert body["answer"]
        assert 1 <= len(body["sources"]) <= 3
        history = requests.get(
            base + f"/api/history/{body['session_id']}", params={"format": "json"}, timeout=10
        )
        exported = history.json()
        assert len(exported) == 1
        assert exported[0]["query"] == "What do resolutions say about spiritual care?"
        assert json.loads(json.dumps(exported)) == exported
        markdown = requests.get(
            base + f"/api/history/{body['session_id']}", params={"format": "markdown"}, timeout=10
        )
        assert "## Turn 1" in markdown.text
        elapsed = time.monotonic() - started
        assert elapsed < 5.0, f"chat turn + export took {elapsed:.2f}s"
    finally:
        process.terminate()
        try:
            process.wait(timeout=5)
        except subprocess.TimeoutExpired:
            process.kill()
        provider_server.shutdown()
    _report(f"end-to-end with mock providers ({elapsed:.2f}s turn + export)")


def test_end_to_end_in_process(fixture_index, tmp_path):
    """Same chat flow through the app object (covers the upload path too)."""
    from fastapi.testclient import TestClient

    app = create_app(
        fixture_index,
        embed_client=make_embed_client(),
        gen_client=GenerationClient("http://gen.invalid", "mock-gen", transport=MockGenTransport()),
        eval_log_path=tmp_path / "eval.ndjson",
    )
    client = TestClient(app)
    response = client.post("/api/chat", json={"query": "education rights", "k": 2, "n": 8})
    assert response.status_code == 200
    assert len(response.json()["sources"]) <= 2
    _report("end-to-end in-process chat turn")
