"""Command-line entry points: ingest, index, ask, serve, eval-report, analytics."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analytics import (
    SubjectCluster,
    cluster_subjects,
    cluster_temporal_profile,
    collect_subjects,
    profile_csv,
)
from .corpus.records import ingest_corpus, load_records, save_records
from .embedding import EmbeddingClient, EmbeddingMatrix
from .errors import ResqaError
from .evaluation import RatingLog, aggregate, render_report
from .generation import AnswerGenerator, GenerationClient
from .index import build_index, load_index, save_index
from .retrieval import RetrievalConfig, Retriever


def _cmd_ingest(args) -> int:
    result = ingest_corpus(args.corpus_dir)
    save_records(result.records, args.out)
    report = {
        "records": len(result.records),
        "stats": result.stats.as_rows(),
        "errors": [{"file": f, "message": m} for f, m in result.errors],
    }
    Path(args.report).write_text(json.dumps(report, indent=1), encoding="utf-8")
    print(f"ingested {len(result.records)} records ({len(result.errors)} files skipped)")
    print(f"records -> {args.out}; report -> {args.report}")
    return 0


def _cmd_index_build(args) -> int:
    records = load_records(args.records)
    client = _embed_client(args)
    index = build_index(records, client)
    save_index(index, args.out)
    print(
        f"indexed {index.num_docs} documents / {index.num_sentences} sentences "
        f"(dim {index.dim}, model {index.model_id}) -> {args.out}"
    )
    return 0


def _cmd_index_info(args) -> int:
    index = load_index(args.index)
    print(f"model_id:  {index.model_id}")
    print(f"dim:       {index.dim}")
    print(f"documents: {index.num_docs}")
    print(f"sentences: {index.num_sentences}")
    return 0


def _cmd_ask(args) -> int:
    index = load_index(args.index)
    retriever = Retriever(index, _embed_client(args))
    config = RetrievalConfig(n=args.n, k=args.k, alpha=args.alpha)
    retrieved = retriever.retrieve(args.query, config)
    header = f"{'rank':>4}  {'doc_id':<16} {'prefetch':>9} {'rerank':>9}  best sentence"
    print(header)
    print("-" * len(header))
    for doc in retrieved:
        sentence = doc.best_sentence[1] if doc.best_sentence else "(no sentences)"
        if len(sentence) > 60:
            sentence = sentence[:57] + "..."
        print(
            f"{doc.final_rank:>4}  {doc.doc_id:<16} {doc.prefetch_score:>9.4f} "
            f"{doc.rerank_score:>9.4f}  {sentence}"
        )
    if not args.retrieve_only:
        generator = AnswerGenerator(GenerationClient.from_env())
        answer = generator.answer(args.query, retrieved)
        print()
        print(answer.text)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    index = load_index(args.index)
    app = create_app(
        index,
        embed_client=_embed_client(args),
        gen_client=GenerationClient.from_env(),
        pdf_store=args.pdf_store,
        eval_log_path=args.eval_log,
        session_journal_path=args.session_journal,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_eval_report(args) -> int:
    report = aggregate(RatingLog(args.log).records(), by_rater=args.by_rater)
    print(render_report(report, args.format), end="")
    if args.by_rater and report.by_rater:
        print()
        for (rater, config, section, dim), (mean, count) in sorted(report.by_rater.items()):
            print(f"{rater}: {config} / {section} / {dim} = {mean:.2f} (n={count})")
    return 0


def _cmd_analytics_embed_tags(args) -> int:
    records = load_records(args.records)
    tags = collect_subjects(records)
    client = _embed_client(args)
    matrix = client.embed_batch(tags, keys=tags)
    Path(args.out).write_text(
        json.dumps(
            {"model_id": matrix.model_id, "tags": tags, "vectors": matrix.rows.tolist()},
            ensure_ascii=False,
        ),
        encoding="utf-8",
    )
    print(f"embedded {len(tags)} tags -> {args.out}")
    return 0


def _cmd_analytics_cluster(args) -> int:
    data = json.loads(Path(args.tags).read_text(encoding="utf-8"))
    matrix = EmbeddingMatrix(data["vectors"], data["tags"], data.get("model_id", "unknown"))
    clusters = cluster_subjects(matrix, args.threshold)
    Path(args.out).write_text(
        json.dumps(
            {
                "threshold": args.threshold,
                "linkage": "ward",
                "clusters": [
                    {"cluster_id": c.cluster_id, "members": list(c.members), "label": c.label}
                    for c in clusters
                ],
            },
            ensure_ascii=False,
            indent=1,
        ),
        encoding="utf-8",
    )
    print(f"{len(clusters)} clusters over {len(data['tags'])} tags -> {args.out}")
    return 0


def _cmd_analytics_profile(args) -> int:
    records = load_records(args.records)
    data = json.loads(Path(args.clusters).read_text(encoding="utf-8"))
    clusters = [
        SubjectCluster(c["cluster_id"], tuple(c["members"]), c.get("label"))
        for c in data["clusters"]
    ]
    profiles = cluster_temporal_profile(records, clusters, args.period)
    Path(args.out).write_text(profile_csv(profiles), encoding="utf-8")
    print(f"{len(profiles)} periods x {len(clusters)} clusters -> {args.out}")
    return 0


def _embed_client(args) -> EmbeddingClient:
    if getattr(args, "embed_url", None):
        return EmbeddingClient(args.embed_url, args.embed_model or "default")
    return EmbeddingClient.from_env()


def _add_embed_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--embed-url", help="embedding provider base URL (default: EMBED_URL)")
    parser.add_argument("--embed-model", help="embedding model id (default: EMBED_MODEL)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resqa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a corpus directory into a records file")
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--out", default="records.bin")
    p.add_argument("--report", default="stats.json")
    p.set_defaults(func=_cmd_ingest)

    p_index = sub.add_parser("index", help="build or inspect a vector index")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)
    p = index_sub.add_parser("build", help="embed records and write an index file")
    p.add_argument("--records", required=True)
    p.add_argument("--out", default="index.srix")
    _add_embed_flags(p)
    p.set_defaults(func=_cmd_index_build)
    p = index_sub.add_parser("info", help="print index dimensions and counts")
    p.add_argument("index")
    p.set_defaults(func=_cmd_index_info)

    p = sub.add_parser("ask", help="retrieve (and optionally answer) a query")
    p.add_argument("--index", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--n", type=int, default=RetrievalConfig.n)
    p.add_argument("--k", type=int, default=RetrievalConfig.k)
    p.add_argument("--alpha", type=float, default=RetrievalConfig.alpha)
    p.add_argument("--retrieve-only", action="store_true")
    _add_embed_flags(p)
    p.set_defaults(func=_cmd_ask)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--index", required=True)
    p.add_argument("--pdf-store")
    p.add_argument("--eval-log", default="eval.ndjson")
    p.add_argument("--session-journal", help="NDJSON turn journal; restores sessions on restart")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    _add_embed_flags(p)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("eval-report", help="aggregate a ratings log")
    p.add_argument("--log", required=True)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--by-rater", action="store_true")
    p.set_defaults(func=_cmd_eval_report)

    p_analytics = sub.add_parser("analytics", help="subject clustering and temporal profiles")
    analytics_sub = p_analytics.add_subparsers(dest="analytics_command", required=True)
    p = analytics_sub.add_parser("embed-tags", help="embed unique subject tags")
    p.add_argument("--records", required=True)
    p.add_argument("--out", default="tags.json")
    _add_embed_flags(p)
    p.set_defaults(func=_cmd_analytics_embed_tags)
    p = analytics_sub.add_parser("cluster", help="cluster embedded tags")
    p.add_argument("--tags", required=True)
    p.add_argument("--threshold", type=float, default=2.0)
    p.add_argument("--out", default="clusters.json")
    p.set_defaults(func=_cmd_analytics_cluster)
    p = analytics_sub.add_parser("profile", help="per-period cluster frequencies")
    p.add_argument("--clusters", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--period", type=int, choices=(5, 10), default=10)
    p.add_argument("--out", default="profile.csv")
    p.set_defaults(func=_cmd_analytics_profile)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResqaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        if str(exc) in ("'EMBED_URL'", "'GEN_URL'"):
            print(f"error: environment variable {exc} is not set", file=sys.stderr)
            return 2
        raise


if __name__ == "__main__":
    sys.exit(main())
