"""Command-line entry points: ingest, train, retrieve, recommend, feedback,
eval, serve, and fixture regeneration."""

from __future__ import annotations

import json
import sys

import click

from . import evalharness, fixtures, gateway
from .embed import RgcnConfig, TripleGraph, train
from .embed.table import EmbeddingTable
from .graph import Graph, NodeKind
from .ingest import (
    LlmExtractor,
    OfflineExtractor,
    build_ackg,
    build_lakg,
    parse_judgments,
    parse_statutes,
)
from .pipeline import FeedbackEvent, Recommender
from .retrieval import candidate_articles, match_keys
from .service import ServiceConfig, make_provider, serve


@click.group()
def main():
    """Law-article recommendation over a case-enhanced knowledge graph."""


@main.command()
@click.option("--statutes", required=True, type=click.Path(exists=True))
@click.option("--judgments", type=click.Path(exists=True))
@click.option("--extractor", "extractor_name", default="offline",
              type=click.Choice(["offline", "llm"]))
@click.option("--out", required=True, type=click.Path())
@click.option("--keys-per-article", default=8, show_default=True)
@click.option("--cap", default=5, show_default=True,
              help="Max key links per case.")
def ingest(statutes, judgments, extractor_name, out, keys_per_article, cap):
    """Build a graph file from statute and judgment corpora."""
    articles = parse_statutes(statutes)
    if extractor_name == "offline":
        extractor = OfflineExtractor.from_articles(
            articles, phrases_per_article=keys_per_article
        )
    else:
        provider = make_provider("llm")
        extractor = LlmExtractor(provider, phrases_per_article=keys_per_article)
    graph = Graph()
    lakg_report = build_lakg(graph, articles, extractor)
    reports = {"lakg": lakg_report.as_dict()}
    if judgments:
        records = parse_judgments(judgments)
        ackg_report = build_ackg(graph, records, extractor, cap=cap)
        reports["ackg"] = ackg_report.as_dict()
    graph.save(out)
    reports["stats"] = graph.stats().as_dict()
    click.echo(json.dumps(reports, indent=1))


@main.command(name="train")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--h-dim", default=16, show_default=True, type=int)
@click.option("--epochs", default=50, show_default=True, type=int)
@click.option("--lr", default=0.01, show_default=True, type=float)
@click.option("--test-size", default=0.2, show_default=True, type=float)
@click.option("--layers", default=2, show_default=True, type=int)
@click.option("--init-scale", default=0.1, show_default=True, type=float)
def train_cmd(graph_path, out, seed, h_dim, epochs, lr, test_size, layers, init_scale):
    """Train link-prediction embeddings and export the best-epoch table."""
    graph = Graph.load(graph_path)
    config = RgcnConfig(
        h_dim=h_dim,
        num_layers=layers,
        learning_rate=lr,
        num_epochs=epochs,
        test_size=test_size,
        seed=seed,
        init_scale=init_scale,
    )
    table, metrics = train(TripleGraph.from_store(graph), config)
    table.save(out)
    for m in metrics:
        click.echo(
            f"epoch {m.epoch:3d}  loss {m.loss:.6f}  "
            f"train_auc {m.train_auc:.4f}  test_auc {m.test_auc:.4f}"
        )
    click.echo(
        f"saved table from epoch {table.provenance['epoch']} "
        f"(test AUC {table.provenance['test_auc']:.4f}) to {out}"
    )


def _load_case_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read().strip()


def _provider_from_options(provider_name, script):
    return make_provider(provider_name, script)


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--emb", required=True, type=click.Path(exists=True))
@click.option("--case-file", required=True, type=click.Path(exists=True))
@click.option("--k", default=8, show_default=True, type=int)
@click.option("--q", default=5, show_default=True, type=int)
@click.option("--provider", "provider_name", default="offline",
              type=click.Choice(["offline", "scripted", "llm"]))
@click.option("--script", type=click.Path(exists=True))
def retrieve(graph_path, emb, case_file, k, q, provider_name, script):
    """Print the candidate articles for a case as JSON."""
    graph = Graph.load(graph_path)
    table = EmbeddingTable.load(emb)
    provider = _provider_from_options(provider_name, script)
    keys = match_keys(_load_case_text(case_file), provider, graph, k=k)
    if not keys.resolved:
        click.echo(json.dumps({"candidates": [], "keys": keys.phrases}))
        return
    result = candidate_articles(keys, graph, table, q=q)
    click.echo(json.dumps(result.as_dict(), indent=1, ensure_ascii=False))


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--emb", required=True, type=click.Path(exists=True))
@click.option("--case-file", required=True, type=click.Path(exists=True))
@click.option("--k", default=8, show_default=True, type=int)
@click.option("--q", default=5, show_default=True, type=int)
@click.option("--provider", "provider_name", default="offline",
              type=click.Choice(["offline", "scripted", "llm"]))
@click.option("--script", type=click.Path(exists=True))
def recommend(graph_path, emb, case_file, k, q, provider_name, script):
    """Run the full grounded recommendation for a case and print it."""
    graph = Graph.load(graph_path)
    table = EmbeddingTable.load(emb)
    provider = _provider_from_options(provider_name, script)
    recommender = Recommender(graph, table, provider, OfflineExtractor(), k=k, q=q)
    recommendation = recommender.recommend(_load_case_text(case_file))
    click.echo(json.dumps(recommendation.as_dict(), indent=1, ensure_ascii=False))


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--emb", type=click.Path(exists=True))
@click.option("--event", "event_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="Defaults to rewriting --graph.")
def feedback(graph_path, emb, event_path, out):
    """Apply a confirmed-outcome event file to the graph."""
    graph = Graph.load(graph_path)
    with open(event_path, encoding="utf-8") as fh:
        payload = json.load(fh)
    event = FeedbackEvent(
        case_text=payload["case_text"],
        case_name=payload["case_name"],
        session_date=payload["session_date"],
        prosecution_reason=payload["prosecution_reason"],
        confirmed_articles=list(payload["confirmed_articles"]),
        corrected_from=payload.get("corrected_from"),
    )
    table = EmbeddingTable.load(emb) if emb else EmbeddingTable({}, {}, {"h_dim": 0})
    recommender = Recommender(graph, table, make_provider("offline"), OfflineExtractor())
    report = recommender.apply_feedback(event)
    graph.save(out or graph_path)
    click.echo(json.dumps(report.as_dict(), indent=1))


@main.command(name="eval")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--emb", required=True, type=click.Path(exists=True))
@click.option("--judgments", "judgments_path", required=True, type=click.Path(exists=True))
@click.option("--systems", default="ours,tfidf", show_default=True)
@click.option("--provider", "provider_name", default="offline",
              type=click.Choice(["offline", "scripted", "llm"]))
@click.option("--script", type=click.Path(exists=True))
@click.option("--q", default=5, show_default=True, type=int)
@click.option("--out", type=click.Path())
def eval_cmd(graph_path, emb, judgments_path, systems, provider_name, script, q, out):
    """Evaluate recommendation systems on held-out judgments."""
    graph = Graph.load(graph_path)
    table = EmbeddingTable.load(emb)
    test = parse_judgments(judgments_path)
    provider = _provider_from_options(provider_name, script)

    results = []
    for name in [s.strip() for s in systems.split(",") if s.strip()]:
        if name == "ours":
            recommender = Recommender(graph, table, provider, OfflineExtractor(), q=q)

            def ours(case_text, _r=recommender):
                recommendation = _r.recommend(case_text)
                if recommendation.articles:
                    return recommendation.articles
                if recommendation.retrieval and recommendation.retrieval.candidates:
                    return [recommendation.retrieval.candidates[0].article_number]
                return []

            system = ours
        elif name == "tfidf":
            pairs = [
                (graph.article_number(node.id) or "", node.payload)
                for node in graph.nodes_of_kind(NodeKind.OriginalArticle)
            ]
            index = evalharness.TfidfIndex.build(pairs)

            def tfidf(case_text, _index=index):
                return evalharness.tfidf_recommend(_index, case_text, q=q)

            system = tfidf
        elif name == "raw-llm":

            def raw_llm(case_text, _p=provider):
                request = gateway.ChatRequest(
                    system="Expert in law article analysis",
                    user=(
                        "Which law article applies to this case? Answer with "
                        "the article number first.\n\n" + case_text
                    ),
                    payload={"kind": "recommendation", "candidate_numbers": []},
                )
                return gateway.parse_article_ids(gateway.complete(request, _p))

            system = raw_llm
        else:
            raise click.BadParameter(f"unknown system {name!r}")
        results.append((name, evalharness.evaluate(system, test)))

    text, payload = evalharness.render_report(results)
    click.echo(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(evalharness.report_to_json(payload) + "\n")


@main.command(name="serve")
@click.option("--config", "config_path", type=click.Path(exists=True))
def serve_cmd(config_path):
    """Run the HTTP API (config file keys mirror ServiceConfig)."""
    serve(ServiceConfig.from_file(config_path))


@main.command(name="fixtures")
@click.option("--out", required=True, type=click.Path())
def fixtures_cmd(out):
    """Regenerate the bundled synthetic fixture corpora."""
    paths = fixtures.write_all(out)
    for name, path in sorted(paths.items()):
        click.echo(f"{name}: {path}")


if __name__ == "__main__":
    sys.exit(main())
