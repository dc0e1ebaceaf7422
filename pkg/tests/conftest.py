"""Shared test fixtures: bundled corpora paths and prebuilt graphs."""

import pathlib

import pytest

from clakg.embed import RgcnConfig, TripleGraph, train
from clakg.fixtures import zhangyue_judgments, zhangyue_statutes
from clakg.graph import Graph
from clakg.ingest import (
    ArticleRecord,
    JudgmentRecord,
    OfflineExtractor,
    build_ackg,
    build_lakg,
)

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


def records_from_dicts(statutes=None, judgments=None):
    articles = [
        ArticleRecord(r["article_number"], r["body"]) for r in (statutes or [])
    ]
    cases = [
        JudgmentRecord(
            r["case_name"],
            r["session_date"],
            r["prosecution_reason"],
            r["facts"],
            tuple(r["cited_articles"]),
        )
        for r in (judgments or [])
    ]
    return articles, cases


def build_zhangyue_graph():
    articles, cases = records_from_dicts(zhangyue_statutes(), zhangyue_judgments())
    extractor = OfflineExtractor.from_articles(articles)
    graph = Graph()
    build_lakg(graph, articles, extractor)
    build_ackg(graph, cases, extractor)
    return graph, extractor


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def zy_graph():
    graph, _ = build_zhangyue_graph()
    return graph


@pytest.fixture(scope="session")
def zy_extractor():
    _, extractor = build_zhangyue_graph()
    return extractor


@pytest.fixture(scope="session")
def zy_table(zy_graph):
    config = RgcnConfig(h_dim=8, num_epochs=20, learning_rate=0.1,
                        init_scale=0.5, seed=3)
    table, _ = train(TripleGraph.from_store(zy_graph), config)
    return table
