"""Command-line surface: ingest, train, retrieve, recommend, feedback, eval."""

import json

import pytest
from click.testing import CliRunner

from clakg import cli
from clakg.graph import Graph

from conftest import FIXTURES


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    """Graph + embeddings built once through the CLI itself."""
    tmp = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    graph_path = tmp / "graph.jsonl"
    emb_path = tmp / "emb.json"
    zy = FIXTURES / "zhangyue"
    result = runner.invoke(
        cli.main,
        [
            "ingest",
            "--statutes", str(zy / "statutes.jsonl"),
            "--judgments", str(zy / "judgments.jsonl"),
            "--out", str(graph_path),
        ],
    )
    assert result.exit_code == 0, result.output
    result = runner.invoke(
        cli.main,
        [
            "train",
            "--graph", str(graph_path),
            "--out", str(emb_path),
            "--seed", "3", "--h-dim", "8", "--epochs", "10",
            "--lr", "0.1", "--init-scale", "0.5",
        ],
    )
    assert result.exit_code == 0, result.output
    return runner, tmp, graph_path, emb_path


def test_ingest_reports_counts(built):
    runner, tmp, graph_path, _ = built
    payload = json.loads(
        runner.invoke(
            cli.main,
            [
                "ingest",
                "--statutes", str(FIXTURES / "zhangyue" / "statutes.jsonl"),
                "--out", str(tmp / "lakg_only.jsonl"),
            ],
        ).output
    )
    assert payload["stats"]["nodes"]["OriginalArticle"] == 12
    assert payload["lakg"]["edges_created"]["Id"] == 12


def test_train_prints_epochs(built):
    runner, tmp, graph_path, _ = built
    out = tmp / "emb2.json"
    result = runner.invoke(
        cli.main,
        ["train", "--graph", str(graph_path), "--out", str(out),
         "--epochs", "3", "--h-dim", "4"],
    )
    assert result.exit_code == 0
    epoch_lines = [l for l in result.output.splitlines() if l.startswith("epoch ")]
    assert len(epoch_lines) == 3
    assert out.exists()


def test_retrieve_prints_candidates(built):
    runner, tmp, graph_path, emb_path = built
    result = runner.invoke(
        cli.main,
        [
            "retrieve",
            "--graph", str(graph_path),
            "--emb", str(emb_path),
            "--case-file", str(FIXTURES / "zhangyue" / "case.txt"),
            "--provider", "offline",
        ],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    numbers = [c["article_number"] for c in payload["candidates"]]
    assert "385" in numbers
    assert payload["num_keys"] >= 3


def test_recommend_scripted(built):
    runner, tmp, graph_path, emb_path = built
    result = runner.invoke(
        cli.main,
        [
            "recommend",
            "--graph", str(graph_path),
            "--emb", str(emb_path),
            "--case-file", str(FIXTURES / "zhangyue" / "case.txt"),
            "--provider", "scripted",
            "--script", str(FIXTURES / "zhangyue" / "script.json"),
        ],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["articles"] == ["385"]


def test_feedback_command(built):
    runner, tmp, graph_path, emb_path = built
    mutated = tmp / "mutated.jsonl"
    event_path = tmp / "event.json"
    event_path.write_text(
        json.dumps(
            {
                "case_text": "a case of accepting bribes and bribery",
                "case_name": "People v. CLI",
                "session_date": "2023-06-01",
                "prosecution_reason": "charges of accepting bribes",
                "confirmed_articles": ["385"],
            }
        )
    )
    before = Graph.load(str(graph_path)).stats().nodes["CaseName"]
    result = runner.invoke(
        cli.main,
        ["feedback", "--graph", str(graph_path), "--event", str(event_path),
         "--out", str(mutated)],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["nodes_created"]["CaseName"] == 1
    assert Graph.load(str(mutated)).stats().nodes["CaseName"] == before + 1
    # original graph file untouched when --out is given
    assert Graph.load(str(graph_path)).stats().nodes["CaseName"] == before


def test_eval_command(built):
    runner, tmp, graph_path, emb_path = built
    report_path = tmp / "report.json"
    result = runner.invoke(
        cli.main,
        [
            "eval",
            "--graph", str(graph_path),
            "--emb", str(emb_path),
            "--judgments", str(FIXTURES / "zhangyue" / "judgments.jsonl"),
            "--systems", "ours,tfidf,raw-llm",
            "--provider", "offline",
            "--out", str(report_path),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "accuracy" in result.output
    payload = json.loads(report_path.read_text())
    names = {row["name"] for row in payload["systems"]}
    assert names == {"ours", "tfidf", "raw-llm"}
    accuracies = [row["accuracy"] for row in payload["systems"]]
    assert accuracies == sorted(accuracies, reverse=True)


def test_fixtures_command(tmp_path):
    runner = CliRunner()
    result = runner.invoke(cli.main, ["fixtures", "--out", str(tmp_path / "fx")])
    assert result.exit_code == 0, result.output
    regenerated = tmp_path / "fx" / "statutes_452.jsonl"
    assert regenerated.exists()
    bundled = (FIXTURES / "statutes_452.jsonl").read_bytes()
    assert regenerated.read_bytes() == bundled
