"""Record API fixtures for the frontend component tests.

Boots the backend in-process with scripted providers and captures real
response bodies, so the UI tests assert against exactly what the service
emits. Run from the repo root:

    python3 frontend/scripts/record_fixtures.py
"""

import json
import pathlib
import sys

from fastapi.testclient import TestClient

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[2] / "tests"))

from conftest import build_zhangyue_graph  # noqa: E402

from clakg.embed import RgcnConfig, TripleGraph, train  # noqa: E402
from clakg.fixtures import ZHANGYUE_CASE_TEXT, ZHANGYUE_SCRIPT  # noqa: E402
from clakg.gateway import ScriptedProvider  # noqa: E402
from clakg.service import ServiceConfig, create_app  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def fresh_client(tmp_dir: pathlib.Path, responses) -> TestClient:
    graph, _ = build_zhangyue_graph()
    config = RgcnConfig(h_dim=8, num_epochs=20, learning_rate=0.1,
                        init_scale=0.5, seed=3)
    table, _ = train(TripleGraph.from_store(graph), config)
    graph_path = tmp_dir / "graph.jsonl"
    graph.save(str(graph_path))
    config = ServiceConfig(graph_path=str(graph_path), embedding_path="unused")
    app = create_app(config, graph=graph, table=table,
                     provider=ScriptedProvider(responses))
    return TestClient(app, raise_server_exceptions=False)


def dump(name: str, response) -> None:
    path = OUT / name
    payload = {"status": response.status_code, "body": response.json()}
    path.write_text(json.dumps(payload, indent=1, ensure_ascii=False) + "\n")
    print(f"recorded {name} ({response.status_code})")


def main() -> None:
    import tempfile

    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        tmp_dir = pathlib.Path(tmp)

        followup_answer = (
            "Article 397 covers dereliction of duty, but the retrieved "
            "precedents for this conduct cite Article 385."
        )
        client = fresh_client(
            tmp_dir, ZHANGYUE_SCRIPT + [followup_answer]
        )
        recommend = client.post(
            "/api/recommend", json={"case_text": ZHANGYUE_CASE_TEXT}
        )
        dump("recommend_zhangyue.json", recommend)
        session_id = recommend.json()["session_id"]
        dump("stats_before.json", client.get("/api/graph/stats"))
        dump(
            "followup.json",
            client.post(
                "/api/followup",
                json={"session_id": session_id, "question": "why not Article 397?"},
            ),
        )
        dump(
            "followup_expired.json",
            client.post(
                "/api/followup", json={"session_id": "gone", "question": "?"}
            ),
        )
        dump("article_397.json", client.get("/api/articles/397"))
        dump("keys_ab.json", client.get("/api/keys", params={"prefix": "ab"}))
        dump(
            "feedback_unknown_article.json",
            client.post(
                "/api/feedback",
                json={
                    "case_text": ZHANGYUE_CASE_TEXT,
                    "case_name": "People v. Zhang Yue (2023) No. 77",
                    "session_date": "2023-04-01",
                    "prosecution_reason": "charges of accepting bribes",
                    "confirmed_articles": ["999"],
                },
            ),
        )
        # corrected decision: the user replaces 385 with 397
        dump(
            "feedback_corrected.json",
            client.post(
                "/api/feedback",
                json={
                    "case_text": ZHANGYUE_CASE_TEXT,
                    "case_name": "People v. Zhang Yue (2023) No. 77",
                    "session_date": "2023-04-01",
                    "prosecution_reason": "charges of accepting bribes",
                    "confirmed_articles": ["397"],
                    "corrected_from": ["385"],
                },
            ),
        )
        dump("stats_after.json", client.get("/api/graph/stats"))

        # ungrounded run: model cites an article outside the candidates
        client = fresh_client(tmp_dir, [ZHANGYUE_SCRIPT[0], "Article 999"])
        dump(
            "recommend_ungrounded.json",
            client.post("/api/recommend", json={"case_text": ZHANGYUE_CASE_TEXT}),
        )

        # no-match run: nothing in the case text resolves to a key phrase
        client = fresh_client(tmp_dir, ["foo; bar"])
        dump(
            "recommend_nomatch.json",
            client.post(
                "/api/recommend", json={"case_text": "entirely unrelated text"}
            ),
        )


if __name__ == "__main__":
    main()
