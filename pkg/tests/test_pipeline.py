"""End-to-end recommendation, closed-loop feedback, and follow-up sessions."""

import threading

import pytest

from clakg.errors import UnknownArticle, UnknownSession
from clakg.fixtures import ZHANGYUE_CASE_TEXT, ZHANGYUE_SCRIPT
from clakg.gateway import OfflineProvider, ScriptedProvider
from clakg.ingest import OfflineExtractor
from clakg.pipeline import FeedbackEvent, Recommender
from conftest import build_zhangyue_graph

from clakg.embed import RgcnConfig, TripleGraph, train


@pytest.fixture()
def zy_setup():
    """Fresh graph + table + extractor per test (feedback mutates the graph)."""
    graph, extractor = build_zhangyue_graph()
    config = RgcnConfig(h_dim=8, num_epochs=20, learning_rate=0.1,
                        init_scale=0.5, seed=3)
    table, _ = train(TripleGraph.from_store(graph), config)
    return graph, table, extractor


def make_recommender(zy_setup, provider):
    graph, table, extractor = zy_setup
    return Recommender(graph, table, provider, extractor)


def test_replay_recommends_385(zy_setup):
    recommender = make_recommender(zy_setup, ScriptedProvider(ZHANGYUE_SCRIPT))
    recommendation = recommender.recommend(ZHANGYUE_CASE_TEXT)
    assert recommendation.articles == ["385"]
    assert recommendation.grounded == {"385": True}
    assert recommendation.fully_grounded
    assert not recommendation.no_match
    by_number = {
        c.article_number: c for c in recommendation.retrieval.candidates
    }
    assert len(by_number["385"].precedents) >= 1
    assert recommendation.session_id


def test_replay_offline_provider_matches(zy_setup):
    # the offline provider ranks inventory phrases by occurrence in the case
    recommender = make_recommender(zy_setup, OfflineProvider())
    recommendation = recommender.recommend(ZHANGYUE_CASE_TEXT)
    assert recommendation.articles
    assert recommendation.articles[0] in {
        c.article_number for c in recommendation.retrieval.candidates
    }
    phrases = {
        zy_setup[0].node(k).payload for k in recommendation.keys.resolved
    }
    assert {"accepting bribes", "abuse of power", "bribery"} <= phrases


def test_ungrounded_answer_flagged(zy_setup):
    script = [ZHANGYUE_SCRIPT[0], "Article 999"]
    recommender = make_recommender(zy_setup, ScriptedProvider(script))
    recommendation = recommender.recommend(ZHANGYUE_CASE_TEXT)
    assert recommendation.articles == ["999"]
    assert recommendation.grounded == {"999": False}
    assert not recommendation.fully_grounded


def test_no_match_recommendation(zy_setup):
    recommender = make_recommender(zy_setup, ScriptedProvider(["foo; bar"]))
    recommendation = recommender.recommend("a case matching nothing at all")
    assert recommendation.no_match
    assert recommendation.articles == []
    assert recommendation.retrieval is None
    assert recommendation.session_id is None


def test_keyless_graph_yields_no_match_not_crash():
    from clakg.graph import Graph, NodeKind

    graph = Graph()
    graph.add_node(NodeKind.OriginalArticle, "body without extracted keys")
    recommender = Recommender(graph, None, OfflineProvider(), OfflineExtractor())
    recommendation = recommender.recommend("whatever case text")
    assert recommendation.no_match
    assert recommendation.keys is None


def test_rationale_without_article_number(zy_setup):
    script = [ZHANGYUE_SCRIPT[0], "no applicable article"]
    recommender = make_recommender(zy_setup, ScriptedProvider(script))
    recommendation = recommender.recommend(ZHANGYUE_CASE_TEXT)
    assert recommendation.articles == []
    assert recommendation.rationale == "no applicable article"
    assert recommendation.retrieval is not None


# --------------------------------------------------------------------------
# Feedback
# --------------------------------------------------------------------------

def _event(numbers=("385",)):
    return FeedbackEvent(
        case_text=ZHANGYUE_CASE_TEXT,
        case_name="People v. Zhang Yue (2023) No. 77",
        session_date="2023-04-01",
        prosecution_reason="charges of accepting bribes",
        confirmed_articles=list(numbers),
    )


def test_feedback_stats_delta(zy_setup):
    graph, table, extractor = zy_setup
    recommender = Recommender(graph, table, OfflineProvider(), extractor)
    before = graph.stats().as_dict()
    report = recommender.apply_feedback(_event())
    after = graph.stats().as_dict()
    assert after["nodes"]["CaseName"] == before["nodes"]["CaseName"] + 1
    assert after["edges"]["ApplicableLaw"] == before["edges"]["ApplicableLaw"] + 1
    assert after["edges"]["OccurInTime"] == before["edges"]["OccurInTime"] + 1
    assert after["edges"]["Reason"] == before["edges"]["Reason"] + 1
    assert after["edges"]["Detail"] == before["edges"]["Detail"] + 1
    agree_delta = after["edges"]["AgreeWith"] - before["edges"]["AgreeWith"]
    assert 0 <= agree_delta <= 5
    assert report.embeddings_stale
    assert report.edges_created["ApplicableLaw"] == 1


def test_feedback_unknown_article_is_atomic(zy_setup):
    graph, table, extractor = zy_setup
    recommender = Recommender(graph, table, OfflineProvider(), extractor)
    before = graph.stats().as_dict()
    with pytest.raises(UnknownArticle) as excinfo:
        recommender.apply_feedback(_event(numbers=("385", "999")))
    assert "999" in excinfo.value.numbers
    assert graph.stats().as_dict() == before


def test_feedback_validation():
    event = _event()
    event.session_date = "not a date"
    graph, extractor = build_zhangyue_graph()
    recommender = Recommender(graph, None, OfflineProvider(), extractor)
    with pytest.raises(ValueError):
        recommender.apply_feedback(event)
    event = _event(numbers=())
    with pytest.raises(ValueError):
        recommender.apply_feedback(event)


def test_feedback_closes_the_loop(zy_setup):
    """After feedback, the new case shows up as a precedent for article 385."""
    graph, table, extractor = zy_setup
    recommender = Recommender(
        graph, table, ScriptedProvider(ZHANGYUE_SCRIPT + ZHANGYUE_SCRIPT), extractor
    )
    recommender.apply_feedback(_event())
    recommendation = recommender.recommend(ZHANGYUE_CASE_TEXT)
    by_number = {
        c.article_number: c for c in recommendation.retrieval.candidates
    }
    names = {p.name for p in by_number["385"].precedents}
    assert "People v. Zhang Yue (2023) No. 77" in names


def test_feedback_case_growth(zy_setup):
    graph, table, extractor = zy_setup
    recommender = Recommender(graph, table, OfflineProvider(), extractor)
    before = graph.stats().nodes["CaseName"]
    for i in range(3):
        event = _event()
        event.case_name = f"People v. Growth {i}"
        recommender.apply_feedback(event)
    assert graph.stats().nodes["CaseName"] == before + 3


def test_feedback_agree_with_links_point_to_article_keys(zy_setup):
    graph, table, extractor = zy_setup
    recommender = Recommender(graph, table, OfflineProvider(), extractor)
    report = recommender.apply_feedback(_event())
    from clakg.graph import RelationKind

    linked = graph.neighbors(report.case_id, RelationKind.AgreeWith, "out")
    assert linked  # the case text mentions article 385's phrases
    reachable = set()
    for law in graph.neighbors(report.case_id, RelationKind.ApplicableLaw, "out"):
        for art in graph.neighbors(law, RelationKind.Id, "in"):
            reachable.update(graph.neighbors(art, RelationKind.Key, "out"))
    assert set(linked) <= reachable


# --------------------------------------------------------------------------
# Follow-up sessions
# --------------------------------------------------------------------------

def test_followup_appends_to_transcript(zy_setup):
    script = ZHANGYUE_SCRIPT + ["Article 397 lacked the dereliction element."]
    recommender = make_recommender(zy_setup, ScriptedProvider(script))
    recommendation = recommender.recommend(ZHANGYUE_CASE_TEXT)
    session_id = recommendation.session_id
    before = len(recommender.session(session_id).transcript)
    answer = recommender.followup(session_id, "why not Article 397?")
    assert answer == "Article 397 lacked the dereliction element."
    assert len(recommender.session(session_id).transcript) == before + 2


def test_followup_unknown_session(zy_setup):
    recommender = make_recommender(zy_setup, OfflineProvider())
    with pytest.raises(UnknownSession):
        recommender.followup("bogus", "question?")


def test_concurrent_followups_serialized(zy_setup):
    answers = [f"answer {i}" for i in range(4)]
    script = ZHANGYUE_SCRIPT + answers
    recommender = make_recommender(zy_setup, ScriptedProvider(script))
    recommendation = recommender.recommend(ZHANGYUE_CASE_TEXT)
    session_id = recommendation.session_id
    barrier = threading.Barrier(4)
    results = []

    def ask(i):
        barrier.wait()
        results.append(recommender.followup(session_id, f"question {i}?"))

    threads = [threading.Thread(target=ask, args=(i,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    transcript = recommender.session(session_id).transcript
    assert len(transcript) == 2 + 8
    assert sorted(results) == answers
    # each question is immediately followed by its answer
    for i in range(2, len(transcript), 2):
        assert transcript[i][0] == "user"
        assert transcript[i + 1][0] == "assistant"


def test_session_isolation(zy_setup):
    script = ZHANGYUE_SCRIPT + ZHANGYUE_SCRIPT + ["only for session B"]
    recommender = make_recommender(zy_setup, ScriptedProvider(script))
    rec_a = recommender.recommend(ZHANGYUE_CASE_TEXT)
    rec_b = recommender.recommend(ZHANGYUE_CASE_TEXT)
    before_a = list(recommender.session(rec_a.session_id).transcript)
    recommender.followup(rec_b.session_id, "question for B")
    assert recommender.session(rec_a.session_id).transcript == before_a
