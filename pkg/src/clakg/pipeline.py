"""End-to-end recommendation flow and the closed feedback loop.

``Recommender`` wires the graph, the embedding table, a chat provider,
and an extractor together: recommend() runs key matching, candidate
retrieval, and the grounded recommendation prompt; apply_feedback()
writes a user-confirmed case back into the graph atomically; followup()
continues a recommendation session with the provider.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from datetime import date
from typing import Optional

from . import gateway
from .errors import (
    EmptyKeySet,
    NoArticleFound,
    UnknownArticle,
    UnknownSession,
)
from .gateway import Provider
from .graph import Graph, NodeKind, RelationKind
from .ingest import (
    AGREE_WITH_CAP,
    Extractor,
    candidate_pool_for_articles,
    select_from_pool,
)
from .retrieval import (
    DEFAULT_CANDIDATE_LIMIT,
    DEFAULT_KEY_LIMIT,
    KeyMatch,
    RetrievalResult,
    candidate_articles,
    match_keys,
)


@dataclass
class Recommendation:
    """Outcome of one recommendation run, with per-article grounding flags."""

    articles: list[str]
    grounded: dict[str, bool]
    rationale: str
    retrieval: Optional[RetrievalResult]
    keys: Optional[KeyMatch]
    session_id: Optional[str]
    no_match: bool = False

    @property
    def fully_grounded(self) -> bool:
        return bool(self.articles) and all(self.grounded.values())

    def as_dict(self) -> dict:
        return {
            "articles": list(self.articles),
            "grounded": dict(self.grounded),
            "rationale": self.rationale,
            "retrieval": self.retrieval.as_dict() if self.retrieval else None,
            "keys": {
                "phrases": list(self.keys.phrases),
                "resolved": list(self.keys.resolved),
                "k_limit": self.keys.k_limit,
            }
            if self.keys
            else None,
            "session_id": self.session_id,
            "no_match": self.no_match,
            "fully_grounded": self.fully_grounded,
        }


@dataclass
class FeedbackEvent:
    """User-confirmed outcome for a case, destined for the graph."""

    case_text: str
    case_name: str
    session_date: str
    prosecution_reason: str
    confirmed_articles: list[str]
    corrected_from: Optional[list[str]] = None

    def validate(self) -> None:
        for name, value in (
            ("case_text", self.case_text),
            ("case_name", self.case_name),
            ("session_date", self.session_date),
            ("prosecution_reason", self.prosecution_reason),
        ):
            if not isinstance(value, str) or not value.strip():
                raise ValueError(f"feedback field {name!r} must be a non-empty string")
        date.fromisoformat(self.session_date.strip())
        if not self.confirmed_articles:
            raise ValueError("feedback must confirm at least one article")


@dataclass
class Session:
    session_id: str
    transcript: list[tuple[str, str]] = field(default_factory=list)
    candidate_numbers: list[str] = field(default_factory=list)
    grounding: str = ""
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class FeedbackReport:
    case_id: int
    nodes_created: dict[str, int]
    edges_created: dict[str, int]
    embeddings_stale: bool = True

    def as_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "nodes_created": dict(self.nodes_created),
            "edges_created": dict(self.edges_created),
            "embeddings_stale": self.embeddings_stale,
        }


class Recommender:
    """Recommendation pipeline over one graph + embedding table snapshot."""

    def __init__(
        self,
        graph: Graph,
        table,
        provider: Provider,
        extractor: Extractor,
        k: int = DEFAULT_KEY_LIMIT,
        q: int = DEFAULT_CANDIDATE_LIMIT,
    ):
        self.graph = graph
        self.table = table
        self.provider = provider
        self.extractor = extractor
        self.k = k
        self.q = q
        self._sessions: dict[str, Session] = {}
        self._sessions_lock = threading.Lock()

    # --- recommend -------------------------------------------------------

    def recommend(self, case_text: str) -> Recommendation:
        """Full grounded recommendation for a new case description."""
        try:
            keys = match_keys(case_text, self.provider, self.graph, k=self.k)
        except EmptyKeySet:
            keys = None  # graph holds no key phrases at all
        if keys is None or not keys.resolved:
            return Recommendation(
                articles=[],
                grounded={},
                rationale="No key information in the graph matched this case.",
                retrieval=None,
                keys=keys,
                session_id=None,
                no_match=True,
            )
        retrieval = candidate_articles(keys, self.graph, self.table, q=self.q)
        candidates = [(c.article_number, c.body) for c in retrieval.candidates]
        precedents = []
        seen_cases = set()
        for candidate in retrieval.candidates:
            for summary in candidate.precedents:
                if summary.case_id not in seen_cases:
                    seen_cases.add(summary.case_id)
                    precedents.append(summary)
        request = gateway.prompt_recommendation(case_text, candidates, precedents)
        rationale = gateway.complete(request, self.provider)
        try:
            numbers = gateway.parse_article_ids(rationale)
        except NoArticleFound:
            numbers = []
        candidate_numbers = {c.article_number for c in retrieval.candidates}
        grounded = {number: number in candidate_numbers for number in numbers}
        session = self._open_session(case_text, retrieval, rationale)
        return Recommendation(
            articles=numbers,
            grounded=grounded,
            rationale=rationale,
            retrieval=retrieval,
            keys=keys,
            session_id=session.session_id,
        )

    def _open_session(self, case_text: str, retrieval: RetrievalResult, rationale: str) -> Session:
        grounding_lines = [
            f"Article {c.article_number}: {c.body}" for c in retrieval.candidates
        ]
        session = Session(
            session_id=uuid.uuid4().hex,
            transcript=[("user", case_text), ("assistant", rationale)],
            candidate_numbers=[c.article_number for c in retrieval.candidates],
            grounding="\n".join(grounding_lines),
        )
        with self._sessions_lock:
            self._sessions[session.session_id] = session
        return session

    # --- follow-up ---------------------------------------------------------

    def followup(self, session_id: str, question: str) -> str:
        """Append a question to a session and return the provider's answer."""
        with self._sessions_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"unknown session {session_id!r}")
        with session.lock:
            request = gateway.prompt_followup(
                session.transcript, question, session.candidate_numbers, session.grounding
            )
            answer = gateway.complete(request, self.provider)
            session.transcript.append(("user", question))
            session.transcript.append(("assistant", answer))
            return answer

    def session(self, session_id: str) -> Session:
        with self._sessions_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"unknown session {session_id!r}")
        return session

    # --- feedback ----------------------------------------------------------

    def apply_feedback(self, event: FeedbackEvent) -> FeedbackReport:
        """Write a confirmed case into the graph; all-or-nothing.

        Everything fallible (validation, article resolution, extraction)
        runs before the first mutation, so a failure leaves the graph
        untouched. Embeddings are not retrained here; the report flags
        them stale.
        """
        event.validate()
        graph = self.graph
        law_ids = []
        unknown = []
        for number in event.confirmed_articles:
            law_id = graph.find_article_id(number)
            if law_id is None:
                unknown.append(number)
            else:
                law_ids.append(law_id)
        if unknown:
            raise UnknownArticle(unknown)
        specifics = self.extractor.summarize_case(event.case_text)
        pool = candidate_pool_for_articles(graph, law_ids)
        key_nodes = select_from_pool(pool, event.case_text, self.extractor, cap=AGREE_WITH_CAP)

        nodes_created: dict[str, int] = {}
        edges_created: dict[str, int] = {}

        def count(bucket: dict[str, int], name: str) -> None:
            bucket[name] = bucket.get(name, 0) + 1

        with graph.writer:
            case = graph.add_node(NodeKind.CaseName, event.case_name)
            count(nodes_created, NodeKind.CaseName.value)
            for kind, payload, relation in (
                (NodeKind.SessionTime, event.session_date, RelationKind.OccurInTime),
                (NodeKind.ProsecutionReason, event.prosecution_reason, RelationKind.Reason),
                (NodeKind.CaseSpecifics, specifics or event.case_text[:400], RelationKind.Detail),
            ):
                before = graph.node_count()
                node = graph.add_node(kind, payload)
                if graph.node_count() > before:
                    count(nodes_created, kind.value)
                graph.add_edge(case, relation, node)
                count(edges_created, relation.value)
            for law_id in dict.fromkeys(law_ids):
                graph.add_edge(case, RelationKind.ApplicableLaw, law_id)
                count(edges_created, RelationKind.ApplicableLaw.value)
            for key_node in key_nodes:
                graph.add_edge(case, RelationKind.AgreeWith, key_node)
                count(edges_created, RelationKind.AgreeWith.value)
        return FeedbackReport(
            case_id=case,
            nodes_created=nodes_created,
            edges_created=edges_created,
        )
