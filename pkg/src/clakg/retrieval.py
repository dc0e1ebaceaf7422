"""Candidate article retrieval: key matching plus embedding-distance ranking.

A new case is first mapped onto known key-information nodes through the
gateway. Every article connected to a matched key by a Key edge becomes a
candidate, and each candidate is scored by the sum of cosine similarities
between its embedding and the embeddings of all matched keys. The top q
candidates are returned together with their precedent cases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyKeySet,
    MissingEmbedding,
    ZeroVector,
)
from .gateway import (
    DEFAULT_KEY_LIMIT,
    Provider,
    complete,
    parse_semicolon_list,
    prompt_key_matching,
)
from .graph import CaseSummary, Graph, NodeKind, RelationKind

DEFAULT_CANDIDATE_LIMIT = 5

# Upper bound on key phrases per request; larger inventories are chunked
# into several requests and the parsed responses are unioned in order.
INVENTORY_CHUNK = 400


@dataclass
class KeyMatch:
    """Key phrases the matcher returned, resolved against the graph."""

    phrases: list[str]
    resolved: list[int]
    k_limit: int = DEFAULT_KEY_LIMIT

    def __bool__(self) -> bool:
        return bool(self.resolved)


@dataclass
class CandidateArticle:
    article: int
    article_number: str
    cumulative_score: float
    per_key_scores: list[float]
    body: str = ""
    precedents: list[CaseSummary] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "article": self.article,
            "article_number": self.article_number,
            "cumulative_score": self.cumulative_score,
            "per_key_scores": list(self.per_key_scores),
            "body": self.body,
            "precedents": [
                {
                    "case_id": p.case_id,
                    "name": p.name,
                    "session_time": p.session_time,
                    "reason": p.reason,
                    "specifics": p.specifics,
                }
                for p in self.precedents
            ],
        }


@dataclass
class RetrievalResult:
    candidates: list[CandidateArticle]
    num_candidates: int
    num_keys: int
    cosine_calls: int

    def as_dict(self) -> dict:
        return {
            "candidates": [c.as_dict() for c in self.candidates],
            "num_candidates": self.num_candidates,
            "num_keys": self.num_keys,
        }


def match_keys(
    case_text: str,
    provider: Provider,
    graph: Graph,
    k: int = DEFAULT_KEY_LIMIT,
) -> KeyMatch:
    """Ask the provider which known key phrases fit the case.

    The full key-node inventory goes into the prompt (chunked when large);
    returned phrases that are not in the graph are dropped, duplicates are
    collapsed, and the survivors are truncated to ``k`` in response order.
    """
    inventory = [node.payload for node in graph.nodes_of_kind(NodeKind.KeyInformation)]
    if not inventory:
        raise EmptyKeySet("graph has no key-information nodes")
    phrases: list[str] = []
    for start in range(0, len(inventory), INVENTORY_CHUNK):
        chunk = inventory[start : start + INVENTORY_CHUNK]
        request = prompt_key_matching(case_text, chunk, limit=k)
        phrases.extend(parse_semicolon_list(complete(request, provider)))
    resolved: list[int] = []
    for phrase in phrases:
        node_id = graph.find_key_info(phrase)
        if node_id is not None and node_id not in resolved:
            resolved.append(node_id)
    return KeyMatch(phrases=phrases, resolved=resolved[:k], k_limit=k)


def cosine(a, b) -> float:
    """Cosine similarity, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector shapes differ: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVector("cosine undefined for a zero vector")
    return float(np.clip(float(np.dot(a, b)) / (norm_a * norm_b), -1.0, 1.0))


def _article_sort_key(number: str):
    return (0, int(number)) if number.isdigit() else (1, number)


def candidate_articles(
    keys: KeyMatch,
    graph: Graph,
    table,
    q: int = DEFAULT_CANDIDATE_LIMIT,
    attach_precedents: bool = True,
) -> RetrievalResult:
    """Rank the articles citing any matched key by summed cosine similarity.

    Scores sum over *all* matched keys, including keys the article is not
    linked to. Ties break by ascending article number. Returns at most
    ``q`` candidates, each with its precedent case summaries attached.
    """
    if not keys.resolved:
        raise EmptyKeySet("no resolved key-information nodes")
    for key_node in keys.resolved:
        if int(key_node) not in table.nodes:
            raise MissingEmbedding(key_node)
    candidate_set: set[int] = set()
    for key_node in keys.resolved:
        candidate_set.update(graph.neighbors(key_node, RelationKind.Key, "in"))
    cosine_calls = 0
    scored: list[CandidateArticle] = []
    for article in sorted(candidate_set):
        if article not in table.nodes:
            raise MissingEmbedding(article)
        article_vec = table.nodes[article]
        per_key = []
        for key_node in keys.resolved:
            per_key.append(cosine(article_vec, table.nodes[key_node]))
            cosine_calls += 1
        number = graph.article_number(article) or ""
        scored.append(
            CandidateArticle(
                article=article,
                article_number=number,
                cumulative_score=float(sum(per_key)),
                per_key_scores=per_key,
                body=graph.node(article).payload,
            )
        )
    scored.sort(key=lambda c: (-c.cumulative_score, _article_sort_key(c.article_number)))
    top = scored[:q]
    if attach_precedents:
        for candidate in top:
            candidate.precedents = graph.cases_for_article(candidate.article)
    return RetrievalResult(
        candidates=top,
        num_candidates=len(candidate_set),
        num_keys=len(keys.resolved),
        cosine_calls=cosine_calls,
    )
