"""Schema-enforced property graph for law articles and adjudicated cases.

The graph holds two halves: the law-article subgraph (article text, article
id, extracted key phrases) and the adjudicated-case subgraph (case name,
session time, prosecution reason, case specifics). Seven node kinds and
seven relation kinds are admissible, each relation with exactly one legal
(head kind, tail kind) pair; anything else is rejected at insert and at
load time.

Concurrency: reads are lock-free (safe under the GIL on immutable-ish
dicts); every mutation runs under a single re-entrant writer lock, which
callers may also hold across compound mutations via ``graph.writer``.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import (
    DuplicateIdEdge,
    EmptyPayload,
    FormatError,
    SchemaViolation,
    UnknownNode,
    WrongKind,
)


class NodeKind(str, Enum):
    OriginalArticle = "OriginalArticle"
    KeyInformation = "KeyInformation"
    LawArticleId = "LawArticleId"
    CaseName = "CaseName"
    SessionTime = "SessionTime"
    ProsecutionReason = "ProsecutionReason"
    CaseSpecifics = "CaseSpecifics"


class RelationKind(str, Enum):
    Key = "Key"
    Id = "Id"
    AgreeWith = "AgreeWith"
    ApplicableLaw = "ApplicableLaw"
    OccurInTime = "OccurInTime"
    Reason = "Reason"
    Detail = "Detail"


# The one legal (head kind, tail kind) pair per relation.
SCHEMA: dict[RelationKind, tuple[NodeKind, NodeKind]] = {
    RelationKind.Key: (NodeKind.OriginalArticle, NodeKind.KeyInformation),
    RelationKind.Id: (NodeKind.OriginalArticle, NodeKind.LawArticleId),
    RelationKind.AgreeWith: (NodeKind.CaseName, NodeKind.KeyInformation),
    RelationKind.ApplicableLaw: (NodeKind.CaseName, NodeKind.LawArticleId),
    RelationKind.OccurInTime: (NodeKind.CaseName, NodeKind.SessionTime),
    RelationKind.Reason: (NodeKind.CaseName, NodeKind.ProsecutionReason),
    RelationKind.Detail: (NodeKind.CaseName, NodeKind.CaseSpecifics),
}

# Node kinds whose (kind, payload) pairs are unique: repeated inserts
# return the existing node. Case-side nodes are never merged because two
# distinct judgments may legitimately share a name, date, or reason.
DEDUPED_KINDS = frozenset({NodeKind.KeyInformation, NodeKind.LawArticleId})


@dataclass(frozen=True)
class Node:
    id: int
    kind: NodeKind
    payload: str


@dataclass(frozen=True)
class Edge:
    head: int
    relation: RelationKind
    tail: int


@dataclass(frozen=True)
class CaseSummary:
    """Denormalized view of one adjudicated case."""

    case_id: int
    name: str
    session_time: str
    reason: str
    specifics: str


@dataclass
class GraphStats:
    nodes: dict[str, int] = field(default_factory=dict)
    edges: dict[str, int] = field(default_factory=dict)

    def total_nodes(self) -> int:
        return sum(self.nodes.values())

    def total_edges(self) -> int:
        return sum(self.edges.values())

    def as_dict(self) -> dict:
        return {"nodes": dict(self.nodes), "edges": dict(self.edges)}


class Graph:
    """In-memory typed property graph with JSONL persistence."""

    def __init__(self) -> None:
        self._nodes: dict[int, Node] = {}
        self._next_id = 0
        # (kind, payload) -> id, for the deduplicated kinds only
        self._dedup: dict[tuple[NodeKind, str], int] = {}
        self._edges: set[tuple[int, RelationKind, int]] = set()
        self._out: dict[tuple[int, RelationKind], list[int]] = {}
        self._in: dict[tuple[int, RelationKind], list[int]] = {}
        self.writer = threading.RLock()

    # --- nodes ---------------------------------------------------------

    def add_node(self, kind: NodeKind, payload: str) -> int:
        """Insert a node, returning the existing id for deduplicated kinds."""
        kind = NodeKind(kind)
        payload = payload.strip() if isinstance(payload, str) else payload
        if not payload:
            raise EmptyPayload(f"empty payload for {kind.value} node")
        with self.writer:
            if kind in DEDUPED_KINDS:
                existing = self._dedup.get((kind, payload))
                if existing is not None:
                    return existing
            node_id = self._next_id
            self._next_id += 1
            self._nodes[node_id] = Node(node_id, kind, payload)
            if kind in DEDUPED_KINDS:
                self._dedup[(kind, payload)] = node_id
            return node_id

    def node(self, node_id: int) -> Node:
        node = self._nodes.get(node_id)
        if node is None:
            raise UnknownNode(f"unknown node id {node_id}")
        return node

    def has_node(self, node_id: int) -> bool:
        return node_id in self._nodes

    def node_count(self) -> int:
        return len(self._nodes)

    def all_nodes(self) -> list[Node]:
        return [self._nodes[node_id] for node_id in sorted(self._nodes)]

    def nodes_of_kind(self, kind: NodeKind) -> list[Node]:
        kind = NodeKind(kind)
        return sorted(
            (n for n in self._nodes.values() if n.kind == kind),
            key=lambda n: n.id,
        )

    def find_key_info(self, phrase: str) -> Optional[int]:
        """Id of the key-information node with exactly this payload, if any."""
        return self._dedup.get((NodeKind.KeyInformation, phrase.strip()))

    def find_article_id(self, number: str) -> Optional[int]:
        """Id of the law-article-id node holding this article number, if any."""
        return self._dedup.get((NodeKind.LawArticleId, number.strip()))

    # --- edges ---------------------------------------------------------

    def add_edge(self, head: int, relation: RelationKind, tail: int) -> Edge:
        """Insert an edge; re-inserting an existing one is a no-op."""
        relation = RelationKind(relation)
        head_node = self.node(head)
        tail_node = self.node(tail)
        legal = SCHEMA[relation]
        if (head_node.kind, tail_node.kind) != legal:
            raise SchemaViolation(
                f"{relation.value} requires {legal[0].value}->{legal[1].value}, "
                f"got {head_node.kind.value}->{tail_node.kind.value}"
            )
        with self.writer:
            key = (head, relation, tail)
            if key in self._edges:
                return Edge(*key)
            if relation is RelationKind.Id and self._out.get((head, RelationKind.Id)):
                raise DuplicateIdEdge(
                    f"article node {head} already has an Id edge"
                )
            self._edges.add(key)
            self._out.setdefault((head, relation), []).append(tail)
            self._in.setdefault((tail, relation), []).append(head)
            return Edge(*key)

    def has_edge(self, head: int, relation: RelationKind, tail: int) -> bool:
        return (head, RelationKind(relation), tail) in self._edges

    def neighbors(self, node_id: int, relation: RelationKind, direction: str = "out") -> list[int]:
        """Adjacent node ids under one relation, sorted ascending."""
        self.node(node_id)
        relation = RelationKind(relation)
        if direction == "out":
            found = self._out.get((node_id, relation), [])
        elif direction == "in":
            found = self._in.get((node_id, relation), [])
        else:
            raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")
        return sorted(found)

    def edges(self) -> Iterable[Edge]:
        for head, relation, tail in self._edges:
            yield Edge(head, relation, tail)

    # --- domain queries --------------------------------------------------

    def article_number(self, article: int) -> Optional[str]:
        """Article number attached to an article node via its Id edge."""
        ids = self._out.get((article, RelationKind.Id), [])
        return self._nodes[ids[0]].payload if ids else None

    def cases_for_article(self, article: int) -> list[CaseSummary]:
        """All adjudicated cases that cited this article, as flat summaries."""
        node = self.node(article)
        if node.kind is not NodeKind.OriginalArticle:
            raise WrongKind(
                f"node {article} is {node.kind.value}, expected OriginalArticle"
            )
        summaries = []
        for law_id in self.neighbors(article, RelationKind.Id, "out"):
            for case in self.neighbors(law_id, RelationKind.ApplicableLaw, "in"):
                summaries.append(
                    CaseSummary(
                        case_id=case,
                        name=self._nodes[case].payload,
                        session_time=self.payload_via(case, RelationKind.OccurInTime),
                        reason=self.payload_via(case, RelationKind.Reason),
                        specifics=self.payload_via(case, RelationKind.Detail),
                    )
                )
        return summaries

    def payload_via(self, case: int, relation: RelationKind) -> str:
        targets = self._out.get((case, relation), [])
        return self._nodes[targets[0]].payload if targets else ""

    # --- statistics ------------------------------------------------------

    def stats(self) -> GraphStats:
        stats = GraphStats(
            nodes={kind.value: 0 for kind in NodeKind},
            edges={rel.value: 0 for rel in RelationKind},
        )
        for node in self._nodes.values():
            stats.nodes[node.kind.value] += 1
        for _, relation, _ in self._edges:
            stats.edges[relation.value] += 1
        return stats

    # --- persistence ------------------------------------------------------

    def save(self, path: str) -> None:
        """Write the graph as JSONL in canonical order (atomic replace)."""
        tmp = f"{path}.tmp.{os.getpid()}"
        with self.writer:
            lines = []
            for node_id in sorted(self._nodes):
                node = self._nodes[node_id]
                lines.append(
                    json.dumps(
                        {"t": "node", "id": node.id, "kind": node.kind.value,
                         "payload": node.payload},
                        ensure_ascii=False,
                    )
                )
            for head, relation, tail in sorted(
                self._edges, key=lambda e: (e[0], e[1].value, e[2])
            ):
                lines.append(
                    json.dumps(
                        {"t": "edge", "head": head, "rel": relation.value,
                         "tail": tail},
                        ensure_ascii=False,
                    )
                )
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines))
            if lines:
                fh.write("\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "Graph":
        """Read a graph saved by :meth:`save`, validating the schema per line."""
        graph = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    record = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise FormatError(f"invalid JSON: {exc.msg}", line=lineno) from exc
                if not isinstance(record, dict):
                    raise FormatError("expected a JSON object", line=lineno)
                tag = record.get("t")
                if tag == "node":
                    graph._load_node(record, lineno)
                elif tag == "edge":
                    graph._load_edge(record, lineno)
                else:
                    raise FormatError(f"unknown record tag {tag!r}", line=lineno)
        return graph

    def _load_node(self, record: dict, lineno: int) -> None:
        try:
            node_id = record["id"]
            kind = NodeKind(record["kind"])
            payload = record["payload"]
        except KeyError as exc:
            raise FormatError(f"node record missing {exc.args[0]!r}", line=lineno) from exc
        except ValueError as exc:
            raise FormatError(str(exc), line=lineno) from exc
        if not isinstance(node_id, int) or not isinstance(payload, str):
            raise FormatError("node id must be int and payload a string", line=lineno)
        if not payload.strip():
            raise FormatError("empty node payload", line=lineno)
        if node_id in self._nodes:
            raise FormatError(f"duplicate node id {node_id}", line=lineno)
        payload = payload.strip()
        with self.writer:
            self._nodes[node_id] = Node(node_id, kind, payload)
            self._next_id = max(self._next_id, node_id + 1)
            if kind in DEDUPED_KINDS:
                self._dedup[(kind, payload)] = node_id

    def _load_edge(self, record: dict, lineno: int) -> None:
        try:
            head = record["head"]
            relation = RelationKind(record["rel"])
            tail = record["tail"]
        except KeyError as exc:
            raise FormatError(f"edge record missing {exc.args[0]!r}", line=lineno) from exc
        except ValueError as exc:
            raise FormatError(str(exc), line=lineno) from exc
        try:
            self.add_edge(head, relation, tail)
        except (UnknownNode, SchemaViolation, DuplicateIdEdge) as exc:
            if isinstance(exc, SchemaViolation):
                raise SchemaViolation(f"line {lineno}: {exc}") from exc
            raise FormatError(str(exc), line=lineno) from exc
