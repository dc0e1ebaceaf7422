"""Corpus parsing and knowledge-graph construction.

Statute and judgment files are line-delimited JSON. Construction happens
in two passes: the article half first (article node, article-id node,
key-phrase nodes per article), then the case half (case node plus its
time/reason/specifics satellites, citation edges to article ids, and up
to five key-phrase links chosen by the extractor).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import date
from typing import Optional, Protocol, Sequence

from .errors import (
    BadDate,
    DuplicateArticleNumber,
    FormatError,
    MissingField,
)
from .graph import Graph, NodeKind, RelationKind

AGREE_WITH_CAP = 5

_ARTICLE_NUMBER_RE = re.compile(r"^\d+$")


@dataclass(frozen=True)
class ArticleRecord:
    article_number: str
    body: str


@dataclass(frozen=True)
class JudgmentRecord:
    case_name: str
    session_date: str
    prosecution_reason: str
    facts: str
    cited_articles: tuple[str, ...]


class Extractor(Protocol):
    """Text-analysis capabilities the builders delegate to.

    ``select_relevant_keys`` must return a subset of ``candidates`` of at
    most ``cap`` phrases; the builders re-filter and re-cap defensively.
    """

    def extract_key_info(self, body: str) -> list[str]: ...

    def summarize_case(self, facts: str) -> str: ...

    def select_relevant_keys(
        self, case_text: str, candidates: Sequence[str], cap: int
    ) -> list[str]: ...


# --------------------------------------------------------------------------
# Parsers
# --------------------------------------------------------------------------

def _read_jsonl(path: str):
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
            yield lineno, record


def parse_statutes(path: str) -> list[ArticleRecord]:
    """Parse a statute corpus file, one article per line, order preserved."""
    records = []
    seen: dict[str, int] = {}
    for lineno, record in _read_jsonl(path):
        number = record.get("article_number")
        body = record.get("body")
        if not isinstance(number, str) or not number.strip():
            raise MissingField("missing or empty 'article_number'", line=lineno)
        if not isinstance(body, str) or not body.strip():
            raise MissingField("missing or empty 'body'", line=lineno)
        number = number.strip()
        if not _ARTICLE_NUMBER_RE.match(number):
            raise FormatError(f"malformed article number {number!r}", line=lineno)
        if number in seen:
            raise DuplicateArticleNumber(
                f"article number {number!r} already defined on line {seen[number]}",
                line=lineno,
            )
        seen[number] = lineno
        records.append(ArticleRecord(number, body.strip()))
    return records


def parse_judgments(path: str) -> list[JudgmentRecord]:
    """Parse a judgment corpus file; citation resolution happens at build time."""
    records = []
    required = ("case_name", "session_date", "prosecution_reason", "facts", "cited_articles")
    for lineno, record in _read_jsonl(path):
        for key in required:
            if key not in record:
                raise MissingField(f"missing field {key!r}", line=lineno)
        for key in required[:4]:
            if not isinstance(record[key], str) or not record[key].strip():
                raise MissingField(f"field {key!r} must be a non-empty string", line=lineno)
        raw_date = record["session_date"].strip()
        try:
            date.fromisoformat(raw_date)
        except ValueError as exc:
            raise BadDate(f"session_date {raw_date!r} is not an ISO-8601 date", line=lineno) from exc
        cited = record["cited_articles"]
        if not isinstance(cited, list) or not cited:
            raise FormatError("'cited_articles' must be a non-empty list", line=lineno)
        numbers = []
        for item in cited:
            if not isinstance(item, str) or not _ARTICLE_NUMBER_RE.match(item.strip()):
                raise FormatError(f"malformed cited article {item!r}", line=lineno)
            numbers.append(item.strip())
        records.append(
            JudgmentRecord(
                case_name=record["case_name"].strip(),
                session_date=raw_date,
                prosecution_reason=record["prosecution_reason"].strip(),
                facts=record["facts"].strip(),
                cited_articles=tuple(numbers),
            )
        )
    return records


# --------------------------------------------------------------------------
# Offline extractor
# --------------------------------------------------------------------------

_WORD_RE = re.compile(r"[a-z0-9]+")
_CLAUSE_RE = re.compile(r"[.;:,()\n]")


def _words(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def _clause_ngrams(text: str, max_n: int) -> set[str]:
    """Word n-grams that do not cross clause punctuation."""
    grams = set()
    for clause in _CLAUSE_RE.split(text.lower()):
        words = _WORD_RE.findall(clause)
        for n in range(1, max_n + 1):
            for i in range(len(words) - n + 1):
                grams.add(" ".join(words[i : i + n]))
    return grams


class OfflineExtractor:
    """Deterministic extractor used for tests and no-network runs.

    Key-phrase extraction matches article bodies against a corpus lexicon
    of clause-bounded word n-grams scored by document frequency: grams
    shared by almost every document are boilerplate and excluded, grams
    unique to one document carry no connective value and are excluded,
    and among the survivors the rarer (more distinctive) grams win. Case
    summaries are a plain prefix of the facts, and key selection ranks
    candidate phrases by how often they occur verbatim in the case text.
    """

    def __init__(self, lexicon: Optional[dict[str, int]] = None, phrases_per_article: int = 8,
                 max_ngram: int = 4):
        self.lexicon = lexicon or {}
        self.phrases_per_article = phrases_per_article
        self.max_ngram = max_ngram

    @classmethod
    def from_articles(
        cls,
        articles: Sequence[ArticleRecord],
        phrases_per_article: int = 8,
        max_ngram: int = 4,
        min_df: int = 2,
        max_df_ratio: float = 0.8,
    ) -> "OfflineExtractor":
        """Build the phrase lexicon from a statute corpus.

        Single words qualify as phrases only when they stand alone as a
        complete clause somewhere in the corpus; otherwise common words
        inside longer phrases would leak into the lexicon.
        """
        df: dict[str, int] = {}
        standalone: set[str] = set()
        for article in articles:
            for gram in _clause_ngrams(article.body, max_ngram):
                df[gram] = df.get(gram, 0) + 1
            for clause in _CLAUSE_RE.split(article.body.lower()):
                words = _WORD_RE.findall(clause)
                if len(words) == 1:
                    standalone.add(words[0])
        cap = max(min_df, int(max_df_ratio * max(len(articles), 1)))
        lexicon = {
            g: n
            for g, n in df.items()
            if min_df <= n <= cap and (" " in g or g in standalone)
        }
        return cls(lexicon, phrases_per_article, max_ngram)

    def extract_key_info(self, body: str) -> list[str]:
        matched = [g for g in _clause_ngrams(body, self.max_ngram) if g in self.lexicon]
        # Keep only maximal grams: drop any contained in a longer match.
        maximal = [
            g for g in matched
            if not any(g != other and f" {g} " in f" {other} " for other in matched)
        ]
        maximal.sort(key=lambda g: (self.lexicon[g], -len(g.split()), g))
        return maximal[: self.phrases_per_article]

    def summarize_case(self, facts: str) -> str:
        return facts[:400]

    def select_relevant_keys(
        self, case_text: str, candidates: Sequence[str], cap: int
    ) -> list[str]:
        lowered = case_text.lower()
        scored = [(lowered.count(c.lower()), c) for c in candidates]
        ranked = sorted(
            (pair for pair in scored if pair[0] > 0),
            key=lambda pair: (-pair[0], pair[1]),
        )
        return [phrase for _, phrase in ranked[:cap]]


class LlmExtractor:
    """Extractor backed by a chat-completion provider."""

    def __init__(self, provider, phrases_per_article: int = 8):
        self.provider = provider
        self.phrases_per_article = phrases_per_article

    def extract_key_info(self, body: str) -> list[str]:
        from . import gateway

        request = gateway.prompt_article_keys(body, limit=self.phrases_per_article)
        response = gateway.complete(request, self.provider)
        return gateway.parse_semicolon_list(response)[: self.phrases_per_article]

    def summarize_case(self, facts: str) -> str:
        from . import gateway

        request = gateway.prompt_case_summary(facts)
        return gateway.complete(request, self.provider).strip()

    def select_relevant_keys(
        self, case_text: str, candidates: Sequence[str], cap: int
    ) -> list[str]:
        from . import gateway

        request = gateway.prompt_key_matching(case_text, list(candidates), limit=cap)
        response = gateway.complete(request, self.provider)
        return gateway.parse_semicolon_list(response)[:cap]


# --------------------------------------------------------------------------
# Builders
# --------------------------------------------------------------------------

@dataclass
class KindTally:
    attempted: int = 0
    created: int = 0
    deduped: int = 0


@dataclass
class BuildReport:
    """Counts and warnings accumulated by one builder run."""

    nodes: dict[str, KindTally] = field(default_factory=dict)
    edges_created: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    def tally(self, kind: NodeKind) -> KindTally:
        return self.nodes.setdefault(kind.value, KindTally())

    def count_edge(self, relation: RelationKind) -> None:
        self.edges_created[relation.value] = self.edges_created.get(relation.value, 0) + 1

    def as_dict(self) -> dict:
        return {
            "nodes": {
                kind: {"attempted": t.attempted, "created": t.created, "deduped": t.deduped}
                for kind, t in sorted(self.nodes.items())
            },
            "edges_created": dict(sorted(self.edges_created.items())),
            "warnings": list(self.warnings),
            "skipped": list(self.skipped),
        }


def _tracked_add_node(graph: Graph, report: BuildReport, kind: NodeKind, payload: str) -> int:
    tally = report.tally(kind)
    tally.attempted += 1
    before = graph.node_count()
    node_id = graph.add_node(kind, payload)
    if graph.node_count() > before:
        tally.created += 1
    else:
        tally.deduped += 1
    return node_id


def _tracked_add_edge(graph: Graph, report: BuildReport, head: int, rel: RelationKind, tail: int):
    if not graph.has_edge(head, rel, tail):
        graph.add_edge(head, rel, tail)
        report.count_edge(rel)


def build_lakg(graph: Graph, articles: Sequence[ArticleRecord], extractor: Extractor) -> BuildReport:
    """Construct the law-article half of the graph; safe to re-run."""
    report = BuildReport()
    with graph.writer:
        for article in articles:
            try:
                phrases = extractor.extract_key_info(article.body)
            except Exception as exc:  # noqa: BLE001 - one bad document must not sink the build
                report.skipped.append(
                    f"article {article.article_number}: extractor failed: {exc}"
                )
                continue
            law_id = graph.find_article_id(article.article_number)
            article_node = None
            if law_id is not None:
                owners = graph.neighbors(law_id, RelationKind.Id, "in")
                article_node = owners[0] if owners else None
            if article_node is None:
                article_node = _tracked_add_node(
                    graph, report, NodeKind.OriginalArticle, article.body
                )
            else:
                tally = report.tally(NodeKind.OriginalArticle)
                tally.attempted += 1
                tally.deduped += 1
            law_id = _tracked_add_node(
                graph, report, NodeKind.LawArticleId, article.article_number
            )
            _tracked_add_edge(graph, report, article_node, RelationKind.Id, law_id)
            if not phrases:
                report.warnings.append(
                    f"article {article.article_number}: extractor returned no key phrases"
                )
            for phrase in phrases:
                key_node = _tracked_add_node(graph, report, NodeKind.KeyInformation, phrase)
                _tracked_add_edge(graph, report, article_node, RelationKind.Key, key_node)
    return report


def build_ackg(
    graph: Graph,
    judgments: Sequence[JudgmentRecord],
    extractor: Extractor,
    cap: int = AGREE_WITH_CAP,
) -> BuildReport:
    """Construct the adjudicated-case half on top of an existing article half."""
    report = BuildReport()
    with graph.writer:
        for judgment in judgments:
            try:
                specifics = extractor.summarize_case(judgment.facts)
            except Exception as exc:  # noqa: BLE001
                report.skipped.append(f"case {judgment.case_name!r}: extractor failed: {exc}")
                continue
            case = _tracked_add_node(graph, report, NodeKind.CaseName, judgment.case_name)
            when = _tracked_add_node(graph, report, NodeKind.SessionTime, judgment.session_date)
            why = _tracked_add_node(
                graph, report, NodeKind.ProsecutionReason, judgment.prosecution_reason
            )
            detail = _tracked_add_node(
                graph, report, NodeKind.CaseSpecifics, specifics or judgment.facts[:400]
            )
            _tracked_add_edge(graph, report, case, RelationKind.OccurInTime, when)
            _tracked_add_edge(graph, report, case, RelationKind.Reason, why)
            _tracked_add_edge(graph, report, case, RelationKind.Detail, detail)
            cited = 0
            for number in judgment.cited_articles:
                law_id = graph.find_article_id(number)
                if law_id is None:
                    report.warnings.append(
                        f"case {judgment.case_name!r}: unknown article citation {number!r}"
                    )
                    continue
                _tracked_add_edge(graph, report, case, RelationKind.ApplicableLaw, law_id)
                cited += 1
            if cited:
                created = link_case_keys(
                    graph, case, extractor, cap=cap, case_text=judgment.facts
                )
                for _ in created:
                    report.count_edge(RelationKind.AgreeWith)
    return report


def candidate_pool_for_articles(graph: Graph, law_id_nodes: Sequence[int]) -> dict[str, int]:
    """Key phrases reachable from the given article-id nodes, phrase -> node id."""
    pool: dict[str, int] = {}
    for law_id in law_id_nodes:
        for article in graph.neighbors(law_id, RelationKind.Id, "in"):
            for key_node in graph.neighbors(article, RelationKind.Key, "out"):
                pool[graph.node(key_node).payload] = key_node
    return pool


def select_from_pool(
    pool: dict[str, int],
    case_text: str,
    extractor: Extractor,
    cap: int = AGREE_WITH_CAP,
) -> list[int]:
    """Ask the extractor for relevant phrases and keep only in-pool survivors.

    Phrases the extractor proposes that are not in the candidate pool are
    dropped; survivors keep extractor order (deduplicated) and are
    truncated to ``cap``.
    """
    if not pool:
        return []
    selected = extractor.select_relevant_keys(case_text, sorted(pool), cap)
    survivors: list[int] = []
    for phrase in selected:
        node_id = pool.get(phrase.strip())
        if node_id is not None and node_id not in survivors:
            survivors.append(node_id)
    return survivors[:cap]


def link_case_keys(
    graph: Graph,
    case: int,
    extractor: Extractor,
    cap: int = AGREE_WITH_CAP,
    case_text: Optional[str] = None,
) -> list:
    """Create the case's key-phrase links; returns the edges created.

    ``case_text`` defaults to the case-specifics payload already attached
    to the case, which is what feedback-time callers have on hand.
    """
    pool = candidate_pool_for_articles(
        graph, graph.neighbors(case, RelationKind.ApplicableLaw, "out")
    )
    if case_text is None:
        case_text = graph.payload_via(case, RelationKind.Detail) or graph.node(case).payload
    chosen = select_from_pool(pool, case_text, extractor, cap=cap)
    created = []
    with graph.writer:
        for key_node in chosen:
            if not graph.has_edge(case, RelationKind.AgreeWith, key_node):
                created.append(graph.add_edge(case, RelationKind.AgreeWith, key_node))
    return created
