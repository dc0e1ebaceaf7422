"""Provider-agnostic chat-completion client, prompt templates, and parsers.

Three providers ship with the package: an HTTP client speaking the common
JSON chat-completion shape (see docs/llm-wire.md), a scripted provider
that replays canned responses for deterministic tests, and an offline
provider that answers the package's own prompts with rule-based text so
the full pipeline runs with no network at all.

Requests carry the rendered prompt text plus a structured ``payload``
describing what the prompt asks for; rule-based providers read the
payload, wire providers read only the text.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import httpx

from .errors import (
    AuthMissing,
    GatewayTimeout,
    NoArticleFound,
    NoCandidates,
    ScriptExhausted,
    TransportError,
)

import re

DEFAULT_KEY_LIMIT = 8

_EXPERT_ROLE = "Expert in law article analysis"


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    temperature: float = 0.0
    max_tokens: Optional[int] = None
    payload: Optional[dict] = None

    def __post_init__(self):
        if not self.user:
            raise ValueError("user text must be non-empty")


@dataclass
class ProviderConfig:
    endpoint: str = ""
    model: str = ""
    credential_env: str = "CLAKG_LLM_KEY"
    timeout: float = 60.0
    retries: int = 3
    backoff: float = 0.5

    @classmethod
    def from_env(cls) -> "ProviderConfig":
        return cls(
            endpoint=os.environ.get("CLAKG_LLM_ENDPOINT", ""),
            model=os.environ.get("CLAKG_LLM_MODEL", ""),
        )


class Provider(Protocol):
    def send(self, request: ChatRequest) -> str: ...


def complete(request: ChatRequest, provider: Provider) -> str:
    """Run one chat completion through the given provider."""
    return provider.send(request)


# --------------------------------------------------------------------------
# Providers
# --------------------------------------------------------------------------

class HttpProvider:
    """JSON chat-completion client with retry and exponential backoff.

    The credential is read from the environment at call time and never
    stored on the instance, so serialized requests and logs cannot leak it.
    """

    def __init__(self, config: Optional[ProviderConfig] = None, transport=None):
        self.config = config or ProviderConfig.from_env()
        self._transport = transport  # injectable for tests

    def _post(self, body: dict, headers: dict) -> dict:
        if self._transport is not None:
            return self._transport(body, headers)
        response = httpx.post(
            self.config.endpoint,
            json=body,
            headers=headers,
            timeout=self.config.timeout,
        )
        if response.status_code >= 500 or response.status_code == 429:
            raise httpx.TransportError(f"server returned {response.status_code}")
        response.raise_for_status()
        return response.json()

    def send(self, request: ChatRequest) -> str:
        key = os.environ.get(self.config.credential_env, "")
        if not key:
            raise AuthMissing(
                f"credential environment variable {self.config.credential_env} is not set"
            )
        body = {
            "model": self.config.model,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        }
        if request.max_tokens is not None:
            body["max_tokens"] = request.max_tokens
        headers = {"Authorization": f"Bearer {key}"}
        attempts = self.config.retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            try:
                data = self._post(body, headers)
                return data["choices"][0]["message"]["content"]
            except httpx.TimeoutException as exc:
                last_error = exc
            except httpx.TransportError as exc:
                last_error = exc
            except (KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed completion response: {exc!r}") from exc
            if attempt < attempts - 1:
                time.sleep(self.config.backoff * (2 ** attempt))
        if isinstance(last_error, httpx.TimeoutException):
            raise GatewayTimeout(str(last_error)) from last_error
        raise TransportError(str(last_error), attempts=attempts) from last_error


class ScriptedProvider:
    """Replays canned responses in order; running dry is an error."""

    def __init__(self, responses: Sequence[str]):
        self._responses = list(responses)
        self._cursor = 0
        self._lock = threading.Lock()
        self.requests: list[ChatRequest] = []

    def send(self, request: ChatRequest) -> str:
        with self._lock:
            self.requests.append(request)
            if self._cursor >= len(self._responses):
                raise ScriptExhausted(
                    f"script of {len(self._responses)} responses exhausted"
                )
            response = self._responses[self._cursor]
            self._cursor += 1
            return response

    @classmethod
    def from_file(cls, path: str) -> "ScriptedProvider":
        import json

        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, dict):
            data = data.get("responses", [])
        return cls([str(item) for item in data])


class OfflineProvider:
    """Deterministic rule-based answers for this package's own prompts.

    Key matching ranks the offered phrase inventory by verbatim occurrence
    in the case text; recommendation answers with the first candidate;
    follow-ups get a canned grounded reply. Requires the structured
    request payload, so it only understands prompts built by this module.
    """

    def send(self, request: ChatRequest) -> str:
        payload = request.payload or {}
        kind = payload.get("kind")
        if kind == "key_matching":
            case_text = payload["case_text"].lower()
            limit = payload.get("limit", DEFAULT_KEY_LIMIT)
            scored = [
                (case_text.count(phrase.lower()), phrase)
                for phrase in payload["inventory"]
            ]
            ranked = sorted(
                (pair for pair in scored if pair[0] > 0),
                key=lambda pair: (-pair[0], pair[1]),
            )
            return "; ".join(phrase for _, phrase in ranked[:limit])
        if kind == "recommendation":
            numbers = payload.get("candidate_numbers", [])
            if not numbers:
                return "no applicable article"
            return f"Article {numbers[0]}"
        if kind == "followup":
            numbers = ", ".join(payload.get("candidate_numbers", [])) or "none"
            return (
                "This recommendation is grounded in the retrieved candidate "
                f"articles ({numbers}) and the precedent cases shown; offline "
                "mode cannot elaborate further."
            )
        if kind == "article_keys":
            # No corpus statistics are available here; defer to the
            # dedicated offline extractor for construction-time key phrases.
            return ""
        if kind == "case_summary":
            return payload.get("facts", request.user)[:400]
        raise TransportError(f"offline provider cannot answer request kind {kind!r}")


# --------------------------------------------------------------------------
# Prompt templates
# --------------------------------------------------------------------------

def prompt_key_matching(
    case_text: str, key_inventory: Sequence[str], limit: int = DEFAULT_KEY_LIMIT
) -> ChatRequest:
    """Prompt asking which known key-information phrases fit a new case."""
    if not key_inventory:
        raise ValueError("key inventory must be non-empty")
    sections = [
        "Task: Given the available new case information and the following key "
        f"information nodes, please output 0-{limit} key information nodes most "
        f"relevant to the case. If you believe there are fewer than {limit} "
        "relevant key information nodes, there is no need to force the list "
        f"to reach {limit} nodes.",
        "New case information:",
        case_text,
        "Key information nodes:",
        "\n".join(key_inventory),
        "Precautions: Please directly output the key information nodes, "
        "separated by semicolons (;) without including any additional content "
        "(including unnecessary punctuation marks).",
        "Output example:",
        "Public and private property; multiple thefts; sale; committing a "
        "crime; causing damage; seriously disrupting public order; multiple "
        "thefts; lawfully performing duties",
    ]
    return ChatRequest(
        system=_EXPERT_ROLE,
        user="\n\n".join(sections),
        payload={
            "kind": "key_matching",
            "case_text": case_text,
            "inventory": list(key_inventory),
            "limit": limit,
        },
    )


def prompt_recommendation(
    case_text: str,
    candidates: Sequence[tuple[str, str]],
    precedents: Sequence,
) -> ChatRequest:
    """Prompt asking for the applicable article, grounded in retrieved text.

    ``candidates`` are (article number, article body) pairs; ``precedents``
    are case summaries with name/reason/specifics attributes.
    """
    if not candidates:
        raise NoCandidates("recommendation prompt needs at least one candidate article")
    candidate_blocks = [
        f"Article {number}:\n{body}" for number, body in candidates
    ]
    precedent_blocks = [
        f"Case: {p.name}\nProsecution reason: {p.reason}\nSpecifics: {p.specifics}"
        for p in precedents
    ]
    sections = [
        "Task: Decide which of the candidate law articles below apply to the "
        "new case. Use the reference cases and the article texts to justify "
        "the choice, and answer with the applicable article number(s) first.",
        "New case information:",
        case_text,
        "Reference cases:",
        "\n\n".join(precedent_blocks) if precedent_blocks else "(none on record)",
        "Candidate law articles:",
        "\n\n".join(candidate_blocks),
        "Output example:",
        "Article 385",
    ]
    return ChatRequest(
        system=_EXPERT_ROLE,
        user="\n\n".join(sections),
        payload={
            "kind": "recommendation",
            "case_text": case_text,
            "candidate_numbers": [number for number, _ in candidates],
        },
    )


def prompt_article_keys(body: str, limit: int = DEFAULT_KEY_LIMIT) -> ChatRequest:
    """Construction-time prompt extracting key phrases from one article."""
    sections = [
        "Task: List the key facts, conditions, and sanctions of this law "
        f"article as short phrases, semicolon-separated, at most {limit}.",
        "Law article:",
        body,
        "Precautions: Please directly output the phrases, separated by "
        "semicolons (;) without including any additional content.",
    ]
    return ChatRequest(
        system="Legal text analyst",
        user="\n\n".join(sections),
        payload={"kind": "article_keys", "body": body, "limit": limit},
    )


def prompt_case_summary(facts: str) -> ChatRequest:
    """Construction-time prompt condensing judgment facts into specifics."""
    sections = [
        "Task: Summarize the specifics of this case in a short paragraph.",
        "Case facts:",
        facts,
    ]
    return ChatRequest(
        system="Legal text analyst",
        user="\n\n".join(sections),
        payload={"kind": "case_summary", "facts": facts},
    )


def prompt_followup(
    transcript: Sequence[tuple[str, str]],
    question: str,
    candidate_numbers: Sequence[str],
    grounding: str,
) -> ChatRequest:
    """Prompt continuing a recommendation session with a user question."""
    turns = "\n".join(f"{role}: {text}" for role, text in transcript)
    sections = [
        "Task: Answer the user's follow-up question about the law article "
        "recommendation below, staying grounded in the retrieved articles "
        "and reference cases.",
        "Grounding:",
        grounding,
        "Conversation so far:",
        turns if turns else "(start of conversation)",
        "Question:",
        question,
    ]
    return ChatRequest(
        system=_EXPERT_ROLE,
        user="\n\n".join(sections),
        payload={
            "kind": "followup",
            "question": question,
            "candidate_numbers": list(candidate_numbers),
        },
    )


# --------------------------------------------------------------------------
# Response parsers
# --------------------------------------------------------------------------

_SEPARATORS = re.compile(r"[;；]")
_TRAILING_PUNCT = ".,;；。，、!?！？:："

def parse_semicolon_list(text: str) -> list[str]:
    """Split a semicolon-separated response into clean phrases.

    Handles both ASCII and full-width separators, trims whitespace and
    trailing punctuation, drops empty segments, preserves order, and keeps
    duplicates (callers deduplicate where it matters).
    """
    phrases = []
    for segment in _SEPARATORS.split(text or ""):
        cleaned = segment.strip().rstrip(_TRAILING_PUNCT).strip()
        if cleaned:
            phrases.append(cleaned)
    return phrases


_ARTICLE_WORD = re.compile(r"(?i)\barticles?\b((?:\s*(?:and|or|,|&)?\s*\d+)+)")
_CJK_ARTICLE = re.compile(r"第\s*(\d+)\s*条")
_NUMBER = re.compile(r"\d+")


def parse_article_ids(text: str) -> list[str]:
    """Extract cited article numbers from a model response.

    Recognizes "Article N" runs (including "Articles 385 and 397"),
    the CJK form, and a bare number when the whole response is numeric.
    First-mention order, deduplicated.
    """
    text = text or ""
    found: list[tuple[int, str]] = []
    for match in _ARTICLE_WORD.finditer(text):
        offset = match.start(1)
        for num in _NUMBER.finditer(match.group(1)):
            found.append((offset + num.start(), num.group(0)))
    for match in _CJK_ARTICLE.finditer(text):
        found.append((match.start(1), match.group(1)))
    stripped = text.strip()
    if stripped and _NUMBER.fullmatch(stripped):
        found.append((0, stripped))
    found.sort(key=lambda pair: pair[0])
    ordered: list[str] = []
    for _, number in found:
        if number not in ordered:
            ordered.append(number)
    if not ordered:
        raise NoArticleFound(f"no article number in response: {text[:120]!r}")
    return ordered
