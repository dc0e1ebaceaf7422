"""HTTP API over a loaded graph and embedding table.

Endpoints wrap the pipeline one-to-one: recommend, feedback (write-through
to the graph file before the response goes out), follow-up, and a few
read-only browse routes for the review UI. Every non-2xx response body is
an ApiError object: {"code", "message", "request_id"}.
"""

from __future__ import annotations

import os
import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    ClakgError,
    ConfigInvalid,
    GatewayError,
    MissingEmbedding,
    UnknownArticle,
    UnknownSession,
)
from .gateway import (
    HttpProvider,
    OfflineProvider,
    ProviderConfig,
    ScriptedProvider,
)
from .graph import Graph, NodeKind, RelationKind
from .ingest import LlmExtractor, OfflineExtractor
from .pipeline import FeedbackEvent, Recommender
from .embed.table import EmbeddingTable

_KEY_BROWSE_LIMIT = 50


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    graph_path: str = "graph.jsonl"
    embedding_path: str = "embeddings.json"
    provider: str = "offline"
    script_path: Optional[str] = None
    extractor: str = "offline"
    k: int = 8
    q: int = 5
    cors_origins: list[str] = field(default_factory=list)
    ui_dir: Optional[str] = None

    @classmethod
    def from_file(cls, path: Optional[str] = None) -> "ServiceConfig":
        """Read a TOML config file, then apply CLAKG_* environment overrides."""
        values: dict = {}
        if path:
            try:
                import tomllib  # Python >= 3.11
            except ModuleNotFoundError:
                import tomli as tomllib
            with open(path, "rb") as fh:
                values = tomllib.load(fh)
        env = os.environ
        overrides = {
            "host": env.get("CLAKG_HOST"),
            "port": env.get("CLAKG_PORT"),
            "graph_path": env.get("CLAKG_GRAPH"),
            "embedding_path": env.get("CLAKG_EMBEDDINGS"),
            "provider": env.get("CLAKG_PROVIDER"),
            "script_path": env.get("CLAKG_SCRIPT"),
            "extractor": env.get("CLAKG_EXTRACTOR"),
            "k": env.get("CLAKG_K"),
            "q": env.get("CLAKG_Q"),
            "cors_origins": env.get("CLAKG_CORS"),
            "ui_dir": env.get("CLAKG_UI_DIR"),
        }
        for key, value in overrides.items():
            if value is not None:
                values[key] = value
        config = cls()
        for key, value in values.items():
            if not hasattr(config, key):
                raise ConfigInvalid(f"unknown config key {key!r}")
            if key in ("port", "k", "q"):
                value = int(value)
            if key == "cors_origins" and isinstance(value, str):
                value = [origin.strip() for origin in value.split(",") if origin.strip()]
            setattr(config, key, value)
        return config


def make_provider(name: str, script_path: Optional[str] = None):
    if name == "offline":
        return OfflineProvider()
    if name == "scripted":
        if not script_path:
            raise ConfigInvalid("scripted provider needs a script file")
        return ScriptedProvider.from_file(script_path)
    if name == "llm":
        return HttpProvider(ProviderConfig.from_env())
    raise ConfigInvalid(f"unknown provider {name!r}")


def make_extractor(name: str, provider):
    if name == "offline":
        return OfflineExtractor()
    if name == "llm":
        return LlmExtractor(provider)
    raise ConfigInvalid(f"unknown extractor {name!r}")


class RecommendBody(BaseModel):
    case_text: str = ""


class FeedbackBody(BaseModel):
    case_text: str
    case_name: str
    session_date: str
    prosecution_reason: str
    confirmed_articles: list[str]
    corrected_from: Optional[list[str]] = None


class FollowupBody(BaseModel):
    session_id: str
    question: str


def _error_response(status: int, code: str, message: str, request: Request) -> JSONResponse:
    request_id = getattr(request.state, "request_id", "")
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "request_id": request_id},
    )


_STATUS_BY_ERROR = (
    (UnknownArticle, 404),
    (UnknownSession, 404),
    (GatewayError, 502),
    (MissingEmbedding, 500),
)


def create_app(
    config: ServiceConfig,
    graph: Optional[Graph] = None,
    table: Optional[EmbeddingTable] = None,
    provider=None,
) -> FastAPI:
    """Build the application; graph/table/provider are injectable for tests."""
    graph = graph if graph is not None else Graph.load(config.graph_path)
    table = table if table is not None else EmbeddingTable.load(config.embedding_path)
    provider = provider if provider is not None else make_provider(
        config.provider, config.script_path
    )
    extractor = make_extractor(config.extractor, provider)
    if not table.nodes:
        raise ConfigInvalid("embedding table is empty")
    if not any(node.id in table.nodes for node in graph.all_nodes()):
        raise ConfigInvalid(
            "embedding table does not cover any graph node; wrong file pairing?"
        )

    recommender = Recommender(
        graph, table, provider, extractor, k=config.k, q=config.q
    )
    app = FastAPI(title="clakg", docs_url=None, redoc_url=None)
    app.state.recommender = recommender
    app.state.graph = graph
    app.state.config = config
    feedback_lock = threading.Lock()

    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def stamp_request_id(request: Request, call_next):
        request.state.request_id = uuid.uuid4().hex
        response = await call_next(request)
        response.headers["x-request-id"] = request.state.request_id
        return response

    @app.exception_handler(ClakgError)
    async def clakg_error_handler(request: Request, exc: ClakgError):
        for error_type, status in _STATUS_BY_ERROR:
            if isinstance(exc, error_type):
                return _error_response(status, exc.code, str(exc), request)
        return _error_response(400, exc.code, str(exc), request)

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return _error_response(400, "invalid_request", str(exc), request)

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return _error_response(400, "invalid_request", str(exc), request)

    @app.exception_handler(Exception)
    async def fallback_handler(request: Request, exc: Exception):
        return _error_response(500, "internal_error", str(exc), request)

    # --- endpoints -------------------------------------------------------

    @app.post("/api/recommend")
    def recommend(body: RecommendBody, request: Request):
        if not body.case_text.strip():
            return _error_response(400, "empty_case_text", "case_text is empty", request)
        recommendation = recommender.recommend(body.case_text)
        return recommendation.as_dict()

    @app.post("/api/feedback")
    def feedback(body: FeedbackBody, request: Request):
        event = FeedbackEvent(
            case_text=body.case_text,
            case_name=body.case_name,
            session_date=body.session_date,
            prosecution_reason=body.prosecution_reason,
            confirmed_articles=body.confirmed_articles,
            corrected_from=body.corrected_from,
        )
        if not feedback_lock.acquire(timeout=30):
            return _error_response(
                409, "persistence_conflict", "another mutation is persisting", request
            )
        try:
            report = recommender.apply_feedback(event)
            graph.save(config.graph_path)
        finally:
            feedback_lock.release()
        payload = report.as_dict()
        payload["graph_stats"] = graph.stats().as_dict()
        return payload

    @app.post("/api/followup")
    def followup(body: FollowupBody):
        answer = recommender.followup(body.session_id, body.question)
        return {"answer": answer}

    @app.get("/api/articles/{number}")
    def article(number: str, request: Request):
        law_id = graph.find_article_id(number)
        owners = graph.neighbors(law_id, RelationKind.Id, "in") if law_id is not None else []
        if not owners:
            return _error_response(404, "unknown_article", f"no article {number!r}", request)
        article_node = owners[0]
        keys = [
            graph.node(k).payload
            for k in graph.neighbors(article_node, RelationKind.Key, "out")
        ]
        precedents = graph.cases_for_article(article_node)
        return {
            "number": number,
            "body": graph.node(article_node).payload,
            "keys": keys,
            "precedent_count": len(precedents),
        }

    @app.get("/api/graph/stats")
    def stats():
        return graph.stats().as_dict()

    @app.get("/api/keys")
    def keys(prefix: str = ""):
        phrases = [
            node.payload
            for node in graph.nodes_of_kind(NodeKind.KeyInformation)
            if node.payload.startswith(prefix)
        ]
        return {"keys": sorted(phrases)[:_KEY_BROWSE_LIMIT]}

    if config.ui_dir and os.path.isdir(config.ui_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig) -> None:  # pragma: no cover - thin uvicorn wrapper
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
