"""HTTP JSON API over one repository, plus static hosting for the viewer.

The server owns the repository's writer lock for its whole lifetime
(rerun and view updates need it), so campaigns cannot run while it is
up; that mirrors the single-writer store contract. Reruns are serialized
behind an in-process lock: at most one child process in flight.

Every non-2xx body has the shape {"status", "code", "message"}.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import oracle, runner
from .corpus import Corpus
from .errors import (DifflabError, MissingVerdicts, NotFound, RepositoryLocked,
                     SchemaViolation)
from .minikernel.evaluate import EvalParams
from .store import QueryFilter, Repository

STATIC_DIR = Path(__file__).parent / "static"


class ViewBody(BaseModel):
    columns: list[str]
    filters: dict = {}


class RerunBody(BaseModel):
    test: str
    config: str
    threads: int = 1
    campaign: str | None = None


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"status": status, "code": code, "message": message})


def create_app(repo: Repository) -> FastAPI:
    app = FastAPI(title="difflab", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    rerun_lock = threading.Lock()

    @app.exception_handler(HTTPException)
    async def http_error(request: Request, exc: HTTPException):
        return _error(exc.status_code, "http_error", str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return _error(422, "validation_error", str(exc.errors()))

    @app.exception_handler(DifflabError)
    async def domain_error(request: Request, exc: DifflabError):
        status = 404 if isinstance(exc, NotFound) else \
            409 if isinstance(exc, (MissingVerdicts, RepositoryLocked)) else \
            422 if isinstance(exc, SchemaViolation) else 400
        return _error(status, type(exc).__name__, str(exc))

    @app.get("/api/campaigns")
    def campaigns():
        return repo.entries("campaign")

    @app.get("/api/tests")
    def tests(uid: str | None = None, mode: str | None = None,
              active: bool = False, with_source: bool = False,
              limit: int = 10000, offset: int = 0):
        out = []
        for meta in repo.entries("test"):
            if uid is not None and meta["uid"] != uid:
                continue
            if active and meta.get("invalidation"):
                continue
            if mode is not None and meta["mode"] != mode:
                continue
            out.append(meta)
        page = out[offset:offset + limit]
        if with_source:
            # program text lives next to the meta, not inside it
            page = [dict(meta) for meta in page]
            for meta in page:
                path = repo.entry_dir("test", meta["uid"]) / meta["source_ref"]
                meta["source"] = path.read_text(encoding="utf-8")
        return page

    @app.get("/api/configs")
    def configs():
        return repo.entries("config")

    @app.get("/api/executions")
    def executions(campaign: str, test: str | None = None,
                   config: str | None = None, outcome: str | None = None,
                   mode: str | None = None, limit: int = 10000, offset: int = 0):
        flt = QueryFilter(test=test, config=config, outcome=outcome, mode=mode)
        records = repo.query(campaign, flt)
        return records[offset:offset + limit]

    @app.get("/api/verdicts")
    def verdicts(campaign: str):
        repo.get_meta("campaign", campaign)
        return repo.load_verdicts(campaign)

    @app.get("/api/views")
    def views():
        return repo.entries("view")

    @app.get("/api/views/{name}")
    def view(name: str):
        return repo.get_view(name)

    @app.put("/api/views/{name}")
    def put_view(name: str, body: ViewBody):
        try:
            return repo.save_view(name, body.columns, body.filters)
        except SchemaViolation as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None

    @app.get("/api/rerun-command")
    def rerun_command(test: str, config: str, threads: int = 1):
        command = runner.rerun_command(repo, test, config, EvalParams(threads))
        return {"test": test, "config": config, "threads": threads,
                "command": command}

    @app.post("/api/rerun")
    def rerun(body: RerunBody):
        with rerun_lock:
            corpus = Corpus(repo)
            case = corpus.get_test(body.test)
            config = runner.load_config(repo, body.config)
            campaign_id = body.campaign or runner.find_rerun_campaign(
                repo, body.test, body.config) or runner.ensure_adhoc_campaign(repo)
            repo.get_meta("campaign", campaign_id)
            rec = runner.run_one(repo, case, config, EvalParams(body.threads),
                                 campaign_id)
            return runner.record_to_json(repo, rec) | {"campaign_id": campaign_id}

    if STATIC_DIR.is_dir():
        app.mount("/", StaticFiles(directory=STATIC_DIR, html=True), name="ui")

    return app


def serve(repo_path: str, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    repo = Repository(repo_path, writer=True)
    try:
        uvicorn.run(create_app(repo), host=host, port=port, log_level="warning")
    finally:
        repo.close()
