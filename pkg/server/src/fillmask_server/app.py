"""HTTP layer: /v1/fill_mask, /v1/tokenize, /v1/health."""

from __future__ import annotations

import os
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backend import DEFAULT_MODEL, MASK_SENTINEL, FillMaskBackend, NoMaskError, NotLoadedError


class FillRequest(BaseModel):
    tokens: list[str] = Field(min_length=1)
    top_k: int = Field(default=5, ge=1, le=100)


class TokenizeRequest(BaseModel):
    text: str | None = None
    tokens: list[str] | None = None


def create_app(model_id: str | None = None, preload: bool = False) -> FastAPI:
    """Build the service around one checkpoint.

    With ``preload`` the checkpoint loads synchronously before the app serves;
    otherwise loading happens in a background thread and /v1/health reports 503
    until it completes.
    """
    resolved = model_id or os.environ.get("FILLMASK_MODEL", DEFAULT_MODEL)
    backend = FillMaskBackend(resolved)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if preload:
            backend.load()
        else:
            backend.load_in_background()
        yield

    app = FastAPI(title="fillmask-server", lifespan=lifespan)
    app.state.backend = backend

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(NotLoadedError)
    async def not_loaded(request: Request, exc: NotLoadedError):
        return JSONResponse(status_code=503, content={"detail": str(exc)})

    @app.post("/v1/fill_mask")
    def fill_mask(body: FillRequest):
        if MASK_SENTINEL not in body.tokens:
            return JSONResponse(
                status_code=422,
                content={"detail": f"request tokens carry no {MASK_SENTINEL} sentinel"},
            )
        try:
            masks = backend.fill(body.tokens, body.top_k)
        except NoMaskError as err:
            return JSONResponse(status_code=422, content={"detail": str(err)})
        return {"masks": masks}

    @app.post("/v1/tokenize")
    def tokenize(body: TokenizeRequest):
        if body.tokens is not None:
            tokens = body.tokens
        elif body.text is not None:
            tokens = body.text.split()
        else:
            tokens = []
        if not tokens or any(not t for t in tokens):
            return JSONResponse(
                status_code=400, content={"detail": "empty input; send text or tokens"}
            )
        return {"pieces": backend.tokenize(tokens)}

    @app.get("/v1/health")
    def health():
        if backend.loaded:
            return {"status": "ok", "model_id": backend.model_id}
        if backend.load_error is not None:
            return JSONResponse(
                status_code=503,
                content={"status": "error", "detail": str(backend.load_error)},
            )
        return JSONResponse(status_code=503, content={"status": "loading"})

    return app
