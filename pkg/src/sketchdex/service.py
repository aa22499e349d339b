"""HTTP facade for the sketch UI: query, relevance feedback, page images.

Requests never mutate the loaded index, so any number of clients can query
concurrently; identical inputs produce identical rankings.
"""

from __future__ import annotations

import io
import time
from functools import lru_cache

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel

from . import engine, eoh
from .exceptions import (
    BlankRegionError,
    EmptyIndexError,
    OutOfBoundsError,
    PageNotFoundError,
)
from .geometry import Box

DEFAULT_THUMB_SIDE = 240


class FeedbackRequest(BaseModel):
    page_id: int
    x: int
    y: int
    w: int
    h: int
    top: int = 20


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "detail": detail})


def _png_response(img: Image.Image) -> Response:
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return Response(content=buf.getvalue(), media_type="image/png")


def create_app(index: engine.Index | None, thumb_side: int = DEFAULT_THUMB_SIDE) -> FastAPI:
    app = FastAPI(title="sketchdex", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @lru_cache(maxsize=32)
    def page_image(page_id: int) -> Image.Image:
        rec = index.page(page_id)
        return Image.fromarray(engine.load_page(rec.path))

    def hits_payload(hits) -> list[dict]:
        return [
            {
                "page_id": h.page_id,
                "title_id": index.pages[h.page_id].title_id,
                "x": h.window.x,
                "y": h.window.y,
                "side": h.window.side,
                "distance": h.distance,
                "thumbnail_url": f"/pages/{h.page_id}/thumb",
                "page_url": f"/pages/{h.page_id}",
            }
            for h in hits
        ]

    @app.post("/query")
    async def query(request: Request, top: int = 20):
        if index is None:
            return _error(503, "index_not_loaded", "no index is loaded")
        if top < 1:
            return _error(400, "bad_request", "top must be >= 1")
        body = await request.body()
        try:
            with Image.open(io.BytesIO(body)) as im:
                canvas = np.asarray(im.convert("L"))
        except (UnidentifiedImageError, OSError, ValueError):
            return _error(400, "undecodable_image", "request body is not a decodable image")
        started = time.perf_counter()
        feat = eoh.sketch_to_feature(canvas, index.config.cells,
                                     magnitude_floor=index.config.magnitude_floor)
        if feat is None:
            return _error(422, "blank_query", "sketch contains no ink")
        try:
            hits = engine.search(index, feat, top)
        except EmptyIndexError as exc:
            return _error(503, "empty_index", str(exc))
        elapsed = (time.perf_counter() - started) * 1000.0
        return {"hits": hits_payload(hits), "elapsed_ms": elapsed}

    @app.post("/feedback")
    def feedback(req: FeedbackRequest):
        if index is None:
            return _error(503, "index_not_loaded", "no index is loaded")
        if req.top < 1 or req.w < 1 or req.h < 1:
            return _error(400, "bad_request", "w, h, and top must be >= 1")
        started = time.perf_counter()
        try:
            hits = engine.region_query(index, req.page_id, Box(req.x, req.y, req.w, req.h),
                                       req.top)
        except PageNotFoundError as exc:
            return _error(404, "page_not_found", str(exc))
        except OutOfBoundsError as exc:
            return _error(400, "out_of_bounds", str(exc))
        except BlankRegionError as exc:
            return _error(422, "blank_query", str(exc))
        except EmptyIndexError as exc:
            return _error(503, "empty_index", str(exc))
        elapsed = (time.perf_counter() - started) * 1000.0
        return {"hits": hits_payload(hits), "elapsed_ms": elapsed}

    @app.get("/pages/{page_id}")
    def page(page_id: int):
        if index is None:
            return _error(503, "index_not_loaded", "no index is loaded")
        try:
            return _png_response(page_image(page_id))
        except PageNotFoundError as exc:
            return _error(404, "page_not_found", str(exc))

    @app.get("/pages/{page_id}/thumb")
    def thumb(page_id: int):
        if index is None:
            return _error(503, "index_not_loaded", "no index is loaded")
        try:
            im = page_image(page_id).copy()
        except PageNotFoundError as exc:
            return _error(404, "page_not_found", str(exc))
        im.thumbnail((thumb_side, thumb_side))
        return _png_response(im)

    @app.get("/pages/{page_id}/region")
    def region(page_id: int, x: int, y: int, side: int):
        if index is None:
            return _error(503, "index_not_loaded", "no index is loaded")
        if side < 1:
            return _error(400, "bad_request", "side must be >= 1")
        try:
            im = page_image(page_id)
        except PageNotFoundError as exc:
            return _error(404, "page_not_found", str(exc))
        # Always return exactly side x side; parts outside the page pad white.
        canvas = Image.new("L", (side, side), color=255)
        sx, sy = max(x, 0), max(y, 0)
        ex, ey = min(x + side, im.width), min(y + side, im.height)
        if ex > sx and ey > sy:
            canvas.paste(im.crop((sx, sy, ex, ey)), (sx - x, sy - y))
        return _png_response(canvas)

    return app
