"""HTTP facade exposing the whole engine to the studio UI and scripts.

Every endpoint is a thin adapter over one Engine operation and all
responses ride in an ApiEnvelope: ``{"ok": true, "data": ...}`` or
``{"ok": false, "error": {"code", "message", "detail"}}``. Engine errors
map to statuses by their stable ``code`` (unknown ids 404, provider
outages 502, everything else 400); no string matching.

Engine access is serialized by one lock: requests are handled
concurrently at the HTTP layer but the engine (and therefore any
provider call) runs one operation at a time, which is the bounded
provider concurrency a desk-scale artifact needs.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import document as docmod
from .chroma import Palette
from .dataset import DatasetMeta
from .engine import Engine
from .errors import ComposeError, EngineError
from .intent import KeyMessage, ProviderSuite, RecommendationBatch

# Statuses by error code; EngineError subclasses default to 400.
STATUS_FOR = {
    "unknown_id": 404,
    "provider_error": 502,
}


def envelope_ok(data) -> dict:
    return {"ok": True, "data": data}


def envelope_error(code: str, message: str, detail=None) -> dict:
    return {"ok": False, "error": {"code": code, "message": message, "detail": detail}}


# --- JSON projections ---------------------------------------------------------


def _cell(value):
    return value.isoformat() if isinstance(value, datetime) else value


def meta_json(meta: DatasetMeta) -> dict:
    return {
        "datasetId": meta.dataset_id,
        "rowCount": meta.row_count,
        "summaryText": meta.summary_text,
        "columns": [
            {
                "name": c.name,
                "kind": c.kind.value,
                "uniqueValues": list(c.unique_values),
                "minValue": _cell(c.min_value),
                "maxValue": _cell(c.max_value),
                "nullCount": c.null_count,
            }
            for c in meta.columns
        ],
    }


def message_json(message: KeyMessage) -> dict:
    return {
        "id": message.id,
        "text": message.text,
        "chunks": [
            {"id": c.id, "start": c.start, "end": c.end, "text": c.text}
            for c in message.chunks
        ],
    }


def batch_json(batch_id: str, batch: RecommendationBatch) -> dict:
    return {
        "batchId": batch_id,
        "requestId": batch.request_id,
        "sourceChunkId": batch.source_chunk_id,
        "items": [
            {
                "ref": i.ref,
                "kind": i.kind.value,
                "score": i.score,
                "label": i.label,
                "data": i.data,
            }
            for i in batch.items
        ],
    }


def document_json(doc) -> dict:
    return json.loads(docmod.serialize_document(doc))


# --- request bodies -----------------------------------------------------------


class IngestBody(BaseModel):
    content: str
    delimiter: str = ","


class MessageBody(BaseModel):
    text: str


class BrushBody(BaseModel):
    start: int
    end: int
    kind: str
    datasetId: str | None = None


class PickBody(BaseModel):
    index: int | None = None
    ref: str | None = None


class RenderBody(BaseModel):
    spec: dict
    datasetId: str | None = None


class AnimateBody(BaseModel):
    assetId: str
    timeColumn: str
    frameDelayMs: int = 200


class FilterTextBody(BaseModel):
    text: str
    datasetId: str | None = None


class TextOnlyBody(BaseModel):
    text: str


class RecolorBody(BaseModel):
    assetId: str
    paletteAssetId: str | None = None
    palette: dict | None = None


class DodBody(BaseModel):
    chartAssetId: str
    glyphs: dict[str, str]
    glyphScale: float = 2.0


class HighlightBody(BaseModel):
    chartAssetId: str
    filterAssetId: str
    chunkText: str | None = None


class SyncBody(BaseModel):
    aAssetId: str
    bAssetId: str


class DocumentBody(BaseModel):
    messageRef: str = ""


class AddLayerBody(BaseModel):
    assetId: str


class ConfigBody(BaseModel):
    name: str
    value: object = None


class ReorderBody(BaseModel):
    direction: str


class TransformBody(BaseModel):
    txPx: float | None = None
    tyPx: float | None = None
    rotationDeg: float | None = None
    scale: float | None = None


class ResetBody(BaseModel):
    tickMs: int = 0


class ExportBody(BaseModel):
    mode: str = "static-vector"


class AddTextBody(BaseModel):
    content: str
    fontFamilyName: str = "sans-serif"
    sizePt: float = 14.0
    color: str = "#333333"
    anchor: tuple[float, float] = (0.0, 0.0)


# --- app factory ----------------------------------------------------------------


def create_app(
    engine: Engine | None = None,
    *,
    data_dir: str | Path | None = None,
    suite: ProviderSuite | None = None,
    gallery_manifest: str | Path | None = None,
) -> FastAPI:
    eng = engine or Engine(
        data_dir=data_dir, suite=suite, gallery_manifest=gallery_manifest
    )
    app = FastAPI(title="infoforge service", docs_url=None, redoc_url=None)
    app.state.engine = eng
    lock = threading.RLock()

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    if eng.data_dir:
        exports_dir = eng.data_dir / "exports"
        exports_dir.mkdir(parents=True, exist_ok=True)
        app.mount("/exports", StaticFiles(directory=str(exports_dir)), name="exports")

    @app.exception_handler(EngineError)
    async def _engine_error(request: Request, exc: EngineError):
        detail = exc.detail
        if exc.code == "provider_error":
            provider = getattr(exc, "provider", "unknown")
            detail = {"provider": provider}
        return JSONResponse(
            status_code=STATUS_FOR.get(exc.code, 400),
            content=envelope_error(exc.code, exc.message, detail),
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content=envelope_error("validation", "invalid request body", exc.errors()),
        )

    def _export_urls(result: dict) -> dict:
        # Server filesystem paths become URLs under the /exports mount.
        if not eng.data_dir:
            return result
        base = eng.data_dir / "exports"

        def url(p: str) -> str:
            return "/exports/" + Path(p).relative_to(base).as_posix()

        out = dict(result)
        if "path" in out:
            out["path"] = url(out["path"])
        if "paths" in out:
            out["paths"] = [url(p) for p in out["paths"]]
        if "manifestPath" in out:
            out["manifestPath"] = url(out["manifestPath"])
        return out

    # -- datasets

    @app.post("/datasets")
    def ingest(body: IngestBody):
        with lock:
            return envelope_ok(meta_json(eng.ingest(body.content, body.delimiter)))

    @app.get("/datasets/{dataset_id}/meta")
    def dataset_meta(dataset_id: str):
        with lock:
            return envelope_ok(meta_json(eng.meta(dataset_id)))

    # -- messages and recommendations

    @app.post("/messages")
    def create_message(body: MessageBody):
        with lock:
            return envelope_ok(message_json(eng.create_message(body.text)))

    @app.get("/messages/{message_id}")
    def get_message(message_id: str):
        with lock:
            return envelope_ok(message_json(eng.registry.get_message(message_id)))

    @app.post("/messages/{message_id}/brush")
    def brush(message_id: str, body: BrushBody):
        with lock:
            batch_id, batch = eng.brush(
                message_id, body.start, body.end, body.kind, body.datasetId
            )
            return envelope_ok(batch_json(batch_id, batch))

    @app.get("/batches/{batch_id}")
    def get_batch(batch_id: str):
        with lock:
            return envelope_ok(batch_json(batch_id, eng.get_batch(batch_id)))

    @app.post("/batches/{batch_id}/pick")
    def pick(batch_id: str, body: PickBody):
        with lock:
            asset_id = eng.pick(batch_id, index=body.index, ref=body.ref)
            return envelope_ok(eng.describe(asset_id))

    @app.get("/assets/{asset_id}")
    def get_asset(asset_id: str):
        with lock:
            return envelope_ok(eng.describe(asset_id))

    # -- charts

    @app.post("/charts/render")
    def render_chart(body: RenderBody):
        with lock:
            asset_id, _ = eng.render_spec(body.spec, body.datasetId)
            return envelope_ok(eng.describe(asset_id))

    @app.post("/charts/animate")
    def animate_chart(body: AnimateBody):
        with lock:
            asset_id, _ = eng.animate(body.assetId, body.timeColumn, body.frameDelayMs)
            return envelope_ok(eng.describe(asset_id))

    # -- filters

    @app.post("/filters/parse")
    def parse_filter(body: TextOnlyBody):
        with lock:
            return envelope_ok({"query": eng.parse_filter(body.text)})

    @app.post("/filters/apply")
    def apply_filter(body: FilterTextBody):
        with lock:
            asset_id, _ = eng.apply_filter(body.text, body.datasetId)
            return envelope_ok(eng.describe(asset_id))

    # -- gallery and palettes

    @app.get("/gallery/search")
    def gallery_search(
        kind: str = Query("static"),
        q: str = Query(...),
        k: int = Query(20),
    ):
        with lock:
            batch_id, batch = eng.gallery_search(kind, q, k)
            return envelope_ok(batch_json(batch_id, batch))

    @app.post("/palettes/from-text")
    def palettes_from_text(body: TextOnlyBody):
        with lock:
            batch_id, batch = eng.palettes_from_text(body.text)
            return envelope_ok(batch_json(batch_id, batch))

    # -- composition

    @app.post("/compose/recolor")
    def recolor(body: RecolorBody):
        with lock:
            if body.paletteAssetId is not None:
                palette = eng.asset(body.paletteAssetId)
                if not isinstance(palette, Palette):
                    raise ComposeError(
                        f"asset {body.paletteAssetId!r} is not a palette"
                    )
            elif body.palette is not None:
                palette = Palette.from_json(body.palette)
            else:
                raise ComposeError("recolor needs paletteAssetId or palette")
            asset_id = eng.recolor(body.assetId, palette)
            return envelope_ok(eng.describe(asset_id))

    @app.post("/compose/dod")
    def dod(body: DodBody):
        with lock:
            asset_id = eng.dod(body.chartAssetId, body.glyphs, body.glyphScale)
            return envelope_ok(eng.describe(asset_id))

    @app.post("/compose/highlight")
    def highlight(body: HighlightBody):
        with lock:
            asset_id = eng.highlight(
                body.chartAssetId, body.filterAssetId, body.chunkText
            )
            return envelope_ok(eng.describe(asset_id))

    @app.post("/compose/sync")
    def sync(body: SyncBody):
        with lock:
            return envelope_ok(eng.sync(body.aAssetId, body.bAssetId))

    # -- text assets

    @app.post("/texts")
    def add_text(body: AddTextBody):
        with lock:
            asset_id = eng.add_text(
                body.content, body.fontFamilyName, body.sizePt, body.color,
                tuple(body.anchor),
            )
            return envelope_ok(eng.describe(asset_id))

    # -- documents

    @app.post("/documents")
    def create_document(body: DocumentBody):
        with lock:
            return envelope_ok(document_json(eng.create_document(body.messageRef)))

    @app.get("/documents")
    def list_documents():
        with lock:
            return envelope_ok({"documents": eng.list_documents()})

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        with lock:
            return envelope_ok(document_json(eng.get_document(doc_id)))

    @app.put("/documents/{doc_id}")
    def restore_document(doc_id: str, body: dict):
        with lock:
            return envelope_ok(document_json(eng.doc_restore(doc_id, body)))

    @app.delete("/documents/{doc_id}")
    def delete_document(doc_id: str):
        with lock:
            eng.delete_document(doc_id)
            return envelope_ok({"deleted": doc_id})

    @app.post("/documents/{doc_id}/layers")
    def add_layer(doc_id: str, body: AddLayerBody):
        with lock:
            layer = eng.doc_add_layer(doc_id, body.assetId)
            return envelope_ok(layer.to_json())

    @app.delete("/documents/{doc_id}/layers/{layer_id}")
    def remove_layer(doc_id: str, layer_id: str):
        with lock:
            return envelope_ok({"removed": eng.doc_remove_layer(doc_id, layer_id)})

    @app.post("/documents/{doc_id}/layers/{layer_id}/swap")
    def swap_asset(doc_id: str, layer_id: str, body: AddLayerBody):
        with lock:
            layer = eng.doc_swap_asset(doc_id, layer_id, body.assetId)
            return envelope_ok(layer.to_json())

    @app.post("/documents/{doc_id}/layers/{layer_id}/config")
    def set_config(doc_id: str, layer_id: str, body: ConfigBody):
        with lock:
            layer = eng.doc_set_config(doc_id, layer_id, body.name, body.value)
            return envelope_ok(layer.to_json())

    @app.post("/documents/{doc_id}/layers/{layer_id}/reorder")
    def reorder_layer(doc_id: str, layer_id: str, body: ReorderBody):
        with lock:
            layer = eng.doc_reorder(doc_id, layer_id, body.direction)
            return envelope_ok(layer.to_json())

    @app.post("/documents/{doc_id}/layers/{layer_id}/transform")
    def transform_layer(doc_id: str, layer_id: str, body: TransformBody):
        with lock:
            kwargs = {
                key: value
                for key, value in (
                    ("tx_px", body.txPx),
                    ("ty_px", body.tyPx),
                    ("rotation_deg", body.rotationDeg),
                    ("scale", body.scale),
                )
                if value is not None
            }
            layer = eng.doc_transform(doc_id, layer_id, **kwargs)
            return envelope_ok(layer.to_json())

    @app.post("/documents/{doc_id}/reset-animations")
    def reset_animations(doc_id: str, body: ResetBody | None = None):
        with lock:
            tick = body.tickMs if body else 0
            return envelope_ok({"layerIds": eng.doc_reset_animations(doc_id, tick)})

    @app.post("/documents/{doc_id}/export")
    def export_document(doc_id: str, body: ExportBody | None = None):
        with lock:
            mode = body.mode if body else "static-vector"
            return envelope_ok(_export_urls(eng.doc_export(doc_id, mode)))

    return app


def main() -> None:
    """Run the service with uvicorn; state lives under --data."""
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="infoforge HTTP service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--data", default=None, help="state directory")
    parser.add_argument("--gallery", default=None, help="gallery manifest path")
    parser.add_argument(
        "--provider", choices=["fallback", "remote"], default="fallback"
    )
    args = parser.parse_args()

    from .providers import suite_named

    app = create_app(
        data_dir=args.data,
        suite=suite_named(args.provider),
        gallery_manifest=args.gallery,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
