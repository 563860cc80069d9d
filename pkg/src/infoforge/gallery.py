"""Captioned graphic-asset gallery: deterministic caption embeddings,
similarity search for static and animated graphics, and a persisted index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .charts import AnimatedAsset
from .errors import GalleryError
from .intent import AssetKind, AssetRequest, RecommendationBatch, RecommendationItem
from .textutil import fnv1a_64, tokenize

EMBED_DIM = 256
DEFAULT_K = 20


@dataclass
class GraphicAsset:
    id: str
    kind: str  # "static" | "animated"
    payload: str | AnimatedAsset
    caption: str
    frame_captions: list[str] = field(default_factory=list)
    license: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("static", "animated"):
            raise GalleryError(f"unknown asset kind {self.kind!r}")
        if self.kind == "static":
            if self.frame_captions:
                raise GalleryError("static assets carry no frame captions")
            if not isinstance(self.payload, str):
                raise GalleryError("static payload must be vector-image text")
        else:
            if not isinstance(self.payload, AnimatedAsset):
                raise GalleryError("animated payload must be an AnimatedAsset")
            if len(self.frame_captions) != len(self.payload.frames):
                raise GalleryError(
                    f"asset {self.id!r}: {len(self.frame_captions)} frame captions "
                    f"for {len(self.payload.frames)} frames"
                )


def fallback_embed(text: str) -> np.ndarray:
    """256-dim signed feature hash of the token bag: bucket = FNV-1a(token)
    mod 256, sign from bit 63 of a second hash round; L2-normalized."""
    vec = np.zeros(EMBED_DIM, dtype=float)
    for token in tokenize(text, fold=False):
        h = fnv1a_64(token.encode("utf-8"))
        bucket = h % EMBED_DIM
        second = fnv1a_64(h.to_bytes(8, "little"))
        sign = -1.0 if (second >> 63) & 1 else 1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return vec
    return vec / norm


@dataclass
class GalleryIndex:
    assets: list[GraphicAsset]
    vectors: dict[str, np.ndarray]  # asset id -> (1|frames, 256)
    embed: Callable[[str], np.ndarray] = fallback_embed
    embedding_name: str = "fallback"
    skipped: list[str] = field(default_factory=list)

    def get(self, asset_id: str) -> GraphicAsset:
        for asset in self.assets:
            if asset.id == asset_id:
                return asset
        raise GalleryError(f"unknown gallery asset {asset_id!r}")


def _load_payload(path: Path) -> str | AnimatedAsset:
    text = path.read_text("utf-8")
    if path.suffix == ".json":
        return AnimatedAsset.from_json(json.loads(text))
    return text


def index_gallery(
    manifest_path: Path,
    embed: Callable[[str], np.ndarray] = fallback_embed,
    embedding_name: str = "fallback",
    persist: bool = True,
) -> GalleryIndex:
    """Build caption vectors for every manifest entry; bad entries are
    skipped and reported in ``index.skipped``. The index is persisted next
    to the manifest."""
    manifest_path = Path(manifest_path)
    records = json.loads(manifest_path.read_text("utf-8"))
    base = manifest_path.parent
    assets: list[GraphicAsset] = []
    vectors: dict[str, np.ndarray] = {}
    skipped: list[str] = []

    for record in records:
        asset_id = record.get("id", "?")
        try:
            payload_path = base / record["payload"]
            if not payload_path.is_file():
                raise GalleryError(f"payload not found: {record['payload']}")
            caption = (record.get("caption") or "").strip()
            if not caption:
                raise GalleryError("empty caption")
            frame_captions = [str(c) for c in record.get("frameCaptions") or []]
            if record["kind"] == "animated" and any(not c.strip() for c in frame_captions):
                raise GalleryError("empty frame caption")
            asset = GraphicAsset(
                id=asset_id,
                kind=record["kind"],
                payload=_load_payload(payload_path),
                caption=caption,
                frame_captions=frame_captions,
                license=record.get("license", ""),
            )
        except (GalleryError, KeyError, OSError, ValueError) as exc:
            skipped.append(f"{asset_id}: {exc}")
            continue
        if asset.kind == "animated":
            vectors[asset.id] = np.stack([embed(c) for c in asset.frame_captions])
        else:
            vectors[asset.id] = embed(asset.caption).reshape(1, EMBED_DIM)
        assets.append(asset)

    index = GalleryIndex(
        assets=assets,
        vectors=vectors,
        embed=embed,
        embedding_name=embedding_name,
        skipped=skipped,
    )
    if persist:
        save_index(index, index_path_for(manifest_path), records_by_id={r["id"]: r for r in records if "id" in r})
    return index


def index_path_for(manifest_path: Path) -> Path:
    manifest_path = Path(manifest_path)
    return manifest_path.with_name(manifest_path.stem + ".index.json")


def save_index(index: GalleryIndex, path: Path, records_by_id: dict | None = None) -> Path:
    records_by_id = records_by_id or {}
    entries = []
    for asset in index.assets:
        record = records_by_id.get(asset.id, {})
        entries.append({
            "id": asset.id,
            "kind": asset.kind,
            "caption": asset.caption,
            "frameCaptions": asset.frame_captions or None,
            "license": asset.license,
            "payload": record.get("payload"),
            "vectors": index.vectors[asset.id].tolist(),
        })
    payload = {
        "embedding": index.embedding_name,
        "entries": entries,
        "skipped": index.skipped,
    }
    path = Path(path)
    path.write_text(json.dumps(payload, indent=1), "utf-8")
    return path


def load_index(
    path: Path,
    embed: Callable[[str], np.ndarray] = fallback_embed,
) -> GalleryIndex:
    """Reload a persisted index; stored vectors are reused verbatim so
    search results survive the round trip bit-for-bit."""
    path = Path(path)
    payload = json.loads(path.read_text("utf-8"))
    base = path.parent
    assets = []
    vectors = {}
    for entry in payload["entries"]:
        asset = GraphicAsset(
            id=entry["id"],
            kind=entry["kind"],
            payload=_load_payload(base / entry["payload"]),
            caption=entry["caption"],
            frame_captions=entry.get("frameCaptions") or [],
            license=entry.get("license", ""),
        )
        assets.append(asset)
        vectors[asset.id] = np.array(entry["vectors"], dtype=float)
    return GalleryIndex(
        assets=assets,
        vectors=vectors,
        embed=embed,
        embedding_name=payload.get("embedding", "fallback"),
    )


# --- search -------------------------------------------------------------------


def _batch(
    scored: list[tuple[float, GraphicAsset]],
    k: int,
    kind: AssetKind,
    request: AssetRequest | None,
) -> RecommendationBatch:
    scored.sort(key=lambda pair: (-pair[0], pair[1].id))
    request_id = request.id if request else "r0"
    chunk_id = request.chunk_id if request else "c0"
    items = [
        RecommendationItem(
            ref=asset.id,
            kind=kind,
            score=score,
            label=asset.caption,
            data={"assetId": asset.id},
        )
        for score, asset in scored[: max(k, 0)]
    ]
    return RecommendationBatch(request_id=request_id, source_chunk_id=chunk_id, items=items)


def search_static(
    chunk: str,
    index: GalleryIndex,
    k: int = DEFAULT_K,
    request: AssetRequest | None = None,
) -> RecommendationBatch:
    """Cosine similarity against every static caption vector, descending,
    ties broken by ascending asset id."""
    query = index.embed(chunk)
    # scores quantized to 1e-9 so mathematical ties rank by id, not float noise
    scored = [
        (round(float(index.vectors[a.id][0] @ query), 9), a)
        for a in index.assets
        if a.kind == "static"
    ]
    return _batch(scored, k, AssetKind.STATIC_GRAPHIC, request)


def search_animated(
    chunk: str,
    index: GalleryIndex,
    k: int = DEFAULT_K,
    request: AssetRequest | None = None,
) -> RecommendationBatch:
    """Score = arithmetic mean over frames of cosine(chunk, frame caption)."""
    query = index.embed(chunk)
    scored = [
        (round(float(np.mean(index.vectors[a.id] @ query)), 9), a)
        for a in index.assets
        if a.kind == "animated"
    ]
    return _batch(scored, k, AssetKind.ANIMATED_GRAPHIC, request)
