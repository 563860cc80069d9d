"""The canvas document model: layers with transforms and per-kind
configurations, animation reset, serialization, and export.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

from . import compose, svg
from .charts import AnimatedAsset, ChartImage
from .errors import (
    ConfigMatrixError,
    DocumentError,
    LockedLayerError,
    MigrationError,
    SerializationError,
    UnknownIdError,
)
from .gallery import GraphicAsset

SCHEMA_VERSION = "1"
FRAME_BUNDLE_CAP = 64
DEFAULT_CANVAS = (960, 640)


class LayerKind(str, Enum):
    CHART = "chart"
    ANIMATED_CHART = "animated-chart"
    DOD = "dod"
    GRAPHIC = "graphic"
    ANIMATED_GRAPHIC = "animated-graphic"
    HIGHLIGHT = "highlight"
    ANNOTATION = "annotation"
    TEXT = "text"


_ALL = frozenset(LayerKind)

# Exactly the configuration matrix: field -> asset kinds that accept it.
CONFIG_MATRIX: dict[str, frozenset[LayerKind]] = {
    "showAxes": frozenset({LayerKind.CHART, LayerKind.ANIMATED_CHART, LayerKind.DOD}),
    "showLegend": frozenset({LayerKind.CHART, LayerKind.ANIMATED_CHART, LayerKind.DOD}),
    "animateColumn": frozenset({LayerKind.CHART}),
    "recolorMap": frozenset({LayerKind.CHART, LayerKind.GRAPHIC, LayerKind.TEXT}),
    "opacity": _ALL,
    "thickness": frozenset(
        {LayerKind.CHART, LayerKind.DOD, LayerKind.ANNOTATION, LayerKind.TEXT}
    ),
    "stylePattern": frozenset({LayerKind.ANNOTATION, LayerKind.TEXT}),
    "frameDelayMs": frozenset({LayerKind.ANIMATED_CHART, LayerKind.ANIMATED_GRAPHIC}),
}

# Changing one of these means the referenced chart must be rendered again.
RENDER_AFFECTING = frozenset(
    {"showAxes", "showLegend", "animateColumn", "recolorMap", "frameDelayMs"}
)

_CONFIG_DEFAULTS = {
    "showAxes": True,
    "showLegend": True,
    "animateColumn": None,
    "recolorMap": None,
    "opacity": 1.0,
    "thickness": 1.0,
    "stylePattern": "solid",
    "frameDelayMs": 200,
}

_STYLE_PATTERNS = ("solid", "dashed", "dotted")


@dataclass
class Transform:
    tx_px: float = 0.0
    ty_px: float = 0.0
    rotation_deg: float = 0.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise DocumentError("layer scale must be positive")

    def to_json(self) -> dict:
        return {
            "txPx": self.tx_px,
            "tyPx": self.ty_px,
            "rotationDeg": self.rotation_deg,
            "scale": self.scale,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Transform":
        return cls(
            tx_px=float(payload.get("txPx", 0.0)),
            ty_px=float(payload.get("tyPx", 0.0)),
            rotation_deg=float(payload.get("rotationDeg", 0.0)),
            scale=float(payload.get("scale", 1.0)),
        )


@dataclass
class Layer:
    id: str
    asset_ref: str
    kind: LayerKind
    transform: Transform = field(default_factory=Transform)
    z_order: int = 0
    opacity: float = 1.0
    locked: bool = False
    config: dict = field(default_factory=dict)
    depends_on: str | None = None  # asset ref this layer overlays (highlights)
    playback_origin_ms: int = 0

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "assetRef": self.asset_ref,
            "kind": self.kind.value,
            "transform": self.transform.to_json(),
            "zOrder": self.z_order,
            "opacity": self.opacity,
            "locked": self.locked,
            "config": dict(self.config),
            "dependsOn": self.depends_on,
            "playbackOriginMs": self.playback_origin_ms,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Layer":
        return cls(
            id=payload["id"],
            asset_ref=payload["assetRef"],
            kind=LayerKind(payload["kind"]),
            transform=Transform.from_json(payload.get("transform", {})),
            z_order=int(payload["zOrder"]),
            opacity=float(payload.get("opacity", 1.0)),
            locked=bool(payload.get("locked", False)),
            config=dict(payload.get("config", {})),
            depends_on=payload.get("dependsOn"),
            playback_origin_ms=int(payload.get("playbackOriginMs", 0)),
        )


@dataclass
class TextPayload:
    id: str
    content: str
    font_family_name: str = "sans-serif"
    size_pt: float = 14.0
    color: str = "#333333"
    anchor: tuple[float, float] = (0.0, 0.0)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "content": self.content,
            "fontFamilyName": self.font_family_name,
            "sizePt": self.size_pt,
            "color": self.color,
            "anchor": {"x": self.anchor[0], "y": self.anchor[1]},
        }

    @classmethod
    def from_json(cls, payload: dict) -> "TextPayload":
        return cls(
            id=payload["id"],
            content=payload["content"],
            font_family_name=payload.get("fontFamilyName", "sans-serif"),
            size_pt=float(payload.get("sizePt", 14.0)),
            color=payload.get("color", "#333333"),
            anchor=(payload["anchor"]["x"], payload["anchor"]["y"]),
        )


@dataclass
class InfographicDocument:
    id: str
    canvas_width: int = DEFAULT_CANVAS[0]
    canvas_height: int = DEFAULT_CANVAS[1]
    background: str = "#ffffff"
    layers: list[Layer] = field(default_factory=list)
    text_layers: list[TextPayload] = field(default_factory=list)
    message_ref: str = ""
    counter: int = 0

    def __post_init__(self) -> None:
        if self.canvas_width <= 0 or self.canvas_height <= 0:
            raise DocumentError("canvas size must be positive")

    def layer(self, layer_id: str) -> Layer:
        for layer in self.layers:
            if layer.id == layer_id:
                return layer
        raise UnknownIdError(f"unknown layer {layer_id!r}")

    def by_z(self) -> list[Layer]:
        return sorted(self.layers, key=lambda l: l.z_order)


def default_config(kind: LayerKind) -> dict:
    return {
        name: _CONFIG_DEFAULTS[name]
        for name, kinds in CONFIG_MATRIX.items()
        if kind in kinds
    }


def _renumber(doc: InfographicDocument) -> None:
    # keep zOrder a contiguous 0..n-1 permutation after removals
    for i, layer in enumerate(doc.by_z()):
        layer.z_order = i


def add_layer(
    doc: InfographicDocument,
    asset_ref: str,
    kind: LayerKind,
    assets=None,
    depends_on: str | None = None,
) -> Layer:
    """Append a layer on top of the stack with an identity transform and
    the default config for its kind. ``assets`` (any container supporting
    ``in``) guards against dangling references when provided."""
    if assets is not None and asset_ref not in assets:
        raise UnknownIdError(f"unknown asset {asset_ref!r}")
    doc.counter += 1
    layer = Layer(
        id=f"l{doc.counter}",
        asset_ref=asset_ref,
        kind=kind,
        z_order=len(doc.layers),
        config=default_config(kind),
        depends_on=depends_on,
    )
    doc.layers.append(layer)
    return layer


def _kind_list(kinds: frozenset[LayerKind]) -> str:
    return ", ".join(sorted(k.value for k in kinds))


def _validate_config_value(name: str, value):
    if name in ("showAxes", "showLegend"):
        if not isinstance(value, bool):
            raise DocumentError(f"{name} must be a boolean")
    elif name == "opacity":
        value = float(value)
        if not 0.0 <= value <= 1.0:
            raise DocumentError("opacity must lie in [0, 1]")
    elif name in ("thickness", "frameDelayMs"):
        value = float(value) if name == "thickness" else int(value)
        if value <= 0:
            raise DocumentError(f"{name} must be positive")
    elif name == "stylePattern":
        if value not in _STYLE_PATTERNS:
            raise DocumentError(f"stylePattern must be one of {', '.join(_STYLE_PATTERNS)}")
    elif name == "animateColumn":
        if value is not None and not isinstance(value, str):
            raise DocumentError("animateColumn must be a column name or null")
    elif name == "recolorMap":
        if value is not None and not isinstance(value, dict):
            raise DocumentError("recolorMap must be a color mapping or null")
    return value


def set_config(doc: InfographicDocument, layer_id: str, name: str, value) -> Layer:
    """Set one config field, validated against the config matrix."""
    layer = doc.layer(layer_id)
    if layer.locked:
        raise LockedLayerError(f"layer {layer_id!r} is locked")
    allowed = CONFIG_MATRIX.get(name)
    if allowed is None:
        raise ConfigMatrixError(f"unknown config field {name!r}")
    if layer.kind not in allowed:
        raise ConfigMatrixError(
            f"{name!r} does not apply to {layer.kind.value} layers "
            f"(matrix row: {name} -> {_kind_list(allowed)})"
        )
    value = _validate_config_value(name, value)
    layer.config[name] = value
    if name == "opacity":
        layer.opacity = value
    return layer


def reorder_layer(doc: InfographicDocument, layer_id: str, direction: str) -> Layer:
    """Swap a layer's depth with its neighbor; a no-op at the stack ends."""
    if direction not in ("forward", "backward"):
        raise DocumentError("direction must be 'forward' or 'backward'")
    layer = doc.layer(layer_id)
    ordered = doc.by_z()
    i = ordered.index(layer)
    j = i + 1 if direction == "forward" else i - 1
    if 0 <= j < len(ordered):
        ordered[i].z_order, ordered[j].z_order = ordered[j].z_order, ordered[i].z_order
    return layer


def transform_layer(
    doc: InfographicDocument,
    layer_id: str,
    tx_px: float = 0.0,
    ty_px: float = 0.0,
    rotation_deg: float = 0.0,
    scale: float = 1.0,
) -> Layer:
    """Compose a movement onto the layer's transform: translations add,
    rotations add modulo 360, scales multiply."""
    layer = doc.layer(layer_id)
    if layer.locked:
        raise LockedLayerError(f"layer {layer_id!r} is locked")
    if scale <= 0:
        raise DocumentError("layer scale must be positive")
    t = layer.transform
    layer.transform = Transform(
        tx_px=t.tx_px + tx_px,
        ty_px=t.ty_px + ty_px,
        rotation_deg=(t.rotation_deg + rotation_deg) % 360.0,
        scale=t.scale * scale,
    )
    return layer


def remove_layer(doc: InfographicDocument, layer_id: str) -> list[str]:
    """Remove a layer and, transitively, every layer that depends on a
    removed layer's asset (highlight overlays, their annotation lines).
    Returns the removed layer ids."""
    layer = doc.layer(layer_id)
    if layer.locked:
        raise LockedLayerError(f"layer {layer_id!r} is locked")
    doomed = [layer]
    doomed_refs = {layer.asset_ref}
    changed = True
    while changed:
        changed = False
        for l in doc.layers:
            if l not in doomed and l.depends_on in doomed_refs:
                doomed.append(l)
                doomed_refs.add(l.asset_ref)
                changed = True
    doc.layers = [l for l in doc.layers if l not in doomed]
    _renumber(doc)
    return [l.id for l in doomed]


def animated_payload(asset) -> AnimatedAsset | None:
    if isinstance(asset, AnimatedAsset):
        return asset
    if isinstance(asset, GraphicAsset) and isinstance(asset.payload, AnimatedAsset):
        return asset.payload
    return None


def reset_animations(doc: InfographicDocument, assets: dict, tick_ms: int = 0) -> list[str]:
    """Give every animated layer the same playback origin and clear any
    sync restart flags. Returns the affected layer ids."""
    affected = []
    for layer in doc.layers:
        asset = assets.get(layer.asset_ref)
        animated = animated_payload(asset) if asset is not None else None
        if animated is None:
            continue
        layer.playback_origin_ms = tick_ms
        animated.restart = False
        affected.append(layer.id)
    return affected


# --- export ---------------------------------------------------------------------


def _drawable_markup(layer: Layer, asset, frame_index: int = 0) -> str:
    """The standalone vector markup for one layer's asset."""
    animated = animated_payload(asset)
    if animated is not None:
        return animated.frames[frame_index % len(animated.frames)]
    if isinstance(asset, ChartImage):
        return asset.payload
    if isinstance(asset, GraphicAsset):
        return asset.payload  # static graphics hold markup text
    if isinstance(asset, compose.Annotation):
        el = compose.annotation_markup(asset)
        return svg.document(480, 360, el).to_text()
    if isinstance(asset, TextPayload):
        el = svg.El(
            "text", asset.content, x=asset.anchor[0], y=asset.anchor[1],
            font_size=asset.size_pt, font_family=asset.font_family_name,
            fill=asset.color,
        )
        return svg.document(480, 360, el).to_text()
    if isinstance(asset, str):
        return asset
    raise DocumentError(f"layer {layer.id!r} references an unrenderable asset")


def _layer_group(layer: Layer, markup: str) -> svg.El:
    _, _, vw, vh = svg.view_box(markup)
    t = layer.transform
    parts = []
    if t.tx_px or t.ty_px:
        parts.append(f"translate({svg.fmt(t.tx_px)} {svg.fmt(t.ty_px)})")
    if t.rotation_deg:
        parts.append(f"rotate({svg.fmt(t.rotation_deg)})")
    if t.scale != 1.0:
        parts.append(f"scale({svg.fmt(t.scale)})")
    attrs = {"class_": "layer", "id": f"layer-{layer.id}"}
    if parts:
        attrs["transform"] = " ".join(parts)
    if layer.opacity != 1.0:
        attrs["opacity"] = layer.opacity
    g = svg.El("g", **attrs)
    g.add(svg.nested(markup, 0, 0, vw, vh))
    return g


def _composite(doc: InfographicDocument, assets: dict, frame_of: dict | None = None) -> str:
    children = [
        svg.El(
            "rect", x=0, y=0, width=doc.canvas_width, height=doc.canvas_height,
            fill=doc.background,
        )
    ]
    for layer in doc.by_z():
        asset = assets.get(layer.asset_ref)
        if asset is None:
            raise UnknownIdError(f"layer {layer.id!r} references unknown asset {layer.asset_ref!r}")
        frame = (frame_of or {}).get(layer.id, 0)
        children.append(_layer_group(layer, _drawable_markup(layer, asset, frame)))
    return svg.document(doc.canvas_width, doc.canvas_height, *children).to_text()


def export_static(doc: InfographicDocument, assets: dict) -> str:
    """One standalone vector file: layers composited in z-order with their
    transforms and opacity, animations at frame 0."""
    if not doc.layers:
        raise DocumentError("document has no layers")
    return _composite(doc, assets)


def export_frames(doc: InfographicDocument, assets: dict) -> tuple[list[str], dict]:
    """Per-tick composites over one least-common-multiple cycle of every
    animation, capped at FRAME_BUNDLE_CAP frames, plus a timing manifest."""
    if not doc.layers:
        raise DocumentError("document has no layers")
    animated: list[tuple[Layer, AnimatedAsset]] = []
    for layer in doc.by_z():
        asset = assets.get(layer.asset_ref)
        payload = animated_payload(asset) if asset is not None else None
        if payload is not None:
            animated.append((layer, payload))

    if not animated:
        manifest = {
            "frameCount": 1, "tickMs": 0, "cycleMs": 0, "truncated": False, "layers": [],
        }
        return [export_static(doc, assets)], manifest

    step = math.gcd(*(a.frame_delay_ms for _, a in animated))
    cycle = 1
    for _, a in animated:
        cycle = math.lcm(cycle, a.frame_delay_ms * len(a.frames))
    total = cycle // step
    truncated = total > FRAME_BUNDLE_CAP
    count = min(total, FRAME_BUNDLE_CAP)

    frames = []
    for k in range(count):
        t = k * step
        frame_of = {
            layer.id: ((t - layer.playback_origin_ms) // a.frame_delay_ms) % len(a.frames)
            for layer, a in animated
        }
        frames.append(_composite(doc, assets, frame_of))
    manifest = {
        "frameCount": count,
        "tickMs": step,
        "cycleMs": cycle,
        "truncated": truncated,
        "layers": [
            {
                "layerId": layer.id,
                "frameDelayMs": a.frame_delay_ms,
                "frames": len(a.frames),
                "cycleMs": a.frame_delay_ms * len(a.frames),
            }
            for layer, a in animated
        ],
    }
    return frames, manifest


# --- serialization ----------------------------------------------------------------


def serialize_document(doc: InfographicDocument) -> str:
    payload = {
        "schemaVersion": SCHEMA_VERSION,
        "id": doc.id,
        "canvas": {"width": doc.canvas_width, "height": doc.canvas_height},
        "background": doc.background,
        "messageRef": doc.message_ref,
        "counter": doc.counter,
        "layers": [l.to_json() for l in doc.by_z()],
        "textLayers": [t.to_json() for t in doc.text_layers],
    }
    return json.dumps(payload, indent=1)


def deserialize_document(text: str) -> InfographicDocument:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SerializationError(
            f"document payload is not parseable at offset {exc.pos}: {exc.msg}",
            detail={"offset": exc.pos},
        ) from exc
    found = str(payload.get("schemaVersion"))
    if found != SCHEMA_VERSION:
        raise MigrationError(found=found, supported=SCHEMA_VERSION)
    canvas = payload.get("canvas", {})
    doc = InfographicDocument(
        id=payload["id"],
        canvas_width=int(canvas.get("width", DEFAULT_CANVAS[0])),
        canvas_height=int(canvas.get("height", DEFAULT_CANVAS[1])),
        background=payload.get("background", "#ffffff"),
        layers=[Layer.from_json(l) for l in payload.get("layers", [])],
        text_layers=[TextPayload.from_json(t) for t in payload.get("textLayers", [])],
        message_ref=payload.get("messageRef", ""),
        counter=int(payload.get("counter", 0)),
    )
    ids = [l.id for l in doc.layers]
    if len(set(ids)) != len(ids):
        raise SerializationError("duplicate layer ids in document payload")
    return doc
