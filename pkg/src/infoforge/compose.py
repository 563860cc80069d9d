"""Between-asset interactions: recolor assets with a palette, substitute
glyphs into chart marks, overlay filter highlights with an annotation
line, and synchronize animation timing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from . import svg
from .charts import (
    POINT_RADIUS,
    AnimatedAsset,
    Aggregate,
    Channel,
    ChartImage,
    ChartSpec,
    Mark,
    render_chart,
)
from .chroma import Palette, SchemeKind, recolor_mapping
from .color import parse_hex, to_hex
from .dataset import ColumnKind, Dataset
from .errors import ComposeError
from .filterql import FilteredTable
from .gallery import GraphicAsset

DIM_OPACITY = 0.3
ANNOTATION_THICKNESS_PX = 1.5
ANNOTATION_OFFSET_PX = 24.0
LINE_MARKER_SIZE = 8.0
DEFAULT_GLYPH_SCALE = 2.0
_HEADS = ("none", "dot", "arrow")


@dataclass
class AnnotationLine:
    thickness_px: float = ANNOTATION_THICKNESS_PX
    color: str = "#333333"
    dash: str = ""  # stroke-dasharray, empty for solid
    start_head: str = "none"
    end_head: str = "arrow"

    def __post_init__(self) -> None:
        if self.thickness_px <= 0:
            raise ComposeError("annotation line thickness must be positive")
        if self.start_head not in _HEADS or self.end_head not in _HEADS:
            raise ComposeError(f"line heads must be one of {', '.join(_HEADS)}")

    def to_json(self) -> dict:
        return {
            "thicknessPx": self.thickness_px,
            "color": self.color,
            "dash": self.dash,
            "startHead": self.start_head,
            "endHead": self.end_head,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "AnnotationLine":
        return cls(
            thickness_px=float(payload.get("thicknessPx", ANNOTATION_THICKNESS_PX)),
            color=payload.get("color", "#333333"),
            dash=payload.get("dash", ""),
            start_head=payload.get("startHead", "none"),
            end_head=payload.get("endHead", "arrow"),
        )


@dataclass
class Annotation:
    label_text: str
    label_anchor: tuple[float, float]
    target_point: tuple[float, float]
    line: AnnotationLine = field(default_factory=AnnotationLine)
    opacity: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.opacity <= 1.0:
            raise ComposeError("annotation opacity must lie in [0, 1]")

    def to_json(self) -> dict:
        return {
            "labelText": self.label_text,
            "labelAnchor": {"x": self.label_anchor[0], "y": self.label_anchor[1]},
            "targetPoint": {"x": self.target_point[0], "y": self.target_point[1]},
            "line": self.line.to_json(),
            "opacity": self.opacity,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Annotation":
        return cls(
            label_text=payload["labelText"],
            label_anchor=(payload["labelAnchor"]["x"], payload["labelAnchor"]["y"]),
            target_point=(payload["targetPoint"]["x"], payload["targetPoint"]["y"]),
            line=AnnotationLine.from_json(payload.get("line", {})),
            opacity=float(payload.get("opacity", 1.0)),
        )


@dataclass
class HighlightOverlay:
    base_chart_ref: str
    emphasized_marks: list[int]
    dim_opacity: float = DIM_OPACITY
    annotations: list[Annotation] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "baseChartRef": self.base_chart_ref,
            "emphasizedMarks": list(self.emphasized_marks),
            "dimOpacity": self.dim_opacity,
            "annotations": [a.to_json() for a in self.annotations],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "HighlightOverlay":
        return cls(
            base_chart_ref=payload["baseChartRef"],
            emphasized_marks=[int(i) for i in payload["emphasizedMarks"]],
            dim_opacity=float(payload.get("dimOpacity", DIM_OPACITY)),
            annotations=[Annotation.from_json(a) for a in payload.get("annotations", [])],
        )


@dataclass
class GlyphMap:
    glyphs: dict[str, str]  # legend value -> GraphicAsset id
    glyph_scale: float = DEFAULT_GLYPH_SCALE

    def __post_init__(self) -> None:
        if self.glyph_scale <= 0:
            raise ComposeError("glyph scale must be positive")

    def to_json(self) -> dict:
        return {"glyphs": dict(self.glyphs), "glyphScale": self.glyph_scale}

    @classmethod
    def from_json(cls, payload: dict) -> "GlyphMap":
        return cls(
            glyphs=dict(payload["glyphs"]),
            glyph_scale=float(payload.get("glyphScale", DEFAULT_GLYPH_SCALE)),
        )


# --- recoloring ---------------------------------------------------------------


def _asset_payloads(asset: ChartImage | GraphicAsset | AnimatedAsset) -> list[str]:
    if isinstance(asset, ChartImage):
        return [asset.payload]
    if isinstance(asset, AnimatedAsset):
        return list(asset.frames)
    if isinstance(asset, GraphicAsset):
        if isinstance(asset.payload, AnimatedAsset):
            return list(asset.payload.frames)
        return [asset.payload]
    raise ComposeError(f"cannot recolor {type(asset).__name__}")


def recolor_map_for(
    asset: ChartImage | GraphicAsset | AnimatedAsset,
    target: Palette,
    scheme: SchemeKind | None = None,
    restrict_to: list[str] | None = None,
) -> dict[str, str]:
    """The hex->hex paint substitution a recolor would apply.

    Sources are the distinct paints across all frames in first-appearance
    order; ``restrict_to`` (a chart's declared scheme) narrows them so axis
    and label strokes keep their color.
    """
    paints: list[str] = []
    for payload in _asset_payloads(asset):
        for paint in svg.iter_paints(payload):
            if paint not in paints:
                paints.append(paint)
    if restrict_to is not None:
        allowed = {p.lower() for p in restrict_to}
        paints = [p for p in paints if p in allowed]
    if not paints:
        raise ComposeError("asset has no paint colors")
    # Uniform weights: without a rasterizer every paint counts equally.
    mapping = recolor_mapping(
        [(parse_hex(p), 1.0) for p in paints], target, scheme or SchemeKind.CATEGORICAL
    )
    return {to_hex(s): to_hex(t) for s, t in mapping.items()}


def apply_recolor(
    asset: ChartImage | GraphicAsset | AnimatedAsset,
    target: Palette,
    scheme: SchemeKind | None = None,
    restrict_to: list[str] | None = None,
):
    """Recolor an asset with ``target``, one substitution map for the whole
    asset so every frame stays temporally consistent."""
    hex_map = recolor_map_for(asset, target, scheme, restrict_to)
    if isinstance(asset, ChartImage):
        geometry = [
            replace(g, paint=hex_map.get(g.paint.lower(), g.paint)) for g in asset.mark_geometry
        ]
        return replace(
            asset, payload=svg.rewrite_paints(asset.payload, hex_map), mark_geometry=geometry
        )
    if isinstance(asset, AnimatedAsset):
        return replace(asset, frames=[svg.rewrite_paints(f, hex_map) for f in asset.frames])
    payload = asset.payload
    if isinstance(payload, AnimatedAsset):
        payload = replace(payload, frames=[svg.rewrite_paints(f, hex_map) for f in payload.frames])
    else:
        payload = svg.rewrite_paints(payload, hex_map)
    return replace(asset, payload=payload)


# --- data-object displays (glyph substitution) ---------------------------------

_CIRCLE_RE = re.compile(r"<circle[^>]*/>")
_RECT_RE = re.compile(r"<rect[^>]*/>")
_SWATCH_RE = re.compile(r'<rect[^>]*class="legend-swatch"[^>]*/>')
_ATTR_RES = {name: re.compile(rf'{name}="([^"]+)"') for name in ("x", "y", "width", "height")}


def _attr(markup: str, name: str) -> float:
    match = _ATTR_RES[name].search(markup)
    if not match:  # pragma: no cover - renderer always writes these
        raise ComposeError(f"mark markup lacks {name!r}")
    return float(match.group(1))


def _marks_segment(payload: str) -> tuple[str, str, str]:
    """Split a chart payload around the contents of <g class="marks">."""
    open_tag = '<g class="marks">'
    start = payload.find(open_tag)
    if start < 0:
        raise ComposeError("chart payload has no marks group")
    body_start = start + len(open_tag)
    end = payload.find("</g>", body_start)
    return payload[:body_start], payload[body_start:end], payload[end:]


def _glyph_markup(glyph_svg: str, cx: float, cy: float, size: float) -> str:
    return svg.nested(glyph_svg, cx - size / 2, cy - size / 2, size, size).to_text()


def _legend_value_for_bar(group_label: str, categories: list[str]) -> str:
    # group labels are "category|legendValue"; match the longest known suffix
    candidates = [c for c in categories if group_label.endswith("|" + c)]
    if not candidates:
        raise ComposeError(f"cannot resolve legend value for bar group {group_label!r}")
    return max(candidates, key=len)


def make_dod(
    spec: ChartSpec,
    image: ChartImage,
    ds: Dataset,
    glyphs: GlyphMap,
    glyph_payloads: dict[str, str],
) -> ChartImage:
    """Substitute gallery glyphs for chart marks (a data-object display).

    ``glyph_payloads`` maps each GraphicAsset id in ``glyphs`` to its
    vector markup. Mark count is preserved: glyphs substitute, never add.
    """
    if spec.mark not in (Mark.POINT, Mark.BAR, Mark.LINE):
        raise ComposeError(f"DOD unsupported for mark {spec.mark.value}")
    color_enc = spec.encoding(Channel.COLOR)
    if color_enc is None or color_enc.kind != ColumnKind.NOMINAL:
        raise ComposeError("DOD requires a Nominal color encoding")

    ci = ds.column_index(color_enc.column)
    rows = spec.row_filter if spec.row_filter is not None else range(ds.row_count)
    categories = sorted({str(ds.rows[r][ci]) for r in rows if ds.rows[r][ci] is not None})
    for value in categories:
        if value not in glyphs.glyphs:
            raise ComposeError(f"glyph map missing legend value {value!r}")
    for key in glyphs.glyphs:
        if key not in categories:
            raise ComposeError(f"glyph map key {key!r} is not a legend value")
    markup_for = {}
    for value, asset_id in glyphs.glyphs.items():
        if asset_id not in glyph_payloads:
            raise ComposeError(f"no payload for glyph asset {asset_id!r}")
        markup_for[value] = glyph_payloads[asset_id]

    def row_value(row: int) -> str:
        return str(ds.rows[row][ci])

    head, body, tail = _marks_segment(image.payload)
    geometry = list(image.mark_geometry)

    if spec.mark == Mark.POINT:
        size = glyphs.glyph_scale * 2 * POINT_RADIUS
        counter = iter(range(len(geometry)))

        def sub_point(match: re.Match) -> str:
            i = next(counter)
            g = geometry[i]
            geometry[i] = replace(g, shape="glyph", size=size)
            return _glyph_markup(markup_for[row_value(g.row_or_group)], g.x, g.y, size)

        body = _CIRCLE_RE.sub(sub_point, body)
    elif spec.mark == Mark.BAR:
        counter = iter(range(len(geometry)))

        def sub_bar(match: re.Match) -> str:
            g = geometry[next(counter)]
            width = _attr(match.group(0), "width")
            size = glyphs.glyph_scale * width
            value = _legend_value_for_bar(str(g.row_or_group), categories)
            tip_y = g.y - g.size / 2  # geometry y is the bar's vertical middle
            glyph = _glyph_markup(markup_for[value], g.x, tip_y - size / 2, size)
            return match.group(0) + glyph

        body = _RECT_RE.sub(sub_bar, body)
    else:  # line: add a marker at every vertex, keep the polylines
        size = glyphs.glyph_scale * LINE_MARKER_SIZE
        added = []
        for i, g in enumerate(geometry):
            added.append(_glyph_markup(markup_for[row_value(g.row_or_group)], g.x, g.y, size))
            geometry[i] = replace(g, shape="glyph", size=size)
        body = body + "".join(added)

    payload = head + body + tail

    # miniature glyphs in place of legend swatches, in legend order
    swatch_iter = iter(categories)

    def sub_swatch(match: re.Match) -> str:
        value = next(swatch_iter)
        x, y = _attr(match.group(0), "x"), _attr(match.group(0), "y")
        w, h = _attr(match.group(0), "width"), _attr(match.group(0), "height")
        return svg.nested(markup_for[value], x, y, w, h).to_text()

    payload = _SWATCH_RE.sub(sub_swatch, payload)
    return replace(image, payload=payload, mark_geometry=geometry)


# --- highlight ------------------------------------------------------------------


def _is_aggregated(spec: ChartSpec) -> bool:
    # rect heatmaps draw count cells, not rows, so they re-render as well
    if spec.mark == Mark.RECT:
        return True
    return any(e.aggregate != Aggregate.NONE or e.binned for e in spec.encodings)


def highlight(
    spec: ChartSpec,
    image: ChartImage,
    filtered: FilteredTable,
    chunk_text: str,
    ds: Dataset,
    base_ref: str = "",
) -> HighlightOverlay | ChartImage:
    """Emphasize the filtered rows on a chart.

    Aggregated charts are re-rendered over only the filtered rows; mark
    charts get a dim-others overlay plus one annotation labeled with the
    source chunk.
    """
    if filtered.dataset_id != spec.dataset_id:
        raise ComposeError(
            f"filter targets dataset {filtered.dataset_id!r}, chart uses {spec.dataset_id!r}"
        )
    selected = set(filtered.row_indices)
    if not selected:
        raise ComposeError("empty selection")

    if _is_aggregated(spec):
        if spec.row_filter is not None:
            selected &= set(spec.row_filter)
        if not selected:
            raise ComposeError("empty selection")
        return render_chart(replace(spec, row_filter=sorted(selected)), ds)

    emphasized = [
        i
        for i, g in enumerate(image.mark_geometry)
        if isinstance(g.row_or_group, int) and g.row_or_group in selected
    ]
    if not emphasized:
        raise ComposeError("empty selection")
    xs = [image.mark_geometry[i].x for i in emphasized]
    ys = [image.mark_geometry[i].y for i in emphasized]
    cx, cy = sum(xs) / len(xs), sum(ys) / len(ys)

    # anchor the label 24 px from the centroid toward the nearest chart edge
    edges = [
        (cx, (cx - ANNOTATION_OFFSET_PX, cy)),
        (image.width - cx, (cx + ANNOTATION_OFFSET_PX, cy)),
        (cy, (cx, cy - ANNOTATION_OFFSET_PX)),
        (image.height - cy, (cx, cy + ANNOTATION_OFFSET_PX))
    ]
    _, anchor = min(edges, key=lambda pair: pair[0])
    annotation = Annotation(label_text=chunk_text, label_anchor=anchor, target_point=(cx, cy))
    return HighlightOverlay(
        base_chart_ref=base_ref,
        emphasized_marks=emphasized,
        dim_opacity=DIM_OPACITY,
        annotations=[annotation],
    )


def annotation_markup(ann: Annotation) -> svg.El:
    (ax, ay), (tx, ty) = ann.label_anchor, ann.target_point
    line = ann.line
    g = svg.El("g", class_="annotation", opacity=ann.opacity)
    attrs = dict(
        x1=ax, y1=ay, x2=tx, y2=ty, stroke=line.color, stroke_width=line.thickness_px
    )
    if line.dash:
        attrs["stroke_dasharray"] = line.dash
    g.add(svg.El("line", **attrs))
    length = math.hypot(tx - ax, ty - ay) or 1.0
    ux, uy = (tx - ax) / length, (ty - ay) / length
    for head, px, py, dx, dy in (
        (line.start_head, ax, ay, -ux, -uy),
        (line.end_head, tx, ty, ux, uy),
    ):
        if head == "dot":
            g.add(svg.El("circle", cx=px, cy=py, r=3, fill=line.color))
        elif head == "arrow":
            size = 6.0
            bx, by = px - dx * size, py - dy * size
            points = (
                f"{svg.fmt(px)},{svg.fmt(py)} "
                f"{svg.fmt(bx - uy * size / 2)},{svg.fmt(by + ux * size / 2)} "
                f"{svg.fmt(bx + uy * size / 2)},{svg.fmt(by - ux * size / 2)}"
            )
            g.add(svg.El("polygon", points=points, fill=line.color))
    g.add(svg.El(
        "text", ann.label_text, x=ax, y=ay - 6, font_size=11,
        font_family="sans-serif", text_anchor="middle", fill=line.color,
    ))
    return g


def render_highlight(overlay: HighlightOverlay, image: ChartImage) -> ChartImage:
    """Composite a HighlightOverlay over its base chart: the base dimmed,
    emphasized marks redrawn at full opacity, annotations on top."""
    emphasized = set(overlay.emphasized_marks)
    if not emphasized.issubset(range(len(image.mark_geometry))):
        raise ComposeError("emphasized marks outside base chart geometry")
    dimmed = svg.El("g", opacity=overlay.dim_opacity)
    dimmed.add(svg.raw(svg.inner_markup(image.payload)))
    emph = svg.El("g", class_="emphasis")
    for i in sorted(emphasized):
        g = image.mark_geometry[i]
        radius = g.size if g.shape == "circle" else 3
        emph.add(svg.El("circle", cx=g.x, cy=g.y, r=radius, fill=g.paint))
    children = [dimmed, emph]
    children.extend(annotation_markup(a) for a in overlay.annotations)
    doc = svg.document(image.width, image.height, *children).to_text()
    return ChartImage(
        payload=doc, width=image.width, height=image.height,
        mark_geometry=list(image.mark_geometry),
    )


# --- animation sync -------------------------------------------------------------


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def _trimmed(asset: AnimatedAsset, count: int) -> AnimatedAsset:
    if count == len(asset.frames):
        return asset
    keys = asset.frame_keys[:count] if asset.frame_keys else None
    return replace(asset, frames=asset.frames[:count], frame_keys=keys)


def sync(a: AnimatedAsset, b: AnimatedAsset) -> tuple[AnimatedAsset, AnimatedAsset]:
    """Equalize two animations' cycle durations.

    The longer asset is trimmed so its frame count is a multiple of the
    shorter's; the non-authoritative asset's delay is then scaled so both
    cycles match (within one frame delay of rounding).
    """
    if len(a.frames) < 2 or len(b.frames) < 2:
        raise ComposeError("sync requires at least 2 frames per asset")
    if len(a.frames) <= len(b.frames):
        n, m = len(a.frames), len(b.frames)
        b = _trimmed(b, n * (m // n))
    else:
        n, m = len(b.frames), len(a.frames)
        a = _trimmed(a, n * (m // n))
    if len(a.frames) < 2 or len(b.frames) < 2:
        raise ComposeError("sync left fewer than 2 frames")

    # the visualization's delay is authoritative when exactly one participates
    a_chart, b_chart = a.source_kind == "chart", b.source_kind == "chart"
    auth_is_a = a_chart if a_chart != b_chart else True
    auth, other = (a, b) if auth_is_a else (b, a)
    other_delay = max(
        1, _round_half_up(auth.frame_delay_ms * len(auth.frames) / len(other.frames))
    )
    auth = replace(auth, restart=True)
    other = replace(other, frame_delay_ms=other_delay, restart=True)
    return (auth, other) if auth_is_a else (other, auth)
