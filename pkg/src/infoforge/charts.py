"""Chart grammar: enumerate candidate specs over the relevant columns, rank
them, render specs to standalone SVG, and build per-key animation frames.

The enumeration is a closed rule table over column-kind pair signatures; a
Quantitative column whose name contains a time word is promoted to an
honorary Temporal ("effective kind") for every rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from enum import Enum
from itertools import combinations
from typing import Sequence

from . import svg
from .chroma import SchemeKind
from .color import RGB, parse_hex, to_hex
from .dataset import Cell, ColumnKind, ColumnMeta, Dataset, DatasetMeta
from .errors import BindError, ChartError
from .intent import AssetKind, AssetRequest, RecommendationBatch, RecommendationItem, is_time_named

WIDTH = 480
HEIGHT = 360
MARGIN_LEFT = 46
MARGIN_RIGHT = 12
MARGIN_TOP = 12
MARGIN_BOTTOM = 34
LEGEND_WIDTH = 110
MAX_TICKS = 8
POINT_RADIUS = 4
HIST_BINS = 10
HEAT_BINS = 8
ARC_MAX_CARDINALITY = 8
LEGEND_MAX_CARDINALITY = 12
AXIS_MAX_CARDINALITY = 50
DEFAULT_FRAME_DELAY_MS = 200
PAD_FRACTION = 0.05

CATEGORY10 = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]
BLUES5 = ["#eff3ff", "#bdd7e7", "#6baed6", "#3182bd", "#08519c"]

_EPOCH = datetime(1970, 1, 1)


class Mark(str, Enum):
    POINT = "point"
    LINE = "line"
    BAR = "bar"
    RECT = "rect"
    HISTOGRAM_BAR = "histogram-bar"
    ARC = "arc"


MARK_PRIORITY = {
    Mark.POINT: 0, Mark.LINE: 1, Mark.BAR: 2,
    Mark.ARC: 3, Mark.RECT: 4, Mark.HISTOGRAM_BAR: 5,
}


class Channel(str, Enum):
    X = "x"
    Y = "y"
    COLOR = "color"


class Aggregate(str, Enum):
    NONE = "none"
    MEAN = "mean"
    COUNT = "count"


@dataclass
class ChannelEncoding:
    channel: Channel
    column: str
    kind: ColumnKind
    aggregate: Aggregate = Aggregate.NONE
    binned: bool = False

    def __post_init__(self) -> None:
        if self.binned and self.kind != ColumnKind.QUANTITATIVE:
            raise ChartError("binned encodings require a quantitative column")
        if self.channel == Channel.COLOR and self.kind != ColumnKind.NOMINAL:
            raise ChartError("color channel carries nominal columns only")

    def to_json(self) -> dict:
        return {
            "channel": self.channel.value,
            "column": self.column,
            "kind": self.kind.value,
            "aggregate": self.aggregate.value,
            "binned": self.binned,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "ChannelEncoding":
        return cls(
            channel=Channel(payload["channel"]),
            column=payload["column"],
            kind=ColumnKind(payload["kind"]),
            aggregate=Aggregate(payload.get("aggregate", "none")),
            binned=bool(payload.get("binned", False)),
        )


@dataclass
class ChartSpec:
    mark: Mark
    encodings: list[ChannelEncoding]
    dataset_id: str
    row_filter: list[int] | None = None  # absolute row indices into the dataset
    show_axes: bool = True
    show_legend: bool = True
    color_scheme: list[RGB] = field(default_factory=list)
    scheme_kind: SchemeKind = SchemeKind.CATEGORICAL

    def encoding(self, channel: Channel) -> ChannelEncoding | None:
        for enc in self.encodings:
            if enc.channel == channel:
                return enc
        return None

    def columns(self) -> list[str]:
        seen: list[str] = []
        for enc in self.encodings:
            if enc.column not in seen:
                seen.append(enc.column)
        return seen

    def to_json(self) -> dict:
        return {
            "mark": self.mark.value,
            "encodings": [enc.to_json() for enc in self.encodings],
            "datasetId": self.dataset_id,
            "rowFilter": list(self.row_filter) if self.row_filter is not None else None,
            "showAxes": self.show_axes,
            "showLegend": self.show_legend,
            "colorScheme": [to_hex(c) for c in self.color_scheme],
            "schemeKind": self.scheme_kind.value,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "ChartSpec":
        row_filter = payload.get("rowFilter")
        return cls(
            mark=Mark(payload["mark"]),
            encodings=[ChannelEncoding.from_json(e) for e in payload["encodings"]],
            dataset_id=payload["datasetId"],
            row_filter=[int(i) for i in row_filter] if row_filter is not None else None,
            show_axes=bool(payload.get("showAxes", True)),
            show_legend=bool(payload.get("showLegend", True)),
            color_scheme=[parse_hex(c) for c in payload.get("colorScheme", [])],
            scheme_kind=SchemeKind(payload.get("schemeKind", "categorical")),
        )


@dataclass
class MarkGeometry:
    row_or_group: int | str
    shape: str
    x: float
    y: float
    size: float
    paint: str

    def to_json(self) -> dict:
        return {
            "rowIndexOrGroup": self.row_or_group,
            "shape": self.shape,
            "x": self.x,
            "y": self.y,
            "size": self.size,
            "paint": self.paint,
        }


@dataclass
class ChartImage:
    payload: str
    width: int
    height: int
    mark_geometry: list[MarkGeometry]

    def to_json(self) -> dict:
        return {
            "payload": self.payload,
            "width": self.width,
            "height": self.height,
            "markGeometry": [g.to_json() for g in self.mark_geometry],
        }


@dataclass
class AnimatedAsset:
    frames: list[str]
    frame_delay_ms: int = DEFAULT_FRAME_DELAY_MS
    frame_keys: list[str] | None = None
    source_kind: str = "chart"  # "chart" | "graphic"; sync needs to know
    restart: bool = False

    def __post_init__(self) -> None:
        if len(self.frames) < 2:
            raise ChartError("animated assets need at least 2 frames")
        if int(self.frame_delay_ms) <= 0:
            raise ChartError("frame delay must be positive")
        self.frame_delay_ms = int(self.frame_delay_ms)
        if self.frame_keys is not None and len(self.frame_keys) != len(self.frames):
            raise ChartError("frameKeys must match frame count")

    @property
    def loop(self) -> str:
        return "infinite"

    def to_json(self) -> dict:
        return {
            "frames": list(self.frames),
            "frameDelayMs": self.frame_delay_ms,
            "frameKeys": list(self.frame_keys) if self.frame_keys else None,
            "loop": self.loop,
            "sourceKind": self.source_kind,
            "restart": self.restart,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "AnimatedAsset":
        return cls(
            frames=list(payload["frames"]),
            frame_delay_ms=int(payload["frameDelayMs"]),
            frame_keys=list(payload["frameKeys"]) if payload.get("frameKeys") else None,
            source_kind=payload.get("sourceKind", "graphic"),
            restart=bool(payload.get("restart", False)),
        )


# --- enumeration --------------------------------------------------------------


def effective_kind(column: ColumnMeta) -> ColumnKind:
    """Time-named Quantitative columns count as Temporal for every rule."""
    if column.kind == ColumnKind.QUANTITATIVE and is_time_named(column.name):
        return ColumnKind.TEMPORAL
    return column.kind


def _cardinality(column: ColumnMeta) -> int:
    return len(column.unique_values)


def enumerate_charts(relevant: Sequence[str], meta: DatasetMeta) -> list[ChartSpec]:
    """Deterministic rule table over effective-kind signatures of the
    relevant columns: pairs, then legend triples, then single-column
    histograms. Duplicate mark+encoding sets are emitted once."""
    if not relevant:
        return []
    by_name = {c.name: c for c in meta.columns}
    columns = []
    for name in relevant:
        if name not in by_name:
            raise BindError(name, "not in dataset schema")
        columns.append(by_name[name])

    pair_specs: list[ChartSpec] = []
    for a, b in combinations(columns, 2):
        pair_specs.extend(_pair_charts(a, b, meta))

    legend_specs: list[ChartSpec] = []
    for base in pair_specs:
        if base.mark not in (Mark.POINT, Mark.LINE, Mark.BAR):
            continue  # arc and heatmap already spend the color channel
        for col in columns:
            if col.name in base.columns():
                continue
            if effective_kind(col) != ColumnKind.NOMINAL:
                continue
            if _cardinality(col) > LEGEND_MAX_CARDINALITY:
                continue
            legend_specs.append(_with_legend(base, col))

    single_specs: list[ChartSpec] = []
    for col in columns:
        if effective_kind(col) == ColumnKind.QUANTITATIVE:
            single_specs.append(_histogram(col, meta))

    out: list[ChartSpec] = []
    seen: set = set()
    for spec in pair_specs + legend_specs + single_specs:
        key = (
            spec.mark,
            frozenset(
                (e.channel, e.column, e.kind, e.aggregate, e.binned)
                for e in spec.encodings
            ),
        )
        if key not in seen:
            seen.add(key)
            out.append(spec)
    return out


def _pair_charts(a: ColumnMeta, b: ColumnMeta, meta: DatasetMeta) -> list[ChartSpec]:
    ka, kb = effective_kind(a), effective_kind(b)
    Q, N, T = ColumnKind.QUANTITATIVE, ColumnKind.NOMINAL, ColumnKind.TEMPORAL
    specs: list[ChartSpec] = []

    if (ka, kb) == (Q, Q):
        specs.append(_spec(Mark.POINT, [
            ChannelEncoding(Channel.X, a.name, Q),
            ChannelEncoding(Channel.Y, b.name, Q),
        ], meta))
        specs.append(_spec(Mark.RECT, [
            ChannelEncoding(Channel.X, a.name, Q, binned=True),
            ChannelEncoding(Channel.Y, b.name, Q, binned=True),
        ], meta, scheme=BLUES5, scheme_kind=SchemeKind.SEQUENTIAL))
    elif {ka, kb} == {T, Q}:
        time_col, value_col = (a, b) if ka == T else (b, a)
        specs.append(_spec(Mark.LINE, [
            ChannelEncoding(Channel.X, time_col.name, T),
            ChannelEncoding(Channel.Y, value_col.name, Q),
        ], meta))
    elif {ka, kb} == {N, Q}:
        cat, value = (a, b) if ka == N else (b, a)
        specs.append(_spec(Mark.BAR, [
            ChannelEncoding(Channel.X, cat.name, N),
            ChannelEncoding(Channel.Y, value.name, Q, aggregate=Aggregate.MEAN),
        ], meta))
        if _cardinality(cat) <= ARC_MAX_CARDINALITY:
            palette = CATEGORY10[: max(1, min(_cardinality(cat), len(CATEGORY10)))]
            specs.append(_spec(Mark.ARC, [
                ChannelEncoding(Channel.COLOR, cat.name, N),
                ChannelEncoding(Channel.Y, value.name, Q, aggregate=Aggregate.MEAN),
            ], meta, scheme=palette))
    elif (ka, kb) == (N, N):
        specs.append(_spec(Mark.RECT, [
            ChannelEncoding(Channel.X, a.name, N),
            ChannelEncoding(Channel.Y, b.name, N),
        ], meta, scheme=BLUES5, scheme_kind=SchemeKind.SEQUENTIAL))
    return specs


def _spec(
    mark: Mark,
    encodings: list[ChannelEncoding],
    meta: DatasetMeta,
    scheme: list[str] | None = None,
    scheme_kind: SchemeKind = SchemeKind.CATEGORICAL,
) -> ChartSpec:
    colors = [parse_hex(c) for c in (scheme or [CATEGORY10[0]])]
    return ChartSpec(
        mark=mark,
        encodings=encodings,
        dataset_id=meta.dataset_id,
        color_scheme=colors,
        scheme_kind=scheme_kind,
    )


def _with_legend(base: ChartSpec, col: ColumnMeta) -> ChartSpec:
    cardinality = max(1, min(_cardinality(col), len(CATEGORY10)))
    return ChartSpec(
        mark=base.mark,
        encodings=base.encodings
        + [ChannelEncoding(Channel.COLOR, col.name, ColumnKind.NOMINAL)],
        dataset_id=base.dataset_id,
        color_scheme=[parse_hex(c) for c in CATEGORY10[:cardinality]],
        scheme_kind=SchemeKind.CATEGORICAL,
    )


def _histogram(col: ColumnMeta, meta: DatasetMeta) -> ChartSpec:
    return _spec(Mark.HISTOGRAM_BAR, [
        ChannelEncoding(Channel.X, col.name, ColumnKind.QUANTITATIVE, binned=True),
        ChannelEncoding(Channel.Y, col.name, ColumnKind.QUANTITATIVE, aggregate=Aggregate.COUNT),
    ], meta)


# --- ranking --------------------------------------------------------------------


def describe_spec(spec: ChartSpec) -> str:
    x = spec.encoding(Channel.X)
    y = spec.encoding(Channel.Y)
    color = spec.encoding(Channel.COLOR)

    def term(enc: ChannelEncoding) -> str:
        name = enc.column
        if enc.binned:
            name = f"binned {name}"
        if enc.aggregate != Aggregate.NONE:
            name = f"{enc.aggregate.value}({name})"
        return name

    if spec.mark == Mark.HISTOGRAM_BAR:
        return f"histogram of {x.column}"
    if spec.mark == Mark.ARC:
        return f"arc of {term(y)} by {color.column}"
    base = f"{spec.mark.value} of {term(y)} vs {term(x)}"
    if color is not None:
        base += f" colored by {color.column}"
    return base


def rank_charts(
    specs: Sequence[ChartSpec],
    relevance_order: Sequence[str],
    request: AssetRequest | None = None,
) -> RecommendationBatch:
    """Order by distinct relevant columns used, then best relevance rank,
    then mark priority, then enumeration order; keep at most 20."""
    rank_of = {name: i for i, name in enumerate(relevance_order)}
    for spec in specs:
        for col in spec.columns():
            if col not in rank_of:
                raise ChartError(f"column {col!r} not in relevance order")

    def key(pair: tuple[int, ChartSpec]):
        idx, spec = pair
        used = spec.columns()
        return (
            -len(used),
            min(rank_of[c] for c in used),
            MARK_PRIORITY[spec.mark],
            idx,
        )

    ordered = [spec for _, spec in sorted(enumerate(specs), key=key)]
    request_id = request.id if request else "r0"
    chunk_id = request.chunk_id if request else "c0"
    items = [
        RecommendationItem(
            ref=f"{request_id}.{i}",
            kind=AssetKind.VISUALIZATION,
            score=float(len(spec.columns())),
            label=describe_spec(spec),
            data=spec.to_json(),
        )
        for i, spec in enumerate(ordered)
    ]
    return RecommendationBatch(request_id=request_id, source_chunk_id=chunk_id, items=items)


# --- scales ---------------------------------------------------------------------


def _pad_domain(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        return lo - 1.0, lo + 1.0
    pad = (hi - lo) * PAD_FRACTION
    return lo - pad, hi + pad


def _to_number(value: Cell) -> float:
    if isinstance(value, datetime):
        return (value - _EPOCH).total_seconds()
    return float(value)  # type: ignore[arg-type]


class _Scale:
    """Linear over numbers/epoch-seconds, or band over ordered categories."""

    def __init__(self, kind: str, domain, out_lo: float, out_hi: float):
        self.kind = kind  # "linear" | "band"
        self.domain = domain
        self.out_lo = out_lo
        self.out_hi = out_hi
        if kind == "band":
            self.index = {cat: i for i, cat in enumerate(domain)}

    def place(self, value) -> float | None:
        if value is None:
            return None
        if self.kind == "band":
            i = self.index.get(value)
            if i is None:
                return None
            return self.out_lo + (i + 0.5) * self.band_width()
        lo, hi = self.domain
        frac = (_to_number(value) - lo) / (hi - lo)
        return self.out_lo + frac * (self.out_hi - self.out_lo)

    def band_width(self) -> float:
        return (self.out_hi - self.out_lo) / max(len(self.domain), 1)


def _nice_ticks(lo: float, hi: float, max_ticks: int = MAX_TICKS) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(max_ticks - 1, 1)
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = next(c * magnitude for c in (1.0, 2.0, 5.0, 10.0) if raw <= c * magnitude + 1e-12)
    ticks = []
    t = math.ceil(lo / step) * step
    while t <= hi + step * 1e-9:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


def _tick_label(value: float, temporal: bool, span_seconds: float = 0.0) -> str:
    if temporal:
        dt = _EPOCH + timedelta(seconds=value)
        if span_seconds >= 2 * 86400:
            return dt.strftime("%Y-%m-%d")
        return dt.strftime("%m-%d %H:%M")
    return svg.fmt(value)


# --- rendering -------------------------------------------------------------------


def _bind(spec: ChartSpec, ds: Dataset) -> None:
    names = {c.name for c in ds.columns}
    for enc in spec.encodings:
        if enc.column not in names:
            raise BindError(enc.column, "not in dataset schema")
        col = ds.column(enc.column)
        if enc.kind not in (col.kind, effective_kind(col)):
            raise BindError(
                enc.column,
                f"kind mismatch: spec says {enc.kind.value}, data is {col.kind.value}",
            )


def _bin_label(lo: float, hi: float) -> str:
    return f"{svg.fmt(lo)}–{svg.fmt(hi)}"


class _Binner:
    def __init__(self, lo: float, hi: float, count: int):
        self.lo = lo
        self.hi = hi
        self.count = count if hi > lo else 1
        self.width = (hi - lo) / self.count if hi > lo else 1.0

    def index(self, value: float) -> int:
        if self.hi <= self.lo:
            return 0
        i = int((value - self.lo) / self.width)
        return min(max(i, 0), self.count - 1)

    def labels(self) -> list[str]:
        return [
            _bin_label(self.lo + i * self.width, self.lo + (i + 1) * self.width)
            for i in range(self.count)
        ]


def _category_values(cells: list[Cell]) -> list[str]:
    return sorted({str(c) for c in cells if c is not None})


def render_chart(spec: ChartSpec, ds: Dataset, domain_overrides: dict | None = None) -> ChartImage:
    _bind(spec, ds)
    return _Renderer(spec, ds, domain_overrides or {}).render()


class _Renderer:
    def __init__(self, spec: ChartSpec, ds: Dataset, overrides: dict):
        self.spec = spec
        self.ds = ds
        self.overrides = overrides
        if spec.row_filter is not None:
            self.rows = [i for i in spec.row_filter if 0 <= i < ds.row_count]
        else:
            self.rows = list(range(ds.row_count))
        self.geometry: list[MarkGeometry] = []
        self.has_legend = spec.encoding(Channel.COLOR) is not None and spec.show_legend
        right = MARGIN_RIGHT + (LEGEND_WIDTH if self.has_legend else 0)
        self.x0, self.x1 = MARGIN_LEFT, WIDTH - right
        self.y0, self.y1 = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
        self.binners: dict[str, _Binner] = {}

    # -- data access

    def cells(self, column: str) -> list[tuple[int, Cell]]:
        idx = self.ds.column_index(column)
        return [(r, self.ds.rows[r][idx]) for r in self.rows]

    def non_null(self, column: str) -> list[Cell]:
        return [v for _, v in self.cells(column) if v is not None]

    # -- scales

    def scale_for(self, enc: ChannelEncoding, out_lo: float, out_hi: float) -> _Scale:
        override = self.overrides.get(enc.channel.value)
        if enc.binned:
            return _Scale("band", tuple(self.binner(enc).labels()), out_lo, out_hi)
        if enc.kind == ColumnKind.NOMINAL:
            if override is not None and override[0] == "band":
                cats = list(override[1])
            else:
                cats = _category_values([v for _, v in self.cells(enc.column)])
            if len(cats) > AXIS_MAX_CARDINALITY:
                raise ChartError("cardinality too high")
            return _Scale("band", tuple(cats), out_lo, out_hi)
        if override is not None and override[0] == "linear":
            lo, hi = override[1], override[2]
        else:
            numbers = [_to_number(v) for v in self.channel_values(enc)]
            if not numbers:
                raise ChartError(f"no data for column {enc.column!r}")
            lo, hi = min(numbers), max(numbers)
            if self.zero_based(enc):
                lo, hi = min(lo, 0.0), max(hi, 0.0)
            lo, hi = _pad_domain(lo, hi)
        return _Scale("linear", (lo, hi), out_lo, out_hi)

    def zero_based(self, enc: ChannelEncoding) -> bool:
        return enc.aggregate in (Aggregate.MEAN, Aggregate.COUNT) and self.spec.mark in (
            Mark.BAR,
            Mark.HISTOGRAM_BAR,
        )

    def channel_values(self, enc: ChannelEncoding) -> list[Cell]:
        """Values that drive a linear scale's domain: raw cells, or the
        aggregated series for mean/count encodings."""
        if enc.aggregate == Aggregate.NONE:
            return self.non_null(enc.column)
        return list(self.aggregated_values(enc).values())

    def aggregated_values(self, enc: ChannelEncoding) -> dict:
        groups = self.group_rows()
        out = {}
        idx = self.ds.column_index(enc.column)
        for key, rows in groups.items():
            if enc.aggregate == Aggregate.COUNT:
                out[key] = float(len(rows))
            else:
                values = [
                    _to_number(self.ds.rows[r][idx])
                    for r in rows
                    if self.ds.rows[r][idx] is not None
                ]
                if values:
                    out[key] = sum(values) / len(values)
        return out

    def group_rows(self) -> dict:
        """Group rows by the categorical/binned key channels (x category or
        bin, plus the legend value when present); rows with null keys drop."""
        keys: list[ChannelEncoding] = []
        for channel in (Channel.X, Channel.COLOR):
            enc = self.spec.encoding(channel)
            if enc is not None and (enc.binned or enc.kind == ColumnKind.NOMINAL):
                keys.append(enc)
        groups: dict = {}
        for r in self.rows:
            label_parts = []
            ok = True
            for enc in keys:
                cell = self.ds.rows[r][self.ds.column_index(enc.column)]
                if cell is None:
                    ok = False
                    break
                if enc.binned:
                    binner = self.binner(enc)
                    label_parts.append(binner.labels()[binner.index(_to_number(cell))])
                else:
                    label_parts.append(str(cell))
            if ok:
                groups.setdefault(tuple(label_parts), []).append(r)
        return groups

    def binner(self, enc: ChannelEncoding) -> _Binner:
        if enc.column not in self.binners:
            override = self.overrides.get(enc.channel.value)
            if override is not None and override[0] == "bins":
                lo, hi = override[1], override[2]
            else:
                numbers = [_to_number(v) for v in self.non_null(enc.column)]
                if not numbers:
                    raise ChartError(f"no data for column {enc.column!r}")
                lo, hi = min(numbers), max(numbers)
            count = HIST_BINS if self.spec.mark == Mark.HISTOGRAM_BAR else HEAT_BINS
            self.binners[enc.column] = _Binner(lo, hi, count)
        return self.binners[enc.column]

    # -- paints

    def paint_for(self, category_index: int) -> str:
        scheme = self.spec.color_scheme or [parse_hex(CATEGORY10[0])]
        return to_hex(scheme[category_index % len(scheme)])

    def legend_categories(self) -> list[str]:
        enc = self.spec.encoding(Channel.COLOR)
        if enc is None:
            return []
        override = self.overrides.get("color")
        if override is not None and override[0] == "band":
            return list(override[1])
        return _category_values([v for _, v in self.cells(enc.column)])

    # -- top level

    def render(self) -> ChartImage:
        spec = self.spec
        marks = svg.El("g", class_="marks")
        if spec.mark == Mark.POINT:
            axes = self.render_point(marks)
        elif spec.mark == Mark.LINE:
            axes = self.render_line(marks)
        elif spec.mark == Mark.BAR:
            axes = self.render_bar(marks)
        elif spec.mark == Mark.HISTOGRAM_BAR:
            axes = self.render_histogram(marks)
        elif spec.mark == Mark.RECT:
            axes = self.render_heat(marks)
        elif spec.mark == Mark.ARC:
            axes = self.render_arc(marks)
        else:  # pragma: no cover
            raise ChartError(f"unsupported mark {spec.mark}")

        children = []
        if spec.show_axes and axes is not None:
            children.append(axes)
        children.append(marks)
        if self.has_legend:
            children.append(self.render_legend())
        doc = svg.document(WIDTH, HEIGHT, *children).to_text()
        return ChartImage(payload=doc, width=WIDTH, height=HEIGHT, mark_geometry=self.geometry)

    # -- axes and legend

    def axes_group(self, sx: _Scale, sy: _Scale, x_enc: ChannelEncoding, y_enc: ChannelEncoding) -> svg.El:
        g = svg.El("g", class_="axes")
        g.add(svg.El("line", x1=self.x0, y1=self.y1, x2=self.x1, y2=self.y1, stroke="#333333"))
        g.add(svg.El("line", x1=self.x0, y1=self.y0, x2=self.x0, y2=self.y1, stroke="#333333"))
        for tx, label in self.axis_ticks(sx, x_enc):
            g.add(svg.El("line", x1=tx, y1=self.y1, x2=tx, y2=self.y1 + 4, stroke="#333333"))
            g.add(svg.El(
                "text", label, x=tx, y=self.y1 + 15, font_size=10,
                font_family="sans-serif", text_anchor="middle", fill="#333333",
            ))
        for ty, label in self.axis_ticks(sy, y_enc):
            g.add(svg.El("line", x1=self.x0 - 4, y1=ty, x2=self.x0, y2=ty, stroke="#333333"))
            g.add(svg.El(
                "text", label, x=self.x0 - 6, y=ty + 3, font_size=10,
                font_family="sans-serif", text_anchor="end", fill="#333333",
            ))
        mid_x = (self.x0 + self.x1) / 2
        g.add(svg.El(
            "text", self.axis_title(x_enc), x=mid_x, y=HEIGHT - 6, font_size=11,
            font_family="sans-serif", text_anchor="middle", fill="#333333",
        ))
        mid_y = (self.y0 + self.y1) / 2
        g.add(svg.El(
            "text", self.axis_title(y_enc), x=12, y=mid_y, font_size=11,
            font_family="sans-serif", text_anchor="middle", fill="#333333",
            transform=f"rotate(-90 12 {svg.fmt(mid_y)})",
        ))
        return g

    def axis_title(self, enc: ChannelEncoding) -> str:
        name = enc.column
        if enc.binned:
            name = f"{name} (binned)"
        if enc.aggregate != Aggregate.NONE:
            name = f"{enc.aggregate.value}({name})"
        return name

    def axis_ticks(self, scale: _Scale, enc: ChannelEncoding) -> list[tuple[float, str]]:
        if scale.kind == "band":
            return [(scale.place(cat), str(cat)) for cat in scale.domain]
        lo, hi = scale.domain
        # Date-format only real datetime cells; a time-named numeric column
        # is Temporal for rule purposes but its values are plain numbers.
        temporal = (
            enc.aggregate == Aggregate.NONE
            and not enc.binned
            and self.ds.column(enc.column).kind == ColumnKind.TEMPORAL
        )
        return [
            (scale.place(t), _tick_label(t, temporal, hi - lo))
            for t in _nice_ticks(lo, hi)
        ]

    def render_legend(self) -> svg.El:
        enc = self.spec.encoding(Channel.COLOR)
        g = svg.El("g", class_="legend")
        lx = self.x1 + 16
        g.add(svg.El(
            "text", enc.column, x=lx, y=self.y0 + 10, font_size=11,
            font_family="sans-serif", font_weight="bold", fill="#333333",
        ))
        for i, cat in enumerate(self.legend_categories()):
            ty = self.y0 + 24 + i * 16
            g.add(svg.El(
                "rect", x=lx, y=ty - 9, width=10, height=10,
                fill=self.paint_for(i), class_="legend-swatch",
            ))
            g.add(svg.El(
                "text", str(cat), x=lx + 14, y=ty, font_size=10,
                font_family="sans-serif", fill="#333333",
            ))
        return g

    # -- marks

    def render_point(self, marks: svg.El) -> svg.El:
        spec = self.spec
        x_enc, y_enc = spec.encoding(Channel.X), spec.encoding(Channel.Y)
        color_enc = spec.encoding(Channel.COLOR)
        sx = self.scale_for(x_enc, self.x0, self.x1)
        sy = self.scale_for(y_enc, self.y1, self.y0)
        cat_index = {c: i for i, c in enumerate(self.legend_categories())}
        xi = self.ds.column_index(x_enc.column)
        yi = self.ds.column_index(y_enc.column)
        ci = self.ds.column_index(color_enc.column) if color_enc else None
        for r in self.rows:
            row = self.ds.rows[r]
            px, py = sx.place(row[xi]), sy.place(row[yi])
            if px is None or py is None:
                continue
            if ci is not None:
                if row[ci] is None:
                    continue
                paint = self.paint_for(cat_index[str(row[ci])])
            else:
                paint = self.paint_for(0)
            marks.add(svg.El("circle", cx=px, cy=py, r=POINT_RADIUS, fill=paint))
            self.geometry.append(MarkGeometry(r, "circle", px, py, POINT_RADIUS, paint))
        return self.axes_group(sx, sy, x_enc, y_enc)

    def render_line(self, marks: svg.El) -> svg.El:
        spec = self.spec
        x_enc, y_enc = spec.encoding(Channel.X), spec.encoding(Channel.Y)
        color_enc = spec.encoding(Channel.COLOR)
        sx = self.scale_for(x_enc, self.x0, self.x1)
        sy = self.scale_for(y_enc, self.y1, self.y0)
        cats = self.legend_categories()
        cat_index = {c: i for i, c in enumerate(cats)}
        xi = self.ds.column_index(x_enc.column)
        yi = self.ds.column_index(y_enc.column)
        ci = self.ds.column_index(color_enc.column) if color_enc else None

        series: dict[str | None, list[tuple[float, float, int]]] = {}
        for r in self.rows:
            row = self.ds.rows[r]
            px, py = sx.place(row[xi]), sy.place(row[yi])
            if px is None or py is None:
                continue
            group = None
            if ci is not None:
                if row[ci] is None:
                    continue
                group = str(row[ci])
            series.setdefault(group, []).append((px, py, r))

        for group in (cats if ci is not None else [None]):
            points = sorted(series.get(group, []), key=lambda p: p[0])
            if not points:
                continue
            paint = self.paint_for(cat_index[group]) if group is not None else self.paint_for(0)
            marks.add(svg.El(
                "polyline",
                points=" ".join(f"{svg.fmt(px)},{svg.fmt(py)}" for px, py, _ in points),
                fill="none", stroke=paint, stroke_width=2,
            ))
            for px, py, r in points:
                self.geometry.append(MarkGeometry(r, "vertex", px, py, 2, paint))
        return self.axes_group(sx, sy, x_enc, y_enc)

    def render_bar(self, marks: svg.El) -> svg.El:
        spec = self.spec
        x_enc, y_enc = spec.encoding(Channel.X), spec.encoding(Channel.Y)
        color_enc = spec.encoding(Channel.COLOR)
        sx = self.scale_for(x_enc, self.x0, self.x1)
        sy = self.scale_for(y_enc, self.y1, self.y0)
        aggregated = self.aggregated_values(y_enc)
        baseline = sy.place(0.0)
        bw = sx.band_width()
        cats = self.legend_categories()
        sub = max(len(cats), 1) if color_enc else 1
        bar_w = bw * 0.8 / sub

        for category in sx.domain:
            center = sx.place(category)
            for si in range(sub):
                if color_enc:
                    key = (str(category), cats[si])
                    group_label = f"{category}|{cats[si]}"
                    paint = self.paint_for(si)
                else:
                    key = (str(category),)
                    group_label = str(category)
                    paint = self.paint_for(0)
                value = aggregated.get(key)
                if value is None:
                    continue
                top = sy.place(value)
                x_left = center - bw * 0.4 + si * bar_w
                y_top, y_bottom = min(top, baseline), max(top, baseline)
                marks.add(svg.El(
                    "rect", x=x_left, y=y_top, width=bar_w,
                    height=y_bottom - y_top, fill=paint,
                ))
                self.geometry.append(MarkGeometry(
                    group_label, "bar",
                    x_left + bar_w / 2, (y_top + y_bottom) / 2,
                    y_bottom - y_top, paint,
                ))
        return self.axes_group(sx, sy, x_enc, y_enc)

    def render_histogram(self, marks: svg.El) -> svg.El:
        spec = self.spec
        x_enc, y_enc = spec.encoding(Channel.X), spec.encoding(Channel.Y)
        sx = self.scale_for(x_enc, self.x0, self.x1)
        sy = self.scale_for(y_enc, self.y1, self.y0)
        counts = self.aggregated_values(y_enc)
        baseline = sy.place(0.0)
        bw = sx.band_width()
        for label in sx.domain:
            value = counts.get((label,))
            if value is None:
                continue
            center = sx.place(label)
            top = sy.place(value)
            marks.add(svg.El(
                "rect", x=center - bw * 0.45, y=top,
                width=bw * 0.9, height=baseline - top, fill=self.paint_for(0),
            ))
            self.geometry.append(MarkGeometry(
                label, "bar", center, (top + baseline) / 2, baseline - top, self.paint_for(0)
            ))
        return self.axes_group(sx, sy, x_enc, y_enc)

    def render_heat(self, marks: svg.El) -> svg.El:
        spec = self.spec
        x_enc, y_enc = spec.encoding(Channel.X), spec.encoding(Channel.Y)
        sx = self.scale_for(x_enc, self.x0, self.x1)
        sy = self.scale_for(y_enc, self.y1, self.y0)
        xi = self.ds.column_index(x_enc.column)
        yi = self.ds.column_index(y_enc.column)
        counts: dict[tuple[str, str], int] = {}
        for r in self.rows:
            row = self.ds.rows[r]
            if row[xi] is None or row[yi] is None:
                continue
            if x_enc.binned:
                bx = self.binner(x_enc)
                xl = bx.labels()[bx.index(_to_number(row[xi]))]
            else:
                xl = str(row[xi])
            if y_enc.binned:
                by = self.binner(y_enc)
                yl = by.labels()[by.index(_to_number(row[yi]))]
            else:
                yl = str(row[yi])
            counts[(xl, yl)] = counts.get((xl, yl), 0) + 1
        if not counts:
            raise ChartError("no data to render")
        max_count = max(counts.values())
        bw, bh = sx.band_width(), sy.band_width()
        ramp = self.spec.color_scheme or [parse_hex(c) for c in BLUES5]
        for xl in sx.domain:
            for yl in sy.domain:
                count = counts.get((xl, yl), 0)
                if count == 0:
                    continue
                level = min(len(ramp) - 1, int(count / max_count * len(ramp)))
                paint = to_hex(ramp[level])
                cx, cy = sx.place(xl), sy.place(yl)
                marks.add(svg.El(
                    "rect", x=cx - bw / 2, y=cy - bh / 2,
                    width=bw, height=bh, fill=paint,
                ))
                self.geometry.append(MarkGeometry(
                    f"{xl}|{yl}", "rect", cx, cy, float(count), paint
                ))
        return self.axes_group(sx, sy, x_enc, y_enc)

    def render_arc(self, marks: svg.El) -> None:
        y_enc = self.spec.encoding(Channel.Y)
        values = self.aggregated_values(y_enc)
        cats = self.legend_categories()
        cat_index = {c: i for i, c in enumerate(cats)}
        slices = [(cat, values.get((cat,), 0.0)) for cat in cats]
        slices = [(cat, v) for cat, v in slices if v > 0]
        if not slices:
            raise ChartError("nothing to draw: no positive values")
        total = sum(v for _, v in slices)
        cx = (self.x0 + self.x1) / 2
        cy = (self.y0 + self.y1) / 2
        radius = min(self.x1 - self.x0, self.y1 - self.y0) / 2 - 4

        angle = -math.pi / 2
        for cat, value in slices:
            fraction = value / total
            paint = self.paint_for(cat_index[cat])
            sweep = fraction * 2 * math.pi
            mid = angle + sweep / 2
            gx = cx + math.cos(mid) * radius / 2
            gy = cy + math.sin(mid) * radius / 2
            if len(slices) == 1:
                marks.add(svg.El("circle", cx=cx, cy=cy, r=radius, fill=paint))
            else:
                x1 = cx + math.cos(angle) * radius
                y1 = cy + math.sin(angle) * radius
                x2 = cx + math.cos(angle + sweep) * radius
                y2 = cy + math.sin(angle + sweep) * radius
                large = 1 if sweep > math.pi else 0
                path = (
                    f"M {svg.fmt(cx)} {svg.fmt(cy)} "
                    f"L {svg.fmt(x1)} {svg.fmt(y1)} "
                    f"A {svg.fmt(radius)} {svg.fmt(radius)} 0 {large} 1 "
                    f"{svg.fmt(x2)} {svg.fmt(y2)} Z"
                )
                marks.add(svg.El("path", d=path, fill=paint))
            self.geometry.append(MarkGeometry(cat, "arc", gx, gy, fraction, paint))
            angle += sweep
        return None  # no positional axes for arcs


# --- animation --------------------------------------------------------------------


def _key_label(value: Cell) -> str:
    if isinstance(value, datetime):
        return value.isoformat(sep=" ")
    if isinstance(value, float):
        return svg.fmt(value)
    return str(value)


def _frame_dataset(ds: Dataset, rows: list[int]) -> Dataset:
    return Dataset(id=ds.id, columns=ds.columns, rows=[ds.rows[r] for r in rows])


def shared_domains(spec: ChartSpec, ds: Dataset, frame_rows: list[list[int]]) -> dict:
    """Scale-domain overrides spanning the full dataset and every frame, so
    animated axes never jitter."""
    overrides: dict = {}
    # Band and bin domains derive from the full dataset (supersets of every
    # frame); they must be fixed before linear domains are estimated, since
    # per-frame counts depend on the shared binning.
    for channel in (Channel.X, Channel.Y, Channel.COLOR):
        enc = spec.encoding(channel)
        if enc is None:
            continue
        if enc.binned:
            numbers = [_to_number(v) for v in ds.column_cells(enc.column) if v is not None]
            if numbers:
                overrides[channel.value] = ("bins", min(numbers), max(numbers))
        elif enc.kind == ColumnKind.NOMINAL:
            cats = _category_values(ds.column_cells(enc.column))
            overrides[channel.value] = ("band", tuple(cats))

    datasets = [ds] + [_frame_dataset(ds, rows) for rows in frame_rows]
    for channel in (Channel.X, Channel.Y):
        enc = spec.encoding(channel)
        if enc is None or enc.binned or enc.kind == ColumnKind.NOMINAL:
            continue
        lo, hi = math.inf, -math.inf
        zero_based = False
        for sub in datasets:
            renderer = _Renderer(spec, sub, overrides)
            zero_based = renderer.zero_based(enc)
            values = [_to_number(v) for v in renderer.channel_values(enc)]
            if values:
                lo, hi = min(lo, min(values)), max(hi, max(values))
        if lo > hi:
            raise ChartError(f"no data for column {enc.column!r}")
        if zero_based:
            lo, hi = min(lo, 0.0), max(hi, 0.0)
        lo, hi = _pad_domain(lo, hi)
        overrides[channel.value] = ("linear", lo, hi)
    return overrides


def animate_chart(
    spec: ChartSpec,
    ds: Dataset,
    time_column: str,
    frame_delay_ms: int = DEFAULT_FRAME_DELAY_MS,
) -> AnimatedAsset:
    """One frame per unique time key, rendered over that key's rows with
    scale domains shared across the whole dataset."""
    if int(frame_delay_ms) <= 0:
        raise ChartError("frame delay must be positive")
    try:
        idx = ds.column_index(time_column)
    except KeyError:
        raise BindError(time_column, "not in dataset schema") from None

    if spec.row_filter is not None:
        base = _frame_dataset(ds, [i for i in spec.row_filter if 0 <= i < ds.row_count])
    else:
        base = ds
    keys = sorted({row[idx] for row in base.rows if row[idx] is not None})
    if len(keys) < 2:
        raise ChartError("nothing to animate")

    frame_rows = [
        [r for r in range(base.row_count) if base.rows[r][idx] == key] for key in keys
    ]
    frame_spec = replace(spec, row_filter=None)
    overrides = shared_domains(frame_spec, base, frame_rows)
    frames = [
        render_chart(frame_spec, _frame_dataset(base, rows), domain_overrides=overrides).payload
        for rows in frame_rows
    ]
    return AnimatedAsset(
        frames=frames,
        frame_delay_ms=int(frame_delay_ms),
        frame_keys=[_key_label(k) for k in keys],
        source_kind="chart",
    )
