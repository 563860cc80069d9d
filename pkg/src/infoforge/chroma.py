"""Five-bin color palettes: extraction from raster images by median cut,
synthesis from text keywords, optimal transport between palettes, and the
scheme-preserving recolor mappings used when a palette is applied to an
asset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .color import RGB, hsl_to_rgb, hue_span, lab_distance, luma, parse_hex, rgb_to_hsl, to_hex
from .errors import PaletteError
from .textutil import fnv1a_64, keywords
from .transport import solve_transport

if TYPE_CHECKING:  # pragma: no cover
    from .intent import ProviderSuite

PALETTE_BINS = 5
ALPHA_FLOOR = 16


class SchemeKind(str, Enum):
    CATEGORICAL = "categorical"
    SEQUENTIAL = "sequential"
    DIVERGING = "diverging"


@dataclass
class ColorBin:
    color: RGB
    weight: float


@dataclass
class Palette:
    bins: list[ColorBin]
    sorted_by_luminosity: bool = True

    def __post_init__(self) -> None:
        if len(self.bins) != PALETTE_BINS:
            raise PaletteError(f"palette needs exactly {PALETTE_BINS} bins, got {len(self.bins)}")
        total = sum(b.weight for b in self.bins)
        if abs(total - 1.0) > 1e-6:
            raise PaletteError(f"palette weights sum to {total}, expected 1")

    def colors(self) -> list[RGB]:
        return [b.color for b in self.bins]

    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.bins], dtype=float)

    def to_json(self) -> dict:
        return {
            "colors": [to_hex(b.color) for b in self.bins],
            "weights": [b.weight for b in self.bins],
            "sortedByLuminosity": self.sorted_by_luminosity,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "Palette":
        bins = [
            ColorBin(parse_hex(c), float(w))
            for c, w in zip(payload["colors"], payload["weights"])
        ]
        return cls(bins=bins, sorted_by_luminosity=payload.get("sortedByLuminosity", True))


@dataclass
class KeywordPalette:
    keyword: str
    palette: Palette


@dataclass
class TransportPlan:
    flow: np.ndarray  # 5x5, nonnegative
    total_cost: float
    cost: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]


# --- palette extraction (median cut) -----------------------------------------


class _Box:
    __slots__ = ("pixels", "order")

    def __init__(self, pixels: np.ndarray, order: int):
        self.pixels = pixels  # (n, 3) uint8-ish ints
        self.order = order  # creation index, breaks size ties


def _split_box(box: _Box, order: int) -> tuple[_Box, _Box] | None:
    pixels = box.pixels
    if len(pixels) < 2:
        return None
    ranges = pixels.max(axis=0) - pixels.min(axis=0)
    channel = int(np.argmax(ranges))  # argmax takes the first max: R before G before B
    values = pixels[:, channel]
    ordering = np.argsort(values, kind="stable")
    sorted_pixels = pixels[ordering]
    median_value = sorted_pixels[len(pixels) // 2, channel]
    left_mask = sorted_pixels[:, channel] < median_value
    left_count = int(left_mask.sum())
    if left_count == 0 or left_count == len(pixels):
        left_count = len(pixels) // 2  # constant channel: fall back to an index split
    return (
        _Box(sorted_pixels[:left_count], order),
        _Box(sorted_pixels[left_count:], order + 1),
    )


def extract_palette(image) -> Palette:
    """Median-cut quantization of the opaque pixels into 5 luminosity-sorted
    bins. ``image`` is an RGBA array (H, W, 4) or a PIL image."""
    rgba = _as_rgba(image)
    opaque = rgba[rgba[:, 3] >= ALPHA_FLOOR][:, :3].astype(np.int64)
    if len(opaque) == 0:
        raise PaletteError("no opaque pixels")

    boxes = [_Box(opaque, 0)]
    next_order = 1
    while len(boxes) < PALETTE_BINS:
        candidates = sorted(
            (b for b in boxes if len(b.pixels) >= 2),
            key=lambda b: (-len(b.pixels), b.order),
        )
        if not candidates:
            break
        target = candidates[0]
        split = _split_box(target, next_order)
        if split is None:  # pragma: no cover - len>=2 guarantees a split
            break
        next_order += 2
        boxes.remove(target)
        boxes.extend(split)

    total = sum(len(b.pixels) for b in boxes)
    bins = [
        ColorBin(
            color=tuple(int(round(v)) for v in b.pixels.mean(axis=0)),  # type: ignore[arg-type]
            weight=len(b.pixels) / total,
        )
        for b in boxes
    ]
    while len(bins) < PALETTE_BINS:  # degenerate tiny images: pad zero-weight bins
        bins.append(ColorBin(color=bins[0].color, weight=0.0))
    bins.sort(key=lambda b: luma(b.color))
    return Palette(bins=bins, sorted_by_luminosity=True)


def _as_rgba(image) -> np.ndarray:
    if hasattr(image, "convert"):  # PIL image
        image = np.asarray(image.convert("RGBA"))
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 4:
        raise PaletteError("expected an RGBA image")
    return arr.reshape(-1, 4)


# --- text -> palettes ---------------------------------------------------------

FALLBACK_HUE_SATURATION = 0.65
FALLBACK_HUE_LIGHTNESS = 0.5
BAND_LIGHTNESS_OFFSETS = (-20, -10, 0, 10, 20)  # percentage points in HSL
BAND_IMAGE_SIZE = 50


def _load_lexicon() -> dict[str, RGB]:
    text = resources.files("infoforge.data").joinpath("color_lexicon.json").read_text("utf-8")
    return {word: parse_hex(value) for word, value in json.loads(text).items()}


_LEXICON: dict[str, RGB] | None = None


def keyword_base_color(keyword: str) -> RGB:
    """Lexicon lookup; unknown words hash to a hue."""
    global _LEXICON
    if _LEXICON is None:
        _LEXICON = _load_lexicon()
    known = _LEXICON.get(keyword.lower())
    if known is not None:
        return known
    hue = fnv1a_64(keyword.lower().encode("utf-8")) % 360
    return hsl_to_rgb(float(hue), FALLBACK_HUE_SATURATION, FALLBACK_HUE_LIGHTNESS)


def fallback_images_from_text(keyword: str) -> list[np.ndarray]:
    """One synthetic image per keyword: five flat horizontal bands at fixed
    lightness offsets around the keyword's base color."""
    base = keyword_base_color(keyword)
    hue, saturation, lightness = rgb_to_hsl(base)
    size = BAND_IMAGE_SIZE
    image = np.zeros((size, size, 4), dtype=np.uint8)
    band_height = size // len(BAND_LIGHTNESS_OFFSETS)
    for i, offset in enumerate(BAND_LIGHTNESS_OFFSETS):
        level = min(1.0, max(0.0, lightness + offset / 100.0))
        r, g, b = hsl_to_rgb(hue, saturation, level)
        image[i * band_height : (i + 1) * band_height] = (r, g, b, 255)
    image[len(BAND_LIGHTNESS_OFFSETS) * band_height :] = image[len(BAND_LIGHTNESS_OFFSETS) * band_height - 1]
    return [image]


def palette_from_text(chunk: str, suite: "ProviderSuite") -> list[KeywordPalette]:
    """Split the chunk into keywords, image each keyword through the
    provider, and extract one palette per image."""
    words = keywords(chunk)
    if not words:
        raise PaletteError("no keywords after stopword removal")
    results: list[KeywordPalette] = []
    for word in words:
        for image in suite.images_from_text(word):
            results.append(KeywordPalette(keyword=word, palette=extract_palette(image)))
    return results


# --- optimal transport between palettes ---------------------------------------


def palette_cost_matrix(source: Palette, target: Palette) -> np.ndarray:
    return np.array(
        [[lab_distance(s, t) for t in target.colors()] for s in source.colors()],
        dtype=float,
    )


def emd(source: Palette, target: Palette) -> TransportPlan:
    """Exact optimal transport between the two weight distributions under
    CIELAB Euclidean ground cost."""
    cost = palette_cost_matrix(source, target)
    flow, total = solve_transport(source.weights(), target.weights(), cost)
    return TransportPlan(flow=flow, total_cost=total, cost=cost)


# --- scheme detection and recolor mappings -------------------------------------

SEQUENTIAL_HUE_SPAN_MAX = 90.0


def detect_scheme(colors: Sequence[RGB]) -> SchemeKind:
    """Sequential when luma is monotone within a narrow hue range; diverging
    when luma turns exactly once at an interior extremum; else categorical."""
    if not colors:
        raise PaletteError("no colors")
    lumas = [luma(c) for c in colors]
    if len(colors) == 1:
        return SchemeKind.SEQUENTIAL
    diffs = [lumas[i + 1] - lumas[i] for i in range(len(lumas) - 1)]
    non_decreasing = all(d >= 0 for d in diffs)
    non_increasing = all(d <= 0 for d in diffs)
    if non_decreasing or non_increasing:
        if hue_span(list(colors)) < SEQUENTIAL_HUE_SPAN_MAX:
            return SchemeKind.SEQUENTIAL
        return SchemeKind.CATEGORICAL
    signs = [d for d in diffs if d != 0]
    flips = sum(
        1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0)
    )
    if flips == 1:
        return SchemeKind.DIVERGING
    return SchemeKind.CATEGORICAL


def recolor_mapping(
    source_colors: Sequence[tuple[RGB, float]],
    target: Palette,
    scheme: SchemeKind,
) -> dict[RGB, RGB]:
    """Map each distinct source color to a target bin color while preserving
    the scheme's structure (injective for small categorical sets, luma rank
    for sequential/diverging ramps)."""
    if not source_colors:
        raise PaletteError("no source colors")
    if len(source_colors) > 64:
        raise PaletteError("too many distinct source colors (max 64)")
    sources = [c for c, _w in source_colors]
    targets = target.colors()

    if len(sources) == 1:
        nearest = min(targets, key=lambda t: lab_distance(sources[0], t))
        return {sources[0]: nearest}

    if scheme == SchemeKind.CATEGORICAL:
        if len(sources) <= PALETTE_BINS:
            cost = np.array(
                [[lab_distance(s, t) for t in targets] for s in sources], dtype=float
            )
            rows, cols = linear_sum_assignment(cost)
            return {sources[r]: targets[c] for r, c in zip(rows, cols)}
        return {
            s: min(targets, key=lambda t: lab_distance(s, t))
            for s in sources
        }

    luma_sorted_targets = sorted(targets, key=luma)

    if scheme == SchemeKind.SEQUENTIAL:
        order = sorted(range(len(sources)), key=lambda i: luma(sources[i]))
        mapping: dict[RGB, RGB] = {}
        n = len(sources)
        for rank, idx in enumerate(order):
            t = int(round(rank * (PALETTE_BINS - 1) / (n - 1)))
            mapping[sources[idx]] = luma_sorted_targets[t]
        return mapping

    # Diverging: the positional halves around the middle color go to the
    # outer target bins (darker half onto the darker pair), middle -> middle.
    n = len(sources)
    mid = n // 2
    mapping = {sources[mid]: luma_sorted_targets[2]}
    lower, upper = sources[:mid], sources[mid + 1 :]
    halves = [lower, upper]
    halves.sort(key=lambda h: sum(luma(c) for c in h) / len(h) if h else 0.0)
    pairs = [luma_sorted_targets[0:2], luma_sorted_targets[3:5]]
    for half, pair in zip(halves, pairs):
        ramp = sorted(half, key=luma)
        for rank, color in enumerate(ramp):
            t = int(round(rank / max(len(ramp) - 1, 1)))
            mapping[color] = pair[t]
    return mapping
