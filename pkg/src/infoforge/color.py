"""Color math: sRGB/hex handling, luma, CIELAB conversion, HSL synthesis.

Lab goes through linear sRGB -> XYZ (D65) -> Lab with the standard CIE
constants; distances between palette bins are plain Euclidean in Lab.
"""

from __future__ import annotations

import colorsys
import math

RGB = tuple[int, int, int]

_D65 = (0.95047, 1.0, 1.08883)
_EPS = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


def clamp8(v: float) -> int:
    return max(0, min(255, int(round(v))))


def parse_hex(text: str) -> RGB:
    text = text.strip().lstrip("#")
    if len(text) == 3:
        text = "".join(ch * 2 for ch in text)
    if len(text) != 6:
        raise ValueError(f"not a hex color: {text!r}")
    return (int(text[0:2], 16), int(text[2:4], 16), int(text[4:6], 16))


def to_hex(rgb: RGB) -> str:
    r, g, b = (clamp8(v) for v in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"


def luma(rgb: RGB) -> float:
    """Rec. 709 luma on 0..255 components."""
    r, g, b = rgb
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


def _linearize(c: float) -> float:
    c = c / 255.0
    if c <= 0.04045:
        return c / 12.92
    return ((c + 0.055) / 1.055) ** 2.4


def rgb_to_xyz(rgb: RGB) -> tuple[float, float, float]:
    r, g, b = (_linearize(v) for v in rgb)
    x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b
    y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b
    z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b
    return (x, y, z)


def _lab_f(t: float) -> float:
    if t > _EPS:
        return t ** (1.0 / 3.0)
    return (_KAPPA * t + 16.0) / 116.0


def rgb_to_lab(rgb: RGB) -> tuple[float, float, float]:
    x, y, z = rgb_to_xyz(rgb)
    fx = _lab_f(x / _D65[0])
    fy = _lab_f(y / _D65[1])
    fz = _lab_f(z / _D65[2])
    return (116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))


def lab_distance(a: RGB, b: RGB) -> float:
    la, aa, ba = rgb_to_lab(a)
    lb, ab, bb = rgb_to_lab(b)
    return math.sqrt((la - lb) ** 2 + (aa - ab) ** 2 + (ba - bb) ** 2)


def hsl_to_rgb(hue_deg: float, saturation: float, lightness: float) -> RGB:
    """HSL with hue in degrees, saturation/lightness in [0, 1]."""
    r, g, b = colorsys.hls_to_rgb((hue_deg % 360.0) / 360.0, lightness, saturation)
    return (clamp8(r * 255.0), clamp8(g * 255.0), clamp8(b * 255.0))


def rgb_to_hsl(rgb: RGB) -> tuple[float, float, float]:
    r, g, b = (v / 255.0 for v in rgb)
    h, l, s = colorsys.rgb_to_hls(r, g, b)
    return (h * 360.0, s, l)


def hue_span(colors: list[RGB], min_saturation: float = 0.05) -> float:
    """Circular span in degrees of the hues present; grays are ignored."""
    hues = sorted(h for h, s, _l in (rgb_to_hsl(c) for c in colors) if s >= min_saturation)
    if len(hues) < 2:
        return 0.0
    gaps = [hues[i + 1] - hues[i] for i in range(len(hues) - 1)]
    gaps.append(360.0 - hues[-1] + hues[0])
    return 360.0 - max(gaps)
