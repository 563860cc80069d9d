"""Tiny deterministic SVG writer plus the paint-attribute helpers the
recolor/glyph paths need.

The serializer formats every number to at most two decimals and keeps
attribute order as inserted, so identical inputs always produce identical
bytes (export determinism depends on this).
"""

from __future__ import annotations

import re
from xml.sax.saxutils import escape, quoteattr


def fmt(value: float | int | str) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    text = f"{value:.2f}".rstrip("0").rstrip(".")
    return text if text not in ("-0", "") else "0"


class El:
    """One SVG element; children render in insertion order."""

    __slots__ = ("tag", "attrs", "children", "text")

    def __init__(self, tag: str, text: str | None = None, **attrs):
        self.tag = tag
        self.attrs: dict[str, str] = {}
        self.children: list["El"] = []
        self.text = text
        for key, value in attrs.items():
            self.set(key, value)

    def set(self, key: str, value) -> "El":
        if value is None:
            return self
        key = key.rstrip("_")  # class_= etc. for reserved words
        self.attrs[key.replace("_", "-")] = fmt(value)
        return self

    def add(self, *children: "El") -> "El":
        self.children.extend(children)
        return self

    def render(self, out: list[str]) -> None:
        if self.tag == "__raw__":  # pre-serialized markup, no escaping
            out.append(self.text or "")
            return
        out.append(f"<{self.tag}")
        for key, value in self.attrs.items():
            out.append(f" {key}={quoteattr(value)}")
        if not self.children and self.text is None:
            out.append("/>")
            return
        out.append(">")
        if self.text is not None:
            out.append(escape(self.text))
        for child in self.children:
            child.render(out)
        out.append(f"</{self.tag}>")

    def to_text(self) -> str:
        parts: list[str] = []
        self.render(parts)
        return "".join(parts)


def raw(markup: str) -> El:
    """Wrap pre-serialized markup so it can be nested in a tree."""
    el = El("__raw__")
    el.text = markup
    return el


def document(width: int, height: int, *children: El) -> El:
    doc = El(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=width,
        height=height,
        viewBox=f"0 0 {width} {height}",
    )
    doc.add(*children)
    return doc


_PAINT_ATTR_RE = re.compile(r'\b(fill|stroke)="([^"]+)"')
_PAINT_STYLE_RE = re.compile(r"(fill|stroke)\s*:\s*([^;\"']+)")
_VIEWBOX_RE = re.compile(r'viewBox="([\d.\s+-]+)"')
_SVG_OPEN_RE = re.compile(r"<svg\b[^>]*>", re.DOTALL)
_HEX_RE = re.compile(r"^#[0-9a-fA-F]{3}(?:[0-9a-fA-F]{3})?$")

_NON_PAINTS = {"none", "transparent", "currentcolor", "inherit"}


def iter_paints(markup: str) -> list[str]:
    """Distinct hex paint values from fill/stroke attributes and inline
    styles, in first-appearance order, normalized to lowercase #rrggbb."""
    seen: list[str] = []
    for match in list(_PAINT_ATTR_RE.finditer(markup)) + list(_PAINT_STYLE_RE.finditer(markup)):
        value = match.group(2).strip()
        norm = normalize_paint(value)
        if norm and norm not in seen:
            seen.append(norm)
    return seen


def normalize_paint(value: str) -> str | None:
    value = value.strip()
    if value.lower() in _NON_PAINTS or value.lower().startswith("url("):
        return None
    if _HEX_RE.match(value):
        if len(value) == 4:
            value = "#" + "".join(ch * 2 for ch in value[1:])
        return value.lower()
    return None


def rewrite_paints(markup: str, mapping: dict[str, str]) -> str:
    """Replace every fill/stroke paint per ``mapping`` (keys/values #rrggbb)."""

    def sub_attr(match: re.Match) -> str:
        norm = normalize_paint(match.group(2))
        if norm and norm in mapping:
            return f'{match.group(1)}="{mapping[norm]}"'
        return match.group(0)

    def sub_style(match: re.Match) -> str:
        norm = normalize_paint(match.group(2))
        if norm and norm in mapping:
            return f"{match.group(1)}:{mapping[norm]}"
        return match.group(0)

    markup = _PAINT_ATTR_RE.sub(sub_attr, markup)
    return _PAINT_STYLE_RE.sub(sub_style, markup)


def view_box(markup: str) -> tuple[float, float, float, float]:
    """The document's viewBox, falling back to 0 0 100 100."""
    match = _VIEWBOX_RE.search(markup)
    if not match:
        return (0.0, 0.0, 100.0, 100.0)
    parts = [float(p) for p in match.group(1).split()]
    if len(parts) != 4:
        return (0.0, 0.0, 100.0, 100.0)
    return (parts[0], parts[1], parts[2], parts[3])


def inner_markup(markup: str) -> str:
    """Contents of the root <svg> element (everything between its tags)."""
    open_match = _SVG_OPEN_RE.search(markup)
    if not open_match:
        return markup
    close = markup.rfind("</svg>")
    if close < 0:
        return markup[open_match.end():]
    return markup[open_match.end():close]


def nested(markup: str, x: float, y: float, width: float, height: float) -> El:
    """Embed a standalone SVG document as a sized nested <svg> element."""
    vx, vy, vw, vh = view_box(markup)
    el = El(
        "svg",
        x=x,
        y=y,
        width=width,
        height=height,
        viewBox=f"{fmt(vx)} {fmt(vy)} {fmt(vw)} {fmt(vh)}",
        preserveAspectRatio="xMidYMid meet",
    )
    el.add(raw(inner_markup(markup)))
    return el
