"""infoforge: message-driven infographic authoring.

Brushed spans of a key message become ranked asset recommendations
(charts, data filters, graphics, color palettes) over an imported
dataset; assets merge (recolor, glyph substitution, highlights,
animation sync) and stack into a layered, exportable document.
"""

__version__ = "0.1.0"

from .engine import Engine

__all__ = ["Engine", "__version__"]
