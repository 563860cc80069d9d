"""
Data-object displays: marks replaced by pictorial glyphs
========================================================

A DOD takes a static chart and draws a gallery glyph at every mark,
keyed by a nominal column value. Here the canary flight trace gets a
wing silhouette per point, long or short.
"""

from infoforge.cli import demo_recipe_path
from infoforge.engine import Engine

demo_dir = demo_recipe_path().parent
engine = Engine(gallery_manifest=demo_dir / "gallery" / "manifest.json")
engine.ingest((demo_dir / "canary_flight.csv").read_text("utf-8"))

# a scatter of the flight trace, colored by wing type
message = engine.create_message("x_position against y_position by wing_type")
b_id, _ = engine.brush(message.id, 0, len(message.text), "visualization")
chart_id = engine.pick(b_id, index=0)
spec = engine.describe(chart_id)["spec"]
print(f"base chart: {spec['mark']} over {[e['column'] for e in spec['encodings']]}")

# fetch one static glyph per category from the gallery
glyphs = {}
for value, query in (("long", "long wing silhouette"), ("short", "short wing silhouette")):
    b_id, _ = engine.gallery_search("static", query, k=1)
    glyphs[value] = engine.pick(b_id, index=0)
print("glyphs:", {k: engine.describe(v)["caption"] for k, v in glyphs.items()})

dod_id = engine.dod(chart_id, glyphs, glyph_scale=2.5)
dod = engine.asset(dod_id)
marks = [g for g in dod.mark_geometry if g.shape == "glyph"]
print(f"\nDOD {dod_id}: {len(marks)} marks drawn as inlined wing glyphs")
first = marks[0]
print(f"first mark: row {first.row_or_group} at ({first.x:.0f}, {first.y:.0f})")
