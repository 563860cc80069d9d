"""
Composing a document: layers, config, highlight, and export
===========================================================

Assets become layers in an infographic document. Layer config is checked
against the kind/field matrix, a filter highlight adds annotation layers,
and the document exports as one SVG or as a frame bundle.
"""

import tempfile
from pathlib import Path

from infoforge.engine import Engine

out = Path(tempfile.mkdtemp(prefix="infoforge_demo_"))
engine = Engine(data_dir=out)

CSV = """\
quarter,signups,churned
2024-01-01,340,31
2024-04-01,385,29
2024-07-01,512,44
2024-10-01,618,38
"""
engine.ingest(CSV)

# a chart asset plus a filter asset to highlight against it
message = engine.create_message("signups per quarter, flag the churn spikes")
b_id, _ = engine.brush(message.id, 0, len("signups per quarter"), "visualization")
chart_id = engine.pick(b_id, index=0)
filter_id, table = engine.apply_filter("SELECT * FROM df WHERE churned > 40")
highlight_id = engine.highlight(chart_id, filter_id, "churn spike quarters")

doc = engine.create_document(message_ref=message.id, canvas_width=800)
engine.doc_add_layer(doc.id, chart_id)
engine.doc_add_layer(doc.id, highlight_id)
text_id = engine.add_text("Signups kept growing", size_pt=21.0, color="#0b3954")
engine.doc_add_layer(doc.id, text_id)

doc = engine.get_document(doc.id)
print(f"document {doc.id}: canvas {doc.canvas_width}x{doc.canvas_height}")
for layer in doc.layers:
    dep = f" (follows {layer.depends_on})" if layer.depends_on else ""
    print(f"  z{layer.z_order} {layer.kind.value}{dep}")

# config fields apply only where the matrix allows them
chart_layer = doc.layers[0]
engine.doc_set_config(doc.id, chart_layer.id, "showLegend", False)
engine.doc_transform(doc.id, chart_layer.id, tx_px=24.0, ty_px=12.0)
updated = engine.get_document(doc.id).layer(chart_layer.id)
print(f"\nchart layer config: {updated.config}")
print(f"chart layer offset: ({updated.transform.tx_px}, {updated.transform.ty_px})")

# a one-way conversion: the config change animates the chart in place
engine.doc_set_config(doc.id, chart_layer.id, "animateColumn", "quarter")
converted = engine.get_document(doc.id).layer(chart_layer.id)
print(f"after animateColumn: kind={converted.kind.value}, "
      f"delay={converted.config['frameDelayMs']}ms")

# exports land under the engine's data_dir
static = engine.doc_export(doc.id, "static-vector")
bundle = engine.doc_export(doc.id, "frame-bundle")
print(f"\nstatic export: {static['path']}")
print(f"frame bundle: {len(bundle['frames'])} frames, "
      f"manifest at {bundle['manifestPath']}")
