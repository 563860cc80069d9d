"""
Palettes: from text, from images, and applied back onto charts
==============================================================

Palettes are five weighted color bins. They come from keyword lookups or
from median-cut extraction over an image, are compared with an earth
mover's distance, and recolor charts while preserving the scheme.
"""

import numpy as np

from infoforge.chroma import emd, extract_palette
from infoforge.engine import Engine

engine = Engine()

# every non-stopword keyword in the span gets its own candidate palette
batch_id, batch = engine.palettes_from_text("a crimson sunset over the sea")
print("palette candidates:")
for item in batch.items:
    print(f"  {item.label}: {item.data['palette']['colors']}")

sunset_id = engine.pick(batch_id, ref=next(
    i.ref for i in batch.items if i.label == "sunset"
))
sunset = engine.asset(sunset_id)

# extraction: median-cut quantization to five bins, sorted dark to light
image = np.zeros((50, 50, 4), dtype=np.uint8)
stripes = [(20, 24, 96), (193, 18, 31), (252, 163, 17), (233, 236, 239), (72, 202, 228)]
for i, color in enumerate(stripes):
    image[i * 10:(i + 1) * 10] = (*color, 255)
extracted = extract_palette(image)
print("\nextracted from stripes:", extracted.to_json()["colors"])

# the transport plan says how far apart two palettes are
plan = emd(extracted, sunset)
print(f"distance to 'sunset': {plan.total_cost:.1f} "
      f"(flow matrix {plan.flow.shape[0]}x{plan.flow.shape[1]})")

# recoloring a chart swaps its scheme for the palette's nearest colors
CSV = "kind,amount\nore,30\ngas,22\ncrops,41\n"
engine.ingest(CSV)
message = engine.create_message("amount by kind")
b_id, b = engine.brush(message.id, 0, len(message.text), "visualization")
chart_id = engine.pick(b_id, index=0)
before = engine.describe(chart_id)["spec"]["colorScheme"]

recolored_id = engine.recolor(chart_id, sunset)
after = engine.describe(recolored_id)["spec"]["colorScheme"]
print(f"\nchart scheme before: {before}")
print(f"chart scheme after:  {after}")
