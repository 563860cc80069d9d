"""
Animating a chart over a time column and syncing two animations
===============================================================

A static chart animates by rendering one frame per unique key of a time
column, all frames sharing the same scale domains. Two animations of
different lengths are then synced so their cycle durations agree.
"""

from infoforge.cli import demo_recipe_path
from infoforge.engine import Engine

demo_dir = demo_recipe_path().parent
engine = Engine(gallery_manifest=demo_dir / "gallery" / "manifest.json")
engine.ingest((demo_dir / "canary_flight.csv").read_text("utf-8"))

# brush a chart over the flight trace, then animate it along time_frame
message = engine.create_message("x_position against y_position over time_frame")
batch_id, _ = engine.brush(message.id, 0, len(message.text), "visualization")
chart_id = engine.pick(batch_id, index=0)

anim_id, anim = engine.animate(chart_id, "time_frame", frame_delay_ms=200)
print(f"chart animation: {len(anim.frames)} frames at {anim.frame_delay_ms}ms "
      f"(keys {anim.frame_keys[0]}..{anim.frame_keys[-1]})")

# fetch a gallery animation with a different frame count
batch_id, _ = engine.gallery_search("animated", "canary flapping", k=1)
clip_id = engine.pick(batch_id, index=0)
clip = engine.asset(clip_id).payload
print(f"gallery clip: {len(clip.frames)} frames at {clip.frame_delay_ms}ms")

# sync: the first asset is the authority; the other's delay is rescaled
result = engine.sync(anim_id, clip_id)
a, b = result["a"], result["b"]
print(f"\nafter sync: {a['frames']}x{a['frameDelayMs']}ms "
      f"= {a['frames'] * a['frameDelayMs']}ms cycle")
print(f"            {b['frames']}x{b['frameDelayMs']}ms "
      f"= {b['frames'] * b['frameDelayMs']}ms cycle")
print("both animations restart on the next shared tick:",
      a["restart"] and b["restart"])
