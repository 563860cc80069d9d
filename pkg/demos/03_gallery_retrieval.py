"""
Caption-embedding retrieval over a gallery of vector graphics
=============================================================

The bundled demo gallery holds a few static SVGs and two frame animations.
Static assets are ranked by cosine similarity between the query and the
caption; animated assets by the mean similarity over their frame captions.
"""

from infoforge.cli import demo_recipe_path
from infoforge.engine import Engine

manifest = demo_recipe_path().parent / "gallery" / "manifest.json"
engine = Engine(gallery_manifest=manifest)

index = engine.gallery_index
print(f"indexed {len(index.assets)} assets "
      f"({sum(a.kind == 'static' for a in index.assets)} static)")

# static search: one caption vector per asset
batch_id, batch = engine.gallery_search("static", "small yellow bird", k=3)
print("\nstatic matches for 'small yellow bird':")
for item in batch.items:
    print(f"  {item.ref}  score={item.score:.3f}  {item.label}")

# animated search: mean similarity over the frame captions
batch_id, batch = engine.gallery_search("animated", "canary in flight", k=2)
print("\nanimated matches for 'canary in flight':")
for item in batch.items:
    print(f"  {item.ref}  score={item.score:.3f}  {item.label}")

# picking copies the gallery asset into the engine's asset store
asset_id = engine.pick(batch_id, index=0)
desc = engine.describe(asset_id)
print(f"\npicked {asset_id}: {desc['caption']!r}, "
      f"{len(desc['animation']['frames'])} frames, "
      f"{desc['animation']['frameDelayMs']}ms per frame")
