"""
From a table and a sentence to ranked chart recommendations
===========================================================

Ingest a CSV, write the key message, brush a span of it, and look at the
chart candidates the engine recommends for that span.
"""

from infoforge.engine import Engine

# the engine holds datasets, messages, assets, and documents in one place
engine = Engine()

# a small sales table; column kinds (quantitative / nominal / temporal)
# are inferred from the cell text
CSV = """\
month,region,revenue,unit_cost
2024-01-01,north,110,38
2024-02-01,north,125,37
2024-03-01,north,148,37
2024-01-01,south,90,41
2024-02-01,south,104,40
2024-03-01,south,121,39
"""

meta = engine.ingest(CSV)
print(f"dataset {meta.dataset_id}: {meta.row_count} rows")
for col in meta.columns:
    print(f"  {col.name}: {col.kind.value}")

# the key message is plain text; brushing a span attaches an intent to it
message = engine.create_message(
    "revenue kept climbing each month while unit_cost held flat"
)
start = message.text.index("revenue")
end = start + len("revenue kept climbing each month")
batch_id, batch = engine.brush(message.id, start, end, "visualization")

# candidates arrive ranked: more relevant columns first, simpler marks first
print(f"\nbatch {batch_id}: {len(batch.items)} chart candidates")
for item in batch.items[:5]:
    print(f"  {item.ref}  score={item.score:.0f}  {item.label}")

# picking materializes the winner as a rendered SVG asset
asset_id = engine.pick(batch_id, index=0)
desc = engine.describe(asset_id)
print(f"\npicked {asset_id}: kind={desc['kind']}, mark={desc['spec']['mark']}")
print(f"payload starts: {engine.asset(asset_id).payload[:60]}...")
