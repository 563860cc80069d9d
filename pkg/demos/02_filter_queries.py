"""
Natural-language spans to filter queries, and the query language itself
=======================================================================

A brushed data-filter span is turned into a small SQL-like query, which
executes against the dataset as row indices. The query language can also
be used directly.
"""

from infoforge.engine import Engine
from infoforge.filterql import parse_query, render_query

engine = Engine()

CSV = """\
player,points,rebounds,team
ames,31,4,red
bode,12,11,red
cruz,27,7,blue
dena,8,2,blue
epps,22,9,red
"""
meta = engine.ingest(CSV)

# brushing with the data-filter intent generates and executes a query
message = engine.create_message("players with points above 20")
batch_id, batch = engine.brush(message.id, 0, len(message.text), "data-filter")
item = batch.items[0]
print("generated:", item.label)

table_id = engine.pick(batch_id, index=0)
table = engine.asset(table_id)
print("matching rows:", table.row_indices)

# the same language is available directly, with ordering and a limit
query = parse_query(
    "SELECT * FROM df WHERE team = 'red' AND points > 10 "
    "ORDER BY points DESC LIMIT 2"
)
print("\ncanonical form:", render_query(query))

applied_id, applied = engine.apply_filter(render_query(query))
rows = [engine.dataset(meta.dataset_id).rows[i] for i in applied.row_indices]
print("top red scorers:", [(r[0], r[1]) for r in rows])
