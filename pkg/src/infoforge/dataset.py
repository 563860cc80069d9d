"""Tabular ingestion: delimited text in, typed immutable dataset out.

Column kinds are inferred with a 90% vote: a column is Temporal when at
least 90% of its non-null cells parse as ISO-8601, else Quantitative when
at least 90% parse as numbers, else Nominal. Cells that fail to parse
under the winning kind become nulls.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path

from .errors import IngestError, RaggedRowError
from .textutil import parse_iso8601, parse_number

Cell = float | str | datetime | None

KIND_THRESHOLD = 0.90
UNIQUE_VALUES_CAP = 64
ALLOWED_DELIMITERS = (",", "\t", ";")


class ColumnKind(str, Enum):
    QUANTITATIVE = "quantitative"
    NOMINAL = "nominal"
    TEMPORAL = "temporal"


@dataclass
class ColumnMeta:
    name: str
    kind: ColumnKind
    unique_values: list[str] = field(default_factory=list)
    min_value: float | datetime | None = None
    max_value: float | datetime | None = None
    null_count: int = 0


@dataclass
class Dataset:
    """Immutable after ingest; safe to share across readers."""

    id: str
    columns: list[ColumnMeta]
    rows: list[tuple[Cell, ...]]

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        for i, col in enumerate(self.columns):
            if col.name == name:
                return i
        raise KeyError(name)

    def column(self, name: str) -> ColumnMeta:
        return self.columns[self.column_index(name)]

    def column_cells(self, name: str) -> list[Cell]:
        idx = self.column_index(name)
        return [row[idx] for row in self.rows]


@dataclass
class DatasetMeta:
    dataset_id: str
    columns: list[ColumnMeta]
    row_count: int
    summary_text: str


def infer_kind(values: list[str]) -> ColumnKind:
    """Classify raw cell text; empty strings count as nulls."""
    non_null = [v for v in values if v.strip() != ""]
    if not non_null:
        return ColumnKind.QUANTITATIVE  # all-null column: vacuous numeric
    n = len(non_null)
    temporal = sum(1 for v in non_null if parse_iso8601(v) is not None)
    if temporal / n >= KIND_THRESHOLD:
        return ColumnKind.TEMPORAL
    numeric = sum(1 for v in non_null if parse_number(v) is not None)
    if numeric / n >= KIND_THRESHOLD:
        return ColumnKind.QUANTITATIVE
    return ColumnKind.NOMINAL


def _convert(raw: str, kind: ColumnKind) -> Cell:
    if raw.strip() == "":
        return None
    if kind == ColumnKind.QUANTITATIVE:
        return parse_number(raw)
    if kind == ColumnKind.TEMPORAL:
        return parse_iso8601(raw)
    return raw


def ingest_tabular(content: str, delimiter: str = ",") -> Dataset:
    """Parse delimited text with a header row into a typed Dataset.

    The dataset id is a digest of the input bytes, so identical content
    ingests to the identical dataset.
    """
    if delimiter not in ALLOWED_DELIMITERS:
        raise IngestError(f"unsupported delimiter {delimiter!r}")
    if content.strip() == "":
        raise IngestError("empty dataset")
    reader = csv.reader(io.StringIO(content), delimiter=delimiter)
    table = [row for row in reader if row]
    if len(table) < 2:
        raise IngestError("empty dataset")
    header = [name.strip() for name in table[0]]
    width = len(header)
    raw_rows = table[1:]
    for i, row in enumerate(raw_rows, start=1):
        if len(row) != width:
            raise RaggedRowError(i, width, len(row))

    digest = hashlib.sha256(content.encode("utf-8")).hexdigest()[:12]
    kinds = [infer_kind([row[c] for row in raw_rows]) for c in range(width)]
    rows = [
        tuple(_convert(row[c], kinds[c]) for c in range(width))
        for row in raw_rows
    ]
    columns = [
        _column_meta(header[c], kinds[c], [row[c] for row in rows])
        for c in range(width)
    ]
    return Dataset(id=f"d{digest}", columns=columns, rows=rows)


def _column_meta(name: str, kind: ColumnKind, cells: list[Cell]) -> ColumnMeta:
    meta = ColumnMeta(name=name, kind=kind)
    non_null = [c for c in cells if c is not None]
    meta.null_count = len(cells) - len(non_null)
    if kind == ColumnKind.NOMINAL:
        counts: dict[str, int] = {}
        first_seen: dict[str, int] = {}
        for i, cell in enumerate(non_null):
            counts[cell] = counts.get(cell, 0) + 1  # type: ignore[index]
            first_seen.setdefault(cell, i)  # type: ignore[arg-type]
        ordered = sorted(counts, key=lambda v: (-counts[v], first_seen[v]))
        meta.unique_values = ordered[:UNIQUE_VALUES_CAP]
    elif non_null:
        meta.min_value = min(non_null)  # type: ignore[type-var]
        meta.max_value = max(non_null)  # type: ignore[type-var]
    return meta


def _format_bound(value: float | datetime | None) -> str:
    if isinstance(value, datetime):
        if value.hour == value.minute == value.second == value.microsecond == 0:
            return value.date().isoformat()
        return value.isoformat(sep=" ")
    if isinstance(value, float) and value == int(value):
        return str(int(value))
    return str(value)


SUMMARY_TOP_VALUES = 5


def extract_meta(ds: Dataset) -> DatasetMeta:
    """Per-column statistics plus a deterministic one-paragraph summary."""
    parts = []
    for col in ds.columns:
        if col.kind == ColumnKind.NOMINAL:
            shown = col.unique_values[:SUMMARY_TOP_VALUES]
            suffix = ", ..." if len(col.unique_values) > SUMMARY_TOP_VALUES else ""
            detail = f"top values: {', '.join(shown)}{suffix}"
        elif col.min_value is None:
            detail = "all null"
        else:
            detail = f"range {_format_bound(col.min_value)} to {_format_bound(col.max_value)}"
        parts.append(f"{col.name} ({col.kind.value}, {detail})")
    summary = f"{ds.row_count} rows; columns: {'; '.join(parts)}."
    return DatasetMeta(
        dataset_id=ds.id,
        columns=ds.columns,
        row_count=ds.row_count,
        summary_text=summary,
    )


# --- columnar persistence: schema descriptor + row store -------------------

def _cell_to_json(cell: Cell) -> object:
    if isinstance(cell, datetime):
        return cell.isoformat(sep=" ")
    return cell


def _cell_from_json(value: object, kind: ColumnKind) -> Cell:
    if value is None:
        return None
    if kind == ColumnKind.TEMPORAL:
        return parse_iso8601(str(value).replace(" ", "T", 1))
    if kind == ColumnKind.QUANTITATIVE:
        return float(value)  # type: ignore[arg-type]
    return str(value)


def save_dataset(ds: Dataset, directory: Path) -> tuple[Path, Path]:
    """Persist as the columnar pair: ``<id>.schema.json`` + ``<id>.columns.json``."""
    directory.mkdir(parents=True, exist_ok=True)
    schema_path = directory / f"{ds.id}.schema.json"
    store_path = directory / f"{ds.id}.columns.json"
    schema = {
        "id": ds.id,
        "rowCount": ds.row_count,
        "columns": [
            {
                "name": c.name,
                "kind": c.kind.value,
                "uniqueValues": c.unique_values,
                "minValue": _cell_to_json(c.min_value),
                "maxValue": _cell_to_json(c.max_value),
                "nullCount": c.null_count,
            }
            for c in ds.columns
        ],
    }
    store = {
        c.name: [_cell_to_json(row[i]) for row in ds.rows]
        for i, c in enumerate(ds.columns)
    }
    schema_path.write_text(json.dumps(schema, indent=1), encoding="utf-8")
    store_path.write_text(json.dumps(store), encoding="utf-8")
    return schema_path, store_path


def load_dataset(schema_path: Path) -> Dataset:
    schema = json.loads(schema_path.read_text(encoding="utf-8"))
    store_path = schema_path.with_name(f"{schema['id']}.columns.json")
    store = json.loads(store_path.read_text(encoding="utf-8"))
    columns = []
    for c in schema["columns"]:
        kind = ColumnKind(c["kind"])
        bound = lambda v, k=kind: _cell_from_json(v, k) if k != ColumnKind.NOMINAL else v
        columns.append(
            ColumnMeta(
                name=c["name"],
                kind=kind,
                unique_values=list(c["uniqueValues"]),
                min_value=bound(c["minValue"]),
                max_value=bound(c["maxValue"]),
                null_count=c["nullCount"],
            )
        )
    names = [c.name for c in columns]
    col_cells = {
        name: [_cell_from_json(v, columns[i].kind) for v in store[name]]
        for i, name in enumerate(names)
    }
    rows = [
        tuple(col_cells[name][r] for name in names)
        for r in range(schema["rowCount"])
    ]
    return Dataset(id=schema["id"], columns=columns, rows=rows)
