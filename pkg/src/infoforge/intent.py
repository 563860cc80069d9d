"""Key message, brushed chunks, asset requests, and the provider contracts.

Providers are plain callables collected in a ProviderSuite. The fallback
implementations (rule-based, deterministic) live here and in the sibling
modules; remote HTTP providers are wired up in ``providers``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .dataset import ColumnKind, ColumnMeta, DatasetMeta
from .errors import SpanError, UnknownIdError
from .textutil import TIME_LEXICON, contains_verbatim, token_set, tokenize

BATCH_CAP = 20


class AssetKind(str, Enum):
    VISUALIZATION = "visualization"
    DATA_FILTER = "data-filter"
    STATIC_GRAPHIC = "static-graphic"
    ANIMATED_GRAPHIC = "animated-graphic"
    COLOR_PALETTE = "color-palette"


@dataclass
class TextChunk:
    id: str
    start: int
    end: int
    text: str


@dataclass
class KeyMessage:
    id: str
    text: str
    chunks: list[TextChunk] = field(default_factory=list)


@dataclass
class AssetRequest:
    id: str
    chunk_id: str
    kind: AssetKind
    dataset_id: str | None


@dataclass
class RecommendationItem:
    """One ranked asset descriptor; ``data`` is the kind-specific payload."""

    ref: str
    kind: AssetKind
    score: float
    label: str = ""
    data: dict = field(default_factory=dict)


@dataclass
class RecommendationBatch:
    request_id: str
    source_chunk_id: str
    items: list[RecommendationItem]

    def __post_init__(self) -> None:
        self.items = self.items[:BATCH_CAP]


@dataclass
class ProviderSuite:
    """The pluggable model surface. Every member is a pure function for the
    fallback suite; remote suites may raise ProviderError."""

    name: str
    relevance: Callable[[str, DatasetMeta], list[str]]
    filter: Callable[[str, DatasetMeta], str]
    time_columns: Callable[[Sequence[ColumnMeta]], list[str]]
    images_from_text: Callable[[str], list[np.ndarray]]
    embedding: Callable[[str], np.ndarray]


# --- fallback relevance -----------------------------------------------------

NAME_MATCH_WEIGHT = 1.0
VALUE_MATCH_WEIGHT = 0.9
TIME_HINT_WEIGHT = 0.5
MAX_RELEVANT_COLUMNS = 5


def fallback_relevance_score(chunk: str, column: ColumnMeta) -> float:
    """Deterministic stand-in for the model's column-relevance call.

    Best of: token overlap with the column name, a 0.9 hit when a nominal
    value of the column is mentioned verbatim, and a 0.5 hint when the
    chunk uses a time word and the column is temporal.
    """
    chunk_tokens = token_set(chunk)
    name_tokens = set(tokenize(column.name))
    score = 0.0
    if name_tokens:
        overlap = len(chunk_tokens & name_tokens) / len(name_tokens)
        score = max(score, NAME_MATCH_WEIGHT * overlap)
    if column.kind == ColumnKind.NOMINAL:
        if any(contains_verbatim(chunk, value) for value in column.unique_values):
            score = max(score, VALUE_MATCH_WEIGHT)
    if column.kind == ColumnKind.TEMPORAL and chunk_tokens & TIME_LEXICON:
        score = max(score, TIME_HINT_WEIGHT)
    return score


def fallback_relevant_columns(chunk: str, meta: DatasetMeta) -> list[str]:
    scored = [
        (fallback_relevance_score(chunk, col), -i, col.name)
        for i, col in enumerate(meta.columns)
    ]
    ranked = sorted(scored, key=lambda t: (-t[0], -t[1]))
    return [name for score, _i, name in ranked if score > 0.0][:MAX_RELEVANT_COLUMNS]


def relevant_columns(chunk: str, meta: DatasetMeta, suite: ProviderSuite) -> list[str]:
    """At most 5 schema column names, most relevant first, no duplicates."""
    if not meta.columns:
        raise UnknownIdError("dataset has no columns")
    names = suite.relevance(chunk, meta)
    schema = {c.name for c in meta.columns}
    deduped: list[str] = []
    for name in names:
        if name in schema and name not in deduped:
            deduped.append(name)
    return deduped[:MAX_RELEVANT_COLUMNS]


def is_time_named(name: str) -> bool:
    return bool(set(tokenize(name)) & TIME_LEXICON)


def fallback_time_columns(columns: Sequence[ColumnMeta]) -> list[str]:
    """Temporal columns plus columns with time-oriented names, schema order."""
    return [
        c.name
        for c in columns
        if c.kind == ColumnKind.TEMPORAL or is_time_named(c.name)
    ]


def detect_time_columns(columns: Sequence[ColumnMeta], suite: ProviderSuite) -> list[ColumnMeta]:
    names = suite.time_columns(columns)
    by_name = {c.name: c for c in columns}
    return [by_name[n] for n in names if n in by_name]


# --- message / chunk / batch registry ---------------------------------------


class MessageRegistry:
    """Single-writer, multi-reader store for messages, chunks, requests, and
    their recommendation batches."""

    def __init__(self) -> None:
        self._lock = threading.RLock()
        self._messages: dict[str, KeyMessage] = {}
        self._requests: dict[str, AssetRequest] = {}
        self._batches: dict[str, RecommendationBatch] = {}
        self._chunk_batches: dict[str, list[str]] = {}
        self._counter = 0

    def _next(self, prefix: str) -> str:
        self._counter += 1
        return f"{prefix}{self._counter}"

    def create_message(self, text: str) -> KeyMessage:
        with self._lock:
            msg = KeyMessage(id=self._next("m"), text=text)
            self._messages[msg.id] = msg
            return msg

    def get_message(self, message_id: str) -> KeyMessage:
        try:
            return self._messages[message_id]
        except KeyError:
            raise UnknownIdError(f"unknown message {message_id!r}") from None

    def brush(
        self,
        message: KeyMessage,
        start: int,
        end: int,
        kind: AssetKind,
        dataset_id: str | None = None,
    ) -> AssetRequest:
        """Register the span (reusing an identical chunk) and open a request."""
        if not (0 <= start < end <= len(message.text)):
            raise SpanError(f"span {start}..{end} outside text of length {len(message.text)}")
        with self._lock:
            chunk = next(
                (c for c in message.chunks if c.start == start and c.end == end),
                None,
            )
            if chunk is None:
                chunk = TextChunk(
                    id=self._next("c"),
                    start=start,
                    end=end,
                    text=message.text[start:end],
                )
                message.chunks.append(chunk)
                self._chunk_batches.setdefault(chunk.id, [])
            request = AssetRequest(
                id=self._next("r"), chunk_id=chunk.id, kind=kind, dataset_id=dataset_id
            )
            self._requests[request.id] = request
            return request

    def find_chunk(self, chunk_id: str) -> TextChunk:
        for msg in self._messages.values():
            for chunk in msg.chunks:
                if chunk.id == chunk_id:
                    return chunk
        raise UnknownIdError(f"unknown chunk {chunk_id!r}")

    def get_request(self, request_id: str) -> AssetRequest:
        try:
            return self._requests[request_id]
        except KeyError:
            raise UnknownIdError(f"unknown request {request_id!r}") from None

    def record_batch(self, request: AssetRequest, items: list[RecommendationItem]) -> RecommendationBatch:
        with self._lock:
            batch = RecommendationBatch(
                request_id=request.id,
                source_chunk_id=request.chunk_id,
                items=items,
            )
            batch_id = f"b{request.id[1:]}"
            self._batches[batch_id] = batch
            self._chunk_batches.setdefault(request.chunk_id, []).append(batch_id)
            return batch

    def batch_id_of(self, batch: RecommendationBatch) -> str:
        return f"b{batch.request_id[1:]}"

    def get_batch(self, batch_id: str) -> RecommendationBatch:
        try:
            return self._batches[batch_id]
        except KeyError:
            raise UnknownIdError(f"unknown batch {batch_id!r}") from None

    def delete_batch(self, batch_id: str) -> None:
        with self._lock:
            batch = self.get_batch(batch_id)
            del self._batches[batch_id]
            links = self._chunk_batches.get(batch.source_chunk_id, [])
            if batch_id in links:
                links.remove(batch_id)

    def chunk_links(self, chunk_id: str) -> list[str]:
        """Batch ids sourced from the chunk, insertion order."""
        self.find_chunk(chunk_id)
        return list(self._chunk_batches.get(chunk_id, []))
