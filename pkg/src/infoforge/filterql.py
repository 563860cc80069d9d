"""The SQL subset behind data filters: parser, renderer, executor, and the
chunk-to-query fallback generator.

Grammar (keywords case-insensitive, string literals single-quoted with
doubled-quote escaping):

    SELECT * FROM ident
        [WHERE cmp (AND cmp)*]
        [ORDER BY ident [ASC|DESC] (, ident [ASC|DESC])*]
        [LIMIT int]
    cmp := ident op literal      op in  =  <>  <  <=  >  >=

Anything else (OR, joins, projections, functions, subqueries) is rejected
with a byte offset so model-produced text surfaces as a repairable error.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from functools import cmp_to_key
from typing import TYPE_CHECKING

from .dataset import ColumnKind, Dataset, DatasetMeta
from .errors import BindError, FilterGenerationError, UnsupportedSyntaxError
from .intent import fallback_relevance_score
from .textutil import contains_verbatim, parse_iso8601

if TYPE_CHECKING:  # pragma: no cover
    from .intent import ProviderSuite

OPS = ("=", "<>", "<=", ">=", "<", ">")


@dataclass
class Comparison:
    column: str
    op: str
    literal: float | str


@dataclass
class OrderTerm:
    column: str
    direction: str = "ASC"


@dataclass
class FilterQuery:
    predicates: list[Comparison] = field(default_factory=list)
    order_by: list[OrderTerm] = field(default_factory=list)
    limit: int | None = None


@dataclass
class FilteredTable:
    dataset_id: str
    row_indices: list[int]
    query: FilterQuery

    def to_json(self) -> dict:
        return {
            "datasetId": self.dataset_id,
            "rowIndices": list(self.row_indices),
            "query": render_query(self.query),
        }

    @classmethod
    def from_json(cls, payload: dict) -> "FilteredTable":
        return cls(
            dataset_id=payload["datasetId"],
            row_indices=[int(i) for i in payload["rowIndices"]],
            query=parse_query(payload["query"]),
        )


# --- tokenizer ---------------------------------------------------------------

_TOKEN_SPEC = [
    ("WS", r"\s+"),
    ("NUMBER", r"[+-]?(\d+\.\d*|\.\d+|\d+)"),
    ("STRING", r"'(?:[^']|'')*'"),
    ("OP", r"<>|<=|>=|=|<|>"),
    ("COMMA", r","),
    ("STAR", r"\*"),
    ("LPAREN", r"\("),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))

_KEYWORDS = {"select", "from", "where", "and", "or", "order", "by", "asc", "desc", "limit"}


@dataclass
class _Token:
    type: str
    value: str
    offset: int


def _lex(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match:
            raise UnsupportedSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = match.lastgroup or ""
        if kind != "WS":
            value = match.group()
            if kind == "IDENT" and value.lower() in _KEYWORDS:
                kind = value.lower().upper()
            tokens.append(_Token(kind, value, pos))
        pos = match.end()
    tokens.append(_Token("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _lex(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, expected: str, what: str | None = None) -> _Token:
        tok = self.peek()
        if tok.type != expected:
            raise UnsupportedSyntaxError(
                f"expected {what or expected}, found {tok.value or 'end of input'!r}",
                tok.offset,
            )
        self.pos += 1
        return tok

    def parse(self) -> FilterQuery:
        self.take("SELECT", "SELECT")
        star = self.peek()
        if star.type != "STAR":
            raise UnsupportedSyntaxError(
                "unsupported syntax: only 'SELECT *' projections are allowed", star.offset
            )
        self.pos += 1
        self.take("FROM", "FROM")
        self.take("IDENT", "table name")

        query = FilterQuery()
        if self.peek().type == "WHERE":
            self.pos += 1
            query.predicates.append(self._comparison())
            while self.peek().type == "AND":
                self.pos += 1
                query.predicates.append(self._comparison())
            if self.peek().type == "OR":
                raise UnsupportedSyntaxError("unsupported syntax: OR", self.peek().offset)
        if self.peek().type == "ORDER":
            self.pos += 1
            self.take("BY", "BY")
            query.order_by.append(self._order_term())
            while self.peek().type == "COMMA":
                self.pos += 1
                query.order_by.append(self._order_term())
        if self.peek().type == "LIMIT":
            self.pos += 1
            tok = self.take("NUMBER", "limit count")
            if not re.fullmatch(r"\d+", tok.value):
                raise UnsupportedSyntaxError("LIMIT takes a nonnegative integer", tok.offset)
            query.limit = int(tok.value)
        tail = self.peek()
        if tail.type != "EOF":
            raise UnsupportedSyntaxError(
                f"unsupported syntax: {tail.value!r}", tail.offset
            )
        return query

    def _comparison(self) -> Comparison:
        ident = self.take("IDENT", "column name")
        if self.peek().type == "LPAREN":
            raise UnsupportedSyntaxError(
                "unsupported syntax: function call", self.peek().offset
            )
        op = self.take("OP", "comparison operator")
        lit = self.peek()
        if lit.type == "NUMBER":
            self.pos += 1
            value: float | str = float(lit.value)
        elif lit.type == "STRING":
            self.pos += 1
            value = lit.value[1:-1].replace("''", "'")
        else:
            raise UnsupportedSyntaxError(
                f"expected literal, found {lit.value or 'end of input'!r}", lit.offset
            )
        return Comparison(column=ident.value, op=op.value, literal=value)

    def _order_term(self) -> OrderTerm:
        ident = self.take("IDENT", "column name")
        direction = "ASC"
        if self.peek().type in ("ASC", "DESC"):
            direction = self.peek().type
            self.pos += 1
        return OrderTerm(column=ident.value, direction=direction)


def parse_query(text: str) -> FilterQuery:
    return _Parser(text).parse()


def _render_literal(value: float | str) -> str:
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if value == int(value):
        return str(int(value))
    return repr(value)


def render_query(query: FilterQuery, table: str = "df") -> str:
    parts = [f"SELECT * FROM {table}"]
    if query.predicates:
        preds = " AND ".join(
            f"{p.column} {p.op} {_render_literal(p.literal)}" for p in query.predicates
        )
        parts.append(f"WHERE {preds}")
    if query.order_by:
        terms = ", ".join(f"{t.column} {t.direction}" for t in query.order_by)
        parts.append(f"ORDER BY {terms}")
    if query.limit is not None:
        parts.append(f"LIMIT {query.limit}")
    return " ".join(parts)


# --- binding and execution ---------------------------------------------------


def _bind_literal(comparison: Comparison, kind: ColumnKind):
    lit = comparison.literal
    if kind == ColumnKind.QUANTITATIVE:
        if not isinstance(lit, float):
            raise BindError(comparison.column, f"column {comparison.column!r} is quantitative; got a text literal")
        return lit
    if kind == ColumnKind.NOMINAL:
        if not isinstance(lit, str):
            raise BindError(comparison.column, f"column {comparison.column!r} is nominal; got a number literal")
        return lit
    # temporal: accept a timestamp-ish text literal
    if isinstance(lit, str):
        parsed = parse_iso8601(lit)
        if parsed is not None:
            return parsed
    raise BindError(comparison.column, f"column {comparison.column!r} is temporal; literal {lit!r} is not ISO-8601")


def _passes(cell, op: str, literal) -> bool:
    if cell is None:
        return False  # nulls excluded by every comparison
    if op == "=":
        return cell == literal
    if op == "<>":
        return cell != literal
    if op == "<":
        return cell < literal
    if op == "<=":
        return cell <= literal
    if op == ">":
        return cell > literal
    return cell >= literal


def execute(query: FilterQuery, ds: Dataset) -> FilteredTable:
    """Apply the query: conjunctive predicates, stable order-by with nulls
    last, limit after the sort."""
    schema = {c.name: c for c in ds.columns}
    bound = []
    for pred in query.predicates:
        if pred.column not in schema:
            raise BindError(pred.column, f"unknown column {pred.column!r}")
        bound.append((ds.column_index(pred.column), pred.op, _bind_literal(pred, schema[pred.column].kind)))
    for term in query.order_by:
        if term.column not in schema:
            raise BindError(term.column, f"unknown column {term.column!r}")

    indices = [
        i
        for i, row in enumerate(ds.rows)
        if all(_passes(row[ci], op, lit) for ci, op, lit in bound)
    ]

    if query.order_by:
        keys = [(ds.column_index(t.column), 1 if t.direction == "ASC" else -1) for t in query.order_by]

        def compare(ia: int, ib: int) -> int:
            for ci, sign in keys:
                a, b = ds.rows[ia][ci], ds.rows[ib][ci]
                if a is None and b is None:
                    continue
                if a is None:
                    return 1  # nulls last regardless of direction
                if b is None:
                    return -1
                if a < b:
                    return -sign
                if a > b:
                    return sign
            return 0

        indices.sort(key=cmp_to_key(compare))

    if query.limit is not None:
        indices = indices[: query.limit]
    return FilteredTable(dataset_id=ds.id, row_indices=indices, query=query)


# --- chunk -> query generation ------------------------------------------------

_ABOVE_RE = re.compile(r"\b(?:above|over|more than)\s+([+-]?\d+(?:\.\d+)?)", re.IGNORECASE)
_BELOW_RE = re.compile(r"\b(?:below|under|less than)\s+([+-]?\d+(?:\.\d+)?)", re.IGNORECASE)


def fallback_filter_text(chunk: str, meta: DatasetMeta) -> str:
    """Rule-based query synthesis: verbatim nominal mentions become equality
    predicates; 'above/below N' phrasings bind to the most relevant
    quantitative column."""
    predicates: list[Comparison] = []
    for col in meta.columns:
        if col.kind != ColumnKind.NOMINAL:
            continue
        for value in col.unique_values:
            if contains_verbatim(chunk, value):
                predicates.append(Comparison(col.name, "=", value))

    quantitative = [c for c in meta.columns if c.kind == ColumnKind.QUANTITATIVE]
    target = None
    if quantitative:
        target = max(
            enumerate(quantitative),
            key=lambda pair: (fallback_relevance_score(chunk, pair[1]), -pair[0]),
        )[1]
    if target is not None:
        for match in _ABOVE_RE.finditer(chunk):
            predicates.append(Comparison(target.name, ">", float(match.group(1))))
        for match in _BELOW_RE.finditer(chunk):
            predicates.append(Comparison(target.name, "<", float(match.group(1))))

    if not predicates:
        raise FilterGenerationError("no filterable terms")
    return render_query(FilterQuery(predicates=predicates))


def generate_filter(chunk: str, meta: DatasetMeta, suite: "ProviderSuite") -> str:
    """Provider (or fallback) query text, validated by the parser before it
    leaves the engine."""
    text = suite.filter(chunk, meta)
    try:
        parse_query(text)
    except UnsupportedSyntaxError as err:
        raise FilterGenerationError(
            f"provider produced an unparseable query: {err.message}", raw_text=text
        ) from err
    return text
