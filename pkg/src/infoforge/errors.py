"""Exception hierarchy shared by every engine module.

Each error carries a stable ``code`` so the HTTP facade can map it to a
status without string-matching messages.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine-raised errors."""

    code = "engine_error"

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class IngestError(EngineError):
    code = "ingest_error"


class RaggedRowError(IngestError):
    """A data row whose cell count differs from the header width.

    ``row_index`` is 1-based over data rows (the header is row 0).
    """

    code = "ragged_row"

    def __init__(self, row_index: int, expected: int, got: int):
        super().__init__(
            f"row {row_index} has {got} cells, expected {expected}",
            detail={"row": row_index, "expected": expected, "got": got},
        )
        self.row_index = row_index
        self.expected = expected
        self.got = got


class SpanError(EngineError):
    """Brushed span lies outside the message text."""

    code = "bad_span"


class UnknownIdError(EngineError):
    code = "unknown_id"


class ProviderError(EngineError):
    """A provider call failed; message carries the provider's own error."""

    code = "provider_error"

    def __init__(self, provider: str, message: str, detail: object = None):
        super().__init__(message, detail)
        self.provider = provider


class UnsupportedSyntaxError(EngineError):
    """Filter query text outside the supported grammar."""

    code = "unsupported_syntax"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})", detail={"offset": offset})
        self.offset = offset


class BindError(EngineError):
    """Query references a column the schema lacks, or a literal of the wrong kind."""

    code = "bind_error"

    def __init__(self, column: str, message: str):
        super().__init__(message, detail={"column": column})
        self.column = column


class FilterGenerationError(EngineError):
    """Filter generation produced nothing usable; ``raw_text`` holds any
    provider output so the user can repair it."""

    code = "filter_generation"

    def __init__(self, message: str, raw_text: str | None = None):
        super().__init__(message, detail={"raw_text": raw_text})
        self.raw_text = raw_text


class ChartError(EngineError):
    code = "chart_error"


class GalleryError(EngineError):
    code = "gallery_error"


class PaletteError(EngineError):
    code = "palette_error"


class ComposeError(EngineError):
    code = "compose_error"


class DocumentError(EngineError):
    code = "document_error"


class ConfigMatrixError(DocumentError):
    """A layer config field set on an asset kind outside the config matrix."""

    code = "config_matrix"


class LockedLayerError(DocumentError):
    code = "locked_layer"


class SerializationError(DocumentError):
    code = "serialization"


class MigrationError(SerializationError):
    """Document payload carries an unsupported schema version."""

    code = "schema_version"

    def __init__(self, found: str, supported: str):
        super().__init__(
            f"document schema version {found!r} unsupported (engine speaks {supported!r})",
            detail={"found": found, "supported": supported},
        )
        self.found = found
        self.supported = supported


class RecipeError(EngineError):
    """A recipe step failed; ``step_index`` is 0-based."""

    code = "recipe_error"

    def __init__(self, step_index: int, message: str, detail: object = None):
        super().__init__(f"step {step_index}: {message}", detail)
        self.step_index = step_index
