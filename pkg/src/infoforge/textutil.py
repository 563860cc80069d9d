"""Text plumbing shared across modules: tokenization, plural folding,
FNV-1a hashing, the time-word lexicon, and a strict ISO-8601 parser.

The ISO parser is hand-rolled because ``datetime.fromisoformat`` changed
what it accepts between 3.10 and 3.11; column typing must not depend on
the interpreter version.
"""

from __future__ import annotations

import re
from datetime import datetime, timezone

TIME_LEXICON = frozenset(
    {"time", "date", "hour", "day", "week", "month", "year", "frame", "season", "period"}
)

# Words dropped before keyword-level lookups (palette keywords, etc).
STOPWORDS = frozenset(
    """a an the and or but if then else of in on at to for from by with as is are was
    were be been being it its this that these those there here over under into out
    about after before during each per not no so such very much more most own same
    do does did done have has had will would can could should""".split()
)

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")
_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a over ``data``."""
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def fold_token(token: str) -> str:
    """Lowercase and fold naive plurals ('positions' -> 'position').

    Only a single trailing 's' is stripped, and only on tokens longer than
    three characters, so 'is', 'gas', 'was' survive.
    """
    token = token.lower()
    if len(token) > 3 and token.endswith("s") and not token.endswith("ss"):
        token = token[:-1]
    return token


def tokenize(text: str, fold: bool = True) -> list[str]:
    """Split on non-alphanumerics and camelCase boundaries, lowercased."""
    parts: list[str] = []
    for raw in _TOKEN_RE.findall(text):
        for piece in _CAMEL_RE.split(raw):
            parts.append(fold_token(piece) if fold else piece.lower())
    return parts


def token_set(text: str) -> set[str]:
    return set(tokenize(text))


def keywords(text: str) -> list[str]:
    """Content words of ``text`` in order, stopwords removed, duplicates kept out."""
    seen = []
    for tok in tokenize(text, fold=False):
        if tok in STOPWORDS or not tok:
            continue
        if tok not in seen:
            seen.append(tok)
    return seen


def contains_verbatim(haystack: str, needle: str) -> bool:
    """Case-insensitive, word-bounded containment of ``needle`` in ``haystack``."""
    needle = needle.strip()
    if not needle:
        return False
    pattern = r"(?<![A-Za-z0-9])" + re.escape(needle) + r"(?![A-Za-z0-9])"
    return re.search(pattern, haystack, re.IGNORECASE) is not None


_DATE_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_DATETIME_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[T ]"
    r"(\d{2}):(\d{2})(?::(\d{2})(?:\.(\d{1,6}))?)?"
    r"(Z|[+-]\d{2}:\d{2})?$"
)


def parse_iso8601(text: str) -> datetime | None:
    """Parse extended-format ISO-8601 dates/datetimes; ``None`` when invalid.

    Dates land at midnight so every temporal cell is a comparable datetime.
    Offsets are folded into UTC and the tzinfo dropped, keeping all values
    naive and mutually comparable.
    """
    text = text.strip()
    m = _DATE_RE.match(text)
    if m:
        y, mo, d = (int(g) for g in m.groups())
        try:
            return datetime(y, mo, d)
        except ValueError:
            return None
    m = _DATETIME_RE.match(text)
    if not m:
        return None
    y, mo, d, hh, mm = (int(m.group(i)) for i in range(1, 6))
    ss = int(m.group(6) or 0)
    frac = m.group(7)
    micro = int(frac.ljust(6, "0")) if frac else 0
    try:
        value = datetime(y, mo, d, hh, mm, ss, micro)
    except ValueError:
        return None
    tz = m.group(8)
    if tz and tz != "Z":
        sign = 1 if tz[0] == "+" else -1
        offset_min = sign * (int(tz[1:3]) * 60 + int(tz[4:6]))
        value = value.replace(tzinfo=timezone.utc)
        value = datetime.fromtimestamp(value.timestamp() - offset_min * 60, tz=timezone.utc)
        value = value.replace(tzinfo=None)
    return value


def parse_number(text: str) -> float | None:
    """Parse a decimal number; rejects values like 'nan'/'inf' that float() allows."""
    text = text.strip()
    if not re.match(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$", text):
        return None
    try:
        return float(text)
    except ValueError:  # pragma: no cover - regex should prevent this
        return None
