"""Tokenization, hashing, and the strict ISO-8601/number parsers."""

from datetime import datetime

from hypothesis import given, strategies as st

from infoforge.textutil import (
    FNV_OFFSET,
    contains_verbatim,
    fnv1a_64,
    fold_token,
    keywords,
    parse_iso8601,
    parse_number,
    token_set,
    tokenize,
)


def test_fnv1a_reference_vectors():
    # standard FNV-1a test vectors
    assert fnv1a_64(b"") == FNV_OFFSET == 0xCBF29CE484222325
    assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a_64(b"foobar") == 0x85944171F73967E8


def test_fold_token():
    assert fold_token("Positions") == "position"
    assert fold_token("gas") == "gas"
    assert fold_token("is") == "is"
    assert fold_token("glass") == "glass"
    assert fold_token("Cats") == "cat"


def test_tokenize_splits_camel_and_punct():
    assert tokenize("wingType, timeFrame!") == ["wing", "type", "time", "frame"]
    assert tokenize("y_positions") == ["y", "position"]
    assert tokenize("ABCValue") == ["abcvalue"]  # only lower->Upper boundaries split
    assert tokenize("y_positions", fold=False) == ["y", "positions"]


def test_token_set():
    assert token_set("The cats saw cats") == {"the", "cat", "saw"}


def test_keywords_drop_stopwords_and_dupes():
    assert keywords("The canary is over the shiny canary hills") == [
        "canary", "shiny", "hills"
    ]


def test_contains_verbatim():
    assert contains_verbatim("Beat the Los Angeles Lakers badly", "Los Angeles Lakers")
    assert contains_verbatim("value of DET today", "det")
    assert not contains_verbatim("cadets march", "det")
    assert not contains_verbatim("anything", "")
    assert contains_verbatim("season 2003-04 run", "2003-04")


def test_parse_iso8601_forms():
    assert parse_iso8601("2021-03-04") == datetime(2021, 3, 4)
    assert parse_iso8601("2021-03-04T05:06") == datetime(2021, 3, 4, 5, 6)
    assert parse_iso8601("2021-03-04 05:06:07") == datetime(2021, 3, 4, 5, 6, 7)
    assert parse_iso8601("2021-03-04T05:06:07.25") == datetime(2021, 3, 4, 5, 6, 7, 250000)
    assert parse_iso8601("2021-03-04T05:06:07Z") == datetime(2021, 3, 4, 5, 6, 7)
    # offsets fold into UTC, tzinfo dropped
    assert parse_iso8601("2021-03-04T05:06:00+02:00") == datetime(2021, 3, 4, 3, 6)
    assert parse_iso8601("2021-03-04T05:06:00-01:30") == datetime(2021, 3, 4, 6, 36)


def test_parse_iso8601_rejects():
    # basic format (no separators) and other near-misses stay out
    for bad in ("20210304", "2021-3-4", "2021-13-01", "2021-02-30",
                "04/03/2021", "2021-03-04T25:00", "", "yesterday"):
        assert parse_iso8601(bad) is None


def test_parse_number():
    assert parse_number("12") == 12.0
    assert parse_number("-3.5e2") == -350.0
    assert parse_number("+.5") == 0.5
    assert parse_number(" 7 ") == 7.0
    for bad in ("nan", "inf", "-inf", "1_000", "0x10", "", "12px"):
        assert parse_number(bad) is None


@given(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=500), max_size=40))
def test_tokenize_total(text):
    # never raises; tokens are lowercase alphanumeric
    for tok in tokenize(text):
        assert tok == tok.lower()
        assert tok.isalnum()


@given(st.datetimes(min_value=datetime(1900, 1, 1), max_value=datetime(2199, 12, 31)))
def test_iso_roundtrip(dt):
    dt = dt.replace(microsecond=0)
    assert parse_iso8601(dt.isoformat()) == dt
