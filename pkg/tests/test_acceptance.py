"""Acceptance gate: one test per [PRIMARY] criterion of the build contract.

Each test prints a single pass/fail line (run with ``-s`` to see them live);
the assertions enforce the stated tolerances and time budgets either way.
"""

from __future__ import annotations

import itertools
import json
import random
import re
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import build_nba_rows, make_gallery, rows_to_csv
from oracles import (
    assignment_bruteforce,
    grid_weight_vectors,
    oracle_enumerate,
    retrieval_oracle,
    spec_signature,
    transport_bruteforce,
)
from infoforge import document as docmod
from infoforge.charts import (
    CATEGORY10,
    Channel,
    ChannelEncoding,
    ChartSpec,
    Mark,
    animate_chart,
    enumerate_charts,
    rank_charts,
)
from infoforge.chroma import (
    PALETTE_BINS,
    ColorBin,
    Palette,
    SchemeKind,
    emd,
    extract_palette,
    recolor_mapping,
)
from infoforge.cli import demo_recipe_path, run_recipe
from infoforge.color import lab_distance, luma, parse_hex
from infoforge.compose import sync
from infoforge.dataset import ColumnKind, extract_meta, ingest_tabular
from infoforge.charts import AnimatedAsset
from infoforge.errors import ConfigMatrixError
from infoforge.filterql import Comparison, execute, parse_query
from infoforge.gallery import index_gallery, search_animated, search_static
from infoforge.providers import fallback_embed

Q, N, T = ColumnKind.QUANTITATIVE, ColumnKind.NOMINAL, ColumnKind.TEMPORAL


@contextmanager
def criterion(name: str, budget_s: float):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    elapsed = time.perf_counter() - started
    assert elapsed < budget_s, f"{name}: {elapsed:.2f}s exceeds {budget_s}s budget"
    print(f"[PASS] {name} ({elapsed:.2f}s)")


# --- 1. Lakers query fidelity -----------------------------------------------------

LAKERS_QUERY = (
    "SELECT * FROM df WHERE team_name = 'Los Angeles Lakers' AND opponent = 'DET' "
    "AND season = '2003-04' AND period = 2 AND playoffs = 1 ORDER BY date LIMIT 10"
)


def test_criterion_1_lakers_query_fidelity():
    with criterion("1 Lakers query fidelity", budget_s=1.0):
        rows = build_nba_rows()
        assert len(rows) == 50
        ds = ingest_tabular(rows_to_csv(rows))

        q = parse_query(LAKERS_QUERY)
        assert q.predicates == [
            Comparison("team_name", "=", "Los Angeles Lakers"),
            Comparison("opponent", "=", "DET"),
            Comparison("season", "=", "2003-04"),
            Comparison("period", "=", 2.0),
            Comparison("playoffs", "=", 1.0),
        ]
        assert [(t.column, t.direction) for t in q.order_by] == [("date", "ASC")]
        assert q.limit == 10

        # brute-force row scan, stable date order, then the limit
        matching = [
            i for i, row in enumerate(rows)
            if row["team_name"] == "Los Angeles Lakers"
            and row["opponent"] == "DET"
            and row["season"] == "2003-04"
            and row["period"] == 2
            and row["playoffs"] == 1
        ]
        assert len(matching) == 14  # the limit actually trims
        expected = sorted(matching, key=lambda i: rows[i]["date"])[:10]

        table = execute(q, ds)
        assert table.row_indices == expected
        assert len(table.row_indices) <= 10
        dates = [rows[i]["date"] for i in table.row_indices]
        assert dates == sorted(dates)


# --- 2. Retrieval oracle ------------------------------------------------------------


def test_criterion_2_retrieval_oracle(tmp_path):
    manifest = make_gallery(tmp_path / "gal", n_static=30, n_animated=20)
    index = index_gallery(manifest)  # fallback embeddings
    assert len(index.assets) == 50

    static_entries = [
        (a.id, index.vectors[a.id]) for a in index.assets if a.kind == "static"
    ]
    animated_entries = [
        (a.id, index.vectors[a.id]) for a in index.assets if a.kind == "animated"
    ]
    queries = [
        "yellow canary circle emblem",
        "a red falcon star",
        "maple motion loop",
        "violet turtle hexagon number 8",
        "anchor",
    ]
    with criterion("2 retrieval oracle", budget_s=1.0):
        for chunk in queries:
            qv = fallback_embed(chunk)
            got_static = [i.ref for i in search_static(chunk, index).items]
            assert got_static == retrieval_oracle(qv, static_entries, 20)
            assert len(got_static) == 20  # 30 candidates capped at 20

            got_animated = [i.ref for i in search_animated(chunk, index).items]
            assert got_animated == retrieval_oracle(qv, animated_entries, 20)
            assert len(got_animated) == 20


# --- 3. Transport optimality --------------------------------------------------------

_SRC_COLORS = [(20, 20, 20), (200, 40, 40), (40, 160, 80), (60, 80, 220), (240, 230, 100)]
_DST_COLORS = [(250, 250, 250), (30, 90, 150), (170, 20, 120), (90, 200, 200), (120, 70, 10)]


def _palette(colors, weights):
    return Palette(bins=[ColorBin(c, w) for c, w in zip(colors, weights)])


def test_criterion_3_transport_optimality():
    with criterion("3 transport optimality", budget_s=10.0):
        vectors = grid_weight_vectors(bins=5, active_max=3, grid=4)
        assert len(vectors) == 65
        cost = [[lab_distance(s, t) for t in _DST_COLORS] for s in _SRC_COLORS]

        pairs = 0
        for ws in vectors:
            source = _palette(_SRC_COLORS, ws)
            for wt in vectors:
                plan = emd(source, _palette(_DST_COLORS, wt))
                best = transport_bruteforce(ws, wt, cost, grid=4)
                assert abs(plan.total_cost - best) <= 1e-9, (ws, wt)
                pairs += 1
        assert pairs == 65 * 65

        rng = random.Random(31415)
        for _ in range(1000):
            ws = [rng.random() + 1e-3 for _ in range(5)]
            wt = [rng.random() + 1e-3 for _ in range(5)]
            ws = [w / sum(ws) for w in ws]
            wt = [w / sum(wt) for w in wt]
            src = [tuple(rng.randrange(256) for _ in range(3)) for _ in range(5)]
            dst = [tuple(rng.randrange(256) for _ in range(3)) for _ in range(5)]
            plan = emd(_palette(src, ws), _palette(dst, wt))
            assert plan.flow.min() >= -1e-12
            np.testing.assert_allclose(plan.flow.sum(axis=1), ws, atol=1e-9)
            np.testing.assert_allclose(plan.flow.sum(axis=0), wt, atol=1e-9)
            assert abs(float((plan.flow * plan.cost).sum()) - plan.total_cost) <= 1e-9


# --- 4. Scheme preservation ---------------------------------------------------------


def _random_palette(rng):
    weights = [rng.random() + 1e-3 for _ in range(5)]
    weights = [w / sum(weights) for w in weights]
    colors = [tuple(rng.randrange(256) for _ in range(3)) for _ in range(5)]
    return _palette(colors, weights)


def test_criterion_4_scheme_preservation():
    with criterion("4 scheme preservation", budget_s=10.0):
        rng = random.Random(27182)
        for _ in range(500):
            # a sequential ramp: monotone lightness at one hue
            n = rng.randint(3, 8)
            base = rng.randrange(256), rng.randrange(256), rng.randrange(256)
            levels = sorted(rng.random() for _ in range(n))
            sources = []
            for level in levels:
                color = tuple(int(round(c * (0.25 + 0.75 * level))) for c in base)
                if color not in sources:
                    sources.append(color)
            if len(sources) < 2:
                continue
            target = _random_palette(rng)
            mapping = recolor_mapping(
                [(c, 1.0) for c in sources], target, SchemeKind.SEQUENTIAL
            )
            by_luma = sorted(sources, key=luma)
            out_lumas = [luma(mapping[c]) for c in by_luma]
            assert out_lumas == sorted(out_lumas), (sources, mapping)

        for _ in range(500):
            sources = []
            while len(sources) < 5:
                c = tuple(rng.randrange(256) for _ in range(3))
                if c not in sources:
                    sources.append(c)
            target = _random_palette(rng)
            mapping = recolor_mapping(
                [(c, 1.0) for c in sources], target, SchemeKind.CATEGORICAL
            )
            assert len(set(mapping.values())) == 5  # injective
            total = sum(lab_distance(s, mapping[s]) for s in sources)
            best = assignment_bruteforce(
                sources, target.colors(), lab_distance
            )
            assert abs(total - best) <= 1e-9


# --- 5. Enumeration oracle ----------------------------------------------------------

_NAMES = ["alpha", "bravo", "charlie", "delta", "echo"]
_MARK_PRIORITY = {"point": 0, "line": 1, "bar": 2, "arc": 3, "rect": 4, "histogram-bar": 5}


def _signature_csv(kinds):
    rows = 12
    header = ",".join(_NAMES)
    lines = [header]
    for j in range(rows):
        cells = []
        for i, kind in enumerate(kinds):
            if kind == "quantitative":
                cells.append(str(1 + 7 * i + j))
            elif kind == "nominal":
                cells.append(f"k{j % 3}")
            else:
                cells.append(f"2021-{i + 1:02d}-{j + 1:02d}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def test_criterion_5_enumeration_oracle():
    with criterion("5 enumeration oracle", budget_s=5.0):
        for kinds in itertools.product(["quantitative", "nominal", "temporal"], repeat=5):
            ds = ingest_tabular(_signature_csv(kinds))
            meta = extract_meta(ds)
            assert [c.kind.value for c in meta.columns] == list(kinds)

            specs = enumerate_charts(_NAMES, meta)
            got = sorted(spec_signature(s) for s in specs)
            cards = [3 if k == "nominal" else 12 for k in kinds]
            want = oracle_enumerate(list(zip(_NAMES, kinds, cards)))
            assert got == want, kinds

            batch = rank_charts(specs, _NAMES)
            assert len(batch.items) <= 20
            # the ranking is a strict total order we can recompute
            rank_of = {name: i for i, name in enumerate(_NAMES)}
            keys = sorted(
                (
                    -len(s.columns()),
                    min(rank_of[c] for c in s.columns()),
                    _MARK_PRIORITY[s.mark.value],
                    idx,
                )
                for idx, s in enumerate(specs)
            )
            expected_order = [
                spec_signature(specs[k[3]]) for k in keys[: len(batch.items)]
            ]
            ranked = [spec_signature(ChartSpec.from_json(i.data)) for i in batch.items]
            assert ranked == expected_order
            assert len(set(keys)) == len(keys)  # no two specs compare equal


# --- 6. Animation + sync ------------------------------------------------------------

_AXES_RE = re.compile(r'<g class="axes">.*?</g>', re.S)


def test_criterion_6_animation_and_sync():
    with criterion("6 animation + sync", budget_s=5.0):
        csv = (demo_recipe_path().parent / "canary_flight.csv").read_text("utf-8")
        ds = ingest_tabular(csv)
        meta = extract_meta(ds)
        spec = ChartSpec(
            mark=Mark.POINT,
            encodings=[
                ChannelEncoding(Channel.X, "x_position", Q),
                ChannelEncoding(Channel.Y, "y_position", Q),
                ChannelEncoding(Channel.COLOR, "wing_type", N),
            ],
            dataset_id=meta.dataset_id,
            color_scheme=[parse_hex(c) for c in CATEGORY10[:2]],
        )
        animated = animate_chart(spec, ds, "time_frame", 200)
        assert len(animated.frames) == 8  # 8 unique keys -> 8 frames
        assert animated.frame_keys == [str(k) for k in range(1, 9)]
        axes = {_AXES_RE.search(frame).group(0) for frame in animated.frames}
        assert len(axes) == 1  # axis domains shared across every frame

        other = AnimatedAsset(
            frames=[f"<svg><!-- {i} --></svg>" for i in range(24)],
            frame_delay_ms=125,
            source_kind="chart",
        )
        synced_a, synced_b = sync(animated, other)
        assert len(synced_a.frames) == 8 and synced_a.frame_delay_ms == 200
        assert len(synced_b.frames) == 24  # 24 is already a multiple of 8
        assert len(synced_b.frames) % len(synced_a.frames) == 0
        assert synced_b.frame_delay_ms == 67  # round(200 * 8 / 24)
        cycle_a = 200 * 8
        cycle_b = synced_b.frame_delay_ms * 24
        assert (cycle_a, cycle_b) == (1600, 1608)
        short_delay = min(synced_a.frame_delay_ms, synced_b.frame_delay_ms)
        assert abs(cycle_a - cycle_b) <= short_delay
        assert synced_a.restart and synced_b.restart


# --- 7. Palette extraction ----------------------------------------------------------

_STRIPES = [(16, 16, 16), (40, 60, 200), (30, 180, 60), (250, 140, 20), (245, 245, 245)]


def test_criterion_7_palette_extraction():
    with criterion("7 palette extraction", budget_s=5.0):
        image = np.zeros((50, 50, 4), dtype=np.uint8)
        for i, color in enumerate(_STRIPES):
            image[i * 10:(i + 1) * 10] = (*color, 255)

        palette = extract_palette(image)
        assert palette.sorted_by_luminosity
        lumas = [luma(c) for c in palette.colors()]
        assert lumas == sorted(lumas)
        assert palette.colors() == sorted(_STRIPES, key=luma)
        for b in palette.bins:
            assert abs(b.weight - 0.2) <= 0.01


# --- 8. Table 2 matrix --------------------------------------------------------------

# Independent transcription of the layer-config matrix (Table 2 analog):
# which config fields apply to which layer kinds.
_TABLE2 = {
    "showAxes": {"chart", "animated-chart", "dod"},
    "showLegend": {"chart", "animated-chart", "dod"},
    "animateColumn": {"chart"},
    "recolorMap": {"chart", "graphic", "text"},
    "opacity": {"chart", "animated-chart", "dod", "graphic", "animated-graphic",
                "highlight", "annotation", "text"},
    "thickness": {"chart", "dod", "annotation", "text"},
    "stylePattern": {"annotation", "text"},
    "frameDelayMs": {"animated-chart", "animated-graphic"},
}

_SAMPLES = {
    "showAxes": False, "showLegend": False, "animateColumn": "when",
    "recolorMap": {"#111111": "#222222"}, "opacity": 0.5,
    "thickness": 2.0, "stylePattern": "dotted", "frameDelayMs": 50,
}


def test_criterion_8_table2_matrix():
    with criterion("8 Table 2 matrix", budget_s=5.0):
        kinds = [k.value for k in docmod.LayerKind]
        assert set(kinds) == set().union(*_TABLE2.values())
        checked = 0
        for kind in docmod.LayerKind:
            for field in _TABLE2:
                doc = docmod.InfographicDocument(id="doc1")
                layer = docmod.add_layer(doc, "a1", kind)
                if kind.value in _TABLE2[field]:
                    docmod.set_config(doc, layer.id, field, _SAMPLES[field])
                    assert layer.config[field] == _SAMPLES[field]
                else:
                    with pytest.raises(ConfigMatrixError):
                        docmod.set_config(doc, layer.id, field, _SAMPLES[field])
                checked += 1
        assert checked == len(docmod.LayerKind) * len(_TABLE2)  # 8 x 8 grid


# --- 9. End-to-end determinism ------------------------------------------------------


def test_criterion_9_end_to_end_determinism(tmp_path):
    with criterion("9 end-to-end determinism", budget_s=10.0):
        reports = []
        for run in ("one", "two"):
            out = tmp_path / run
            report = run_recipe(demo_recipe_path(), out)
            assert report["error"] is None
            reports.append(report)

        first = (tmp_path / "one" / "static.svg").read_bytes()
        second = (tmp_path / "two" / "static.svg").read_bytes()
        assert first == second  # byte-identical static export

        doc_text = (tmp_path / "one" / "document.json").read_text("utf-8")
        assert doc_text == (tmp_path / "two" / "document.json").read_text("utf-8")
        doc = docmod.deserialize_document(doc_text)
        assert docmod.serialize_document(doc) == doc_text  # structural round trip

        timings = [
            json.loads((tmp_path / run / "frames" / "manifest.json").read_text("utf-8"))
            for run in ("one", "two")
        ]
        assert timings[0] == timings[1]
        assert timings[0]["frameCount"] == len(reports[0]["exports"]["frames"])
