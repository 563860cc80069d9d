"""Engine facade: ingest and persistence, brush-to-pick lifecycles, compose
operations routed through asset ids, and document config side effects."""

import json

import pytest

from conftest import TOY_CSV, make_gallery
from infoforge.charts import (
    CATEGORY10,
    Aggregate,
    AnimatedAsset,
    Channel,
    ChannelEncoding,
    ChartImage,
    ChartSpec,
    Mark,
)
from infoforge.chroma import PALETTE_BINS, ColorBin, Palette
from infoforge.color import parse_hex, to_hex
from infoforge.dataset import ColumnKind
from infoforge.document import LayerKind, TextPayload, serialize_document
from infoforge.engine import Engine
from infoforge.errors import (
    ComposeError,
    DocumentError,
    GalleryError,
    LockedLayerError,
    UnknownIdError,
)

Q, N, T = ColumnKind.QUANTITATIVE, ColumnKind.NOMINAL, ColumnKind.TEMPORAL

ENG_CSV = """\
cat,score,load,when
red,10,3,2021-01-01
blue,20,5,2021-01-02
red,30,4,2021-01-03
blue,40,8,2021-01-04
red,50,6,2021-01-05
blue,35,7,2021-01-06
"""

BRIGHTS = ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00"]


@pytest.fixture
def eng():
    e = Engine()
    ds_id = e.ingest(ENG_CSV).dataset_id
    return e, ds_id


@pytest.fixture
def geng(tmp_path):
    manifest = make_gallery(tmp_path / "gal", n_static=6, n_animated=4)
    e = Engine(gallery_manifest=manifest)
    ds_id = e.ingest(ENG_CSV).dataset_id
    return e, ds_id


def point_spec(ds_id, with_color=True):
    encodings = [
        ChannelEncoding(Channel.X, "score", Q),
        ChannelEncoding(Channel.Y, "load", Q),
    ]
    scheme = []
    if with_color:
        encodings.append(ChannelEncoding(Channel.COLOR, "cat", N))
        scheme = [parse_hex(c) for c in CATEGORY10[:2]]
    return ChartSpec(mark=Mark.POINT, encodings=encodings, dataset_id=ds_id,
                     color_scheme=scheme)


def bar_mean_spec(ds_id):
    return ChartSpec(
        mark=Mark.BAR,
        encodings=[
            ChannelEncoding(Channel.X, "cat", N),
            ChannelEncoding(Channel.Y, "score", Q, aggregate=Aggregate.MEAN),
        ],
        dataset_id=ds_id,
        color_scheme=[parse_hex(CATEGORY10[0])],
    )


def make_palette(colors):
    return Palette(bins=[ColorBin(parse_hex(c), 1 / PALETTE_BINS) for c in colors])


def chart_asset(e, ds_id, spec=None):
    asset_id, _ = e.render_spec((spec or point_spec(ds_id)).to_json())
    return asset_id


# --- datasets -------------------------------------------------------------------


def test_ingest_is_idempotent(eng):
    e, ds_id = eng
    again = e.ingest(ENG_CSV)
    assert again.dataset_id == ds_id
    assert len(e.datasets) == 1
    meta = e.meta(ds_id)
    assert [c.name for c in meta.columns] == ["cat", "score", "load", "when"]


def test_unknown_ids_raise(eng):
    e, _ = eng
    with pytest.raises(UnknownIdError):
        e.dataset("dnope")
    with pytest.raises(UnknownIdError):
        e.asset("a999")
    with pytest.raises(UnknownIdError):
        e.get_document("doc999")
    with pytest.raises(UnknownIdError):
        Engine().apply_filter("SELECT * FROM df")  # no dataset imported


# --- brush / pick lifecycles ----------------------------------------------------


def test_brush_visualization_flow(eng):
    e, ds_id = eng
    msg = e.create_message("score versus load across cat groups")
    batch_id, batch = e.brush(msg.id, 0, len(msg.text), "visualization")
    assert batch_id.startswith("b")
    assert e.get_batch(batch_id) is batch
    assert batch.items and len(batch.items) <= 20
    for item in batch.items:
        assert item.kind.value == "visualization"
        spec = ChartSpec.from_json(item.data)
        assert spec.dataset_id == ds_id


def test_pick_materializes_chart(eng):
    e, _ = eng
    msg = e.create_message("score versus load across cat groups")
    batch_id, batch = e.brush(msg.id, 0, len(msg.text), "visualization")
    asset_id = e.pick(batch_id, index=0)
    desc = e.describe(asset_id)
    assert desc["kind"] == "chart"
    assert desc["chunkText"] == msg.text
    assert desc["image"]["payload"].startswith("<svg")
    assert desc["spec"] == batch.items[0].data
    # ref picking materializes a fresh asset
    other = e.pick(batch_id, ref=batch.items[1].ref)
    assert other != asset_id
    assert e.describe(other)["spec"] == batch.items[1].data
    with pytest.raises(UnknownIdError):
        e.pick(batch_id)
    with pytest.raises(UnknownIdError):
        e.pick(batch_id, index=len(batch.items))
    with pytest.raises(UnknownIdError):
        e.pick(batch_id, ref="r0.999")
    with pytest.raises(UnknownIdError):
        e.get_batch("b404")


def test_brush_filter_and_pick(eng):
    e, ds_id = eng
    msg = e.create_message("rows with score above 25")
    batch_id, batch = e.brush(msg.id, 0, len(msg.text), "data-filter")
    assert len(batch.items) == 1
    asset_id = e.pick(batch_id, index=0)
    desc = e.describe(asset_id)
    assert desc["kind"] == "filter"
    # scores 30, 40, 50, 35 clear the threshold
    assert desc["table"]["rowIndices"] == [2, 3, 4, 5]
    assert desc["table"]["datasetId"] == ds_id
    assert "score > 25" in desc["table"]["query"]


def test_brush_palette_flow(eng):
    e, _ = eng
    msg = e.create_message("golden sunset")
    batch_id, batch = e.brush(msg.id, 0, len(msg.text), "color-palette")
    assert {i.label for i in batch.items} == {"golden", "sunset"}
    asset_id = e.pick(batch_id, index=0)
    desc = e.describe(asset_id)
    assert desc["kind"] == "palette"
    assert desc["keyword"] == batch.items[0].label
    assert len(desc["palette"]["colors"]) == PALETTE_BINS


def test_brush_graphics_without_gallery(eng):
    e, _ = eng
    msg = e.create_message("a canary emblem")
    _, batch = e.brush(msg.id, 0, len(msg.text), "static-graphic")
    assert batch.items == []


def test_gallery_search_and_pick(geng):
    e, _ = geng
    batch_id, batch = e.gallery_search("static", "yellow canary circle emblem", k=3)
    assert 0 < len(batch.items) <= 3
    assert all("assetId" in i.data for i in batch.items)
    asset_id = e.pick(batch_id, index=0)
    desc = e.describe(asset_id)
    assert desc["kind"] == "graphic"
    assert desc["payload"].startswith("<svg")
    assert desc["license"] == "CC0"

    batch_id, batch = e.gallery_search("animated-graphic", "canary motion loop")
    asset_id = e.pick(batch_id, index=0)
    desc = e.describe(asset_id)
    assert desc["kind"] == "animated-graphic"
    assert len(desc["animation"]["frames"]) == len(desc["frameCaptions"])

    with pytest.raises(GalleryError):
        e.gallery_search("holographic", "whatever")


def test_palettes_from_text(eng):
    e, _ = eng
    batch_id, batch = e.palettes_from_text("crimson tide")
    assert {i.label for i in batch.items} == {"crimson", "tide"}
    asset_id = e.pick(batch_id, ref=batch.items[1].ref)
    assert e.describe(asset_id)["kind"] == "palette"


# --- charts and filters ---------------------------------------------------------


def test_render_spec_registers_chart(eng):
    e, ds_id = eng
    asset_id, image = e.render_spec(point_spec(ds_id).to_json())
    assert isinstance(image, ChartImage)
    assert e.asset(asset_id) is image
    assert e.describe(asset_id)["image"]["width"] == image.width
    # a blank datasetId in the spec is filled from the request
    payload = point_spec(ds_id).to_json()
    payload["datasetId"] = ""
    asset_id, _ = e.render_spec(payload, dataset_id=ds_id)
    assert e.info(asset_id)["spec"].dataset_id == ds_id


def test_animate_chart_asset(eng):
    e, ds_id = eng
    chart_id = chart_asset(e, ds_id)
    anim_id, animated = e.animate(chart_id, "when", 120)
    assert isinstance(animated, AnimatedAsset)
    assert len(animated.frames) == 6  # one frame per distinct date
    assert animated.frame_delay_ms == 120
    desc = e.describe(anim_id)
    assert desc["kind"] == "animated-chart"
    assert desc["timeColumn"] == "when"
    with pytest.raises(ComposeError):
        e.animate(anim_id, "when")  # only static charts animate


def test_parse_and_apply_filter(eng):
    e, ds_id = eng
    assert e.parse_filter("select * from df where cat='red'") == (
        "SELECT * FROM df WHERE cat = 'red'"
    )
    asset_id, table = e.apply_filter("SELECT * FROM df WHERE cat = 'red'")
    assert table.dataset_id == ds_id
    assert table.row_indices == [0, 2, 4]
    assert e.describe(asset_id)["kind"] == "filter"


# --- compose operations ---------------------------------------------------------


def test_recolor_chart(eng):
    e, ds_id = eng
    chart_id = chart_asset(e, ds_id)
    before = e.asset(chart_id)
    new_id = e.recolor(chart_id, make_palette(BRIGHTS))
    assert new_id != chart_id
    assert e.asset(chart_id) is before  # original untouched
    new_spec = e.info(new_id)["spec"]
    new_hexes = [to_hex(c) for c in new_spec.color_scheme]
    assert set(new_hexes) <= set(BRIGHTS)
    assert len(set(new_hexes)) == 2
    payload = e.asset(new_id).payload
    for old, new in zip(CATEGORY10[:2], new_hexes):
        assert old not in payload
        assert new in payload
    geometry_paints = {g.paint for g in e.asset(new_id).mark_geometry}
    assert geometry_paints == set(new_hexes)


def test_recolor_graphic_and_errors(geng):
    e, ds_id = geng
    batch_id, _ = e.gallery_search("static", "maple emblem")
    graphic_id = e.pick(batch_id, index=0)
    new_id = e.recolor(graphic_id, make_palette(BRIGHTS))
    desc = e.describe(new_id)
    assert desc["kind"] == "graphic"
    assert any(c in desc["payload"] for c in BRIGHTS)
    filter_id, _ = e.apply_filter("SELECT * FROM df")
    with pytest.raises(ComposeError):
        e.recolor(filter_id, make_palette(BRIGHTS))


def test_dod_flow(geng):
    e, ds_id = geng
    chart_id = chart_asset(e, ds_id)
    batch_id, batch = e.gallery_search("static", "emblem", k=2)
    g1, g2 = (e.pick(batch_id, index=i) for i in range(2))
    dod_id = e.dod(chart_id, {"blue": g1, "red": g2})
    desc = e.describe(dod_id)
    assert desc["kind"] == "dod"
    image = e.asset(dod_id)
    assert all(g.shape == "glyph" for g in image.mark_geometry)
    with pytest.raises(ComposeError):
        e.dod(dod_id, {"blue": g1, "red": g2})  # needs a static chart
    with pytest.raises(ComposeError):
        e.dod(chart_id, {"blue": g1, "red": chart_id})  # glyphs must be graphics


def test_highlight_overlay_flow(eng):
    e, ds_id = eng
    chart_id = chart_asset(e, ds_id)
    filter_id, _ = e.apply_filter("SELECT * FROM df WHERE cat = 'red'")
    hl_id = e.highlight(chart_id, filter_id, chunk_text="reds run hot")
    desc = e.describe(hl_id)
    assert desc["kind"] == "highlight"
    assert desc["baseAssetId"] == chart_id
    assert desc["overlay"]["emphasizedMarks"] == [0, 2, 4]
    assert len(desc["annotationIds"]) == 1
    ann = e.describe(desc["annotationIds"][0])
    assert ann["kind"] == "annotation"
    assert ann["annotation"]["labelText"] == "reds run hot"
    with pytest.raises(ComposeError):
        e.highlight(filter_id, filter_id)
    with pytest.raises(ComposeError):
        e.highlight(chart_id, chart_id)


def test_highlight_aggregated_reregisters_chart(eng):
    e, ds_id = eng
    chart_id = chart_asset(e, ds_id, bar_mean_spec(ds_id))
    filter_id, table = e.apply_filter("SELECT * FROM df WHERE score > 25")
    new_id = e.highlight(chart_id, filter_id)
    desc = e.describe(new_id)
    assert desc["kind"] == "chart"
    assert desc["spec"]["rowFilter"] == sorted(table.row_indices)


def test_sync_updates_assets_and_layers(geng):
    e, ds_id = geng
    chart_id = chart_asset(e, ds_id)
    anim_id, _ = e.animate(chart_id, "when", 200)  # 6 frames @200ms
    batch_id, _ = e.gallery_search("animated-graphic", "canary motion loop number 0")
    graphic_id = e.pick(batch_id, ref="an00")  # 2 frames @100ms

    doc = e.create_document()
    la = e.doc_add_layer(doc.id, anim_id)
    lb = e.doc_add_layer(doc.id, graphic_id)
    assert la.config["frameDelayMs"] == 200
    assert lb.config["frameDelayMs"] == 100

    result = e.sync(anim_id, graphic_id)
    # chart is authoritative when kinds differ: 6 frames keep 200ms,
    # the 2-frame graphic stretches to round(200*6/2) = 600ms
    assert result["a"] == {"id": anim_id, "frameDelayMs": 200, "frames": 6, "restart": True}
    assert result["b"] == {"id": graphic_id, "frameDelayMs": 600, "frames": 2, "restart": True}
    assert doc.layer(la.id).config["frameDelayMs"] == 200
    assert doc.layer(lb.id).config["frameDelayMs"] == 600
    graphic = e.asset(graphic_id)
    assert len(graphic.frame_captions) == len(graphic.payload.frames) == 2
    with pytest.raises(ComposeError):
        e.sync(chart_id, anim_id)  # static charts have no animation


# --- text and documents ---------------------------------------------------------


def test_add_text_and_text_layer(eng):
    e, _ = eng
    text_id = e.add_text("Quarterly spike", size_pt=18.0, color="#112233")
    desc = e.describe(text_id)
    assert desc["kind"] == "text"
    assert desc["text"]["content"] == "Quarterly spike"
    doc = e.create_document()
    layer = e.doc_add_layer(doc.id, text_id)
    assert layer.kind == LayerKind.TEXT
    assert any(t.id == text_id for t in doc.text_layers)


def test_document_crud(tmp_path):
    e = Engine(data_dir=tmp_path)
    doc = e.create_document(message_ref="m1", canvas_width=800, canvas_height=500)
    assert doc.canvas_width == 800 and doc.canvas_height == 500
    assert e.get_document(doc.id) is doc
    other = e.create_document()
    assert e.list_documents() == sorted([doc.id, other.id])
    path = tmp_path / "documents" / f"{doc.id}.json"
    assert path.is_file()
    e.delete_document(doc.id)
    assert not path.exists()
    assert e.list_documents() == [other.id]
    with pytest.raises(UnknownIdError):
        e.delete_document(doc.id)


def test_doc_add_layer_kinds(eng):
    e, ds_id = eng
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    layer = e.doc_add_layer(doc.id, chart_id)
    assert layer.kind == LayerKind.CHART
    filter_id, _ = e.apply_filter("SELECT * FROM df")
    with pytest.raises(DocumentError):
        e.doc_add_layer(doc.id, filter_id)


def test_doc_add_layer_brings_annotations(eng):
    e, ds_id = eng
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    filter_id, _ = e.apply_filter("SELECT * FROM df WHERE cat = 'red'")
    hl_id = e.highlight(chart_id, filter_id, chunk_text="note")
    e.doc_add_layer(doc.id, hl_id)
    kinds = [layer.kind for layer in doc.by_z()]
    assert kinds == [LayerKind.HIGHLIGHT, LayerKind.ANNOTATION]
    ann_layer = doc.by_z()[1]
    assert ann_layer.depends_on == hl_id
    assert doc.by_z()[0].depends_on == chart_id


def test_doc_swap_asset(eng):
    e, ds_id = eng
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    layer = e.doc_add_layer(doc.id, chart_id)
    e.doc_set_config(doc.id, layer.id, "showAxes", False)
    filter_id, _ = e.apply_filter("SELECT * FROM df WHERE cat = 'red'")
    hl_id = e.highlight(chart_id, filter_id, chunk_text="note")
    hl_layer = e.doc_add_layer(doc.id, hl_id)
    assert hl_layer.depends_on == chart_id

    anim_id, _ = e.animate(chart_id, "when")
    swapped = e.doc_swap_asset(doc.id, layer.id, anim_id)
    assert swapped.kind == LayerKind.ANIMATED_CHART
    assert swapped.asset_ref == anim_id
    assert swapped.config["showAxes"] is False  # shared field survives
    assert "animateColumn" not in swapped.config  # chart-only field dropped
    assert doc.layer(hl_layer.id).depends_on == anim_id  # dependents follow

    swapped.locked = True
    with pytest.raises(LockedLayerError):
        e.doc_swap_asset(doc.id, layer.id, chart_id)


def test_config_show_axes_rerenders(eng):
    e, ds_id = eng
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    layer = e.doc_add_layer(doc.id, chart_id)
    before = e.asset(chart_id).payload
    e.doc_set_config(doc.id, layer.id, "showAxes", False)
    after = e.asset(chart_id).payload
    assert after != before
    assert e.info(chart_id)["spec"].show_axes is False
    e.doc_set_config(doc.id, layer.id, "showAxes", True)
    assert e.asset(chart_id).payload == before


def test_config_animate_column_converts_layer(eng):
    e, ds_id = eng
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    layer = e.doc_add_layer(doc.id, chart_id)
    updated = e.doc_set_config(doc.id, layer.id, "animateColumn", "when")
    assert updated.kind == LayerKind.ANIMATED_CHART
    assert updated.asset_ref != chart_id
    assert updated.config["frameDelayMs"] == 200
    animated = e.asset(updated.asset_ref)
    assert isinstance(animated, AnimatedAsset) and len(animated.frames) == 6
    assert isinstance(e.asset(chart_id), ChartImage)  # original chart kept


def test_config_recolor_map(eng):
    e, ds_id = eng
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    layer = e.doc_add_layer(doc.id, chart_id)
    e.doc_set_config(doc.id, layer.id, "recolorMap", {CATEGORY10[0]: "#112233"})
    image = e.asset(chart_id)
    assert "#112233" in image.payload
    assert CATEGORY10[0] not in image.payload
    assert "#112233" in {g.paint for g in image.mark_geometry}
    scheme = [to_hex(c) for c in e.info(chart_id)["spec"].color_scheme]
    assert scheme == ["#112233", CATEGORY10[1]]
    with pytest.raises(DocumentError):
        e.doc_set_config(doc.id, layer.id, "recolorMap", {"red": "#112233"})


def test_config_frame_delay_mutates_asset(eng):
    e, ds_id = eng
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    anim_id, animated = e.animate(chart_id, "when", 200)
    layer = e.doc_add_layer(doc.id, anim_id)
    e.doc_set_config(doc.id, layer.id, "frameDelayMs", 50)
    assert animated.frame_delay_ms == 50


def test_config_annotation_style(eng):
    e, ds_id = eng
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    filter_id, _ = e.apply_filter("SELECT * FROM df WHERE cat = 'red'")
    hl_id = e.highlight(chart_id, filter_id, chunk_text="note")
    e.doc_add_layer(doc.id, hl_id)
    ann_layer = doc.by_z()[1]
    ann = e.asset(ann_layer.asset_ref)
    e.doc_set_config(doc.id, ann_layer.id, "thickness", 3.0)
    assert ann.line.thickness_px == 3.0
    e.doc_set_config(doc.id, ann_layer.id, "stylePattern", "dashed")
    assert ann.line.dash == "6 4"
    e.doc_set_config(doc.id, ann_layer.id, "stylePattern", "dotted")
    assert ann.line.dash == "2 3"


def test_doc_export_modes(tmp_path):
    e = Engine(data_dir=tmp_path)
    ds_id = e.ingest(ENG_CSV).dataset_id
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    e.doc_add_layer(doc.id, chart_id)
    static = e.doc_export(doc.id)
    assert static["mode"] == "static-vector"
    assert static["payload"].startswith("<svg")
    assert (tmp_path / "exports" / f"{doc.id}.svg").read_text("utf-8") == static["payload"]

    anim_id, _ = e.animate(chart_id, "when", 100)
    e.doc_add_layer(doc.id, anim_id)
    bundle = e.doc_export(doc.id, "frame-bundle")
    assert bundle["manifest"]["frameCount"] == len(bundle["frames"]) == 6
    assert len(bundle["paths"]) == 6
    manifest_path = tmp_path / "exports" / f"{doc.id}_frames" / "manifest.json"
    assert json.loads(manifest_path.read_text("utf-8")) == bundle["manifest"]

    with pytest.raises(DocumentError):
        e.doc_export(doc.id, "gif")


def test_doc_wrappers_persist(tmp_path):
    e = Engine(data_dir=tmp_path)
    ds_id = e.ingest(ENG_CSV).dataset_id
    doc = e.create_document()
    a = e.doc_add_layer(doc.id, chart_asset(e, ds_id))
    b = e.doc_add_layer(doc.id, chart_asset(e, ds_id))
    e.doc_reorder(doc.id, a.id, "forward")
    e.doc_transform(doc.id, b.id, tx_px=10.0, ty_px=-5.0, rotation_deg=90.0)
    path = tmp_path / "documents" / f"{doc.id}.json"
    stored = json.loads(path.read_text("utf-8"))
    assert [l["id"] for l in stored["layers"]] == [b.id, a.id]
    assert stored["layers"][0]["transform"]["txPx"] == 10.0
    assert stored["layers"][0]["transform"]["tyPx"] == -5.0
    removed = e.doc_remove_layer(doc.id, b.id)
    assert removed == [b.id]
    stored = json.loads(path.read_text("utf-8"))
    assert [l["id"] for l in stored["layers"]] == [a.id]


def test_doc_reset_animations(eng):
    e, ds_id = eng
    doc = e.create_document()
    chart_id = chart_asset(e, ds_id)
    anim_id, animated = e.animate(chart_id, "when")
    layer = e.doc_add_layer(doc.id, anim_id)
    animated.restart = True
    affected = e.doc_reset_animations(doc.id, tick_ms=40)
    assert affected == [layer.id]
    assert doc.layer(layer.id).playback_origin_ms == 40
    assert animated.restart is False


def test_persistence_roundtrip(tmp_path):
    e = Engine(data_dir=tmp_path)
    ds_id = e.ingest(ENG_CSV).dataset_id
    doc = e.create_document(message_ref="msg")
    text_id = e.add_text("headline", size_pt=20.0)
    e.doc_add_layer(doc.id, text_id)

    reloaded = Engine(data_dir=tmp_path)
    assert ds_id in reloaded.datasets
    assert reloaded.meta(ds_id).row_count == 6
    back = reloaded.get_document(doc.id)
    assert back.message_ref == "msg"
    assert [l.kind for l in back.by_z()] == [LayerKind.TEXT]
    desc = reloaded.describe(text_id)
    assert desc["kind"] == "text" and desc["text"]["content"] == "headline"
    # the reloaded dataset is current, so filters bind without an explicit id
    _, table = reloaded.apply_filter("SELECT * FROM df WHERE cat = 'blue'")
    assert table.row_indices == [1, 3, 5]


def test_doc_restore_roundtrips_add_and_config(tmp_path):
    e = Engine(data_dir=tmp_path)
    ds_id = e.ingest(ENG_CSV).dataset_id
    chart_id = chart_asset(e, ds_id)
    doc = e.create_document()
    layer = e.doc_add_layer(doc.id, chart_id)
    before = serialize_document(e.get_document(doc.id))
    payload_before = e.asset(chart_id).payload

    # mutate: config re-render plus a second layer
    e.doc_set_config(doc.id, layer.id, "showAxes", False)
    text_id = e.add_text("caption")
    e.doc_add_layer(doc.id, text_id)
    assert e.asset(chart_id).payload != payload_before

    restored = e.doc_restore(doc.id, json.loads(before))
    assert serialize_document(restored) == before
    # the restore re-rendered the chart back to its axes-on state
    assert e.asset(chart_id).payload == payload_before
    # and persisted the snapshot
    on_disk = (tmp_path / "documents" / f"{doc.id}.json").read_text("utf-8")
    assert on_disk == before


def test_doc_restore_forward_snapshots_and_errors(eng):
    e, ds_id = eng
    chart_id = chart_asset(e, ds_id)
    doc = e.create_document()
    layer = e.doc_add_layer(doc.id, chart_id)
    e.doc_set_config(doc.id, layer.id, "showAxes", False)
    after = serialize_document(e.get_document(doc.id))
    payload_after = e.asset(chart_id).payload

    # walk back, then restore the forward snapshot (a redo)
    e.doc_set_config(doc.id, layer.id, "showAxes", True)
    e.doc_restore(doc.id, json.loads(after))
    assert serialize_document(e.get_document(doc.id)) == after
    assert e.asset(chart_id).payload == payload_after

    with pytest.raises(DocumentError):
        bad = json.loads(after)
        bad["id"] = "doc999"
        e.doc_restore(doc.id, bad)
    with pytest.raises(UnknownIdError):
        dangling = json.loads(after)
        dangling["layers"][0]["assetRef"] = "a404"
        e.doc_restore(doc.id, dangling)
    with pytest.raises(UnknownIdError):
        e.doc_restore("doc404", json.loads(after))


def test_doc_restore_reconciles_delay_and_annotation_style(eng):
    e, ds_id = eng
    chart_id = chart_asset(e, ds_id)
    anim_id, _ = e.animate(chart_id, "when", frame_delay_ms=120)
    filt_id, _ = e.apply_filter("SELECT * FROM df WHERE cat = 'red'")
    hi_id = e.highlight(chart_id, filt_id, "red rows")
    doc = e.create_document()
    anim_layer = e.doc_add_layer(doc.id, anim_id)
    e.doc_add_layer(doc.id, hi_id)
    ann_layer = next(
        l for l in e.get_document(doc.id).layers if l.kind == LayerKind.ANNOTATION
    )
    snapshot = serialize_document(e.get_document(doc.id))

    e.doc_set_config(doc.id, anim_layer.id, "frameDelayMs", 50)
    e.doc_set_config(doc.id, ann_layer.id, "thickness", 4.0)
    e.doc_set_config(doc.id, ann_layer.id, "stylePattern", "dotted")
    assert e.asset(anim_id).frame_delay_ms == 50

    e.doc_restore(doc.id, json.loads(snapshot))
    assert e.asset(anim_id).frame_delay_ms == 120
    ann = e.asset(ann_layer.asset_ref)
    assert ann.line.thickness_px == 1.0
    assert ann.line.dash == ""
