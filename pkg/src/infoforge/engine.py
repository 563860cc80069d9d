"""The orchestration facade: one object owning datasets, messages,
recommendation batches, materialized assets, and documents, with the
provider suite injected.

Datasets, the gallery index, and documents are file-backed under
``data_dir`` when one is given; batches and assets are session state.
"""

from __future__ import annotations

import json
import re
from dataclasses import replace
from pathlib import Path

from . import compose, document as docmod, svg
from .charts import (
    AnimatedAsset,
    ChartImage,
    ChartSpec,
    animate_chart,
    enumerate_charts,
    rank_charts,
    render_chart,
)
from .chroma import Palette, palette_from_text
from .color import parse_hex, to_hex
from .dataset import (
    Dataset,
    DatasetMeta,
    extract_meta,
    ingest_tabular,
    load_dataset,
    save_dataset,
)
from .document import InfographicDocument, Layer, LayerKind, TextPayload
from .errors import (
    ComposeError,
    DocumentError,
    GalleryError,
    LockedLayerError,
    UnknownIdError,
)
from .filterql import FilteredTable, execute, generate_filter, parse_query, render_query
from .gallery import GalleryIndex, index_gallery, search_animated, search_static
from .intent import (
    AssetKind,
    KeyMessage,
    MessageRegistry,
    RecommendationBatch,
    RecommendationItem,
    relevant_columns,
)
from .providers import ProviderSuite, fallback_suite

_STYLE_DASHES = {"solid": "", "dashed": "6 4", "dotted": "2 3"}

_LAYER_KIND_FOR = {
    "chart": LayerKind.CHART,
    "animated-chart": LayerKind.ANIMATED_CHART,
    "dod": LayerKind.DOD,
    "graphic": LayerKind.GRAPHIC,
    "animated-graphic": LayerKind.ANIMATED_GRAPHIC,
    "highlight": LayerKind.HIGHLIGHT,
    "annotation": LayerKind.ANNOTATION,
    "text": LayerKind.TEXT,
}


class Engine:
    def __init__(
        self,
        data_dir: str | Path | None = None,
        suite: ProviderSuite | None = None,
        gallery_manifest: str | Path | None = None,
    ):
        self.suite = suite or fallback_suite()
        self.data_dir = Path(data_dir) if data_dir else None
        self.registry = MessageRegistry()
        self.datasets: dict[str, Dataset] = {}
        self.metas: dict[str, DatasetMeta] = {}
        self.assets: dict[str, object] = {}
        self.asset_info: dict[str, dict] = {}
        self.documents: dict[str, InfographicDocument] = {}
        self.gallery_index: GalleryIndex | None = None
        self._counter = 0
        self._last_dataset: str | None = None
        if self.data_dir:
            self._load_state()
        if gallery_manifest:
            self.load_gallery(gallery_manifest)

    # -- state plumbing

    def _next(self, prefix: str) -> str:
        self._counter += 1
        return f"{prefix}{self._counter}"

    def _load_state(self) -> None:
        dataset_dir = self.data_dir / "datasets"
        if dataset_dir.is_dir():
            for schema_path in sorted(dataset_dir.glob("*.schema.json")):
                ds = load_dataset(schema_path)
                self.datasets[ds.id] = ds
                self.metas[ds.id] = extract_meta(ds)
                self._last_dataset = ds.id
        doc_dir = self.data_dir / "documents"
        if doc_dir.is_dir():
            for path in sorted(doc_dir.glob("*.json")):
                doc = docmod.deserialize_document(path.read_text("utf-8"))
                self.documents[doc.id] = doc
                for text in doc.text_layers:
                    self.assets[text.id] = text
                    self.asset_info[text.id] = {"kind": "text"}

    def _persist_document(self, doc: InfographicDocument) -> None:
        if not self.data_dir:
            return
        doc_dir = self.data_dir / "documents"
        doc_dir.mkdir(parents=True, exist_ok=True)
        (doc_dir / f"{doc.id}.json").write_text(docmod.serialize_document(doc), "utf-8")

    def _register(self, kind: str, asset, **info) -> str:
        asset_id = self._next("a")
        self.assets[asset_id] = asset
        self.asset_info[asset_id] = {"kind": kind, **info}
        return asset_id

    def asset(self, asset_id: str):
        try:
            return self.assets[asset_id]
        except KeyError:
            raise UnknownIdError(f"unknown asset {asset_id!r}") from None

    def info(self, asset_id: str) -> dict:
        self.asset(asset_id)
        return self.asset_info[asset_id]

    def describe(self, asset_id: str) -> dict:
        """JSON-safe description of any materialized asset, the shape the
        HTTP facade and recipe reports hand out."""
        asset = self.asset(asset_id)
        info = self.info(asset_id)
        out: dict = {"id": asset_id, "kind": info["kind"]}
        if info.get("chunkText"):
            out["chunkText"] = info["chunkText"]
        if isinstance(asset, ChartImage):
            out["image"] = asset.to_json()
            spec = info.get("spec")
            if spec is not None:
                out["spec"] = spec.to_json()
            if info.get("baseAssetId"):
                out["baseAssetId"] = info["baseAssetId"]
            if info.get("annotationIds"):
                out["annotationIds"] = list(info["annotationIds"])
            overlay = info.get("overlay")
            if overlay is not None:
                out["overlay"] = overlay.to_json()
        elif isinstance(asset, AnimatedAsset):
            out["animation"] = asset.to_json()
            spec = info.get("spec")
            if spec is not None:
                out["spec"] = spec.to_json()
            if info.get("timeColumn"):
                out["timeColumn"] = info["timeColumn"]
        elif isinstance(asset, FilteredTable):
            out["table"] = asset.to_json()
        elif isinstance(asset, Palette):
            out["palette"] = asset.to_json()
            if info.get("keyword"):
                out["keyword"] = info["keyword"]
        elif isinstance(asset, compose.Annotation):
            out["annotation"] = asset.to_json()
        elif isinstance(asset, TextPayload):
            out["text"] = asset.to_json()
        else:  # gallery GraphicAsset, static or animated
            out["caption"] = asset.caption
            out["license"] = asset.license
            if isinstance(asset.payload, AnimatedAsset):
                out["animation"] = asset.payload.to_json()
                out["frameCaptions"] = list(asset.frame_captions)
            else:
                out["payload"] = asset.payload
        return out

    # -- datasets

    def ingest(self, content: str, delimiter: str = ",") -> DatasetMeta:
        """Ingest delimited text; identical content returns the existing
        dataset (ids are content digests)."""
        ds = ingest_tabular(content, delimiter)
        if ds.id not in self.datasets:
            self.datasets[ds.id] = ds
            self.metas[ds.id] = extract_meta(ds)
            if self.data_dir:
                save_dataset(ds, self.data_dir / "datasets")
        self._last_dataset = ds.id
        return self.metas[ds.id]

    def dataset(self, dataset_id: str) -> Dataset:
        try:
            return self.datasets[dataset_id]
        except KeyError:
            raise UnknownIdError(f"unknown dataset {dataset_id!r}") from None

    def meta(self, dataset_id: str) -> DatasetMeta:
        self.dataset(dataset_id)
        return self.metas[dataset_id]

    def _dataset_for(self, dataset_id: str | None) -> tuple[Dataset, DatasetMeta]:
        ds_id = dataset_id or self._last_dataset
        if ds_id is None:
            raise UnknownIdError("no dataset imported")
        return self.dataset(ds_id), self.meta(ds_id)

    # -- gallery

    def load_gallery(self, manifest_path: str | Path) -> GalleryIndex:
        self.gallery_index = index_gallery(
            Path(manifest_path),
            embed=self.suite.embedding,
            embedding_name=self.suite.name,
        )
        return self.gallery_index

    # -- messages and recommendations

    def create_message(self, text: str) -> KeyMessage:
        return self.registry.create_message(text)

    def brush(
        self,
        message_id: str,
        start: int,
        end: int,
        kind: AssetKind | str,
        dataset_id: str | None = None,
    ) -> tuple[str, RecommendationBatch]:
        """Register the span and produce its recommendation batch."""
        message = self.registry.get_message(message_id)
        kind = AssetKind(kind)
        ds_id = dataset_id or self._last_dataset
        request = self.registry.brush(message, start, end, kind, ds_id)
        chunk = self.registry.find_chunk(request.chunk_id)
        items = self._recommend(request, chunk.text)
        batch = self.registry.record_batch(request, items)
        return self.registry.batch_id_of(batch), batch

    def _recommend(self, request, chunk_text: str) -> list[RecommendationItem]:
        kind = request.kind
        if kind == AssetKind.VISUALIZATION:
            ds, meta = self._dataset_for(request.dataset_id)
            relevant = relevant_columns(chunk_text, meta, self.suite)
            specs = enumerate_charts(relevant, meta)
            return rank_charts(specs, relevant, request).items
        if kind == AssetKind.DATA_FILTER:
            ds, meta = self._dataset_for(request.dataset_id)
            text = generate_filter(chunk_text, meta, self.suite)
            table = execute(parse_query(text), ds)
            return [
                RecommendationItem(
                    ref=f"{request.id}.0",
                    kind=kind,
                    score=1.0,
                    label=render_query(table.query),
                    data=table.to_json(),
                )
            ]
        if kind == AssetKind.STATIC_GRAPHIC:
            if self.gallery_index is None:
                return []
            return search_static(chunk_text, self.gallery_index, request=request).items
        if kind == AssetKind.ANIMATED_GRAPHIC:
            if self.gallery_index is None:
                return []
            return search_animated(chunk_text, self.gallery_index, request=request).items
        # color palettes
        keyword_palettes = palette_from_text(chunk_text, self.suite)
        return [
            RecommendationItem(
                ref=f"{request.id}.{i}",
                kind=kind,
                score=1.0,
                label=kp.keyword,
                data={"keyword": kp.keyword, "palette": kp.palette.to_json()},
            )
            for i, kp in enumerate(keyword_palettes)
        ]

    def get_batch(self, batch_id: str) -> RecommendationBatch:
        return self.registry.get_batch(batch_id)

    def gallery_search(self, kind: str, q: str, k: int = 20) -> tuple[str, RecommendationBatch]:
        """Standalone gallery query: a one-off message brushed whole, so the
        results stay pickable like any other batch."""
        names = {
            "static": AssetKind.STATIC_GRAPHIC,
            "animated": AssetKind.ANIMATED_GRAPHIC,
            AssetKind.STATIC_GRAPHIC.value: AssetKind.STATIC_GRAPHIC,
            AssetKind.ANIMATED_GRAPHIC.value: AssetKind.ANIMATED_GRAPHIC,
        }
        asset_kind = names.get(kind)
        if asset_kind is None:
            raise GalleryError(f"gallery search kind must be static or animated, not {kind!r}")
        message = self.create_message(q)
        batch_id, batch = self.brush(message.id, 0, len(q), asset_kind)
        batch.items[:] = batch.items[: max(k, 0)]
        return batch_id, batch

    def palettes_from_text(self, text: str) -> tuple[str, RecommendationBatch]:
        """Standalone palette extraction over a one-off whole-text chunk."""
        message = self.create_message(text)
        return self.brush(message.id, 0, len(text), AssetKind.COLOR_PALETTE)

    # -- picking (materialize a recommendation into an asset)

    def pick(self, batch_id: str, index: int | None = None, ref: str | None = None) -> str:
        batch = self.registry.get_batch(batch_id)
        if index is None and ref is None:
            raise UnknownIdError("pick needs an item index or ref")
        if index is not None:
            if not 0 <= index < len(batch.items):
                raise UnknownIdError(
                    f"batch {batch_id} has {len(batch.items)} items, no index {index}"
                )
            item = batch.items[index]
        else:
            item = next((i for i in batch.items if i.ref == ref), None)
            if item is None:
                raise UnknownIdError(f"batch {batch_id} has no item ref {ref!r}")
        chunk = self.registry.find_chunk(batch.source_chunk_id)
        return self._materialize(item, chunk.text)

    def _materialize(self, item: RecommendationItem, chunk_text: str) -> str:
        if item.kind == AssetKind.VISUALIZATION:
            spec = ChartSpec.from_json(item.data)
            ds = self.dataset(spec.dataset_id)
            image = render_chart(spec, ds)
            return self._register("chart", image, spec=spec, chunkText=chunk_text)
        if item.kind == AssetKind.DATA_FILTER:
            table = FilteredTable.from_json(item.data)
            return self._register("filter", table, chunkText=chunk_text)
        if item.kind in (AssetKind.STATIC_GRAPHIC, AssetKind.ANIMATED_GRAPHIC):
            if self.gallery_index is None:
                raise UnknownIdError("no gallery loaded")
            graphic = self.gallery_index.get(item.data["assetId"])
            kind = "graphic" if graphic.kind == "static" else "animated-graphic"
            return self._register(kind, graphic, galleryId=graphic.id, chunkText=chunk_text)
        palette = Palette.from_json(item.data["palette"])
        return self._register(
            "palette", palette, keyword=item.data.get("keyword", ""), chunkText=chunk_text
        )

    # -- charts

    def render_spec(self, spec_json: dict, dataset_id: str | None = None) -> tuple[str, ChartImage]:
        spec = ChartSpec.from_json(spec_json)
        if dataset_id and not spec.dataset_id:
            spec = replace(spec, dataset_id=dataset_id)
        ds = self.dataset(spec.dataset_id)
        image = render_chart(spec, ds)
        return self._register("chart", image, spec=spec, chunkText=""), image

    def animate(
        self, asset_id: str, time_column: str, frame_delay_ms: int = 200
    ) -> tuple[str, AnimatedAsset]:
        info = self.info(asset_id)
        if info["kind"] != "chart":
            raise ComposeError("only static charts can be animated")
        spec: ChartSpec = info["spec"]
        ds = self.dataset(spec.dataset_id)
        animated = animate_chart(spec, ds, time_column, frame_delay_ms)
        new_id = self._register(
            "animated-chart", animated, spec=spec, timeColumn=time_column,
            chunkText=info.get("chunkText", ""),
        )
        return new_id, animated

    # -- filters

    def parse_filter(self, text: str) -> str:
        return render_query(parse_query(text))

    def apply_filter(self, text: str, dataset_id: str | None = None) -> tuple[str, FilteredTable]:
        ds, _ = self._dataset_for(dataset_id)
        table = execute(parse_query(text), ds)
        return self._register("filter", table, chunkText=""), table

    # -- compose operations

    def _animated_of(self, asset_id: str) -> AnimatedAsset:
        asset = self.asset(asset_id)
        payload = docmod.animated_payload(asset)
        if payload is None:
            raise ComposeError(f"asset {asset_id!r} is not animated")
        return payload

    def recolor(self, asset_id: str, palette: Palette) -> str:
        info = self.info(asset_id)
        asset = self.asset(asset_id)
        kind = info["kind"]
        if kind in ("chart", "dod", "animated-chart"):
            spec: ChartSpec = info["spec"]
            restrict = [to_hex(c) for c in spec.color_scheme]
            hex_map = compose.recolor_map_for(asset, palette, spec.scheme_kind, restrict)
            recolored = compose.apply_recolor(asset, palette, spec.scheme_kind, restrict)
            new_scheme = [
                parse_hex(hex_map.get(to_hex(c), to_hex(c))) for c in spec.color_scheme
            ]
            new_info = dict(info)
            new_info["spec"] = replace(spec, color_scheme=new_scheme)
            asset_id = self._register(kind, recolored, **{
                k: v for k, v in new_info.items() if k != "kind"
            })
            return asset_id
        if kind in ("graphic", "animated-graphic"):
            recolored = compose.apply_recolor(asset, palette)
            return self._register(kind, recolored, **{
                k: v for k, v in info.items() if k != "kind"
            })
        raise ComposeError("recolor applies to charts and graphics")

    def dod(self, chart_asset_id: str, glyphs: dict[str, str], glyph_scale: float = 2.0) -> str:
        info = self.info(chart_asset_id)
        if info["kind"] != "chart":
            raise ComposeError("DOD needs a static chart asset")
        spec: ChartSpec = info["spec"]
        image: ChartImage = self.asset(chart_asset_id)
        ds = self.dataset(spec.dataset_id)
        payloads: dict[str, str] = {}
        for glyph_id in glyphs.values():
            glyph_info = self.info(glyph_id)
            if glyph_info["kind"] != "graphic":
                raise ComposeError("glyphs must be static graphics")
            payloads[glyph_id] = self.asset(glyph_id).payload
        glyph_map = compose.GlyphMap(glyphs=dict(glyphs), glyph_scale=glyph_scale)
        dod_image = compose.make_dod(spec, image, ds, glyph_map, payloads)
        return self._register(
            "dod", dod_image, spec=spec, glyphs=glyph_map,
            chunkText=info.get("chunkText", ""),
        )

    def highlight(
        self, chart_asset_id: str, filter_asset_id: str, chunk_text: str | None = None
    ) -> str:
        info = self.info(chart_asset_id)
        if info["kind"] != "chart":
            raise ComposeError("highlight needs a static chart asset")
        filter_info = self.info(filter_asset_id)
        if filter_info["kind"] != "filter":
            raise ComposeError("highlight needs a data-filter asset")
        spec: ChartSpec = info["spec"]
        image: ChartImage = self.asset(chart_asset_id)
        table: FilteredTable = self.asset(filter_asset_id)
        ds = self.dataset(spec.dataset_id)
        if chunk_text is None:
            chunk_text = filter_info.get("chunkText", "")
        result = compose.highlight(spec, image, table, chunk_text, ds, base_ref=chart_asset_id)
        if isinstance(result, ChartImage):
            # aggregated chart re-rendered over the filtered rows
            filtered_spec = replace(spec, row_filter=sorted(set(table.row_indices)))
            return self._register(
                "chart", result, spec=filtered_spec, chunkText=chunk_text,
            )
        annotation_ids = [
            self._register("annotation", ann) for ann in result.annotations
        ]
        composite = compose.render_highlight(replace(result, annotations=[]), image)
        return self._register(
            "highlight", composite, overlay=result, baseAssetId=chart_asset_id,
            annotationIds=annotation_ids, chunkText=chunk_text,
        )

    def sync(self, a_id: str, b_id: str) -> dict:
        a, b = self._animated_of(a_id), self._animated_of(b_id)
        synced_a, synced_b = compose.sync(a, b)
        self._store_animated(a_id, synced_a)
        self._store_animated(b_id, synced_b)
        # layers showing these assets keep their config honest
        for doc in self.documents.values():
            touched = False
            for layer in doc.layers:
                if layer.asset_ref == a_id and "frameDelayMs" in layer.config:
                    layer.config["frameDelayMs"] = synced_a.frame_delay_ms
                    touched = True
                elif layer.asset_ref == b_id and "frameDelayMs" in layer.config:
                    layer.config["frameDelayMs"] = synced_b.frame_delay_ms
                    touched = True
            if touched:
                self._persist_document(doc)
        return {
            "a": {"id": a_id, "frameDelayMs": synced_a.frame_delay_ms,
                  "frames": len(synced_a.frames), "restart": synced_a.restart},
            "b": {"id": b_id, "frameDelayMs": synced_b.frame_delay_ms,
                  "frames": len(synced_b.frames), "restart": synced_b.restart},
        }

    def _store_animated(self, asset_id: str, animated: AnimatedAsset) -> None:
        asset = self.asset(asset_id)
        if isinstance(asset, AnimatedAsset):
            self.assets[asset_id] = animated
        else:  # GraphicAsset wrapping an animation
            self.assets[asset_id] = replace(
                asset, payload=animated,
                frame_captions=asset.frame_captions[: len(animated.frames)],
            )

    # -- text

    def add_text(
        self,
        content: str,
        font_family_name: str = "sans-serif",
        size_pt: float = 14.0,
        color: str = "#333333",
        anchor: tuple[float, float] = (0.0, 0.0),
    ) -> str:
        text = TextPayload(
            id=self._next("a"), content=content, font_family_name=font_family_name,
            size_pt=size_pt, color=color, anchor=anchor,
        )
        self.assets[text.id] = text
        self.asset_info[text.id] = {"kind": "text"}
        return text.id

    # -- documents

    def create_document(
        self,
        message_ref: str = "",
        canvas_width: int | None = None,
        canvas_height: int | None = None,
    ) -> InfographicDocument:
        kwargs = {}
        if canvas_width is not None:
            kwargs["canvas_width"] = int(canvas_width)
        if canvas_height is not None:
            kwargs["canvas_height"] = int(canvas_height)
        doc = InfographicDocument(id=self._next("doc"), message_ref=message_ref, **kwargs)
        self.documents[doc.id] = doc
        self._persist_document(doc)
        return doc

    def get_document(self, doc_id: str) -> InfographicDocument:
        try:
            return self.documents[doc_id]
        except KeyError:
            raise UnknownIdError(f"unknown document {doc_id!r}") from None

    def list_documents(self) -> list[str]:
        return sorted(self.documents)

    def delete_document(self, doc_id: str) -> None:
        self.get_document(doc_id)
        del self.documents[doc_id]
        if self.data_dir:
            path = self.data_dir / "documents" / f"{doc_id}.json"
            if path.exists():
                path.unlink()

    def doc_restore(self, doc_id: str, snapshot) -> InfographicDocument:
        """Replace a document with a previously serialized snapshot and
        re-derive the render-affecting asset state it implies. GET and
        restore are symmetric, which is what undo/redo builds on."""
        self.get_document(doc_id)
        text = snapshot if isinstance(snapshot, str) else json.dumps(snapshot)
        doc = docmod.deserialize_document(text)
        if doc.id != doc_id:
            raise DocumentError(f"snapshot id {doc.id!r} does not match {doc_id!r}")
        # embedded text payloads are authoritative, same as on reload
        for text_layer in doc.text_layers:
            self.assets[text_layer.id] = text_layer
            self.asset_info[text_layer.id] = {"kind": "text"}
        for layer in doc.layers:
            if layer.asset_ref not in self.assets:
                raise UnknownIdError(f"unknown asset {layer.asset_ref!r}")
        self.documents[doc_id] = doc
        for layer in doc.layers:
            self._reconcile_layer(layer)
        self._persist_document(doc)
        return doc

    def _reconcile_layer(self, layer: Layer) -> None:
        """Make a restored layer's asset match its config again (show
        flags re-render; delays and annotation styling are reapplied)."""
        info = self.asset_info.get(layer.asset_ref, {})
        kind = info.get("kind")
        if kind in ("chart", "animated-chart", "dod") and info.get("spec") is not None:
            spec = replace(
                info["spec"],
                show_axes=bool(layer.config.get("showAxes", True)),
                show_legend=bool(layer.config.get("showLegend", True)),
            )
            info["spec"] = spec
            self._rerender_chart(layer.asset_ref, kind, info, spec)
        if "frameDelayMs" in layer.config:
            animated = docmod.animated_payload(self.asset(layer.asset_ref))
            if animated is not None:
                animated.frame_delay_ms = int(layer.config["frameDelayMs"])
        asset = self.asset(layer.asset_ref)
        if isinstance(asset, compose.Annotation):
            if "thickness" in layer.config:
                asset.line.thickness_px = float(layer.config["thickness"])
            if "stylePattern" in layer.config:
                asset.line.dash = _STYLE_DASHES[layer.config["stylePattern"]]

    def doc_add_layer(self, doc_id: str, asset_id: str) -> Layer:
        doc = self.get_document(doc_id)
        info = self.info(asset_id)
        kind = _LAYER_KIND_FOR.get(info["kind"])
        if kind is None:
            raise DocumentError(f"{info['kind']} assets cannot be layered onto the canvas")
        depends_on = info.get("baseAssetId")
        layer = docmod.add_layer(doc, asset_id, kind, assets=self.assets, depends_on=depends_on)
        animated = docmod.animated_payload(self.asset(asset_id))
        if animated is not None:
            docmod.set_config(doc, layer.id, "frameDelayMs", animated.frame_delay_ms)
        if kind == LayerKind.TEXT:
            text = self.asset(asset_id)
            if text not in doc.text_layers:
                doc.text_layers.append(text)
        # a highlight brings its annotation-line layers along
        for ann_id in info.get("annotationIds", []):
            docmod.add_layer(
                doc, ann_id, LayerKind.ANNOTATION, assets=self.assets, depends_on=asset_id
            )
        self._persist_document(doc)
        return layer

    def doc_swap_asset(self, doc_id: str, layer_id: str, asset_id: str) -> Layer:
        """Point a layer at a different asset (e.g. its recolored or DOD
        successor) keeping z-order and transform; config fields outside the
        new kind's matrix fall back to defaults, and dependents follow."""
        doc = self.get_document(doc_id)
        layer = doc.layer(layer_id)
        if layer.locked:
            raise LockedLayerError(f"layer {layer_id} is locked")
        info = self.info(asset_id)
        kind = _LAYER_KIND_FOR.get(info["kind"])
        if kind is None:
            raise DocumentError(f"{info['kind']} assets cannot be layered onto the canvas")
        old_ref = layer.asset_ref
        merged = docmod.default_config(kind)
        for key, val in layer.config.items():
            if key in merged:
                merged[key] = val
        layer.asset_ref = asset_id
        layer.kind = kind
        layer.config = merged
        for other in doc.layers:
            if other.depends_on == old_ref:
                other.depends_on = asset_id
        self._persist_document(doc)
        return layer

    def doc_set_config(self, doc_id: str, layer_id: str, name: str, value) -> Layer:
        doc = self.get_document(doc_id)
        layer = docmod.set_config(doc, layer_id, name, value)
        if name in docmod.RENDER_AFFECTING:
            self._apply_config_effect(doc, layer, name, value)
        elif name in ("thickness", "stylePattern"):
            asset = self.asset(layer.asset_ref)
            if isinstance(asset, compose.Annotation):
                if name == "thickness":
                    asset.line.thickness_px = float(value)
                else:
                    asset.line.dash = _STYLE_DASHES[value]
        self._persist_document(doc)
        return doc.layer(layer_id)

    def _apply_config_effect(self, doc, layer: Layer, name: str, value) -> None:
        info = self.asset_info.get(layer.asset_ref, {})
        kind = info.get("kind")
        if name in ("showAxes", "showLegend") and kind in ("chart", "animated-chart", "dod"):
            spec: ChartSpec = info["spec"]
            spec = replace(
                spec,
                show_axes=bool(layer.config.get("showAxes", True)),
                show_legend=bool(layer.config.get("showLegend", True)),
            )
            info["spec"] = spec
            self._rerender_chart(layer.asset_ref, kind, info, spec)
        elif name == "animateColumn" and kind == "chart" and value:
            delay = int(layer.config.get("frameDelayMs") or 200)
            new_id, _ = self.animate(layer.asset_ref, value, delay)
            layer.asset_ref = new_id
            layer.kind = LayerKind.ANIMATED_CHART
            merged = docmod.default_config(layer.kind)
            merged.update({k: v for k, v in layer.config.items() if k in merged})
            merged["frameDelayMs"] = delay
            layer.config = merged
        elif name == "recolorMap" and value:
            self._manual_recolor(layer.asset_ref, dict(value))
        elif name == "frameDelayMs":
            animated = self._animated_of(layer.asset_ref)
            animated.frame_delay_ms = int(value)

    def _rerender_chart(self, asset_id: str, kind: str, info: dict, spec: ChartSpec) -> None:
        ds = self.dataset(spec.dataset_id)
        if kind == "chart":
            self.assets[asset_id] = render_chart(spec, ds)
        elif kind == "dod":
            image = render_chart(spec, ds)
            glyph_map: compose.GlyphMap = info["glyphs"]
            payloads = {gid: self.asset(gid).payload for gid in glyph_map.glyphs.values()}
            self.assets[asset_id] = compose.make_dod(spec, image, ds, glyph_map, payloads)
        elif kind == "animated-chart":
            previous: AnimatedAsset = self.assets[asset_id]
            self.assets[asset_id] = animate_chart(
                spec, ds, info["timeColumn"], previous.frame_delay_ms
            )

    def _manual_recolor(self, asset_id: str, mapping: dict[str, str]) -> None:
        for value in list(mapping.keys()) + list(mapping.values()):
            if not re.fullmatch(r"#[0-9a-fA-F]{6}", value):
                raise DocumentError(f"recolorMap entries must be #rrggbb colors, got {value!r}")
        mapping = {k.lower(): v.lower() for k, v in mapping.items()}
        asset = self.asset(asset_id)
        info = self.asset_info[asset_id]
        if isinstance(asset, ChartImage):
            geometry = [
                replace(g, paint=mapping.get(g.paint.lower(), g.paint))
                for g in asset.mark_geometry
            ]
            self.assets[asset_id] = replace(
                asset, payload=svg.rewrite_paints(asset.payload, mapping),
                mark_geometry=geometry,
            )
            spec = info.get("spec")
            if spec is not None:
                info["spec"] = replace(spec, color_scheme=[
                    parse_hex(mapping.get(to_hex(c), to_hex(c))) for c in spec.color_scheme
                ])
        elif isinstance(asset, TextPayload):
            asset.color = mapping.get(asset.color.lower(), asset.color)
        else:  # graphic
            graphic = asset
            payload = graphic.payload
            if isinstance(payload, AnimatedAsset):
                payload = replace(
                    payload, frames=[svg.rewrite_paints(f, mapping) for f in payload.frames]
                )
            else:
                payload = svg.rewrite_paints(payload, mapping)
            self.assets[asset_id] = replace(graphic, payload=payload)

    def doc_reorder(self, doc_id: str, layer_id: str, direction: str) -> Layer:
        doc = self.get_document(doc_id)
        layer = docmod.reorder_layer(doc, layer_id, direction)
        self._persist_document(doc)
        return layer

    def doc_transform(self, doc_id: str, layer_id: str, **kwargs) -> Layer:
        doc = self.get_document(doc_id)
        layer = docmod.transform_layer(doc, layer_id, **kwargs)
        self._persist_document(doc)
        return layer

    def doc_remove_layer(self, doc_id: str, layer_id: str) -> list[str]:
        doc = self.get_document(doc_id)
        removed = docmod.remove_layer(doc, layer_id)
        self._persist_document(doc)
        return removed

    def doc_reset_animations(self, doc_id: str, tick_ms: int = 0) -> list[str]:
        doc = self.get_document(doc_id)
        affected = docmod.reset_animations(doc, self.assets, tick_ms)
        self._persist_document(doc)
        return affected

    def doc_export(self, doc_id: str, mode: str = "static-vector") -> dict:
        """Export a document; files land under data_dir/exports when the
        engine is file-backed."""
        doc = self.get_document(doc_id)
        out_dir = None
        if self.data_dir:
            out_dir = self.data_dir / "exports"
            out_dir.mkdir(parents=True, exist_ok=True)
        if mode == "static-vector":
            payload = docmod.export_static(doc, self.assets)
            result = {"mode": mode, "payload": payload}
            if out_dir:
                path = out_dir / f"{doc.id}.svg"
                path.write_text(payload, "utf-8")
                result["path"] = str(path)
            return result
        if mode == "frame-bundle":
            frames, manifest = docmod.export_frames(doc, self.assets)
            result = {"mode": mode, "frames": frames, "manifest": manifest}
            if out_dir:
                bundle = out_dir / f"{doc.id}_frames"
                bundle.mkdir(parents=True, exist_ok=True)
                paths = []
                for i, frame in enumerate(frames):
                    path = bundle / f"frame_{i:03d}.svg"
                    path.write_text(frame, "utf-8")
                    paths.append(str(path))
                (bundle / "manifest.json").write_text(json.dumps(manifest, indent=1), "utf-8")
                result["paths"] = paths
                result["manifestPath"] = str(bundle / "manifest.json")
            return result
        raise DocumentError(f"unknown export mode {mode!r}")
