"""Scriptable batch pipeline: reproduce an infographic from a recipe file
without the UI, against an embedded engine with fallback providers.

A recipe is a JSON file::

    {
      "dataset": "canary_flight.csv",        # path, relative to the recipe
      "delimiter": ",",
      "gallery": "gallery/manifest.json",    # optional
      "message": "The canary climbs ...",
      "canvas": {"width": 960, "height": 640},
      "steps": [ {"op": "brush", ...}, ... ]
    }

Steps run in order; a step that makes an asset can carry ``"layer": true``
to place it on the document. Later steps reference earlier results as
``"$<index>"`` (that step's asset or batch id), ``"$<index>.layer"`` and
``"$<index>.batch"``. Any step failure aborts the run with the step index;
the report still lists everything that happened up to that point.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import document as docmod
from .engine import Engine
from .errors import EngineError, RecipeError
from .providers import suite_named

EXPORT_MODES = ("svg", "frames", "both")


# --- reference resolution -------------------------------------------------------


class _Results:
    """Per-step outputs addressable as $N / $N.layer / $N.batch."""

    def __init__(self) -> None:
        self.steps: list[dict] = []

    def add(self, **outputs) -> dict:
        self.steps.append(outputs)
        return outputs

    def resolve(self, value):
        if isinstance(value, str) and value.startswith("$"):
            name, _, field = value[1:].partition(".")
            field = field or "asset"
            try:
                step = self.steps[int(name)]
            except (ValueError, IndexError):
                raise RecipeError(len(self.steps), f"bad step reference {value!r}") from None
            if field not in step or step[field] is None:
                raise RecipeError(
                    len(self.steps), f"step {name} has no {field!r} result ({value!r})"
                )
            return step[field]
        return value


# --- step execution --------------------------------------------------------------


def _maybe_layer(engine: Engine, doc_id: str, step: dict, asset_id: str) -> str | None:
    if not step.get("layer"):
        return None
    return engine.doc_add_layer(doc_id, asset_id).id


def _run_step(
    engine: Engine, doc_id: str, message_id: str, step: dict, results: _Results
) -> dict:
    op = step.get("op")
    r = results.resolve

    if op == "brush":
        start, end = step["span"]
        batch_id, batch = engine.brush(message_id, int(start), int(end), step["kind"])
        entry = {
            "op": op,
            "batch": batch_id,
            "items": [
                {"ref": i.ref, "label": i.label, "score": i.score} for i in batch.items
            ],
        }
        pick = step.get("pick")
        if pick is not None:
            if isinstance(pick, dict):
                asset_id = engine.pick(batch_id, ref=pick["ref"])
                entry["picked"] = {"ref": pick["ref"], "assetId": asset_id}
            else:
                asset_id = engine.pick(batch_id, index=int(pick))
                entry["picked"] = {"index": int(pick), "assetId": asset_id}
            entry["asset"] = asset_id
            entry["layer"] = _maybe_layer(engine, doc_id, step, asset_id)
        return entry

    if op == "animate":
        asset_id, _ = engine.animate(
            r(step["asset"]), step["timeColumn"], int(step.get("frameDelayMs", 200))
        )
        return {"op": op, "asset": asset_id,
                "layer": _maybe_layer(engine, doc_id, step, asset_id)}

    if op == "filter":
        asset_id, table = engine.apply_filter(step["text"])
        return {"op": op, "asset": asset_id, "rowIndices": table.row_indices}

    if op == "render":
        asset_id, _ = engine.render_spec(step["spec"])
        return {"op": op, "asset": asset_id,
                "layer": _maybe_layer(engine, doc_id, step, asset_id)}

    if op == "recolor":
        palette = engine.asset(r(step["palette"]))
        asset_id = engine.recolor(r(step["asset"]), palette)
        return {"op": op, "asset": asset_id,
                "layer": _maybe_layer(engine, doc_id, step, asset_id)}

    if op == "dod":
        glyphs = {value: r(ref) for value, ref in step["glyphs"].items()}
        asset_id = engine.dod(r(step["chart"]), glyphs, float(step.get("glyphScale", 2.0)))
        return {"op": op, "asset": asset_id,
                "layer": _maybe_layer(engine, doc_id, step, asset_id)}

    if op == "highlight":
        asset_id = engine.highlight(
            r(step["chart"]), r(step["filter"]), step.get("chunkText")
        )
        return {"op": op, "asset": asset_id,
                "layer": _maybe_layer(engine, doc_id, step, asset_id)}

    if op == "sync":
        return {"op": op, "sync": engine.sync(r(step["a"]), r(step["b"]))}

    if op == "text":
        asset_id = engine.add_text(
            step["content"],
            step.get("fontFamilyName", "sans-serif"),
            float(step.get("sizePt", 14.0)),
            step.get("color", "#333333"),
            tuple(step.get("anchor", (0.0, 0.0))),
        )
        return {"op": op, "asset": asset_id,
                "layer": _maybe_layer(engine, doc_id, step, asset_id)}

    if op == "config":
        layer = engine.doc_set_config(doc_id, r(step["layer"]), step["name"], step["value"])
        return {"op": op, "layer": layer.id}

    if op == "transform":
        kwargs = {
            key: float(step[name])
            for name, key in (
                ("txPx", "tx_px"), ("tyPx", "ty_px"),
                ("rotationDeg", "rotation_deg"), ("scale", "scale"),
            )
            if name in step
        }
        layer = engine.doc_transform(doc_id, r(step["layer"]), **kwargs)
        return {"op": op, "layer": layer.id}

    if op == "reorder":
        layer = engine.doc_reorder(doc_id, r(step["layer"]), step["direction"])
        return {"op": op, "layer": layer.id, "zOrder": layer.z_order}

    if op == "remove-layer":
        removed = engine.doc_remove_layer(doc_id, r(step["layer"]))
        return {"op": op, "removed": removed}

    if op == "reset-animations":
        ids = engine.doc_reset_animations(doc_id, int(step.get("tickMs", 0)))
        return {"op": op, "layers": ids}

    raise RecipeError(len(results.steps), f"unknown op {op!r}")


# --- recipe runner ----------------------------------------------------------------


def run_recipe(
    recipe_path: str | Path,
    out_dir: str | Path,
    dataset_override: str | Path | None = None,
    provider: str = "fallback",
    export: str = "both",
) -> dict:
    """Execute a recipe and write document, exports, and the run report
    under ``out_dir``. Returns the report; raises RecipeError on the first
    failing step (the report is on disk either way)."""
    recipe_path = Path(recipe_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if export not in EXPORT_MODES:
        raise RecipeError(-1, f"export mode must be one of {EXPORT_MODES}")

    try:
        recipe = json.loads(recipe_path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise RecipeError(-1, f"recipe does not parse: {exc}") from None

    report: dict = {
        "recipe": str(recipe_path),
        "provider": provider,
        "steps": [],
        "exports": {},
        "error": None,
    }

    def fail(index: int, exc: Exception) -> RecipeError:
        code = getattr(exc, "code", "error")
        report["error"] = {"stepIndex": index, "code": code, "message": str(exc)}
        _write_report(out_dir, report)
        if isinstance(exc, RecipeError):
            return exc
        return RecipeError(index, str(exc))

    try:
        engine = Engine(suite=suite_named(provider))
        dataset_path = Path(dataset_override) if dataset_override else (
            recipe_path.parent / recipe["dataset"]
        )
        meta = engine.ingest(
            dataset_path.read_text("utf-8"), recipe.get("delimiter", ",")
        )
        report["datasetId"] = meta.dataset_id
        if recipe.get("gallery"):
            index = engine.load_gallery(recipe_path.parent / recipe["gallery"])
            report["gallery"] = {
                "assets": len(index.assets),
                "skipped": index.skipped,
            }
        message = engine.create_message(recipe["message"])
        report["messageId"] = message.id
        canvas = recipe.get("canvas") or {}
        doc = engine.create_document(
            message.id, canvas.get("width"), canvas.get("height")
        )
        report["documentId"] = doc.id
    except (EngineError, OSError, KeyError, ValueError) as exc:
        raise fail(-1, exc) from None

    results = _Results()
    for index, step in enumerate(recipe.get("steps", [])):
        try:
            entry = _run_step(engine, doc.id, message.id, step, results)
        except RecipeError as exc:
            raise fail(index, exc) from None
        except (EngineError, KeyError, ValueError, TypeError) as exc:
            raise fail(index, exc) from None
        results.add(**entry)
        report["steps"].append({"index": index, **entry})

    (out_dir / "document.json").write_text(docmod.serialize_document(doc), "utf-8")
    report["exports"]["document"] = "document.json"
    try:
        if export in ("svg", "both"):
            svg_payload = engine.doc_export(doc.id, "static-vector")["payload"]
            (out_dir / "static.svg").write_text(svg_payload, "utf-8")
            report["exports"]["static"] = "static.svg"
        if export in ("frames", "both"):
            bundle = engine.doc_export(doc.id, "frame-bundle")
            frames_dir = out_dir / "frames"
            frames_dir.mkdir(exist_ok=True)
            names = []
            for i, frame in enumerate(bundle["frames"]):
                name = f"frame_{i:03d}.svg"
                (frames_dir / name).write_text(frame, "utf-8")
                names.append(f"frames/{name}")
            (frames_dir / "manifest.json").write_text(
                json.dumps(bundle["manifest"], indent=1), "utf-8"
            )
            report["exports"]["frames"] = names
            report["exports"]["manifest"] = "frames/manifest.json"
            report["exports"]["timing"] = bundle["manifest"]
    except EngineError as exc:
        raise fail(len(results.steps), exc) from None

    _write_report(out_dir, report)
    return report


def _write_report(out_dir: Path, report: dict) -> None:
    (out_dir / "report.json").write_text(json.dumps(report, indent=1), "utf-8")


def demo_recipe_path() -> Path:
    """The bundled canary demo (animated chart + synced bird + palette)."""
    return Path(__file__).parent / "data" / "demo" / "canary_recipe.json"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="infoforge",
        description="Reproduce an infographic from a recipe file.",
    )
    parser.add_argument("--recipe", help="recipe JSON path")
    parser.add_argument("--demo", action="store_true",
                        help="run the bundled canary demo recipe")
    parser.add_argument("--data", help="override the recipe's dataset path")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--provider", choices=["fallback", "remote"],
                        default="fallback")
    parser.add_argument("--seedless", action="store_true",
                        help="reserved; fallback providers are already deterministic")
    parser.add_argument("--export", choices=list(EXPORT_MODES), default="both")
    args = parser.parse_args(argv)

    if not args.recipe and not args.demo:
        parser.error("need --recipe PATH or --demo")
    recipe = Path(args.recipe) if args.recipe else demo_recipe_path()

    try:
        report = run_recipe(
            recipe, args.out,
            dataset_override=args.data,
            provider=args.provider,
            export=args.export,
        )
    except RecipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"report: {Path(args.out) / 'report.json'}", file=sys.stderr)
        return 1
    picks = sum(1 for s in report["steps"] if s.get("picked"))
    print(f"recipe ok: {len(report['steps'])} steps, {picks} picks, "
          f"document {report['documentId']}")
    for name, value in report["exports"].items():
        if name != "timing":
            print(f"  {name}: {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
