"""Shared fixtures: a small mixed-kind dataset, a seeded NBA-style table,
and a synthetic gallery builder."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from infoforge.dataset import ingest_tabular, extract_meta
from infoforge.engine import Engine

TOY_CSV = """\
region,revenue,units,reported_date,tier,note
north,120.5,10,2021-01-04,gold,steady
south,80.25,7,2021-01-05,silver,dip
east,95.0,,2021-01-06,gold,
west,110.75,12,2021-01-07,bronze,spike
north,130.0,11,2021-01-08,gold,steady
south,70.5,6,2021-01-09,silver,dip
east,99.5,9,2021-01-10,bronze,flat
west,105.25,10,2021-01-11,gold,spike
"""

NBA_TEAMS = ["Los Angeles Lakers", "Detroit Pistons", "Boston Celtics", "Chicago Bulls"]
NBA_OPPONENTS = ["DET", "BOS", "CHI", "LAL"]
NBA_SEASONS = ["2003-04", "2002-03", "2004-05"]


def build_nba_rows(seed: int = 20030604, matching: int = 14, total: int = 50):
    """50 deterministic rows; ``matching`` of them satisfy the canonical
    Lakers/DET/2003-04/period-2/playoffs query so LIMIT 10 actually trims."""
    rng = random.Random(seed)
    rows = []
    for i in range(matching):
        rows.append({
            "team_name": "Los Angeles Lakers",
            "opponent": "DET",
            "season": "2003-04",
            "period": 2,
            "playoffs": 1,
            "date": f"2004-06-{(i % 27) + 1:02d}",
            "points": rng.randint(70, 120),
        })
    while len(rows) < total:
        row = {
            "team_name": rng.choice(NBA_TEAMS),
            "opponent": rng.choice(NBA_OPPONENTS),
            "season": rng.choice(NBA_SEASONS),
            "period": rng.randint(1, 4),
            "playoffs": rng.choice([0, 1]),
            "date": f"200{rng.randint(2, 5)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}",
            "points": rng.randint(70, 120),
        }
        # near-misses must not satisfy the full conjunction
        if (row["team_name"] == "Los Angeles Lakers" and row["opponent"] == "DET"
                and row["season"] == "2003-04" and row["period"] == 2
                and row["playoffs"] == 1):
            row["period"] = 3
        rows.append(row)
    rng.shuffle(rows)
    return rows


def rows_to_csv(rows) -> str:
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(row[name]) for name in header))
    return "\n".join(lines) + "\n"


@pytest.fixture
def toy_ds():
    return ingest_tabular(TOY_CSV)


@pytest.fixture
def toy_meta(toy_ds):
    return extract_meta(toy_ds)


@pytest.fixture
def engine():
    return Engine()


@pytest.fixture
def toy_engine():
    eng = Engine()
    eng.ingest(TOY_CSV)
    return eng


@pytest.fixture
def nba_rows():
    return build_nba_rows()


@pytest.fixture
def nba_csv(nba_rows):
    return rows_to_csv(nba_rows)


DEMO_DIR = Path(__file__).resolve().parents[1] / "src" / "infoforge" / "data" / "demo"


@pytest.fixture
def demo_dir():
    return DEMO_DIR


_SHAPES = ["circle", "square", "triangle", "star", "hexagon"]
_THINGS = ["canary", "sparrow", "falcon", "turtle", "maple", "river",
           "anchor", "lantern", "comet", "violin"]
_COLORS = ["yellow", "red", "blue", "green", "violet"]


def make_gallery(root: Path, n_static: int = 30, n_animated: int = 20) -> Path:
    """Synthetic manifest with ``n_static + n_animated`` assets whose
    captions are distinct word combinations. Returns the manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(n_static):
        thing = _THINGS[i % len(_THINGS)]
        color = _COLORS[i % len(_COLORS)]
        shape = _SHAPES[i % len(_SHAPES)]
        svg_name = f"s{i:02d}.svg"
        (root / svg_name).write_text(
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 10 10">'
            f'<rect width="10" height="10" fill="#aabb{i % 100:02d}"/></svg>',
            "utf-8",
        )
        records.append({
            "id": f"st{i:02d}",
            "kind": "static",
            "payload": svg_name,
            "caption": f"{color} {thing} {shape} emblem number {i}",
            "license": "CC0",
        })
    for i in range(n_animated):
        thing = _THINGS[(i * 3) % len(_THINGS)]
        frames = 2 + (i % 3)
        payload = {
            "frames": [
                f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 10 10">'
                f'<circle cx="5" cy="{2 + f}" r="2" fill="#cc44{i % 100:02d}"/></svg>'
                for f in range(frames)
            ],
            "frameDelayMs": 100 + 10 * i,
            "frameKeys": None,
            "loop": "infinite",
            "sourceKind": "graphic",
            "restart": False,
        }
        json_name = f"a{i:02d}.json"
        (root / json_name).write_text(json.dumps(payload), "utf-8")
        records.append({
            "id": f"an{i:02d}",
            "kind": "animated",
            "payload": json_name,
            "caption": f"{thing} motion loop number {i}",
            "frameCaptions": [
                f"{thing} moving pose {f} of clip {i}" for f in range(frames)
            ],
            "license": "CC0",
        })
    manifest = root / "manifest.json"
    manifest.write_text(json.dumps(records, indent=1), "utf-8")
    return manifest


@pytest.fixture
def gallery_manifest(tmp_path):
    return make_gallery(tmp_path / "gallery")
