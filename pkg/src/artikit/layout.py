"""Grid-layout intermediate representation: parser, validator, seeded
procedural sampler, and the single-sentence description template.

Cells index the front face only; depth is implied by part type (drawers and
trays extrude to base depth, doors are thin slabs, handles and knobs
protrude from their parent's front face).
"""

from __future__ import annotations

import importlib.resources
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import jsonschema
import numpy as np

from artikit.core import CATEGORIES, format_float

GRID_PART_NAMES = ("door", "drawer", "tray", "handle", "knob")
ATTACHMENT_NAMES = ("handle", "knob")
CONTAINER_NAMES = ("door", "drawer", "tray")
HINGE_SIDES = ("left", "right", "top", "bottom")

DEFAULT_GRID = (4, 6)
COMPLEX_GRID = (6, 8)

MAX_SAMPLE_ROUNDS = 64


class LayoutParseError(ValueError):
    """Strict-parse failure; carries the byte offset for JSON syntax errors."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class Complexity(Enum):
    SIMPLE = "simple"
    MID = "mid"
    COMPLEX = "complex"

    @property
    def budget(self) -> tuple[int, int | None]:
        return {"simple": (1, 5), "mid": (6, 10), "complex": (11, None)}[self.value]

    def contains(self, n_parts: int) -> bool:
        lo, hi = self.budget
        return n_parts >= lo and (hi is None or n_parts <= hi)


@dataclass(frozen=True)
class GridPart:
    name: str
    cells: tuple[int, int, int, int]  # [x1, x2, y1, y2], half-open on the front face
    attach_to: int | str  # parent part index, or "base"
    joint_meta: dict = field(default_factory=dict)

    @property
    def is_attachment(self) -> bool:
        return self.name in ATTACHMENT_NAMES


@dataclass(frozen=True)
class GridLayout:
    category: str
    base_size: tuple[float, float, float]  # (W, H, D) meters
    grid: tuple[int, int]  # (Gx, Gy)
    parts: tuple[GridPart, ...]

    @property
    def part_count(self) -> int:
        """Total assembled part count including the implicit base."""
        return len(self.parts) + 1


def _load_schema() -> dict:
    text = (
        importlib.resources.files("artikit.schemas")
        .joinpath("layout.schema.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)


_SCHEMA = _load_schema()


def layout_schema() -> dict:
    """The JSON-Schema document enforced by parse_layout."""
    return _SCHEMA


# ---------------------------------------------------------------------------
# Parse / serialize


def _check_cells(cells: object, grid: tuple[int, int]) -> tuple[int, int, int, int]:
    if not isinstance(cells, list) or len(cells) != 4:
        raise LayoutParseError("cells must be [x1, x2, y1, y2]")
    for c in cells:
        if isinstance(c, bool) or not isinstance(c, int):
            raise LayoutParseError("cell extent must be integer")
    x1, x2, y1, y2 = cells
    gx, gy = grid
    if not (0 <= x1 < x2 <= gx and 0 <= y1 < y2 <= gy):
        raise LayoutParseError(
            f"cell extent out of range: [{x1}, {x2}, {y1}, {y2}] on grid {gx}x{gy}"
        )
    return (x1, x2, y1, y2)


def _check_joint_meta(name: str, meta: object) -> dict:
    if not isinstance(meta, dict):
        raise LayoutParseError("joint_meta must be an object")
    if name == "door":
        if set(meta) != {"hinge_side"} or meta["hinge_side"] not in HINGE_SIDES:
            raise LayoutParseError("door joint_meta requires hinge_side in left/right/top/bottom")
    elif name in ("drawer", "tray"):
        if set(meta) != {"slide"} or meta["slide"] != "out":
            raise LayoutParseError(f"{name} joint_meta requires slide=out")
    else:
        if meta:
            raise LayoutParseError(f"{name} joint_meta must be empty")
    return dict(meta)


def layout_from_dict(data: object) -> GridLayout:
    if not isinstance(data, dict):
        raise LayoutParseError("layout must be a JSON object")
    extra = set(data) - {"category", "base_size", "grid", "parts"}
    if extra:
        raise LayoutParseError(f"unexpected fields: {sorted(extra)}")
    category = data.get("category")
    if not isinstance(category, str) or category not in CATEGORIES:
        raise LayoutParseError(f"unknown category: {category!r}")
    size = data.get("base_size")
    if (
        not isinstance(size, list)
        or len(size) != 3
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in size)
        or any(v <= 0 for v in size)
    ):
        raise LayoutParseError("base_size must be three positive numbers")
    grid = data.get("grid")
    if (
        not isinstance(grid, list)
        or len(grid) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in grid)
        or any(v < 1 for v in grid)
    ):
        raise LayoutParseError("grid must be two positive integers")
    parts_data = data.get("parts")
    if not isinstance(parts_data, list):
        raise LayoutParseError("parts must be a list")
    parts = []
    for pd in parts_data:
        if not isinstance(pd, dict):
            raise LayoutParseError("part entry must be an object")
        missing = {"name", "cells", "attach_to", "joint_meta"} - set(pd)
        if missing:
            raise LayoutParseError(f"part entry missing fields: {sorted(missing)}")
        extra = set(pd) - {"name", "cells", "attach_to", "joint_meta"}
        if extra:
            raise LayoutParseError(f"unexpected part fields: {sorted(extra)}")
        name = pd["name"]
        if name not in GRID_PART_NAMES:
            raise LayoutParseError(f"unknown part name: {name!r}")
        cells = _check_cells(pd["cells"], (grid[0], grid[1]))
        attach = pd["attach_to"]
        if attach != "base":
            if isinstance(attach, bool) or not isinstance(attach, int):
                raise LayoutParseError("attach_to must be 'base' or a part index")
            if not (0 <= attach < len(parts_data)):
                raise LayoutParseError(f"attach_to index {attach} out of range")
        meta = _check_joint_meta(name, pd["joint_meta"])
        parts.append(GridPart(name=name, cells=cells, attach_to=attach, joint_meta=meta))
    layout = GridLayout(
        category=category,
        base_size=(float(size[0]), float(size[1]), float(size[2])),
        grid=(grid[0], grid[1]),
        parts=tuple(parts),
    )
    jsonschema.validate(data, _SCHEMA)
    return layout


def parse_layout(text: str) -> GridLayout:
    """Strict parse of the layout JSON; rejects unknown names, non-integer
    cells, out-of-grid extents, and missing or extra fields."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise LayoutParseError(f"parse error at byte offset {e.pos}: {e.msg}", offset=e.pos)
    return layout_from_dict(data)


def layout_to_dict(layout: GridLayout) -> dict:
    return {
        "category": layout.category,
        "base_size": list(layout.base_size),
        "grid": list(layout.grid),
        "parts": [
            {
                "name": p.name,
                "cells": list(p.cells),
                "attach_to": p.attach_to,
                "joint_meta": dict(sorted(p.joint_meta.items())),
            }
            for p in layout.parts
        ],
    }


def serialize_layout(layout: GridLayout) -> str:
    """Canonical byte-stable form: fixed key order, 6-decimal sizes."""
    buf = io.StringIO()
    buf.write("{\n")
    buf.write(f'  "category": {json.dumps(layout.category)},\n')
    buf.write('  "base_size": [%s],\n' % ", ".join(format_float(v) for v in layout.base_size))
    buf.write(f'  "grid": [{layout.grid[0]}, {layout.grid[1]}],\n')
    buf.write('  "parts": [\n')
    for i, p in enumerate(layout.parts):
        meta = json.dumps(dict(sorted(p.joint_meta.items())))
        attach = json.dumps(p.attach_to)
        cells = ", ".join(str(c) for c in p.cells)
        buf.write(
            '    {"name": "%s", "cells": [%s], "attach_to": %s, "joint_meta": %s}%s\n'
            % (p.name, cells, attach, meta, "," if i + 1 < len(layout.parts) else "")
        )
    buf.write("  ]\n")
    buf.write("}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Validation


def _rects_overlap(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]


def _contains(outer: tuple[int, int, int, int], inner: tuple[int, int, int, int]) -> bool:
    return (
        outer[0] <= inner[0]
        and inner[1] <= outer[1]
        and outer[2] <= inner[2]
        and inner[3] <= outer[3]
    )


def validate_layout(layout: GridLayout) -> list[str]:
    """Grid-level structural rules; returns every violation (empty = valid)."""
    violations = []
    parts = layout.parts
    for i, p in enumerate(parts):
        if p.is_attachment:
            if p.attach_to == "base" or parts[p.attach_to].name not in ("door", "drawer"):
                violations.append(f"R2: {p.name} {i} must be attached to a door or drawer")
        else:
            if p.attach_to != "base":
                violations.append(f"A1: {p.name} {i} must attach to base")
    for i, p in enumerate(parts):
        if p.name in ("door", "drawer"):
            n_att = sum(1 for c in parts if c.is_attachment and c.attach_to == i)
            if n_att > 2:
                violations.append(f"R3: {p.name} {i} has {n_att} handles/knobs (max 2)")
    if layout.category != "Microwave":
        for i, p in enumerate(parts):
            if p.name == "tray":
                violations.append(f"R4: tray {i} is only allowed in microwaves")
    containers = [(i, p) for i, p in enumerate(parts) if not p.is_attachment and p.attach_to == "base"]
    for a in range(len(containers)):
        for b in range(a + 1, len(containers)):
            i, pa = containers[a]
            j, pb = containers[b]
            if _rects_overlap(pa.cells, pb.cells):
                violations.append(f"L1: parts {i} and {j} overlap on the grid")
    for i, p in enumerate(parts):
        if p.is_attachment and p.attach_to != "base":
            parent = parts[p.attach_to]
            if not _contains(parent.cells, p.cells):
                violations.append(f"L2: {p.name} {i} extends outside its parent's cells")
    return violations


# ---------------------------------------------------------------------------
# Procedural sampler


class _PlacementError(Exception):
    pass


def _split_into_rects(rng: np.random.Generator, gx: int, gy: int, count: int):
    """Guillotine-partition the grid into `count` disjoint integer rects."""
    if count > gx * gy:
        raise _PlacementError("grid too small")
    rects = [(0, gx, 0, gy)]
    guard = 0
    while len(rects) < count:
        guard += 1
        if guard > 50 * count + 100:
            raise _PlacementError("split stalled")
        splittable = [k for k, r in enumerate(rects) if r[1] - r[0] > 1 or r[3] - r[2] > 1]
        if not splittable:
            raise _PlacementError("no splittable rect left")
        areas = np.array(
            [(rects[k][1] - rects[k][0]) * (rects[k][3] - rects[k][2]) for k in splittable],
            dtype=float,
        )
        k = splittable[int(rng.choice(len(splittable), p=areas / areas.sum()))]
        x1, x2, y1, y2 = rects.pop(k)
        w, h = x2 - x1, y2 - y1
        if w > h or (w == h and rng.integers(2) == 0):
            if w > 1:
                cut = int(rng.integers(x1 + 1, x2))
                rects += [(x1, cut, y1, y2), (cut, x2, y1, y2)]
            else:
                cut = int(rng.integers(y1 + 1, y2))
                rects += [(x1, x2, y1, cut), (x1, x2, cut, y2)]
        else:
            if h > 1:
                cut = int(rng.integers(y1 + 1, y2))
                rects += [(x1, x2, y1, cut), (x1, x2, cut, y2)]
            else:
                cut = int(rng.integers(x1 + 1, x2))
                rects += [(x1, cut, y1, y2), (cut, x2, y1, y2)]
    rects.sort(key=lambda r: (gy - r[3], r[0]))
    return rects


def _attachment_cell(parent: GridPart, slot: int) -> tuple[int, int, int, int]:
    x1, x2, y1, y2 = parent.cells
    cx = (x1 + x2 - 1) // 2
    cy = (y1 + y2 - 1) // 2
    if parent.name == "door":
        side = parent.joint_meta["hinge_side"]
        if side == "left":
            cx = x2 - 1
        elif side == "right":
            cx = x1
        elif side == "top":
            cy = y1
        else:
            cy = y2 - 1
    # second attachment takes a neighboring in-range cell when there is one
    if slot == 1:
        if x2 - x1 > 1 and parent.name != "door":
            cx = cx + 1 if cx + 1 < x2 else cx - 1
        elif y2 - y1 > 1:
            cy = cy + 1 if cy + 1 < y2 else cy - 1
        elif x2 - x1 > 1:
            cx = cx + 1 if cx + 1 < x2 else cx - 1
    return (cx, cx + 1, cy, cy + 1)


def _draw_target_counts(rng: np.random.Generator, complexity: Complexity) -> tuple[int, int]:
    if complexity is Complexity.SIMPLE:
        total = int(rng.integers(3, 6))
    elif complexity is Complexity.MID:
        total = int(rng.integers(6, 11))
    else:
        total = int(rng.integers(11, 31))
    movable = total - 1
    c_min = max(1, math.ceil(movable / 3))
    containers = int(rng.integers(c_min, movable + 1))
    return containers, movable - containers


def _try_sample(category: str, complexity: Complexity, rng: np.random.Generator) -> GridLayout:
    containers_n, attachments_n = _draw_target_counts(rng, complexity)
    grid = COMPLEX_GRID if complexity is Complexity.COMPLEX else DEFAULT_GRID
    gx, gy = grid
    width = round(float(rng.uniform(0.6, 1.6)), 2)
    height = round(float(rng.uniform(0.8, 2.0)), 2)
    depth = round(float(rng.uniform(0.3, 0.7)), 2)

    rects = _split_into_rects(rng, gx, gy, containers_n)
    tray_index = int(rng.integers(containers_n)) if category == "Microwave" else -1
    parts: list[GridPart] = []
    for k, (x1, x2, y1, y2) in enumerate(rects):
        w_m = (x2 - x1) * width / gx
        h_m = (y2 - y1) * height / gy
        if k == tray_index:
            parts.append(GridPart("tray", (x1, x2, y1, y2), "base", {"slide": "out"}))
            continue
        if h_m > 1.25 * w_m:
            name = "door"
        elif w_m > 1.25 * h_m:
            name = "drawer"
        else:
            name = "door" if rng.integers(2) == 0 else "drawer"
        if name == "door":
            sides = HINGE_SIDES if h_m <= 1.25 * w_m else ("left", "right")
            meta = {"hinge_side": str(sides[int(rng.integers(len(sides)))])}
        else:
            meta = {"slide": "out"}
        parts.append(GridPart(name, (x1, x2, y1, y2), "base", meta))

    eligible = [i for i, p in enumerate(parts) if p.name in ("door", "drawer")]
    if attachments_n > 2 * len(eligible):
        raise _PlacementError("not enough parents for attachments")
    pool = np.repeat(eligible, 2)
    rng.shuffle(pool)
    chosen = sorted(int(i) for i in pool[:attachments_n])
    slots: dict[int, int] = {}
    for parent_idx in chosen:
        slot = slots.get(parent_idx, 0)
        slots[parent_idx] = slot + 1
        name = "handle" if rng.random() < 0.7 else "knob"
        cell = _attachment_cell(parts[parent_idx], slot)
        parts.append(GridPart(name, cell, parent_idx, {}))

    layout = GridLayout(category, (width, height, depth), grid, tuple(parts))
    if validate_layout(layout):
        raise _PlacementError("validation failed")
    return layout


def sample_layout(category: str, complexity: Complexity, seed: int) -> GridLayout:
    """Deterministic layout draw; always passes validate_layout and stays
    inside the complexity part-count budget."""
    if category not in CATEGORIES:
        raise ValueError(f"unknown category: {category!r}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_SAMPLE_ROUNDS):
        try:
            return _try_sample(category, complexity, rng)
        except _PlacementError:
            continue
    raise ValueError("cannot place parts")


# ---------------------------------------------------------------------------
# Description template

_COUNT_WORDS = (
    "one two three four five six seven eight nine ten eleven twelve "
    "thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty"
).split()

_POSITION_PHRASES = {
    ("top", "left"): "at the top left",
    ("top", "center"): "on top",
    ("top", "right"): "at the top right",
    ("middle", "left"): "on the left",
    ("middle", "center"): "in the middle",
    ("middle", "right"): "on the right",
    ("bottom", "left"): "at the bottom left",
    ("bottom", "center"): "at the bottom",
    ("bottom", "right"): "at the bottom right",
}

_VBAND_ORDER = ("top", "middle", "bottom")
_HBAND_ORDER = ("left", "center", "right")


def count_word(n: int) -> str:
    return _COUNT_WORDS[n - 1] if 1 <= n <= len(_COUNT_WORDS) else str(n)


def word_count(token: str) -> int | None:
    if token in _COUNT_WORDS:
        return _COUNT_WORDS.index(token) + 1
    return int(token) if token.isdigit() else None


def vband(cells: tuple[int, int, int, int], gy: int) -> str:
    v = cells[2] + cells[3]
    if 3 * v > 4 * gy:
        return "top"
    if 3 * v < 2 * gy:
        return "bottom"
    return "middle"


def hband(cells: tuple[int, int, int, int], gx: int) -> str:
    s = cells[0] + cells[1]
    if 3 * s < 2 * gx:
        return "left"
    if 3 * s > 4 * gx:
        return "right"
    return "center"


def position_phrase(vb: str, hb: str) -> str:
    return _POSITION_PHRASES[(vb, hb)]


def category_phrase(category: str) -> str:
    article = "an" if category[0].lower() in "aeiou" else "a"
    return f"{article} {category.lower()}"


def _attachment_signature(layout: GridLayout, container_idx: int) -> tuple[int, int]:
    n_handle = sum(
        1 for p in layout.parts if p.name == "handle" and p.attach_to == container_idx
    )
    n_knob = sum(1 for p in layout.parts if p.name == "knob" and p.attach_to == container_idx)
    return (n_handle, n_knob)


def describe_groups(layout: GridLayout) -> list[dict]:
    """Containers grouped by (label, vertical band, attachment signature),
    ordered top-to-bottom then left-to-right; drives describe_layout and the
    mock layout builder."""
    gx, gy = layout.grid
    keyed: dict[tuple, list[int]] = {}
    for i, p in enumerate(layout.parts):
        if p.is_attachment:
            continue
        key = (p.name, vband(p.cells, gy), _attachment_signature(layout, i))
        keyed.setdefault(key, []).append(i)
    groups = []
    for (name, vb, sig), members in keyed.items():
        hbands = {hband(layout.parts[i].cells, gx) for i in members}
        hb = next(iter(hbands)) if len(hbands) == 1 and hbands != {"center"} else "center"
        groups.append(
            {"name": name, "count": len(members), "vband": vb, "hband": hb, "sig": sig}
        )
    groups.sort(
        key=lambda g: (
            _VBAND_ORDER.index(g["vband"]),
            _HBAND_ORDER.index(g["hband"]),
            GRID_PART_NAMES.index(g["name"]),
            g["sig"],
        )
    )
    return groups


def _attachment_clause(count: int, sig: tuple[int, int]) -> str:
    n_handle, n_knob = sig
    if n_handle == 0 and n_knob == 0:
        return ""
    bits = []
    if n_handle:
        bits.append(f"{count_word(n_handle)} handle" + ("s" if n_handle > 1 else ""))
    if n_knob:
        bits.append(f"{count_word(n_knob)} knob" + ("s" if n_knob > 1 else ""))
    prefix = "each with" if count > 1 else "with"
    return f", {prefix} " + " and ".join(bits)


def _join_phrases(phrases: list[str]) -> str:
    if len(phrases) == 1:
        return phrases[0]
    if len(phrases) == 2:
        return f"{phrases[0]} and {phrases[1]}"
    return ", ".join(phrases[:-1]) + f", and {phrases[-1]}"


def describe_layout(layout: GridLayout) -> str:
    """One-sentence structural description: part types, counts, and coarse
    positions from cell centroids. Never mentions color or material."""
    groups = describe_groups(layout)
    head = category_phrase(layout.category)
    head = head[0].upper() + head[1:]
    if not groups:
        return f"{head} with no movable parts."
    phrases = []
    for g in groups:
        noun = g["name"] + ("s" if g["count"] > 1 else "")
        pos = position_phrase(g["vband"], g["hband"])
        phrases.append(f"{count_word(g['count'])} {noun} {pos}" + _attachment_clause(g["count"], g["sig"]))
    return f"{head} with " + _join_phrases(phrases) + "."


def part_multiset(layout: GridLayout) -> dict[str, int]:
    counts: dict[str, int] = {}
    for p in layout.parts:
        counts[p.name] = counts.get(p.name, 0) + 1
    return counts


__all__ = [
    "Complexity",
    "GridLayout",
    "GridPart",
    "LayoutParseError",
    "describe_groups",
    "describe_layout",
    "layout_from_dict",
    "layout_schema",
    "layout_to_dict",
    "parse_layout",
    "part_multiset",
    "sample_layout",
    "serialize_layout",
    "validate_layout",
]
