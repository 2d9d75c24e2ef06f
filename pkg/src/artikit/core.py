"""Domain types for parts, joints, and articulated objects.

Conventions used throughout the package: object-local frame is x = right,
y = up, z = toward the viewer; the front face of a shell lies at z = +D/2.
The rest pose puts every joint at the lower end of its motion range.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

Vec3 = tuple[float, float, float]

CATEGORIES = (
    "Storage Furniture",
    "Table",
    "Refrigerator",
    "Dishwasher",
    "Oven",
    "Washer",
    "Microwave",
)

UNIT_TOL = 1e-9


class PartLabel(Enum):
    BASE = 0
    DOOR = 1
    DRAWER = 2
    TRAY = 3
    HANDLE = 4
    KNOB = 5

    @property
    def id(self) -> int:
        return self.value

    @classmethod
    def from_name(cls, name: str) -> "PartLabel":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown part name: {name!r}") from None

    @property
    def display(self) -> str:
        return self.name.lower()


ATTACHMENT_LABELS = (PartLabel.HANDLE, PartLabel.KNOB)
CONTAINER_LABELS = (PartLabel.DOOR, PartLabel.DRAWER, PartLabel.TRAY)


class JointType(Enum):
    FIXED = 0
    REVOLUTE = 1
    PRISMATIC = 2

    @property
    def id(self) -> int:
        return self.value

    @classmethod
    def from_name(cls, name: str) -> "JointType":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown joint type: {name!r}") from None

    @property
    def display(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box in the object-local frame, meters."""

    min: Vec3
    max: Vec3

    def __post_init__(self) -> None:
        for k in range(3):
            if self.min[k] > self.max[k] + UNIT_TOL:
                raise ValueError(f"box min exceeds max on axis {k}")

    @property
    def extents(self) -> Vec3:
        return tuple(self.max[k] - self.min[k] for k in range(3))  # type: ignore[return-value]

    @property
    def center(self) -> Vec3:
        return tuple((self.min[k] + self.max[k]) / 2.0 for k in range(3))  # type: ignore[return-value]

    @property
    def volume(self) -> float:
        e = self.extents
        return e[0] * e[1] * e[2]

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(
            tuple(min(self.min[k], other.min[k]) for k in range(3)),
            tuple(max(self.max[k], other.max[k]) for k in range(3)),
        )

    def corners(self) -> list[Vec3]:
        """8 corners; index bits select (x << 2) | (y << 1) | z, 0 = min."""
        out = []
        for i in range(8):
            out.append(
                (
                    self.max[0] if i & 4 else self.min[0],
                    self.max[1] if i & 2 else self.min[1],
                    self.max[2] if i & 1 else self.min[2],
                )
            )
        return out


@dataclass(frozen=True)
class JointSpec:
    """Joint connecting a part to its parent.

    origin is a point on the axis line (parent frame); direction is a unit
    vector. Ranges are radians for revolute, meters for prismatic, and
    exactly [0, 0] for fixed.
    """

    joint_type: JointType
    origin: Vec3
    direction: Vec3
    range: tuple[float, float]

    def __post_init__(self) -> None:
        n = math.sqrt(sum(d * d for d in self.direction))
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"joint direction must be unit length, got norm {n}")
        lo, hi = self.range
        if lo > hi:
            raise ValueError("joint range lower bound exceeds upper bound")
        if self.joint_type is JointType.FIXED and (lo != 0.0 or hi != 0.0):
            raise ValueError("fixed joint range must be [0, 0]")


FIXED_WORLD_JOINT = JointSpec(JointType.FIXED, (0.0, 0.0, 0.0), (0.0, 0.0, 1.0), (0.0, 0.0))


def fixed_joint(origin: Vec3 = (0.0, 0.0, 0.0)) -> JointSpec:
    return JointSpec(JointType.FIXED, origin, (0.0, 0.0, 1.0), (0.0, 0.0))


@dataclass(frozen=True)
class Part:
    """One rigid element: a labeled oriented-at-rest box plus its joint."""

    id: int
    label: PartLabel
    bbox_rest: Aabb
    joint: JointSpec
    parent_id: int | None

    @property
    def is_movable(self) -> bool:
        return self.joint.joint_type is not JointType.FIXED


@dataclass(frozen=True)
class ArticulatedObject:
    category: str
    parts: tuple[Part, ...]
    description: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))

    def part_by_id(self, part_id: int) -> Part:
        return self.parts[self._index()[part_id]]

    def _index(self) -> dict[int, int]:
        return {p.id: i for i, p in enumerate(self.parts)}

    def children_of(self, part_id: int) -> list[Part]:
        return [p for p in self.parts if p.parent_id == part_id]


@dataclass(frozen=True)
class ArticulationGraph:
    """Rooted labeled tree of part connectivity, base at the root."""

    n: int
    labels: tuple[PartLabel, ...]
    edges: frozenset[tuple[int, int]]

    def root(self) -> int:
        children = {c for _, c in self.edges}
        roots = [i for i in range(self.n) if i not in children]
        if len(roots) != 1:
            raise ValueError("graph does not have a unique root")
        return roots[0]

    def children_of(self, node: int) -> list[int]:
        return sorted(c for p, c in self.edges if p == node)


def build_graph(obj: ArticulatedObject) -> ArticulationGraph:
    """Connectivity graph derived from parent ids, nodes in part order."""
    index = {p.id: i for i, p in enumerate(obj.parts)}
    edges = set()
    for p in obj.parts:
        if p.parent_id is not None:
            edges.add((index[p.parent_id], index[p.id]))
    return ArticulationGraph(
        n=len(obj.parts),
        labels=tuple(p.label for p in obj.parts),
        edges=frozenset(edges),
    )


def _tree_violations(obj: ArticulatedObject) -> list[str]:
    n = len(obj.parts)
    violations = []
    ids = [p.id for p in obj.parts]
    if sorted(ids) != list(range(n)):
        violations.append(f"R5: part ids must be 0..{n - 1} and unique, got {sorted(ids)}")
        return violations
    roots = [p for p in obj.parts if p.parent_id is None]
    if len(roots) != 1:
        violations.append(f"R5: exactly one part may have no parent, found {len(roots)}")
    elif roots[0].label is not PartLabel.BASE:
        violations.append("R5: the root part must be a base")
    id_set = set(ids)
    for p in obj.parts:
        if p.parent_id is not None and p.parent_id not in id_set:
            violations.append(f"R5: part {p.id} references missing parent {p.parent_id}")
    # Reachability doubles as the cycle check: a cycle is unreachable from the root.
    if not violations:
        children: dict[int, list[int]] = {i: [] for i in ids}
        for p in obj.parts:
            if p.parent_id is not None:
                children[p.parent_id].append(p.id)
        seen = set()
        stack = [roots[0].id]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(children[cur])
        if len(seen) != n:
            unreachable = sorted(id_set - seen)
            violations.append(f"R5: parts {unreachable} are not reachable from the base")
    return violations


def validate_object(obj: ArticulatedObject) -> list[str]:
    """Structural rule check; returns every violated rule (empty = valid).

    R1 exactly one base; R2 handle/knob parents are doors or drawers;
    R3 at most two handles/knobs per door or drawer; R4 trays only in
    microwaves; R5 tree-shape invariants.
    """
    violations = []
    bases = [p for p in obj.parts if p.label is PartLabel.BASE]
    if len(bases) != 1:
        violations.append(f"R1: exactly one base required, found {len(bases)}")
    index = {p.id: p for p in obj.parts}
    for p in obj.parts:
        if p.label in ATTACHMENT_LABELS:
            parent = index.get(p.parent_id) if p.parent_id is not None else None
            if parent is None or parent.label not in (PartLabel.DOOR, PartLabel.DRAWER):
                violations.append(
                    f"R2: {p.label.display} {p.id} must be attached to a door or drawer"
                )
    for p in obj.parts:
        if p.label in (PartLabel.DOOR, PartLabel.DRAWER):
            n_att = sum(
                1 for c in obj.parts if c.parent_id == p.id and c.label in ATTACHMENT_LABELS
            )
            if n_att > 2:
                violations.append(
                    f"R3: {p.label.display} {p.id} has {n_att} handles/knobs (max 2)"
                )
    if obj.category != "Microwave":
        for p in obj.parts:
            if p.label is PartLabel.TRAY:
                violations.append(f"R4: tray {p.id} is only allowed in microwaves")
    violations.extend(_tree_violations(obj))
    return violations


def union_bbox(obj: ArticulatedObject) -> Aabb:
    box = obj.parts[0].bbox_rest
    for p in obj.parts[1:]:
        box = box.union(p.bbox_rest)
    return box


def _transform_vec(v: Vec3, scale: float, offset: Vec3) -> Vec3:
    return tuple(scale * v[k] + offset[k] for k in range(3))  # type: ignore[return-value]


def transform_object(obj: ArticulatedObject, scale: float, offset: Vec3) -> ArticulatedObject:
    """Apply p -> scale * p + offset to every box and joint origin.

    Prismatic ranges scale with geometry; revolute ranges (angles) do not.
    Joint directions are unchanged.
    """
    new_parts = []
    for p in obj.parts:
        bbox = Aabb(
            _transform_vec(p.bbox_rest.min, scale, offset),
            _transform_vec(p.bbox_rest.max, scale, offset),
        )
        rng = p.joint.range
        if p.joint.joint_type is JointType.PRISMATIC:
            rng = (rng[0] * scale, rng[1] * scale)
        joint = replace(p.joint, origin=_transform_vec(p.joint.origin, scale, offset), range=rng)
        new_parts.append(replace(p, bbox_rest=bbox, joint=joint))
    return replace(obj, parts=tuple(new_parts))


def normalize_object(obj: ArticulatedObject) -> tuple[ArticulatedObject, float, Vec3]:
    """Scale and shift so the rest-state union box is origin-centered with
    longest side 1. Returns (object, scale, offset) with p' = scale*p + offset.
    """
    if not obj.parts:
        raise ValueError("degenerate object")
    union = union_bbox(obj)
    if union.volume <= 0.0:
        raise ValueError("degenerate object")
    longest = max(union.extents)
    scale = 1.0 / longest
    center = union.center
    offset = tuple(-scale * center[k] for k in range(3))
    return transform_object(obj, scale, offset), scale, offset


# ---------------------------------------------------------------------------
# Object JSON (the canonical on-disk form; floats at 6 decimal places)


def format_float(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _vec_json(v: Iterable[float]) -> str:
    return "[" + ", ".join(format_float(x) for x in v) + "]"


def object_to_json(obj: ArticulatedObject) -> str:
    """Serialize with fixed key order and 6-decimal floats (byte-stable)."""
    buf = io.StringIO()
    buf.write("{\n")
    buf.write(f'  "category": {json.dumps(obj.category)},\n')
    buf.write(f'  "description": {json.dumps(obj.description)},\n')
    buf.write('  "parts": [\n')
    for i, p in enumerate(obj.parts):
        buf.write("    {\n")
        buf.write(f'      "id": {p.id},\n')
        buf.write(f'      "label": "{p.label.display}",\n')
        parent = "null" if p.parent_id is None else str(p.parent_id)
        buf.write(f'      "parent_id": {parent},\n')
        buf.write(
            '      "bbox_rest": {"min": %s, "max": %s},\n'
            % (_vec_json(p.bbox_rest.min), _vec_json(p.bbox_rest.max))
        )
        buf.write(
            '      "joint": {"type": "%s", "origin": %s, "direction": %s, "range": %s}\n'
            % (
                p.joint.joint_type.display,
                _vec_json(p.joint.origin),
                _vec_json(p.joint.direction),
                _vec_json(p.joint.range),
            )
        )
        buf.write("    }" + ("," if i + 1 < len(obj.parts) else "") + "\n")
    buf.write("  ]\n")
    buf.write("}\n")
    return buf.getvalue()


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _parse_vec3(v: object, what: str) -> Vec3:
    _require(isinstance(v, list) and len(v) == 3, f"{what} must be a 3-vector")
    _require(all(isinstance(x, (int, float)) for x in v), f"{what} must be numeric")
    return (float(v[0]), float(v[1]), float(v[2]))  # type: ignore[index]


def object_from_dict(data: dict) -> ArticulatedObject:
    _require(isinstance(data, dict), "object JSON must be an object")
    category = data.get("category")
    _require(isinstance(category, str), "missing category")
    _require(category in CATEGORIES, f"unknown category: {category!r}")
    parts_data = data.get("parts")
    _require(isinstance(parts_data, list), "missing parts list")
    parts = []
    for pd in parts_data:
        _require(isinstance(pd, dict), "part entry must be an object")
        bbox = pd.get("bbox_rest")
        _require(isinstance(bbox, dict), "missing bbox_rest")
        joint = pd.get("joint")
        _require(isinstance(joint, dict), "missing joint")
        rng = joint.get("range")
        _require(isinstance(rng, list) and len(rng) == 2, "joint range must be [lo, hi]")
        parts.append(
            Part(
                id=int(pd["id"]),
                label=PartLabel.from_name(str(pd["label"])),
                bbox_rest=Aabb(
                    _parse_vec3(bbox.get("min"), "bbox min"),
                    _parse_vec3(bbox.get("max"), "bbox max"),
                ),
                joint=JointSpec(
                    joint_type=JointType.from_name(str(joint["type"])),
                    origin=_parse_vec3(joint.get("origin"), "joint origin"),
                    direction=_parse_vec3(joint.get("direction"), "joint direction"),
                    range=(float(rng[0]), float(rng[1])),
                ),
                parent_id=None if pd.get("parent_id") is None else int(pd["parent_id"]),
            )
        )
    return ArticulatedObject(
        category=category,
        parts=tuple(parts),
        description=str(data.get("description", "")),
    )


def object_from_json(text: str) -> ArticulatedObject:
    return object_from_dict(json.loads(text))
