"""Converts a grid layout into an articulated object with precise
coordinates and fully specified joints.

The base shell box spans x in [-W/2, W/2], y in [0, H], z in [-D/2, D/2];
its front face lies at z = +D/2, and doors always swing outward (+z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from artikit.core import (
    Aabb,
    ArticulatedObject,
    JointSpec,
    JointType,
    Part,
    PartLabel,
    Vec3,
    fixed_joint,
    validate_object,
)
from artikit.layout import GridLayout, GridPart, describe_layout, validate_layout


@dataclass(frozen=True)
class AssemblyConfig:
    door_thickness_ratio: float = 0.05  # fraction of base depth D
    drawer_depth_ratio: float = 0.9  # fraction of D
    drawer_travel_ratio: float = 0.8  # fraction of drawer depth
    door_max_angle: float = math.pi / 2  # radians
    handle_size: tuple[float, float, float] = (0.02, 0.12, 0.03)  # (w, h, d) meters
    knob_radius: float = 0.02  # meters

    def __post_init__(self) -> None:
        for name in ("door_thickness_ratio", "drawer_depth_ratio", "drawer_travel_ratio"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1]")
        if not 0.0 < self.door_max_angle <= math.pi:
            raise ValueError("door_max_angle must be in (0, pi]")

    @property
    def attachment_protrusion(self) -> float:
        return max(self.handle_size[2], 2.0 * self.knob_radius)


DEFAULT_CONFIG = AssemblyConfig()

# Outward-swing hinge table: axis direction and hinge-edge corner, chosen so
# a positive joint value rotates the free edge into the +z hemisphere.
_HINGE_DIRECTION = {
    "left": (0.0, -1.0, 0.0),
    "right": (0.0, 1.0, 0.0),
    "top": (-1.0, 0.0, 0.0),
    "bottom": (1.0, 0.0, 0.0),
}


def _front_span(layout: GridLayout, cells: tuple[int, int, int, int]) -> tuple[float, float, float, float]:
    width, height, _ = layout.base_size
    gx, gy = layout.grid
    x1, x2, y1, y2 = cells
    return (
        -width / 2 + x1 * width / gx,
        -width / 2 + x2 * width / gx,
        y1 * height / gy,
        y2 * height / gy,
    )


def _attachment_slot(layout: GridLayout, part_index: int) -> tuple[int, int]:
    """(slot, sibling count) among attachments sharing this part's parent."""
    parent = layout.parts[part_index].attach_to
    siblings = [
        i
        for i, p in enumerate(layout.parts)
        if p.is_attachment and p.attach_to == parent
    ]
    return siblings.index(part_index), len(siblings)


def _attachment_box(
    layout: GridLayout, part_index: int, cfg: AssemblyConfig
) -> Aabb:
    part = layout.parts[part_index]
    parent_idx = part.attach_to
    assert isinstance(parent_idx, int)
    parent = layout.parts[parent_idx]
    px1, px2, py1, py2 = _front_span(layout, parent.cells)
    z_front = layout.base_size[2] / 2
    slot, total = _attachment_slot(layout, part_index)

    if part.name == "knob":
        w = h = d = 2.0 * cfg.knob_radius
    else:
        w, h, d = cfg.handle_size
        horizontal = parent.name != "door" or parent.joint_meta["hinge_side"] in ("top", "bottom")
        if horizontal:
            w, h = h, w

    pw, ph = px2 - px1, py2 - py1
    cx = px1 + pw / 2
    cy = py1 + ph / 2
    frac = (slot + 1) / (total + 1)
    if parent.name == "door":
        side = parent.joint_meta["hinge_side"]
        inset_x = 0.05 * pw + w / 2
        inset_y = 0.05 * ph + h / 2
        if side == "left":
            cx, cy = px2 - inset_x, py1 + ph * frac
        elif side == "right":
            cx, cy = px1 + inset_x, py1 + ph * frac
        elif side == "top":
            cx, cy = px1 + pw * frac, py1 + inset_y
        else:
            cx, cy = px1 + pw * frac, py2 - inset_y
    else:
        cx = px1 + pw * frac
    cx = min(max(cx, px1 + w / 2), px2 - w / 2)
    cy = min(max(cy, py1 + h / 2), py2 - h / 2)
    return Aabb((cx - w / 2, cy - h / 2, z_front), (cx + w / 2, cy + h / 2, z_front + d))


def resolve_grid(layout: GridLayout, part: GridPart, cfg: AssemblyConfig = DEFAULT_CONFIG) -> Aabb:
    """Map a grid part's cell extents onto precise front-face coordinates.

    Doors become thin slabs at the front face, drawers and trays extrude
    inward, and attachments protrude outward from their parent's front face
    at their canonical (unjittered) spot.
    """
    depth = layout.base_size[2]
    z_front = depth / 2
    if part.is_attachment:
        return _attachment_box(layout, layout.parts.index(part), cfg)
    x_lo, x_hi, y_lo, y_hi = _front_span(layout, part.cells)
    if part.name == "door":
        return Aabb((x_lo, y_lo, z_front - cfg.door_thickness_ratio * depth), (x_hi, y_hi, z_front))
    return Aabb((x_lo, y_lo, z_front - cfg.drawer_depth_ratio * depth), (x_hi, y_hi, z_front))


def assign_joint(
    part_label: PartLabel,
    bbox: Aabb,
    joint_meta: dict,
    cfg: AssemblyConfig = DEFAULT_CONFIG,
) -> JointSpec:
    """Joint parameters from the resolved box and grid metadata.

    Doors get a revolute joint whose axis runs along the hinge edge at the
    front face, signed so positive values swing the free edge outward.
    Drawers and trays slide along +z; attachments are welded.
    """
    if part_label is PartLabel.DOOR:
        side = joint_meta.get("hinge_side")
        if side not in _HINGE_DIRECTION:
            raise ValueError(f"inconsistent joint metadata for door: {joint_meta!r}")
        z_front = bbox.max[2]
        origin: Vec3
        if side == "left":
            origin = (bbox.min[0], bbox.min[1], z_front)
        elif side == "right":
            origin = (bbox.max[0], bbox.min[1], z_front)
        elif side == "top":
            origin = (bbox.min[0], bbox.max[1], z_front)
        else:
            origin = (bbox.min[0], bbox.min[1], z_front)
        return JointSpec(JointType.REVOLUTE, origin, _HINGE_DIRECTION[side], (0.0, cfg.door_max_angle))
    if part_label in (PartLabel.DRAWER, PartLabel.TRAY):
        if joint_meta.get("slide") != "out":
            raise ValueError(f"inconsistent joint metadata for {part_label.display}: {joint_meta!r}")
        travel = cfg.drawer_travel_ratio * bbox.extents[2]
        return JointSpec(JointType.PRISMATIC, bbox.center, (0.0, 0.0, 1.0), (0.0, travel))
    if part_label in (PartLabel.HANDLE, PartLabel.KNOB):
        if joint_meta:
            raise ValueError(f"inconsistent joint metadata for {part_label.display}: {joint_meta!r}")
        return fixed_joint(bbox.center)
    raise ValueError(f"inconsistent joint metadata: no joint rule for {part_label.display}")


def _jitter_attachment(
    bbox: Aabb, parent_bbox: Aabb, rng: np.random.Generator
) -> Aabb:
    """Shift an attachment by <= 10% of the parent face extent, clamped so
    the box stays inside the parent's x/y footprint."""
    pw = parent_bbox.extents[0]
    ph = parent_bbox.extents[1]
    dx = float(rng.uniform(-0.1, 0.1)) * pw
    dy = float(rng.uniform(-0.1, 0.1)) * ph
    w = bbox.extents[0]
    h = bbox.extents[1]
    cx = bbox.center[0] + dx
    cy = bbox.center[1] + dy
    cx = min(max(cx, parent_bbox.min[0] + w / 2), parent_bbox.max[0] - w / 2)
    cy = min(max(cy, parent_bbox.min[1] + h / 2), parent_bbox.max[1] - h / 2)
    return Aabb(
        (cx - w / 2, cy - h / 2, bbox.min[2]),
        (cx + w / 2, cy + h / 2, bbox.max[2]),
    )


def assemble(
    layout: GridLayout,
    cfg: AssemblyConfig = DEFAULT_CONFIG,
    seed: int = 0,
) -> ArticulatedObject:
    """Build the articulated object: shell base plus one part per grid part.

    Deterministic per seed; the seed only perturbs attachment placement
    within the legal parent-face region.
    """
    violations = validate_layout(layout)
    if violations:
        raise ValueError("layout is invalid: " + "; ".join(violations))
    rng = np.random.default_rng(seed)
    width, height, depth = layout.base_size
    base = Part(
        id=0,
        label=PartLabel.BASE,
        bbox_rest=Aabb((-width / 2, 0.0, -depth / 2), (width / 2, height, depth / 2)),
        joint=fixed_joint(),
        parent_id=None,
    )
    parts = [base]
    boxes: list[Aabb] = []
    for i, gp in enumerate(layout.parts):
        bbox = resolve_grid(layout, gp, cfg)
        if gp.is_attachment:
            parent_box = boxes[gp.attach_to]
            bbox = _jitter_attachment(bbox, parent_box, rng)
        boxes.append(bbox)
        label = PartLabel.from_name(gp.name)
        parent_id = 0 if gp.attach_to == "base" else gp.attach_to + 1
        parts.append(
            Part(
                id=i + 1,
                label=label,
                bbox_rest=bbox,
                joint=assign_joint(label, bbox, gp.joint_meta, cfg),
                parent_id=parent_id,
            )
        )
    obj = ArticulatedObject(
        category=layout.category,
        parts=tuple(parts),
        description=describe_layout(layout),
    )
    remaining = validate_object(obj)
    if remaining:
        raise ValueError("assembled object is invalid: " + "; ".join(remaining))
    return obj


__all__ = ["AssemblyConfig", "DEFAULT_CONFIG", "assemble", "assign_joint", "resolve_grid"]
