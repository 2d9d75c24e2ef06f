"""Forward kinematics over the part tree, dual-state pose generation,
surface point sampling, and deterministic plausibility checks.

A pose is applied from rest only; transforms compose root-to-leaf, so a
child's frame includes every ancestor joint transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from artikit.core import (
    Aabb,
    ArticulatedObject,
    JointSpec,
    JointType,
    Part,
    PartLabel,
    format_float,
)

RANGE_TOL = 1e-12

# Corner-index pairs differing in one bit: the 12 box edges.
EDGE_PAIRS = tuple(
    (i, j) for i in range(8) for j in (i ^ 1, i ^ 2, i ^ 4) if j > i
)


@dataclass(frozen=True)
class RigidTransform:
    rotation: np.ndarray  # 3x3, row-major
    translation: np.ndarray  # 3

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation

    def compose(self, child: "RigidTransform") -> "RigidTransform":
        """self after child: (self ∘ child)(x) = self(child(x))."""
        return RigidTransform(
            self.rotation @ child.rotation,
            self.rotation @ child.translation + self.translation,
        )

    def inverse_apply(self, points: np.ndarray) -> np.ndarray:
        return (points - self.translation) @ self.rotation


@dataclass(frozen=True)
class Pose:
    """Per-part joint values ordered like the object's part list."""

    joint_values: tuple[float, ...]


@dataclass(frozen=True)
class PosedPart:
    part_id: int
    frame: RigidTransform
    corners: np.ndarray  # 8x3, bit-indexed (x << 2) | (y << 1) | z
    bbox_rest: Aabb

    def __post_init__(self) -> None:
        r = self.frame.rotation
        if not np.allclose(r @ r.T, np.eye(3), atol=1e-9) or abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("posed frame rotation is not a proper rotation")

    @property
    def centroid(self) -> np.ndarray:
        return self.corners.mean(axis=0)

    def aabb_hull(self) -> Aabb:
        return Aabb(tuple(self.corners.min(axis=0)), tuple(self.corners.max(axis=0)))


def rotation_about_axis(direction: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit direction (right-hand rule)."""
    d = np.asarray(direction, dtype=float)
    k = np.array(
        [[0.0, -d[2], d[1]], [d[2], 0.0, -d[0]], [-d[1], d[0], 0.0]]
    )
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def joint_transform(joint: JointSpec, value: float) -> RigidTransform:
    """Rigid transform for one joint at the given value (rest frame)."""
    lo, hi = joint.range
    if value < lo - RANGE_TOL or value > hi + RANGE_TOL:
        raise ValueError(f"joint value {value} out of range [{lo}, {hi}]")
    if joint.joint_type is JointType.FIXED:
        return RigidTransform.identity()
    direction = np.asarray(joint.direction, dtype=float)
    if joint.joint_type is JointType.PRISMATIC:
        return RigidTransform(np.eye(3), value * direction)
    origin = np.asarray(joint.origin, dtype=float)
    rot = rotation_about_axis(direction, value)
    return RigidTransform(rot, origin - rot @ origin)


def rest_pose(obj: ArticulatedObject) -> Pose:
    return Pose(tuple(p.joint.range[0] for p in obj.parts))


def open_pose(
    obj: ArticulatedObject, ratio: float = 1.0, seed: int | None = None
) -> Pose:
    """Opened configuration.

    Ratio mode sets every joint at lower + ratio * (upper - lower); seeded
    mode draws each movable joint uniformly in [0.3, 1.0] of its range so
    every movable part visibly moves.
    """
    values = []
    if seed is not None:
        rng = np.random.default_rng(seed)
        for p in obj.parts:
            lo, hi = p.joint.range
            if p.joint.joint_type is JointType.FIXED or hi <= lo:
                values.append(lo)
            else:
                values.append(lo + float(rng.uniform(0.3, 1.0)) * (hi - lo))
    else:
        if not 0.0 <= ratio <= 1.0:
            raise ValueError("open ratio must be in [0, 1]")
        for p in obj.parts:
            lo, hi = p.joint.range
            values.append(lo + ratio * (hi - lo))
    return Pose(tuple(values))


def pose_object(obj: ArticulatedObject, pose: Pose) -> list[PosedPart]:
    """FK over the tree; the rest pose yields identity frames and corners
    equal to the rest boxes."""
    if len(pose.joint_values) != len(obj.parts):
        raise ValueError("pose length does not match part count")
    index = {p.id: i for i, p in enumerate(obj.parts)}
    frames: dict[int, RigidTransform] = {}

    def frame_of(part: Part) -> RigidTransform:
        if part.id in frames:
            return frames[part.id]
        local = joint_transform(part.joint, pose.joint_values[index[part.id]])
        if part.parent_id is None:
            frames[part.id] = local
        else:
            parent = obj.parts[index[part.parent_id]]
            frames[part.id] = frame_of(parent).compose(local)
        return frames[part.id]

    posed = []
    for part in obj.parts:
        frame = frame_of(part)
        corners = frame.apply(np.array(part.bbox_rest.corners(), dtype=float))
        posed.append(
            PosedPart(part_id=part.id, frame=frame, corners=corners, bbox_rest=part.bbox_rest)
        )
    return posed


# ---------------------------------------------------------------------------
# Surface sampling

_FACE_AXES = ((0, 1, 2), (1, 0, 2), (2, 0, 1))  # (fixed axis, u axis, v axis)


def _box_face_points(
    bbox: Aabb, n: int, rng: np.random.Generator
) -> np.ndarray:
    ext = np.asarray(bbox.extents, dtype=float)
    lo = np.asarray(bbox.min, dtype=float)
    hi = np.asarray(bbox.max, dtype=float)
    # Face order: x-min, x-max, y-min, y-max, z-min, z-max.
    areas = np.array(
        [
            ext[1] * ext[2],
            ext[1] * ext[2],
            ext[0] * ext[2],
            ext[0] * ext[2],
            ext[0] * ext[1],
            ext[0] * ext[1],
        ]
    )
    total = areas.sum()
    if total <= 0.0:
        return np.zeros((0, 3))
    faces = rng.choice(6, size=n, p=areas / total)
    uv = rng.random((n, 2))
    pts = np.empty((n, 3))
    for f in range(6):
        mask = faces == f
        if not mask.any():
            continue
        fixed, u_ax, v_ax = _FACE_AXES[f // 2]
        pts[mask, fixed] = hi[fixed] if f % 2 else lo[fixed]
        pts[mask, u_ax] = lo[u_ax] + uv[mask, 0] * ext[u_ax]
        pts[mask, v_ax] = lo[v_ax] + uv[mask, 1] * ext[v_ax]
    return pts


def _triangle_points(
    verts: np.ndarray, faces: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    a = verts[faces[:, 0]]
    b = verts[faces[:, 1]]
    c = verts[faces[:, 2]]
    areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    total = areas.sum()
    if total <= 0.0:
        return np.zeros((0, 3))
    tri = rng.choice(len(faces), size=n, p=areas / total)
    u = rng.random((n, 1))
    v = rng.random((n, 1))
    flip = (u + v) > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    return a[tri] + u * (b[tri] - a[tri]) + v * (c[tri] - a[tri])


def sample_surface_points(
    posed: list[PosedPart],
    n_per_part: int,
    seed: int,
    meshes: dict[int, tuple[np.ndarray, np.ndarray]] | None = None,
) -> np.ndarray:
    """Area-weighted uniform samples on each posed part's surface.

    Box faces by default; rest-frame triangle meshes (verts, faces) can be
    attached per part id. Degenerate zero-area parts contribute no points.
    """
    if n_per_part < 1:
        raise ValueError("n_per_part must be >= 1")
    rng = np.random.default_rng(seed)
    clouds = []
    for pp in posed:
        if meshes is not None and pp.part_id in meshes:
            verts, faces = meshes[pp.part_id]
            pts = _triangle_points(np.asarray(verts, float), np.asarray(faces, int), n_per_part, rng)
        else:
            pts = _box_face_points(pp.bbox_rest, n_per_part, rng)
        if len(pts):
            clouds.append(pp.frame.apply(pts))
    if not clouds:
        return np.zeros((0, 3))
    return np.concatenate(clouds, axis=0)


def write_ply(points: np.ndarray, path: str) -> None:
    """ASCII PLY point cloud, one 'x y z' vertex per line."""
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(points)}",
        "property float x",
        "property float y",
        "property float z",
        "end_header",
    ]
    for p in points:
        lines.append(f"{format_float(p[0])} {format_float(p[1])} {format_float(p[2])}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Plausibility (the deterministic subset of the visual filter)

P1_OVERLAP_FRACTION = 1e-6
P2_MIN_DISPLACEMENT = 1e-3


def _aabb_overlap_volume(a: Aabb, b: Aabb) -> float:
    vol = 1.0
    for k in range(3):
        lo = max(a.min[k], b.min[k])
        hi = min(a.max[k], b.max[k])
        if hi <= lo:
            return 0.0
        vol *= hi - lo
    return vol


def _free_edge_indices(part: Part) -> tuple[int, int] | None:
    """Corner-index pair of the box edge parallel to the hinge axis and
    farthest from the axis line."""
    corners = np.array(part.bbox_rest.corners(), dtype=float)
    direction = np.asarray(part.joint.direction, dtype=float)
    origin = np.asarray(part.joint.origin, dtype=float)
    best = None
    best_dist = -1.0
    for i, j in EDGE_PAIRS:
        edge = corners[j] - corners[i]
        norm = np.linalg.norm(edge)
        if norm <= 0.0:
            continue
        if abs(edge @ direction) / norm < 0.99:
            continue
        mid = (corners[i] + corners[j]) / 2.0
        rel = mid - origin
        dist = np.linalg.norm(rel - (rel @ direction) * direction)
        if dist > best_dist:
            best_dist = dist
            best = (i, j)
    return best


def check_plausibility(obj: ArticulatedObject) -> list[str]:
    """Deterministic articulation sanity checks; empty list = plausible.

    P1 sibling movable parts must not interpenetrate at rest; P2 movable
    parts must actually move at full open (fixed joints are exempt by
    definition); P3 doors must swing outward; P4 attachments must stay on
    their parent at both states.
    """
    violations = []
    parts = obj.parts
    movable = [p for p in parts if p.is_movable]

    by_parent: dict[int | None, list[Part]] = {}
    for p in movable:
        by_parent.setdefault(p.parent_id, []).append(p)
    for siblings in by_parent.values():
        for a in range(len(siblings)):
            for b in range(a + 1, len(siblings)):
                pa, pb = siblings[a], siblings[b]
                overlap = _aabb_overlap_volume(pa.bbox_rest, pb.bbox_rest)
                min_vol = min(pa.bbox_rest.volume, pb.bbox_rest.volume)
                if overlap > P1_OVERLAP_FRACTION * min_vol:
                    violations.append(f"P1: parts {pa.id} and {pb.id} overlap at rest")

    posed_rest = {pp.part_id: pp for pp in pose_object(obj, rest_pose(obj))}
    posed_open = {pp.part_id: pp for pp in pose_object(obj, open_pose(obj, ratio=1.0))}

    for p in parts:
        if p.joint.joint_type in (JointType.REVOLUTE, JointType.PRISMATIC):
            disp = np.linalg.norm(
                posed_open[p.id].centroid - posed_rest[p.id].centroid
            )
            if disp < P2_MIN_DISPLACEMENT:
                violations.append(f"P2: part {p.id} barely moves at full open ({disp:.2e})")

    for p in parts:
        if p.label is PartLabel.DOOR and p.joint.joint_type is JointType.REVOLUTE:
            edge = _free_edge_indices(p)
            if edge is None:
                continue
            i, j = edge
            z_rest = (posed_rest[p.id].corners[i, 2] + posed_rest[p.id].corners[j, 2]) / 2
            z_open = (posed_open[p.id].corners[i, 2] + posed_open[p.id].corners[j, 2]) / 2
            if z_open <= z_rest + 1e-9:
                violations.append(f"P3: door {p.id} does not swing outward")

    index = {p.id: p for p in parts}
    for p in parts:
        if p.label not in (PartLabel.HANDLE, PartLabel.KNOB) or p.parent_id is None:
            continue
        parent = index[p.parent_id]
        inflate = p.bbox_rest.extents[2] + 1e-9
        lo = np.asarray(parent.bbox_rest.min) - inflate
        hi = np.asarray(parent.bbox_rest.max) + inflate
        for posed in (posed_rest, posed_open):
            parent_frame = posed[parent.id].frame
            local = parent_frame.inverse_apply(posed[p.id].corners)
            if (local < lo - 1e-9).any() or (local > hi + 1e-9).any():
                violations.append(f"P4: {p.label.display} {p.id} leaves its parent")
                break
    return violations


__all__ = [
    "EDGE_PAIRS",
    "Pose",
    "PosedPart",
    "RigidTransform",
    "check_plausibility",
    "joint_transform",
    "open_pose",
    "pose_object",
    "rest_pose",
    "rotation_about_axis",
    "sample_surface_points",
    "write_ply",
]
