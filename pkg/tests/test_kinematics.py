from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from artikit.assembly import AssemblyConfig, assemble
from artikit.core import (
    Aabb,
    ArticulatedObject,
    JointSpec,
    JointType,
    Part,
    PartLabel,
    fixed_joint,
)
from artikit.kinematics import (
    EDGE_PAIRS,
    Pose,
    check_plausibility,
    joint_transform,
    open_pose,
    pose_object,
    rest_pose,
    sample_surface_points,
    write_ply,
)
from artikit.layout import Complexity, sample_layout

CFG = AssemblyConfig()


def rotation_oracle(origin, direction, angle, point):
    """Independent route: translate to axis, scipy rotation, translate back."""
    rot = Rotation.from_rotvec(angle * np.asarray(direction, float))
    return rot.apply(np.asarray(point, float) - origin) + origin


class TestJointTransform:
    def test_quarter_turn_about_z(self):
        joint = JointSpec(JointType.REVOLUTE, (0, 0, 0), (0.0, 0.0, 1.0), (0.0, math.pi))
        moved = joint_transform(joint, math.pi / 2).apply(np.array([1.0, 0.0, 0.0]))
        assert moved == pytest.approx((0.0, 1.0, 0.0), abs=1e-12)

    def test_prismatic_translation(self):
        joint = JointSpec(JointType.PRISMATIC, (0, 0, 0), (0.0, 0.0, 1.0), (0.0, 1.0))
        moved = joint_transform(joint, 0.3).apply(np.zeros(3))
        assert moved == pytest.approx((0.0, 0.0, 0.3))

    def test_off_axis_rotation_matches_hand_oracle(self):
        # Hinge line through (-0.5, 0, 0.25); the outward-swinging vertical
        # hinge uses direction (0, -1, 0) and carries the front-center point
        # of the door into the +z hemisphere.
        joint = JointSpec(
            JointType.REVOLUTE, (-0.5, 0.0, 0.25), (0.0, -1.0, 0.0), (0.0, math.pi / 2)
        )
        point = np.array([0.0, 0.0, 0.25])
        moved = joint_transform(joint, math.pi / 2).apply(point)
        assert moved == pytest.approx((-0.5, 0.0, 0.75), abs=1e-12)
        oracle = rotation_oracle((-0.5, 0.0, 0.25), (0.0, -1.0, 0.0), math.pi / 2, point)
        assert moved == pytest.approx(oracle, abs=1e-12)

    def test_random_axes_match_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            origin = rng.normal(size=3)
            angle = float(rng.uniform(0, math.pi))
            point = rng.normal(size=3)
            joint = JointSpec(
                JointType.REVOLUTE, tuple(origin), tuple(direction), (0.0, math.pi)
            )
            moved = joint_transform(joint, angle).apply(point)
            assert moved == pytest.approx(
                rotation_oracle(origin, direction, angle, point), abs=1e-9
            )

    def test_out_of_range_value(self):
        joint = JointSpec(JointType.REVOLUTE, (0, 0, 0), (0.0, 0.0, 1.0), (0.0, 1.0))
        with pytest.raises(ValueError, match="out of range"):
            joint_transform(joint, 1.5)

    def test_fixed_is_identity(self):
        t = joint_transform(fixed_joint((1.0, 2.0, 3.0)), 0.0)
        assert np.array_equal(t.rotation, np.eye(3))
        assert np.array_equal(t.translation, np.zeros(3))


def door_object():
    layout = sample_layout("Storage Furniture", Complexity.MID, 17)
    return assemble(layout, CFG, seed=17)


class TestPoseObject:
    def test_rest_pose_is_identity(self):
        obj = door_object()
        for pp in pose_object(obj, rest_pose(obj)):
            assert np.array_equal(pp.frame.rotation, np.eye(3))
            assert np.array_equal(pp.frame.translation, np.zeros(3))
            rest_corners = np.array(pp.bbox_rest.corners())
            assert np.array_equal(pp.corners, rest_corners)

    def test_handle_rides_its_door(self):
        obj = door_object()
        posed = {pp.part_id: pp for pp in pose_object(obj, open_pose(obj, 1.0))}
        for p in obj.parts:
            if p.label in (PartLabel.HANDLE, PartLabel.KNOB):
                parent = posed[p.parent_id]
                child = posed[p.id]
                assert np.allclose(child.frame.rotation, parent.frame.rotation)
                assert np.allclose(child.frame.translation, parent.frame.translation)

    def test_drawer_handles_translate_exactly(self):
        # Compose-translation oracle: everything on an open drawer shifts by
        # exactly (0, 0, travel).
        drawer = Part(
            1,
            PartLabel.DRAWER,
            Aabb((-0.4, 0.0, -0.2), (0.4, 0.3, 0.25)),
            JointSpec(JointType.PRISMATIC, (0.0, 0.15, 0.25), (0.0, 0.0, 1.0), (0.0, 0.36)),
            0,
        )
        handles = [
            Part(
                2 + k,
                PartLabel.HANDLE,
                Aabb((-0.3 + 0.4 * k, 0.1, 0.25), (-0.28 + 0.4 * k, 0.22, 0.28)),
                fixed_joint(),
                1,
            )
            for k in range(2)
        ]
        base = Part(0, PartLabel.BASE, Aabb((-0.5, 0, -0.25), (0.5, 1, 0.25)), fixed_joint(), None)
        obj = ArticulatedObject("Storage Furniture", (base, drawer, *handles))
        posed = {pp.part_id: pp for pp in pose_object(obj, Pose((0.0, 0.36, 0.0, 0.0)))}
        rest = {pp.part_id: pp for pp in pose_object(obj, rest_pose(obj))}
        for pid in (2, 3):
            delta = posed[pid].centroid - rest[pid].centroid
            assert delta == pytest.approx((0.0, 0.0, 0.36), abs=1e-15)

    def test_rigidity_over_random_poses(self):
        rng = np.random.default_rng(5)
        obj = door_object()
        rest_corners = {
            pp.part_id: pp.corners for pp in pose_object(obj, rest_pose(obj))
        }
        for _ in range(50):
            pose = open_pose(obj, seed=int(rng.integers(1 << 31)))
            for pp in pose_object(obj, pose):
                rc = rest_corners[pp.part_id]
                for i, j in EDGE_PAIRS:
                    a = np.linalg.norm(rc[j] - rc[i])
                    b = np.linalg.norm(pp.corners[j] - pp.corners[i])
                    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


class TestOpenPose:
    def test_ratio_zero_is_rest(self):
        obj = door_object()
        assert open_pose(obj, 0.0) == rest_pose(obj)

    def test_ratio_one_hits_upper(self):
        obj = door_object()
        pose = open_pose(obj, 1.0)
        for p, v in zip(obj.parts, pose.joint_values):
            assert v == pytest.approx(p.joint.range[1])

    def test_seeded_mode_opens_everything(self):
        obj = door_object()
        for seed in range(1000):
            pose = open_pose(obj, seed=seed)
            for p, v in zip(obj.parts, pose.joint_values):
                lo, hi = p.joint.range
                if p.joint.joint_type is not JointType.FIXED and hi > lo:
                    assert v >= lo + 0.3 * (hi - lo) - 1e-12
                    assert v <= hi + 1e-12


class TestSurfaceSampling:
    def test_unit_cube_face_counts_multinomial(self):
        cube = Part(0, PartLabel.BASE, Aabb((0, 0, 0), (1, 1, 1)), fixed_joint(), None)
        obj = ArticulatedObject("Table", (cube,))
        pts = sample_surface_points(pose_object(obj, rest_pose(obj)), 6000, seed=0)
        assert len(pts) == 6000
        # Each face expects n*p = 1000 with sigma = sqrt(n*p*(1-p)) ~ 28.9.
        sigma = math.sqrt(6000 * (1 / 6) * (5 / 6))
        # Face coordinates are assigned exactly, so classify by equality.
        counts = []
        for axis in range(3):
            for val in (0.0, 1.0):
                counts.append(int(np.sum(pts[:, axis] == val)))
        assert sum(counts) == 6000
        for c in counts:
            assert abs(c - 1000) <= 3 * sigma

    def test_degenerate_part_contributes_nothing(self):
        flat = Part(
            0,
            PartLabel.HANDLE,
            Aabb((0, 0, 0), (0.0, 0.0, 0.0)),
            fixed_joint(),
            None,
        )
        cube = Part(1, PartLabel.BASE, Aabb((0, 0, 0), (1, 1, 1)), fixed_joint(), 0)
        # build posed parts directly to avoid validation concerns
        from artikit.kinematics import PosedPart, RigidTransform

        posed = [
            PosedPart(0, RigidTransform.identity(), np.array(flat.bbox_rest.corners(), float), flat.bbox_rest),
            PosedPart(1, RigidTransform.identity(), np.array(cube.bbox_rest.corners(), float), cube.bbox_rest),
        ]
        pts = sample_surface_points(posed, 100, seed=1)
        assert len(pts) == 100

    def test_determinism(self):
        obj = door_object()
        posed = pose_object(obj, open_pose(obj, 1.0))
        a = sample_surface_points(posed, 64, seed=7)
        b = sample_surface_points(posed, 64, seed=7)
        assert np.array_equal(a, b)

    def test_mesh_triangle_path(self):
        tri_verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], float)
        tri_faces = np.array([[0, 1, 2]])
        cube = Part(0, PartLabel.BASE, Aabb((0, 0, 0), (1, 1, 1)), fixed_joint(), None)
        obj = ArticulatedObject("Table", (cube,))
        posed = pose_object(obj, rest_pose(obj))
        pts = sample_surface_points(posed, 500, seed=2, meshes={0: (tri_verts, tri_faces)})
        assert len(pts) == 500
        assert np.allclose(pts[:, 2], 0.0)
        assert (pts[:, 0] + pts[:, 1] <= 1.0 + 1e-12).all()

    def test_ply_writer(self, tmp_path):
        pts = np.array([[0.0, 0.5, -1.25]])
        path = tmp_path / "cloud.ply"
        write_ply(pts, str(path))
        text = path.read_text()
        assert "element vertex 1" in text
        assert text.strip().endswith("0.000000 0.500000 -1.250000")


class TestPlausibility:
    def test_coincident_drawers_fail_p1(self):
        base = Part(0, PartLabel.BASE, Aabb((-0.5, 0, -0.25), (0.5, 1, 0.25)), fixed_joint(), None)
        mk = lambda pid: Part(
            pid,
            PartLabel.DRAWER,
            Aabb((-0.4, 0.1, -0.2), (0.4, 0.4, 0.25)),
            JointSpec(JointType.PRISMATIC, (0, 0.25, 0.25), (0.0, 0.0, 1.0), (0.0, 0.3)),
            0,
        )
        obj = ArticulatedObject("Storage Furniture", (base, mk(1), mk(2)))
        assert any(v.startswith("P1") for v in check_plausibility(obj))

    def test_zero_range_revolute_fails_p2(self):
        base = Part(0, PartLabel.BASE, Aabb((-0.5, 0, -0.25), (0.5, 1, 0.25)), fixed_joint(), None)
        door = Part(
            1,
            PartLabel.DOOR,
            Aabb((-0.5, 0.0, 0.225), (0.0, 1.0, 0.25)),
            JointSpec(JointType.REVOLUTE, (-0.5, 0.0, 0.25), (0.0, -1.0, 0.0), (0.0, 0.0)),
            0,
        )
        obj = ArticulatedObject("Storage Furniture", (base, door))
        assert any(v.startswith("P2") for v in check_plausibility(obj))

    def test_inward_door_fails_p3(self):
        base = Part(0, PartLabel.BASE, Aabb((-0.5, 0, -0.25), (0.5, 1, 0.25)), fixed_joint(), None)
        door = Part(
            1,
            PartLabel.DOOR,
            Aabb((-0.5, 0.0, 0.225), (0.0, 1.0, 0.25)),
            JointSpec(JointType.REVOLUTE, (-0.5, 0.0, 0.25), (0.0, 1.0, 0.0), (0.0, math.pi / 2)),
            0,
        )
        obj = ArticulatedObject("Storage Furniture", (base, door))
        assert any(v.startswith("P3") for v in check_plausibility(obj))

    def test_detached_handle_fails_p4(self):
        base = Part(0, PartLabel.BASE, Aabb((-0.5, 0, -0.25), (0.5, 1, 0.25)), fixed_joint(), None)
        door = Part(
            1,
            PartLabel.DOOR,
            Aabb((-0.5, 0.0, 0.225), (0.0, 1.0, 0.25)),
            JointSpec(JointType.REVOLUTE, (-0.5, 0.0, 0.25), (0.0, -1.0, 0.0), (0.0, math.pi / 2)),
            0,
        )
        handle = Part(
            2,
            PartLabel.HANDLE,
            Aabb((0.3, 0.4, 0.25), (0.32, 0.52, 0.28)),  # floats off the door
            fixed_joint((0.31, 0.46, 0.26)),
            1,
        )
        obj = ArticulatedObject("Storage Furniture", (base, door, handle))
        assert any(v.startswith("P4") for v in check_plausibility(obj))

    def test_assembled_objects_pass(self):
        for seed in range(300):
            layout = sample_layout("Storage Furniture", Complexity.MID, seed)
            obj = assemble(layout, CFG, seed=seed)
            assert check_plausibility(obj) == [], seed
