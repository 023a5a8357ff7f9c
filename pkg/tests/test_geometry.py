"""Core type and geometry operation tests.

Derived expectations were computed with the independent oracles defined in
this file (hand pinhole deprojection; matrix-composition + Shepperd
matrix-to-quaternion) and frozen as literals.
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from manipbench.errors import BoundsError, InvalidPoseError, NoDepthError
from manipbench.geometry import (
    INVALID_DEPTH,
    CameraIntrinsics,
    DepthImage,
    GraspCandidate,
    GraspRectangle,
    ObjectModel,
    PointCloud,
    Pose6DoF,
    Trajectory,
    deproject_depth_image,
    matrix_to_rpy,
    normalize_angles,
    pose_to_quaternion,
    quaternion_to_angles,
    rect_to_pose,
    rpy_to_matrix,
    wrap_angle,
)

finite_angle = st.floats(min_value=-50.0, max_value=50.0,
                         allow_nan=False, allow_infinity=False)
finite_coord = st.floats(min_value=-100.0, max_value=100.0,
                         allow_nan=False, allow_infinity=False)


# --- independent oracles ----------------------------------------------------

def oracle_deproject(u, v, d, fx, fy, cx, cy):
    """Pinhole deprojection written without the library."""
    return ((u - cx) * d / fx, (v - cy) * d / fy, d)


def _rx(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def _ry(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def _rz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def oracle_quaternion(roll, pitch, yaw):
    """Compose axis rotations as matrices, convert with Shepperd's method."""
    m = _rx(roll) @ _ry(pitch) @ _rz(yaw)
    t = np.trace(m)
    if t > 0:
        s = math.sqrt(t + 1.0) * 2
        return (0.25 * s, (m[2, 1] - m[1, 2]) / s,
                (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s)
    i = int(np.argmax(np.diag(m)))
    if i == 0:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        return ((m[2, 1] - m[1, 2]) / s, 0.25 * s,
                (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s)
    if i == 1:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        return ((m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s,
                0.25 * s, (m[1, 2] + m[2, 1]) / s)
    s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
    return ((m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s,
            (m[1, 2] + m[2, 1]) / s, 0.25 * s)


def quat_close(qa, qb, tol=1e-9):
    """Quaternion equality up to global sign."""
    direct = max(abs(a - b) for a, b in zip(qa, qb))
    flipped = max(abs(a + b) for a, b in zip(qa, qb))
    return min(direct, flipped) <= tol


# --- type invariants --------------------------------------------------------

class TestTypes:
    def test_pose_rejects_non_finite(self):
        with pytest.raises(InvalidPoseError):
            Pose6DoF(0, 0, float("nan"))
        with pytest.raises(InvalidPoseError):
            Pose6DoF(0, 0, 0, yaw=float("inf"))

    def test_rectangle_rejects_bad_extents(self):
        with pytest.raises(ValueError):
            GraspRectangle(10, 10, 0.0, 5, 0)
        with pytest.raises(ValueError):
            GraspRectangle(10, 10, 5, -1, 0)

    def test_candidate_quality_consistency(self):
        pose = Pose6DoF(0, 0, 0)
        GraspCandidate(pose)  # kind none, no quality
        GraspCandidate(pose, quality=0.5, quality_kind="success_probability")
        GraspCandidate(pose, quality=12.3, quality_kind="force_closure")
        with pytest.raises(ValueError):
            GraspCandidate(pose, quality=0.5)  # quality without a kind
        with pytest.raises(ValueError):
            GraspCandidate(pose, quality_kind="heuristic")  # kind without quality
        with pytest.raises(ValueError):
            GraspCandidate(pose, quality=1.5, quality_kind="success_probability")

    def test_depth_image_shape_and_sentinel(self):
        img = DepthImage(2, 2, [0.5, 0.6, INVALID_DEPTH, 0.7])
        assert img.at(0, 0) == 0.5
        assert img.at(1, 1) == 0.7
        with pytest.raises(ValueError):
            DepthImage(2, 2, [0.5, 0.6, 0.7])
        with pytest.raises(ValueError):
            DepthImage(1, 1, [-0.3])
        with pytest.raises(BoundsError):
            img.at(2, 0)

    def test_depth_image_immutable(self):
        img = DepthImage(1, 1, [0.5])
        with pytest.raises(ValueError):
            img.data[0] = 1.0

    def test_point_cloud_rejects_non_finite(self):
        PointCloud(np.zeros((0, 3)))
        with pytest.raises(ValueError):
            PointCloud([[0, 0, float("nan")]])

    def test_object_model_convexity(self):
        ObjectModel("box", [(-1, -1), (1, -1), (1, 1), (-1, 1)], height=0.1)
        with pytest.raises(ValueError):
            ObjectModel("line", [(0, 0), (1, 0), (2, 0)], height=0.1)
        with pytest.raises(ValueError):
            ObjectModel("bowtie", [(0, 0), (2, 2), (2, 0), (0, 2)], height=0.1)
        with pytest.raises(ValueError):
            ObjectModel("two", [(0, 0), (1, 1)], height=0.1)

    def test_object_model_orientation_normalized(self):
        cw = ObjectModel("box", [(-1, 1), (1, 1), (1, -1), (-1, -1)], height=0.1)
        ccw = ObjectModel("box", [(-1, -1), (1, -1), (1, 1), (-1, 1)], height=0.1)
        assert set(cw.footprint) == set(ccw.footprint)
        np.testing.assert_allclose(cw.footprint_centroid(), [0, 0], atol=1e-12)

    def test_trajectory_invariants(self):
        Trajectory(({"a": 0.0, "b": 1.0}, {"a": 1.0, "b": 2.0}))
        with pytest.raises(ValueError):
            Trajectory(({"a": 0.0},))
        with pytest.raises(ValueError):
            Trajectory(({"a": 0.0}, {"b": 0.0}))

    def test_intrinsics_focal_positive(self):
        with pytest.raises(ValueError):
            CameraIntrinsics(fx=0, fy=1, cx=0, cy=0)


# --- normalize_angles --------------------------------------------------------

class TestNormalizeAngles:
    def test_identity(self):
        p = normalize_angles(Pose6DoF(0, 0, 0, 0, 0, 0))
        assert (p.roll, p.pitch, p.yaw) == (0, 0, 0)

    def test_three_half_pi_yaw(self):
        p = normalize_angles(Pose6DoF(1, 2, 3, 0.25, -0.5, 3 * math.pi / 2))
        assert p.yaw == pytest.approx(-math.pi / 2, abs=1e-12)
        assert (p.x, p.y, p.z, p.roll, p.pitch) == (1, 2, 3, 0.25, -0.5)

    def test_negative_pi_maps_to_positive(self):
        p = normalize_angles(Pose6DoF(0, 0, 0, roll=-math.pi))
        assert p.roll == pytest.approx(math.pi)
        assert p.roll > 0

    @given(a=finite_angle)
    def test_wrap_range(self, a):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        # same angle modulo 2*pi
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)
        assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)


# --- rect_to_pose -------------------------------------------------------------

def make_flat_depth(width, height, value):
    return DepthImage(width, height, np.full(width * height, value))


class TestRectToPose:
    K = CameraIntrinsics(fx=500, fy=500, cx=320, cy=320)

    def test_principal_point_is_optical_axis(self):
        depth = make_flat_depth(640, 640, 1.0)
        rect = GraspRectangle(320, 320, 10, 10, 0.0)
        pose = rect_to_pose(rect, depth, self.K, Pose6DoF(0, 0, 0))
        assert (pose.x, pose.y, pose.z) == pytest.approx((0, 0, 1.0), abs=1e-12)
        assert pose.yaw == pytest.approx(0, abs=1e-12)
        # approach axis anti-parallel to the optical axis (+z camera)
        approach = pose.rotation_matrix() @ np.array([0, 0, 1.0])
        np.testing.assert_allclose(approach, [0, 0, -1], atol=1e-12)

    def test_one_focal_length_offset(self):
        k = CameraIntrinsics(fx=100, fy=100, cx=320, cy=320)
        depth = make_flat_depth(640, 640, 1.0)
        rect = GraspRectangle(420, 320, 10, 10, 0.0)
        pose = rect_to_pose(rect, depth, k, Pose6DoF(0, 0, 0))
        assert (pose.x, pose.y, pose.z) == pytest.approx((1.0, 0, 1.0), abs=1e-12)

    def test_off_axis_against_deprojection_oracle(self):
        # frozen from oracle_deproject(420, 270, 0.8, 500, 500, 320, 320)
        expected = (0.16, -0.08, 0.8)
        assert oracle_deproject(420, 270, 0.8, 500, 500, 320, 320) == \
            pytest.approx(expected, abs=1e-15)
        depth = make_flat_depth(640, 640, 0.8)
        rect = GraspRectangle(420, 270, 12, 8, 0.3)
        pose = rect_to_pose(rect, depth, self.K, Pose6DoF(0, 0, 0))
        assert (pose.x, pose.y, pose.z) == pytest.approx(expected, abs=1e-12)
        assert pose.yaw == pytest.approx(0.3, abs=1e-12)

    def test_invalid_depth_at_center(self):
        data = np.full(9, 1.0)
        data[4] = INVALID_DEPTH
        depth = DepthImage(3, 3, data)
        rect = GraspRectangle(1, 1, 2, 2, 0.0)
        k = CameraIntrinsics(10, 10, 1, 1)
        with pytest.raises(NoDepthError):
            rect_to_pose(rect, depth, k, Pose6DoF(0, 0, 0))

    def test_center_outside_image(self):
        depth = make_flat_depth(4, 4, 1.0)
        rect = GraspRectangle(10, 1, 2, 2, 0.0)
        k = CameraIntrinsics(10, 10, 2, 2)
        with pytest.raises(BoundsError):
            rect_to_pose(rect, depth, k, Pose6DoF(0, 0, 0))

    @given(tx=finite_coord, ty=finite_coord, tz=finite_coord)
    def test_translation_equivariance(self, tx, ty, tz):
        depth = make_flat_depth(640, 640, 0.8)
        rect = GraspRectangle(420, 270, 12, 8, 0.3)
        cam = Pose6DoF(0.1, -0.2, 0.3, 0.4, -0.1, 0.9)
        base = rect_to_pose(rect, depth, self.K, cam)
        moved = rect_to_pose(rect, depth, self.K,
                             Pose6DoF(cam.x + tx, cam.y + ty, cam.z + tz,
                                      cam.roll, cam.pitch, cam.yaw))
        assert moved.x - base.x == pytest.approx(tx, abs=1e-9)
        assert moved.y - base.y == pytest.approx(ty, abs=1e-9)
        assert moved.z - base.z == pytest.approx(tz, abs=1e-9)
        assert (moved.roll, moved.pitch, moved.yaw) == \
            (base.roll, base.pitch, base.yaw)

    def test_camera_yaw_composes(self):
        depth = make_flat_depth(640, 640, 1.0)
        rect = GraspRectangle(320, 320, 10, 10, 0.4)
        cam = Pose6DoF(0, 0, 0, yaw=0.25)
        pose = rect_to_pose(rect, depth, self.K, cam)
        expected = cam.rotation_matrix() @ _rx(math.pi) @ _rz(0.4)
        np.testing.assert_allclose(pose.rotation_matrix(), expected, atol=1e-12)


# --- quaternions --------------------------------------------------------------

class TestQuaternion:
    def test_identity(self):
        assert pose_to_quaternion(Pose6DoF(5, 6, 7)) == \
            pytest.approx((1, 0, 0, 0), abs=1e-12)

    def test_quarter_turn_about_z(self):
        q = pose_to_quaternion(Pose6DoF(0, 0, 0, yaw=math.pi / 2))
        s = math.sqrt(2) / 2
        assert q == pytest.approx((s, 0, 0, s), abs=1e-12)

    def test_against_matrix_oracle(self):
        # frozen from oracle_quaternion(0.3, -0.7, 1.1)
        expected = (0.818629265655496, -0.057539988180335,
                    -0.362420094355226, 0.441799672227244)
        assert oracle_quaternion(0.3, -0.7, 1.1) == pytest.approx(expected, abs=1e-12)
        q = pose_to_quaternion(Pose6DoF(0, 0, 0, 0.3, -0.7, 1.1))
        assert q == pytest.approx(expected, abs=1e-12)

    @given(roll=finite_angle, pitch=finite_angle, yaw=finite_angle)
    def test_unit_norm(self, roll, pitch, yaw):
        q = pose_to_quaternion(Pose6DoF(0, 0, 0, roll, pitch, yaw))
        assert math.sqrt(sum(c * c for c in q)) == pytest.approx(1.0, abs=1e-9)

    @given(roll=st.floats(-3.0, 3.0), pitch=st.floats(-1.4, 1.4),
           yaw=st.floats(-3.0, 3.0))
    def test_round_trip_away_from_gimbal_lock(self, roll, pitch, yaw):
        q = pose_to_quaternion(Pose6DoF(0, 0, 0, roll, pitch, yaw))
        r2, p2, y2 = quaternion_to_angles(*q)
        assert r2 == pytest.approx(wrap_angle(roll), abs=1e-9)
        assert p2 == pytest.approx(wrap_angle(pitch), abs=1e-9)
        assert y2 == pytest.approx(wrap_angle(yaw), abs=1e-9)

    @given(roll=finite_angle, pitch=finite_angle, yaw=finite_angle)
    def test_matches_oracle_everywhere(self, roll, pitch, yaw):
        q = pose_to_quaternion(Pose6DoF(0, 0, 0, roll, pitch, yaw))
        assert quat_close(q, oracle_quaternion(roll, pitch, yaw))

    @given(roll=finite_angle, pitch=finite_angle, yaw=finite_angle)
    def test_normalization_preserves_rotation(self, roll, pitch, yaw):
        p = Pose6DoF(0, 0, 0, roll, pitch, yaw)
        assert quat_close(pose_to_quaternion(p),
                          pose_to_quaternion(normalize_angles(p)))


# --- matrix round trip ---------------------------------------------------------

class TestMatrixRpy:
    @given(roll=st.floats(-3.1, 3.1), pitch=st.floats(-1.5, 1.5),
           yaw=st.floats(-3.1, 3.1))
    def test_round_trip(self, roll, pitch, yaw):
        m = rpy_to_matrix(roll, pitch, yaw)
        r2, p2, y2 = matrix_to_rpy(m)
        np.testing.assert_allclose(rpy_to_matrix(r2, p2, y2), m, atol=1e-9)


class TestDeprojectImage:
    def test_flat_image_spans_plane(self):
        k = CameraIntrinsics(10, 10, 1.5, 1.5)
        depth = make_flat_depth(4, 4, 2.0)
        cloud = deproject_depth_image(depth, k, Pose6DoF(0, 0, 0))
        assert len(cloud) == 16
        np.testing.assert_allclose(cloud.points[:, 2], 2.0)

    def test_invalid_pixels_skipped(self):
        k = CameraIntrinsics(10, 10, 1, 1)
        data = np.full(9, 1.0)
        data[[2, 5]] = INVALID_DEPTH
        cloud = deproject_depth_image(DepthImage(3, 3, data), k, Pose6DoF(0, 0, 0))
        assert len(cloud) == 7
