import math
from dataclasses import dataclass

import numpy as np
import pytest

from harmony.geometry import Box, Circle
from harmony.kinematics import (
    Configuration,
    EndEffectorPose,
    RobotModel,
    compute_weights,
    displacement_upper_bound_check,
    forward_kinematics,
    interpolate,
    inverse_kinematics,
    robot_in_collision,
    weighted_distance,
    wrap_angle,
)


@dataclass(frozen=True)
class _MiniScene:
    bounds: Box
    obstacles: tuple


def _cfg(x, y, th, joints):
    return Configuration(x, y, th, tuple(joints))


# ---------------------------------------------------------------------------
# forward kinematics


def test_fk_stretched(model):
    pose, shapes = forward_kinematics(model, _cfg(0, 0, 0, (0, 0, 0)))
    assert (pose.x, pose.y, pose.phi) == pytest.approx((1.2, 0.0, 0.0))
    assert len(shapes) == 4  # base disc + 3 link capsules


def test_fk_base_rotation(model):
    pose, _ = forward_kinematics(model, _cfg(0, 0, math.pi / 2, (0, 0, 0)))
    assert (pose.x, pose.y) == pytest.approx((0.0, 1.2), abs=1e-12)
    assert pose.phi == pytest.approx(math.pi / 2)


def test_fk_first_joint_rotation(model):
    pose, _ = forward_kinematics(model, _cfg(0, 0, 0, (math.pi / 2, 0, 0)))
    assert (pose.x, pose.y) == pytest.approx((0.0, 1.2), abs=1e-12)
    assert pose.phi == pytest.approx(math.pi / 2)


def test_fk_rigid_transform_equivariance(model, rng):
    for _ in range(200):
        joints = rng.uniform(-2.6, 2.6, size=3)
        pose0, shapes0 = forward_kinematics(model, _cfg(0, 0, 0, joints))
        dx, dy, dth = rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-math.pi, math.pi)
        pose1, shapes1 = forward_kinematics(model, _cfg(dx, dy, dth, joints))
        c, s = math.cos(dth), math.sin(dth)
        assert pose1.x == pytest.approx(dx + c * pose0.x - s * pose0.y, abs=1e-9)
        assert pose1.y == pytest.approx(dy + s * pose0.x + c * pose0.y, abs=1e-9)
        assert wrap_angle(pose1.phi - pose0.phi - dth) == pytest.approx(0.0, abs=1e-9)
        for s0, s1 in zip(shapes0[1:], shapes1[1:]):
            assert s1.ax == pytest.approx(dx + c * s0.ax - s * s0.ay, abs=1e-9)
            assert s1.ay == pytest.approx(dy + s * s0.ax + c * s0.ay, abs=1e-9)


# ---------------------------------------------------------------------------
# inverse kinematics


def test_ik_stretched_reach(model):
    joints = inverse_kinematics(model, (0, 0, 0), EndEffectorPose(1.2, 0, 0), rng_seed=1)
    assert joints is not None
    pose, _ = forward_kinematics(model, _cfg(0, 0, 0, joints))
    assert math.hypot(pose.x - 1.2, pose.y) < 1e-6
    assert abs(wrap_angle(pose.phi)) < 1e-6


def test_ik_beyond_reach(model):
    assert inverse_kinematics(model, (0, 0, 0), EndEffectorPose(5, 0, 0), rng_seed=1) is None


def test_ik_generic_target_roundtrip(model):
    target = EndEffectorPose(0.9, 0.3, math.pi / 4)
    joints = inverse_kinematics(model, (0, 0, 0), target, rng_seed=3)
    assert joints is not None
    pose, _ = forward_kinematics(model, _cfg(0, 0, 0, joints))
    assert math.hypot(pose.x - target.x, pose.y - target.y) < 1e-6
    assert abs(wrap_angle(pose.phi - target.phi)) < 1e-6
    lim = model.joint_limits_array
    assert np.all(joints >= lim[:, 0]) and np.all(joints <= lim[:, 1])


def test_ik_soundness_on_random_reachable_targets(model, rng):
    n_ok = 0
    for i in range(1000):
        joints = rng.uniform(-2.0, 2.0, size=3)
        base = (rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-math.pi, math.pi))
        pose, _ = forward_kinematics(model, _cfg(*base, joints))
        sol = inverse_kinematics(model, base, pose, rng_seed=i)
        if sol is None:
            continue
        n_ok += 1
        back, _ = forward_kinematics(model, _cfg(*base, sol))
        assert math.hypot(back.x - pose.x, back.y - pose.y) < 1e-6
        assert abs(wrap_angle(back.phi - pose.phi)) < 1e-6
    assert n_ok > 950  # targets are reachable by construction


# ---------------------------------------------------------------------------
# metric weights


def test_weights_distal_chain_sums(thin_model):
    w = compute_weights(thin_model)
    assert w[:2] == pytest.approx([1.0, 1.0])
    assert w[2] == pytest.approx(1.2)  # base rotation lever arm
    assert w[3:] == pytest.approx([1.2, 0.7, 0.3])


def test_weights_single_link():
    m = RobotModel(
        base_radius=0.3,
        arm_mount_offset=(0.0, 0.0),
        link_lengths=(1.0,),
        link_radius=0.0,
        joint_limits=((-2.6, 2.6),),
        predefined_posture=(0.0,),
        sphere_base=0.3,
        sphere_manip_center=(0.5, 0.0),
        sphere_manip=0.51,
    )
    assert compute_weights(m)[3:] == pytest.approx([1.0])


def test_weights_mount_offset_extends_lever():
    m = RobotModel(
        base_radius=0.3,
        arm_mount_offset=(0.2, 0.0),
        link_lengths=(0.5, 0.4, 0.3),
        link_radius=0.0,
        joint_limits=((-2.6, 2.6),) * 3,
        predefined_posture=(0.0, 0.0, 0.0),
        sphere_base=0.3,
        sphere_manip_center=(0.8, 0.0),
        sphere_manip=0.61,
    )
    assert compute_weights(m)[2] == pytest.approx(1.4)


def test_weights_random_link_vectors(rng):
    for _ in range(10):
        n = int(rng.integers(1, 6))
        links = tuple(rng.uniform(0.1, 1.0, size=n))
        m = RobotModel(
            base_radius=0.3,
            arm_mount_offset=(0.0, 0.0),
            link_lengths=links,
            link_radius=0.0,
            joint_limits=((-2.6, 2.6),) * n,
            predefined_posture=(0.0,) * n,
            sphere_base=0.3,
            sphere_manip_center=(sum(links) / 2, 0.0),
            sphere_manip=sum(links) / 2 + 0.01,
        )
        w = compute_weights(m)
        for j in range(n):
            assert w[3 + j] == sum(links[j:])


# ---------------------------------------------------------------------------
# weighted metric


def test_metric_identity(thin_model):
    q = _cfg(0.3, -0.2, 0.5, (0.1, -0.4, 1.0))
    assert weighted_distance(thin_model, q, q) == 0.0


def test_metric_unit_weight_translation(thin_model):
    a = _cfg(0, 0, 0, (0, 0, 0))
    b = _cfg(0.3, 0, 0, (0, 0, 0))
    assert weighted_distance(thin_model, a, b) == pytest.approx(0.3)


def test_metric_first_joint(thin_model):
    a = _cfg(0, 0, 0, (0.0, 0, 0))
    b = _cfg(0, 0, 0, (0.5, 0, 0))
    assert weighted_distance(thin_model, a, b) == pytest.approx(0.6)


def test_metric_properties_random_triples(thin_model, rng):
    lim = 2.6
    def rand_cfg():
        return _cfg(
            rng.uniform(-3, 3),
            rng.uniform(-3, 3),
            rng.uniform(-math.pi, math.pi),
            rng.uniform(-lim, lim, size=3),
        )

    for _ in range(10_000):
        a, b, c = rand_cfg(), rand_cfg(), rand_cfg()
        dab = weighted_distance(thin_model, a, b)
        dba = weighted_distance(thin_model, b, a)
        assert abs(dab - dba) <= 1e-9
        assert dab >= 0
        assert dab <= weighted_distance(thin_model, a, c) + weighted_distance(thin_model, c, b) + 1e-9


def test_metric_wraps_shortest_arc(thin_model):
    a = _cfg(0, 0, -math.pi + 0.05, (0, 0, 0))
    b = _cfg(0, 0, math.pi - 0.05, (0, 0, 0))
    assert weighted_distance(thin_model, a, b) == pytest.approx(1.2 * 0.1, abs=1e-9)


# ---------------------------------------------------------------------------
# displacement bound oracle


def test_displacement_identity(model):
    q = _cfg(0.1, 0.2, 0.3, (0.4, 0.5, 0.6))
    assert displacement_upper_bound_check(model, q, q)


def test_displacement_pure_translation(model):
    a = _cfg(0, 0, 0, (0.3, -0.2, 0.7))
    b = _cfg(0.5, 0, 0, (0.3, -0.2, 0.7))
    assert displacement_upper_bound_check(model, a, b)


def test_displacement_bound_holds_random_pairs(model, rng):
    for _ in range(1000):
        a = _cfg(
            rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-math.pi, math.pi),
            rng.uniform(-2.6, 2.6, size=3),
        )
        b = _cfg(
            a.base_x + rng.uniform(-0.5, 0.5),
            a.base_y + rng.uniform(-0.5, 0.5),
            a.base_theta + rng.uniform(-1, 1),
            np.clip(np.array(a.joints) + rng.uniform(-1, 1, size=3), -2.6, 2.6),
        )
        assert displacement_upper_bound_check(model, a, b, n_body_samples=300)


def test_weight_tightness_stretched_single_joint(model):
    # rotating one joint with the arm stretched: the tip cap sweeps an arc of
    # radius w_j, so sampled displacement reaches >= 0.99 of the bound
    from harmony.kinematics import _body_material_points, _material_points_world

    w = model.weights
    for j, delta in ((0, 0.1), (1, 0.1), (2, 0.1)):
        a = _cfg(0, 0, 0, (0, 0, 0))
        joints = [0.0, 0.0, 0.0]
        joints[j] = delta
        b = _cfg(0, 0, 0, joints)
        mats = _body_material_points(model, 200)
        pa = _material_points_world(model, a.as_array(), mats)
        pb = _material_points_world(model, b.as_array(), mats)
        disp = float(np.max(np.hypot(pa[:, 0] - pb[:, 0], pa[:, 1] - pb[:, 1])))
        bound = w[3 + j] * delta
        assert disp <= bound + 1e-9
        assert disp >= 0.99 * bound


def test_weight_tightness_base_rotation(model):
    from harmony.kinematics import _body_material_points, _material_points_world

    a = _cfg(0, 0, 0, (0, 0, 0))
    b = _cfg(0, 0, 0.1, (0, 0, 0))
    mats = _body_material_points(model, 200)
    pa = _material_points_world(model, a.as_array(), mats)
    pb = _material_points_world(model, b.as_array(), mats)
    disp = float(np.max(np.hypot(pa[:, 0] - pb[:, 0], pa[:, 1] - pb[:, 1])))
    bound = model.weights[2] * 0.1
    assert 0.99 * bound <= disp <= bound + 1e-9


# ---------------------------------------------------------------------------
# collision checking


def test_collision_empty_scene(model):
    scene = _MiniScene(Box(-3, -3, 3, 3), ())
    assert not robot_in_collision(model, _cfg(0, 0, 0, (0, 0, 0)), scene)


def test_collision_base_inside_obstacle(model):
    scene = _MiniScene(Box(-3, -3, 3, 3), (Circle(0, 0, 0.5),))
    assert robot_in_collision(model, _cfg(0, 0, 0, (0, 0, 0)), scene)


def test_collision_arm_crosses_wall(model):
    # base clear of the wall but the stretched arm pokes through it
    wall = Box(0.8, -1.0, 0.9, 1.0)
    scene = _MiniScene(Box(-3, -3, 3, 3), (wall,))
    assert robot_in_collision(model, _cfg(0, 0, 0, (0, 0, 0)), scene)
    # folded arm stays clear
    assert not robot_in_collision(model, _cfg(0, 0, 0, (2.6, -2.6, 2.6)), scene)


def test_collision_out_of_bounds(model):
    scene = _MiniScene(Box(-1, -1, 1, 1), ())
    assert robot_in_collision(model, _cfg(0.9, 0, 0, (0, 0, 0)), scene)


def test_interpolate_wraps(model):
    a = np.array([0, 0, -math.pi + 0.1, 0, 0, 0], dtype=float)
    b = np.array([0, 0, math.pi - 0.1, 0, 0, 0], dtype=float)
    mid = interpolate(a, b, 0.5)
    assert abs(wrap_angle(mid[2] - (-math.pi))) < 1e-9
