#!/usr/bin/env python3
"""Regenerate the six shipped problem fixtures under src/harmony/problems.

The fixtures are committed files; this script exists so their geometry can
be adjusted in one place and re-verified (bounding circles, corridor
constraints, start validity, goal reachability) before being rewritten.
"""

import json
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from harmony.geometry import Box, Circle
from harmony.kinematics import (
    Configuration,
    EndEffectorPose,
    RobotModel,
    _body_material_points,
    _material_points_world,
    inverse_kinematics,
    robot_in_collision,
)
from harmony.scene import load_scene

OUT = Path(__file__).resolve().parents[1] / "src" / "harmony" / "problems"

BASE_RADIUS = 0.3
LINKS = [0.5, 0.4, 0.3]
LINK_RADIUS = 0.05
LIMIT = 2.6

POSTURE_TUCK = (2.4, -2.5, 2.2)
POSTURE_STRETCH = (0.0, 0.0, 0.0)
POSTURE_WIDE = (math.pi / 2, -2.2, 0.0)


def _arm_points(posture, n=60):
    model = _model(posture, (0.0, 0.0), 10.0)  # dummy huge sphere, geometry only
    mats = [m for m in _body_material_points(model, n) if m[0] > 0]
    q = np.array([0.0, 0.0, 0.0, *posture])
    return _material_points_world(model, q, mats)


def _model(posture, sm_center, sm_radius):
    return RobotModel(
        base_radius=BASE_RADIUS,
        arm_mount_offset=(0.0, 0.0),
        link_lengths=tuple(LINKS),
        link_radius=LINK_RADIUS,
        joint_limits=((-LIMIT, LIMIT),) * 3,
        predefined_posture=tuple(posture),
        sphere_base=BASE_RADIUS,
        sphere_manip_center=tuple(sm_center),
        sphere_manip=sm_radius,
    )


def minimal_enclosing_circle(points):
    """Welzl's algorithm (iterative-ish, fine for dozens of points)."""
    pts = [tuple(p) for p in points]
    rng = np.random.default_rng(0)
    rng.shuffle(pts)

    def circle_two(a, b):
        cx, cy = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
        return cx, cy, math.hypot(a[0] - cx, a[1] - cy)

    def circle_three(a, b, c):
        ax, ay, bx, by, cx, cy = *a, *b, *c
        d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        if abs(d) < 1e-14:
            return None
        ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
              + (cx * cx + cy * cy) * (ay - by)) / d
        uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
              + (cx * cx + cy * cy) * (bx - ax)) / d
        return ux, uy, math.hypot(ax - ux, ay - uy)

    def inside(circ, p, eps=1e-10):
        return math.hypot(p[0] - circ[0], p[1] - circ[1]) <= circ[2] + eps

    circ = (pts[0][0], pts[0][1], 0.0)
    for i, p in enumerate(pts):
        if inside(circ, p):
            continue
        circ = (p[0], p[1], 0.0)
        for j in range(i):
            q = pts[j]
            if inside(circ, q):
                continue
            circ = circle_two(p, q)
            for k in range(j):
                r = pts[k]
                if inside(circ, r):
                    continue
                c3 = circle_three(p, q, r)
                if c3 is not None:
                    circ = c3
    return circ


def sphere_for_posture(posture):
    pts = _arm_points(posture)
    cx, cy, r = minimal_enclosing_circle(pts)
    return (round(cx, 4), round(cy, 4)), round(r + 0.01, 4)


def hull_min_width(posture):
    """Minimum directional extent of base disc + arm at the posture."""
    pts = _arm_points(posture)
    widths = []
    for a in np.linspace(0, math.pi, 3600, endpoint=False):
        n = np.array([math.cos(a), math.sin(a)])
        proj = pts @ n
        lo = min(proj.min(), -BASE_RADIUS)
        hi = max(proj.max(), BASE_RADIUS)
        widths.append(hi - lo)
    return min(widths)


def hull_diameter(posture):
    pts = _arm_points(posture)
    widths = []
    for a in np.linspace(0, math.pi, 3600, endpoint=False):
        n = np.array([math.cos(a), math.sin(a)])
        proj = pts @ n
        widths.append(max(proj.max(), BASE_RADIUS) - min(proj.min(), -BASE_RADIUS))
    return max(widths)


def robot_doc(posture):
    (cx, cy), r = sphere_for_posture(posture)
    return {
        "base_radius": BASE_RADIUS,
        "arm_mount_offset": [0.0, 0.0],
        "link_lengths": LINKS,
        "link_radius": LINK_RADIUS,
        "joint_limits": [[-LIMIT, LIMIT]] * 3,
        "predefined_posture": list(posture),
        "sphere_base": BASE_RADIUS,
        "sphere_manip": {"center": [cx, cy], "radius": r},
    }


def circle(cx, cy, r):
    return {"type": "circle", "center": [cx, cy], "radius": r}


def box(xmin, ymin, xmax, ymax):
    return {"type": "box", "min": [xmin, ymin], "max": [xmax, ymax]}


def scene_doc(name, obstacles, posture, start, goal):
    return {
        "version": 1,
        "name": name,
        "bounds": {"min": [0.0, 0.0], "max": [5.0, 4.0]},
        "obstacles": obstacles,
        "robot": robot_doc(posture),
        "start": {"base": list(start[:3]), "joints": list(start[3])},
        "goal_pose": {"x": goal[0], "y": goal[1], "phi": goal[2]},
    }


def goal_reachable(scene, tries=4000):
    """At least one collision-free IK solution from some base pose."""
    g = scene.goal_pose
    rng = np.random.default_rng(7)
    for i in range(tries):
        rad = rng.uniform(0.35, 1.15)
        ang = rng.uniform(0, 2 * math.pi)
        bx, by = g.x + rad * math.cos(ang), g.y + rad * math.sin(ang)
        th = rng.uniform(-math.pi, math.pi)
        joints = inverse_kinematics(scene.robot, (bx, by, th), g, rng_seed=i)
        if joints is None:
            continue
        q = Configuration(bx, by, th, tuple(joints))
        if not robot_in_collision(scene.robot, q, scene):
            return True
    return False


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    table = box(3.9, 1.5, 4.7, 2.5)
    shelf_low = box(3.9, 1.2, 4.8, 1.75)
    shelf_high = box(3.9, 2.25, 4.8, 2.8)

    docs = {
        "problem_1_table": scene_doc(
            "problem_1_table",
            [table],
            POSTURE_TUCK,
            (0.8, 2.0, 0.0, POSTURE_TUCK),
            (3.75, 2.0, 0.0),
        ),
        "problem_2_table_ground": scene_doc(
            "problem_2_table_ground",
            [
                table,
                box(2.2, 1.5, 2.8, 2.5),
                circle(2.4, 0.75, 0.35),
                circle(3.4, 3.1, 0.25),
            ],
            POSTURE_TUCK,
            (0.8, 1.2, 0.0, POSTURE_TUCK),
            (3.75, 2.0, 0.0),
        ),
        "problem_3_shelf": scene_doc(
            "problem_3_shelf",
            [shelf_low, shelf_high],
            POSTURE_TUCK,
            (0.8, 2.0, 0.0, POSTURE_TUCK),
            (4.15, 2.0, 0.0),
        ),
        "problem_4_shelf_ground": scene_doc(
            "problem_4_shelf_ground",
            [
                shelf_low,
                shelf_high,
                circle(2.3, 2.9, 0.35),
                box(2.0, 0.7, 2.7, 1.35),
            ],
            POSTURE_TUCK,
            (0.8, 2.0, 0.0, POSTURE_TUCK),
            (4.15, 2.0, 0.0),
        ),
        "problem_5_posture": scene_doc(
            "problem_5_posture",
            [
                box(1.6, 0.55, 2.6, 0.75),
                box(1.6, 1.05, 2.6, 1.25),
                box(3.9, 3.45, 4.9, 3.9),
                circle(3.0, 2.2, 0.3),
            ],
            POSTURE_STRETCH,
            (1.1, 0.9, 0.0, POSTURE_STRETCH),
            (4.3, 3.3, math.pi / 2),
        ),
        "problem_6_corridor": scene_doc(
            "problem_6_corridor",
            [
                box(1.75, 0.0, 3.25, 1.64),
                box(1.75, 2.36, 3.25, 4.0),
                box(4.35, 1.55, 4.95, 2.45),
            ],
            POSTURE_WIDE,
            (0.95, 2.0, 0.0, POSTURE_WIDE),
            (4.2, 2.0, 0.0),
        ),
    }

    # construction checks -------------------------------------------------
    wide_width = hull_min_width(POSTURE_WIDE)
    wide_diam = hull_diameter(POSTURE_WIDE)
    corridor_w = 2.36 - 1.64
    wall_thick = 3.25 - 1.75
    print(f"wide posture: min hull width {wide_width:.3f}, diameter {wide_diam:.3f}")
    assert wide_width > corridor_w + 0.02, "frozen wide posture must not fit the corridor"
    assert wall_thick > wide_diam + 0.2, "wall must be longer than the frozen body"
    (smx, smy), smr = sphere_for_posture(POSTURE_WIDE)
    assert 2 * BASE_RADIUS < corridor_w < 2 * smr, "corridor width must sit between the spheres"
    print(f"corridor {corridor_w} in (2*Sb={2*BASE_RADIUS}, 2*Sm={2*smr:.3f})")

    for name, doc in docs.items():
        text = json.dumps(doc, indent=2) + "\n"
        scene = load_scene(text)  # validates start, spheres, bounds
        assert goal_reachable(scene), f"{name}: goal admits no collision-free IK solution"
        (OUT / f"{name}.json").write_text(text)
        print(f"wrote {name}: {len(scene.obstacles)} obstacles, "
              f"sm_r={scene.robot.sphere_manip}")

    # tucked crossing must exist in the corridor scene
    p6 = load_scene((OUT / "problem_6_corridor.json").read_text())
    fold = (0.0, 2.6, -2.6)
    for xb in np.linspace(1.3, 3.7, 25):
        q = Configuration(float(xb), 2.0, 0.0, fold)
        assert not robot_in_collision(p6.robot, q, p6), f"fold collides at x={xb:.2f}"
    print("corridor tucked crossing verified")


if __name__ == "__main__":
    main()
