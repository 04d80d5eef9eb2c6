"""Scene description: workspace, obstacles, robot, start, and goal pose.

Scenes are read from a versioned JSON document (see ``SCENE_SCHEMA_DOC``)
and validated eagerly: malformed documents raise ``SceneParseError``,
documents violating an invariant raise ``SceneValidationError`` naming the
first violated invariant.  The six builtin desk-scale problems ship as
fixture files under ``harmony/problems``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .geometry import Box, Circle, Polygon
from .kinematics import (
    Configuration,
    EndEffectorPose,
    RobotModel,
    _body_material_points,
    _material_points_world,
    robot_in_collision,
)

__all__ = [
    "Scene",
    "SceneError",
    "SceneParseError",
    "SceneValidationError",
    "load_scene",
    "scene_to_text",
    "save_scene",
    "builtin_problems",
    "builtin_problem",
    "BUILTIN_PROBLEM_NAMES",
]

SCENE_SCHEMA_DOC = """\
{
  "version": 1,
  "name": "<scene name>",
  "bounds": {"min": [x, y], "max": [x, y]},
  "obstacles": [
    {"type": "circle", "center": [x, y], "radius": r},
    {"type": "polygon", "vertices": [[x, y], ...]},   // counter-clockwise, convex
    {"type": "box", "min": [x, y], "max": [x, y]}
  ],
  "robot": {
    "base_radius": r, "arm_mount_offset": [x, y],
    "link_lengths": [...], "link_radius": r,
    "joint_limits": [[lo, hi], ...], "predefined_posture": [...],
    "sphere_base": r, "sphere_manip": {"center": [x, y], "radius": r}
  },
  "start": {"base": [x, y, theta], "joints": [...]},
  "goal_pose": {"x": x, "y": y, "phi": phi}
}
"""

BUILTIN_PROBLEM_NAMES = (
    "problem_1_table",
    "problem_2_table_ground",
    "problem_3_shelf",
    "problem_4_shelf_ground",
    "problem_5_posture",
    "problem_6_corridor",
)


class SceneError(ValueError):
    pass


class SceneParseError(SceneError):
    pass


class SceneValidationError(SceneError):
    pass


@dataclass(frozen=True)
class Scene:
    name: str
    bounds: Box
    obstacles: tuple
    robot: RobotModel
    start: Configuration
    goal_pose: EndEffectorPose


# ---------------------------------------------------------------------------
# parsing


def _require(mapping, key, where):
    if key not in mapping:
        raise SceneParseError(f"missing key '{key}' in {where}")
    return mapping[key]


def _pair(value, where) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SceneParseError(f"{where} must be a pair of numbers")
    return float(value[0]), float(value[1])


def _parse_obstacle(entry, index):
    where = f"obstacles[{index}]"
    kind = _require(entry, "type", where)
    try:
        if kind == "circle":
            cx, cy = _pair(_require(entry, "center", where), f"{where}.center")
            radius = float(_require(entry, "radius", where))
            if radius <= 0:
                raise SceneValidationError(f"{where}: circle radius must be positive")
            return Circle(cx, cy, radius)
        if kind == "box":
            xmin, ymin = _pair(_require(entry, "min", where), f"{where}.min")
            xmax, ymax = _pair(_require(entry, "max", where), f"{where}.max")
            return Box(xmin, ymin, xmax, ymax)
        if kind == "polygon":
            verts = _require(entry, "vertices", where)
            return Polygon(tuple(_pair(v, f"{where}.vertices") for v in verts))
    except SceneError:
        raise
    except ValueError as exc:
        raise SceneValidationError(f"{where}: {exc}") from exc
    raise SceneParseError(f"{where}: unknown obstacle type '{kind}'")


def _parse_robot(doc) -> RobotModel:
    try:
        sphere_manip = _require(doc, "sphere_manip", "robot")
        return RobotModel(
            base_radius=float(_require(doc, "base_radius", "robot")),
            arm_mount_offset=_pair(_require(doc, "arm_mount_offset", "robot"), "robot.arm_mount_offset"),
            link_lengths=tuple(float(v) for v in _require(doc, "link_lengths", "robot")),
            link_radius=float(_require(doc, "link_radius", "robot")),
            joint_limits=tuple(
                (float(lo), float(hi)) for lo, hi in _require(doc, "joint_limits", "robot")
            ),
            predefined_posture=tuple(float(v) for v in _require(doc, "predefined_posture", "robot")),
            sphere_base=float(_require(doc, "sphere_base", "robot")),
            sphere_manip_center=_pair(_require(sphere_manip, "center", "robot.sphere_manip"), "center"),
            sphere_manip=float(_require(sphere_manip, "radius", "robot.sphere_manip")),
        )
    except SceneError:
        raise
    except ValueError as exc:
        raise SceneValidationError(f"robot: {exc}") from exc


def _validate(scene: Scene) -> Scene:
    if scene.bounds.width * scene.bounds.height <= 0:
        raise SceneValidationError("bounds area must be positive")
    model = scene.robot
    if len(scene.start.joints) != model.dof_arm:
        raise SceneValidationError("start joints do not match the arm DoF")
    for (lo, hi), q in zip(model.joint_limits, scene.start.joints):
        if not (lo <= q <= hi):
            raise SceneValidationError("start configuration violates joint limits")
    g = scene.goal_pose
    b = scene.bounds
    if not (b.xmin <= g.x <= b.xmax and b.ymin <= g.y <= b.ymax):
        raise SceneValidationError("goal pose outside workspace bounds")
    # the manipulator bounding circle must enclose the arm at the predefined
    # posture (sampled over the capsule surfaces, base frame)
    mats = [m for m in _body_material_points(model, 40) if m[0] > 0]
    q_pre = np.array([0.0, 0.0, 0.0, *model.predefined_posture])
    pts = _material_points_world(model, q_pre, mats)
    cx, cy = model.sphere_manip_center
    d = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)
    if float(np.max(d)) > model.sphere_manip + 1e-9:
        raise SceneValidationError(
            "sphere_manip does not enclose the arm at the predefined posture"
        )
    if robot_in_collision(model, scene.start, scene):
        raise SceneValidationError("start configuration in collision")
    return scene


def scene_from_dict(doc: dict) -> Scene:
    if not isinstance(doc, dict):
        raise SceneParseError("scene document must be a JSON object")
    version = _require(doc, "version", "document")
    if version != 1:
        raise SceneParseError(f"unsupported scene version {version!r}")
    name = str(_require(doc, "name", "document"))
    bounds_doc = _require(doc, "bounds", "document")
    bx = _pair(_require(bounds_doc, "min", "bounds"), "bounds.min")
    by = _pair(_require(bounds_doc, "max", "bounds"), "bounds.max")
    try:
        bounds = Box(bx[0], bx[1], by[0], by[1])
    except ValueError as exc:
        raise SceneValidationError(f"bounds: {exc}") from exc
    obstacles = tuple(
        _parse_obstacle(o, i) for i, o in enumerate(_require(doc, "obstacles", "document"))
    )
    robot = _parse_robot(_require(doc, "robot", "document"))
    start_doc = _require(doc, "start", "document")
    base = _require(start_doc, "base", "start")
    if not isinstance(base, (list, tuple)) or len(base) != 3:
        raise SceneParseError("start.base must be [x, y, theta]")
    try:
        start = Configuration(
            float(base[0]),
            float(base[1]),
            float(base[2]),
            tuple(float(v) for v in _require(start_doc, "joints", "start")),
        )
        goal_doc = _require(doc, "goal_pose", "document")
        goal = EndEffectorPose(
            float(_require(goal_doc, "x", "goal_pose")),
            float(_require(goal_doc, "y", "goal_pose")),
            float(_require(goal_doc, "phi", "goal_pose")),
        )
    except SceneError:
        raise
    except ValueError as exc:
        raise SceneValidationError(str(exc)) from exc
    return _validate(Scene(name, bounds, obstacles, robot, start, goal))


def load_scene(source: str | Path) -> Scene:
    """Load and validate a scene from a file path or a JSON string."""
    if isinstance(source, Path):
        text = source.read_text()
    else:
        stripped = source.lstrip()
        if stripped.startswith("{"):
            text = source
        else:
            text = Path(source).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"malformed scene document: {exc}") from exc
    return scene_from_dict(doc)


# ---------------------------------------------------------------------------
# serialization


def _obstacle_to_dict(obstacle) -> dict:
    if isinstance(obstacle, Circle):
        return {"type": "circle", "center": [obstacle.x, obstacle.y], "radius": obstacle.radius}
    if isinstance(obstacle, Box):
        return {
            "type": "box",
            "min": [obstacle.xmin, obstacle.ymin],
            "max": [obstacle.xmax, obstacle.ymax],
        }
    if isinstance(obstacle, Polygon):
        return {"type": "polygon", "vertices": [list(v) for v in obstacle.vertices]}
    raise TypeError(f"unsupported obstacle {type(obstacle).__name__}")


def scene_to_dict(scene: Scene) -> dict:
    model = scene.robot
    return {
        "version": 1,
        "name": scene.name,
        "bounds": {
            "min": [scene.bounds.xmin, scene.bounds.ymin],
            "max": [scene.bounds.xmax, scene.bounds.ymax],
        },
        "obstacles": [_obstacle_to_dict(o) for o in scene.obstacles],
        "robot": {
            "base_radius": model.base_radius,
            "arm_mount_offset": list(model.arm_mount_offset),
            "link_lengths": list(model.link_lengths),
            "link_radius": model.link_radius,
            "joint_limits": [list(lim) for lim in model.joint_limits],
            "predefined_posture": list(model.predefined_posture),
            "sphere_base": model.sphere_base,
            "sphere_manip": {
                "center": list(model.sphere_manip_center),
                "radius": model.sphere_manip,
            },
        },
        "start": {
            "base": [scene.start.base_x, scene.start.base_y, scene.start.base_theta],
            "joints": list(scene.start.joints),
        },
        "goal_pose": {"x": scene.goal_pose.x, "y": scene.goal_pose.y, "phi": scene.goal_pose.phi},
    }


def scene_to_text(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2) + "\n"


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(scene_to_text(scene))


# ---------------------------------------------------------------------------
# builtin problems


def builtin_problem(name: str) -> Scene:
    """Load one shipped problem by name (see BUILTIN_PROBLEM_NAMES)."""
    if name not in BUILTIN_PROBLEM_NAMES:
        raise KeyError(f"unknown builtin problem '{name}'")
    text = resources.files("harmony").joinpath(f"problems/{name}.json").read_text()
    return load_scene(text)


def builtin_problems() -> list[Scene]:
    """The six shipped desk-scale problems, in order."""
    return [builtin_problem(name) for name in BUILTIN_PROBLEM_NAMES]
