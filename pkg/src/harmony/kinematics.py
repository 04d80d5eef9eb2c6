"""Planar mobile manipulator: configurations, kinematics, and the weighted metric.

The robot is a disc base carrying a serial chain of capsule links.  A
configuration stacks the base pose (x, y, theta) and the J joint angles;
all angular coordinates live on [-pi, pi) and distances use the shortest
arc.  The per-coordinate metric weights convert angles to meters via the
maximum arc length per radian that the coordinate can induce anywhere on
the robot body, so the weighted L2 metric upper-bounds workspace
displacement coordinate-by-coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import Box, Capsule, Circle, collides_fast, shape_within_box

TWO_PI = 2.0 * math.pi

__all__ = [
    "Configuration",
    "EndEffectorPose",
    "RobotModel",
    "wrap_angle",
    "forward_kinematics",
    "inverse_kinematics",
    "ik_solve",
    "compute_weights",
    "weighted_distance",
    "weighted_row_distances",
    "interpolate",
    "displacement_upper_bound_check",
    "robot_in_collision",
    "body_shapes",
    "pose_reaches_goal",
]


def wrap_angle(a: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (a + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class Configuration:
    """One point of the joint C-space: base pose plus arm joint angles."""

    base_x: float
    base_y: float
    base_theta: float
    joints: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "base_theta", wrap_angle(self.base_theta))
        object.__setattr__(self, "joints", tuple(float(j) for j in self.joints))
        vals = (self.base_x, self.base_y, self.base_theta, *self.joints)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("configuration values must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.base_x, self.base_y, self.base_theta, *self.joints])

    @classmethod
    def from_array(cls, arr) -> "Configuration":
        arr = np.asarray(arr, dtype=float)
        return cls(float(arr[0]), float(arr[1]), float(arr[2]), tuple(arr[3:]))


@dataclass(frozen=True)
class EndEffectorPose:
    x: float
    y: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "phi", wrap_angle(self.phi))
        if not all(math.isfinite(v) for v in (self.x, self.y, self.phi)):
            raise ValueError("pose values must be finite")


@dataclass(frozen=True)
class RobotModel:
    """Parameters of the planar mobile manipulator.

    ``sphere_base`` and ``sphere_manip`` are the conservative bounding
    circles used by the narrow-passage analysis: the base circle sits at
    the base center, the manipulator circle at ``sphere_manip_center``
    (base frame) and must enclose the arm at ``predefined_posture``.
    """

    base_radius: float
    arm_mount_offset: tuple[float, float]
    link_lengths: tuple[float, ...]
    link_radius: float
    joint_limits: tuple[tuple[float, float], ...]
    predefined_posture: tuple[float, ...]
    sphere_base: float
    sphere_manip_center: tuple[float, float]
    sphere_manip: float

    def __post_init__(self):
        object.__setattr__(self, "arm_mount_offset", tuple(map(float, self.arm_mount_offset)))
        object.__setattr__(self, "link_lengths", tuple(map(float, self.link_lengths)))
        object.__setattr__(
            self, "joint_limits", tuple((float(lo), float(hi)) for lo, hi in self.joint_limits)
        )
        object.__setattr__(self, "predefined_posture", tuple(map(float, self.predefined_posture)))
        object.__setattr__(self, "sphere_manip_center", tuple(map(float, self.sphere_manip_center)))
        if self.base_radius <= 0 or self.link_radius < 0:
            raise ValueError("base radius must be positive, link radius nonnegative")
        if any(l <= 0 for l in self.link_lengths):
            raise ValueError("link lengths must be positive")
        if len(self.joint_limits) != self.dof_arm or len(self.predefined_posture) != self.dof_arm:
            raise ValueError("joint limits and predefined posture must match link count")
        for (lo, hi), q in zip(self.joint_limits, self.predefined_posture):
            if lo > hi:
                raise ValueError("joint limit min must not exceed max")
            if not (lo <= q <= hi):
                raise ValueError("predefined posture violates joint limits")
        if self.sphere_base < self.base_radius:
            raise ValueError("sphere_base must enclose the base disc")

    @property
    def dof_arm(self) -> int:
        return len(self.link_lengths)

    @property
    def dof(self) -> int:
        return 3 + self.dof_arm

    @cached_property
    def weights(self) -> np.ndarray:
        return compute_weights(self)

    @cached_property
    def joint_limits_array(self) -> np.ndarray:
        return np.array(self.joint_limits, dtype=float)

    @cached_property
    def max_reach(self) -> float:
        return sum(self.link_lengths)


def compute_weights(model: RobotModel) -> np.ndarray:
    """Per-coordinate metric weights: maximum arc length per radian.

    x and y are already meters (weight 1).  The base rotation sweeps the
    whole robot about the base center, so its weight is the farthest body
    point with the arm stretched; joint j sweeps the chain distal to it.
    """
    links = model.link_lengths
    mount = math.hypot(*model.arm_mount_offset)
    w_theta = max(model.base_radius, mount + sum(links) + model.link_radius)
    w_joints = [sum(links[j:]) + model.link_radius for j in range(len(links))]
    return np.array([1.0, 1.0, w_theta, *w_joints])


# ---------------------------------------------------------------------------
# forward kinematics


def _chain_points(model: RobotModel, x: float, y: float, theta: float, joints) -> np.ndarray:
    """World positions of the arm mount and every link endpoint, shape (J+1, 2)."""
    c, s = math.cos(theta), math.sin(theta)
    mx, my = model.arm_mount_offset
    pts = np.empty((model.dof_arm + 1, 2))
    pts[0, 0] = x + c * mx - s * my
    pts[0, 1] = y + s * mx + c * my
    alpha = theta
    for k, (length, q) in enumerate(zip(model.link_lengths, joints)):
        alpha += q
        pts[k + 1, 0] = pts[k, 0] + length * math.cos(alpha)
        pts[k + 1, 1] = pts[k, 1] + length * math.sin(alpha)
    return pts


def body_shapes(model: RobotModel, q: Configuration | np.ndarray) -> list:
    """Base disc plus one capsule per link, in the world frame."""
    if isinstance(q, Configuration):
        x, y, theta, joints = q.base_x, q.base_y, q.base_theta, q.joints
    else:
        x, y, theta = float(q[0]), float(q[1]), float(q[2])
        joints = q[3:]
    pts = _chain_points(model, x, y, theta, joints)
    shapes = [Circle(x, y, model.base_radius)]
    for k in range(model.dof_arm):
        shapes.append(
            Capsule(pts[k, 0], pts[k, 1], pts[k + 1, 0], pts[k + 1, 1], model.link_radius)
        )
    return shapes


def forward_kinematics(model: RobotModel, q: Configuration) -> tuple[EndEffectorPose, list]:
    """End-effector pose and the world-frame body shapes for collision checks."""
    pts = _chain_points(model, q.base_x, q.base_y, q.base_theta, q.joints)
    phi = wrap_angle(q.base_theta + sum(q.joints))
    pose = EndEffectorPose(float(pts[-1, 0]), float(pts[-1, 1]), phi)
    return pose, body_shapes(model, q)


def pose_reaches_goal(
    model: RobotModel,
    q: Configuration | np.ndarray,
    goal: EndEffectorPose,
    pos_tol: float,
    ang_tol: float,
) -> bool:
    if not isinstance(q, Configuration):
        q = Configuration.from_array(q)
    pts = _chain_points(model, q.base_x, q.base_y, q.base_theta, q.joints)
    phi = wrap_angle(q.base_theta + sum(q.joints))
    return (
        math.hypot(pts[-1, 0] - goal.x, pts[-1, 1] - goal.y) <= pos_tol
        and abs(wrap_angle(phi - goal.phi)) <= ang_tol
    )


# ---------------------------------------------------------------------------
# inverse kinematics (damped least squares with random restarts)


def _reach_interval(links) -> tuple[float, float]:
    total = sum(links)
    if not links:
        return 0.0, 0.0
    return max(0.0, 2.0 * max(links) - total), total


def ik_solve(
    model: RobotModel,
    base: tuple[float, float, float],
    target: EndEffectorPose,
    rng_seed,
    restarts: int = 20,
    iterations: int = 100,
    damping: float = 0.1,
) -> tuple[np.ndarray | None, int]:
    """Joint angles reaching ``target`` from the given base pose, plus the
    number of solver iterations spent (for budget accounting).

    Returns (None, iters) when no solution was found; a reach-interval
    prefilter on the target and on the orientation-consistent wrist point
    rejects clearly unreachable targets without iterating.
    """
    x, y, theta = base
    c, s = math.cos(theta), math.sin(theta)
    mx, my = model.arm_mount_offset
    sx = x + c * mx - s * my
    sy = y + s * mx + c * my
    links = model.link_lengths
    tol = 1e-9

    lo_reach, hi_reach = _reach_interval(links)
    d_target = math.hypot(target.x - sx, target.y - sy)
    if d_target > hi_reach + tol or d_target < lo_reach - tol:
        return None, 0
    wx = target.x - links[-1] * math.cos(target.phi)
    wy = target.y - links[-1] * math.sin(target.phi)
    lo_w, hi_w = _reach_interval(links[:-1])
    d_wrist = math.hypot(wx - sx, wy - sy)
    if d_wrist > hi_w + tol or d_wrist < lo_w - tol:
        return None, 0

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(rng_seed)))
    limits = model.joint_limits_array
    lo, hi = limits[:, 0], limits[:, 1]
    n = model.dof_arm
    links_arr = np.asarray(links)
    eye3 = np.eye(3)
    iters_used = 0
    accept = 1e-8

    # For the three-link chain the solution set for a full pose target is
    # exactly the two elbow branches, so they can be enumerated in closed
    # form: feasible branches become warm starts (the DLS pass below only
    # polishes rounding), and if both violate the joint limits no solution
    # exists at all.  Other arm sizes go through the random restarts.
    warm: list[np.ndarray] = []
    if n == 3 and d_wrist > 1e-12:
        l1, l2 = links[0], links[1]
        cos_el = (d_wrist * d_wrist - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
        if abs(cos_el) > 1.0 + 1e-9:
            return None, 0
        cos_el = min(1.0, max(-1.0, cos_el))
        bearing = math.atan2(wy - sy, wx - sx)
        gamma = math.acos(
            min(1.0, max(-1.0, (l1 * l1 + d_wrist * d_wrist - l2 * l2) / (2.0 * l1 * d_wrist)))
        )
        elbow = math.acos(cos_el)
        slack = 1e-12
        for sign in (1.0, -1.0):
            q1 = wrap_angle(bearing + sign * gamma - theta)
            q2 = -sign * elbow
            q3 = wrap_angle(target.phi - theta - q1 - q2)
            branch = np.array([q1, q2, q3])
            if np.all(branch >= lo - slack) and np.all(branch <= hi + slack):
                warm.append(np.clip(branch, lo, hi))
        if not warm:
            return None, 0
        restarts = len(warm)

    for attempt in range(restarts):
        q = warm[attempt] if attempt < len(warm) else rng.uniform(lo, hi)
        for _ in range(iterations):
            iters_used += 1
            alpha = theta + np.cumsum(q)
            ca, sa = np.cos(alpha), np.sin(alpha)
            ex = sx + float(np.dot(links_arr, ca))
            ey = sy + float(np.dot(links_arr, sa))
            phi = theta + float(np.sum(q))
            err = np.array(
                [target.x - ex, target.y - ey, wrap_angle(target.phi - phi)]
            )
            pos_err = math.hypot(err[0], err[1])
            if pos_err <= accept and abs(err[2]) <= accept:
                return q, iters_used
            # joint k moves everything distal to it: d(ee)/dq_k = perp(ee - joint_k)
            jx = np.cumsum((links_arr * ca)[::-1])[::-1]
            jy = np.cumsum((links_arr * sa)[::-1])[::-1]
            jac = np.empty((3, n))
            jac[0] = -jy
            jac[1] = jx
            jac[2] = 1.0
            # error-proportional damping: near-Newton steps close to the
            # solution, which matters at workspace-boundary singularities
            lam = damping * min(1.0, pos_err + abs(err[2]))
            jjt = jac @ jac.T + max(lam * lam, 1e-24) * eye3
            dq = jac.T @ np.linalg.solve(jjt, err)
            q = np.clip(q + dq, lo, hi)
    return None, iters_used


def inverse_kinematics(
    model: RobotModel,
    base: tuple[float, float, float],
    target: EndEffectorPose,
    rng_seed,
    restarts: int = 20,
    iterations: int = 100,
    damping: float = 0.1,
) -> np.ndarray | None:
    """Joints reaching ``target`` from ``base``, or None when none was found."""
    joints, _ = ik_solve(model, base, target, rng_seed, restarts, iterations, damping)
    return joints


# ---------------------------------------------------------------------------
# metric


def weighted_row_distances(weights: np.ndarray, diffs: np.ndarray) -> np.ndarray:
    """Weighted metric for a batch of raw coordinate differences (N, D).

    Columns 2.. are angular and wrap to the shortest arc.  This single
    kernel backs both the scalar metric and the nearest-neighbor scans so
    their float results agree bit-for-bit.
    """
    d = np.array(diffs, dtype=float, copy=True)
    d[:, 2:] = (d[:, 2:] + math.pi) % TWO_PI - math.pi
    d *= weights
    return np.sqrt(np.sum(d * d, axis=1))


def weighted_distance(model: RobotModel, q_a, q_b) -> float:
    """Eq.-style weighted L2 metric between two configurations."""
    a = q_a.as_array() if isinstance(q_a, Configuration) else np.asarray(q_a, dtype=float)
    b = q_b.as_array() if isinstance(q_b, Configuration) else np.asarray(q_b, dtype=float)
    return float(weighted_row_distances(model.weights, (a - b).reshape(1, -1))[0])


def interpolate(q_a: np.ndarray, q_b: np.ndarray, t: float) -> np.ndarray:
    """Linear interpolation; angular coordinates move along the shortest arc."""
    a = np.asarray(q_a, dtype=float)
    b = np.asarray(q_b, dtype=float)
    delta = b - a
    delta[2:] = (delta[2:] + math.pi) % TWO_PI - math.pi
    out = a + t * delta
    out[2:] = (out[2:] + math.pi) % TWO_PI - math.pi
    return out


# ---------------------------------------------------------------------------
# displacement oracle and collision checking


def _body_material_points(model: RobotModel, n_per_link: int) -> list[tuple[int, float, float]]:
    """Material points as (body index, u, v): body 0 is the base disc with
    (u, v) base-frame coordinates; body k >= 1 is link k with u along the
    link axis (including the end caps) and v the lateral offset."""
    pts = [(0, 0.0, 0.0)]
    for i in range(16):
        a = TWO_PI * i / 16
        pts.append((0, model.base_radius * math.cos(a), model.base_radius * math.sin(a)))
    r = model.link_radius
    for k, length in enumerate(model.link_lengths, start=1):
        for i in range(max(2, n_per_link)):
            t = i / max(1, n_per_link - 1)
            pts.append((k, t * length, 0.0))
            pts.append((k, t * length, r))
            pts.append((k, t * length, -r))
        pts.append((k, -r, 0.0))
        pts.append((k, length + r, 0.0))
    return pts


def _material_points_world(model: RobotModel, q: np.ndarray, mats) -> np.ndarray:
    x, y, theta = float(q[0]), float(q[1]), float(q[2])
    joints = q[3:]
    chain = _chain_points(model, x, y, theta, joints)
    alphas = theta + np.cumsum(joints)
    out = np.empty((len(mats), 2))
    cb, sb = math.cos(theta), math.sin(theta)
    for i, (body, u, v) in enumerate(mats):
        if body == 0:
            out[i, 0] = x + cb * u - sb * v
            out[i, 1] = y + sb * u + cb * v
        else:
            a = alphas[body - 1]
            ca, sa = math.cos(a), math.sin(a)
            ox, oy = chain[body - 1]
            out[i, 0] = ox + ca * u - sa * v
            out[i, 1] = oy + sa * u + ca * v
    return out


def displacement_upper_bound_check(
    model: RobotModel, q_a, q_b, n_body_samples: int = 1000
) -> bool:
    """Oracle for the weight rule: sampled body displacement between two
    configurations never exceeds the per-axis arc-length bound
    sum_d w_d |dq_d| (within 1e-9)."""
    a = q_a.as_array() if isinstance(q_a, Configuration) else np.asarray(q_a, dtype=float)
    b = q_b.as_array() if isinstance(q_b, Configuration) else np.asarray(q_b, dtype=float)
    mats = _body_material_points(model, max(2, n_body_samples // max(1, model.dof_arm)))
    pa = _material_points_world(model, a, mats)
    pb = _material_points_world(model, b, mats)
    disp = float(np.max(np.hypot(pa[:, 0] - pb[:, 0], pa[:, 1] - pb[:, 1])))
    delta = b - a
    delta[2:] = (delta[2:] + math.pi) % TWO_PI - math.pi
    bound = float(np.dot(model.weights, np.abs(delta)))
    return disp <= bound + 1e-9


def robot_in_collision(model: RobotModel, q, scene) -> bool:
    """True iff any body shape hits an obstacle or leaves the workspace."""
    shapes = body_shapes(model, q)
    bounds: Box = scene.bounds
    for shape in shapes:
        if not shape_within_box(shape, bounds):
            return True
    for shape in shapes:
        for obstacle in scene.obstacles:
            if collides_fast(shape, obstacle):
                return True
    return False


def batch_chain_points(model: RobotModel, configs: np.ndarray) -> np.ndarray:
    """World chain points (mount + link endpoints) for a batch, (n, J+1, 2)."""
    configs = np.atleast_2d(configs)
    n = configs.shape[0]
    x, y, theta = configs[:, 0], configs[:, 1], configs[:, 2]
    c, s = np.cos(theta), np.sin(theta)
    mx, my = model.arm_mount_offset
    pts = np.empty((n, model.dof_arm + 1, 2))
    pts[:, 0, 0] = x + c * mx - s * my
    pts[:, 0, 1] = y + s * mx + c * my
    alphas = theta[:, None] + np.cumsum(configs[:, 3:], axis=1)
    links = np.asarray(model.link_lengths)
    steps = np.stack([links * np.cos(alphas), links * np.sin(alphas)], axis=2)
    pts[:, 1:, :] = pts[:, 0:1, :] + np.cumsum(steps, axis=1)
    return pts


def batch_in_collision(model: RobotModel, configs: np.ndarray, scene) -> np.ndarray:
    """Vectorized collision predicate over many configurations.

    Same semantics as ``robot_in_collision`` (contact counts, workspace
    containment required); used by edge validation where the interpolated
    configurations come in batches.
    """
    from .geometry import point_field, segments_collide

    configs = np.atleast_2d(configs)
    n = configs.shape[0]
    x, y = configs[:, 0], configs[:, 1]
    pts = batch_chain_points(model, configs)
    b: Box = scene.bounds
    rb, rl = model.base_radius, model.link_radius

    hit = (
        (x - rb < b.xmin) | (x + rb > b.xmax) | (y - rb < b.ymin) | (y + rb > b.ymax)
    )
    ex, ey = pts[..., 0], pts[..., 1]
    hit |= (
        np.any(ex - rl < b.xmin, axis=1)
        | np.any(ex + rl > b.xmax, axis=1)
        | np.any(ey - rl < b.ymin, axis=1)
        | np.any(ey + rl > b.ymax, axis=1)
    )
    for obstacle in scene.obstacles:
        hit |= point_field(obstacle, x, y) <= rb
        for k in range(model.dof_arm):
            hit |= segments_collide(
                obstacle, pts[:, k, 0], pts[:, k, 1], pts[:, k + 1, 0], pts[:, k + 1, 1], rl
            )
    return hit
