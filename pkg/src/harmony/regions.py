"""Manipulation-region identification over the gridded base space.

The 3-DoF base space (x, y, theta) is discretized into a uniform grid.
Cells become manipulation regions (Rm) for one of two reasons:

* the target end-effector pose is reachable from the cell center via a
  collision-free IK solution (the inverse reachability map), or
* the cell sits on a generalized-Voronoi ridge of the workspace where the
  base bounding circle fits but the manipulator bounding circle does not
  (a narrow passage that forces coordinated base+arm motion).

Everything is deterministic: IK gets a per-cell seed derived from the
grid seed, and the sphere test runs over every orientation bin instead of
a random one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .clock import (
    T_COLLISION,
    T_FIELD_CELL_SOURCE,
    T_GRID_CELL,
    T_IK_ITER,
    T_SPHERE_TEST,
    WorkClock,
)
from .geometry import point_field
from .kinematics import ik_solve, robot_in_collision
from .scene import Scene

logger = logging.getLogger(__name__)

__all__ = [
    "BaseGrid",
    "GvgGraph",
    "build_gvg",
    "reachability_cells",
    "narrow_passage_cells",
    "identify_manipulation_regions",
    "DEFAULT_RESOLUTION",
]

DEFAULT_RESOLUTION = (0.1, 0.1, math.radians(30.0))


@dataclass
class BaseGrid:
    """Uniform discretization of the base space over the scene bounds.

    ``labels`` flags Rm cells.  ``volumes``/``masses``/``cumulative`` stay
    None until the sampling module finalizes the PMF.
    """

    origin: tuple[float, float]
    resolution: tuple[float, float, float]
    dims: tuple[int, int, int]
    labels: np.ndarray
    volumes: np.ndarray | None = None
    masses: np.ndarray | None = None
    cumulative: np.ndarray | None = None
    reach_cells: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    reach_witness: dict = field(default_factory=dict)
    gvg: "GvgGraph | None" = None
    build_seconds: float = 0.0

    @classmethod
    def for_scene(cls, scene: Scene, resolution=DEFAULT_RESOLUTION) -> "BaseGrid":
        rx, ry, rth = resolution
        width, height = scene.bounds.width, scene.bounds.height
        nx = max(1, round(width / rx))
        ny = max(1, round(height / ry))
        nth = max(1, round(2.0 * math.pi / rth))
        dims = (nx, ny, nth)
        res = (width / nx, height / ny, 2.0 * math.pi / nth)
        labels = np.zeros(dims, dtype=bool)
        return cls((scene.bounds.xmin, scene.bounds.ymin), res, dims, labels)

    @property
    def n_cells(self) -> int:
        nx, ny, nth = self.dims
        return nx * ny * nth

    def flat_index(self, ix: int, iy: int, ith: int) -> int:
        _, ny, nth = self.dims
        return (ix * ny + iy) * nth + ith

    def unflat(self, flat: int) -> tuple[int, int, int]:
        _, ny, nth = self.dims
        ix, rem = divmod(flat, ny * nth)
        iy, ith = divmod(rem, nth)
        return ix, iy, ith

    def cell_center(self, ix: int, iy: int, ith: int) -> tuple[float, float, float]:
        dx, dy, dth = self.resolution
        return (
            self.origin[0] + (ix + 0.5) * dx,
            self.origin[1] + (iy + 0.5) * dy,
            -math.pi + (ith + 0.5) * dth,
        )

    def locate(self, x: float, y: float, theta: float) -> tuple[int, int, int]:
        dx, dy, dth = self.resolution
        nx, ny, nth = self.dims
        ix = min(nx - 1, max(0, int((x - self.origin[0]) / dx)))
        iy = min(ny - 1, max(0, int((y - self.origin[1]) / dy)))
        ith = int((theta + math.pi) / dth) % nth
        return ix, iy, ith

    def is_manipulation_cell(self, x: float, y: float, theta: float) -> bool:
        return bool(self.labels[self.locate(x, y, theta)])

    def xy_centers(self) -> tuple[np.ndarray, np.ndarray]:
        dx, dy, _ = self.resolution
        nx, ny, _ = self.dims
        xs = self.origin[0] + (np.arange(nx) + 0.5) * dx
        ys = self.origin[1] + (np.arange(ny) + 0.5) * dy
        return np.meshgrid(xs, ys, indexing="ij")

    def theta_centers(self) -> np.ndarray:
        _, _, dth = self.resolution
        nth = self.dims[2]
        return -math.pi + (np.arange(nth) + 0.5) * dth


@dataclass
class GvgGraph:
    """Exact distance fields over a 2D workspace raster plus the GVG ridge.

    Sources are the scene obstacles followed by the four bound walls;
    ``clearance`` is the min distance over all sources, ``nearest`` the
    argmin source id, and ``obstacle_clearance`` the min over obstacles
    only (infinite in an obstacle-free scene).  Ridge cells are free cells
    whose two nearest distinct sources are equidistant within one cell
    diagonal.
    """

    origin: tuple[float, float]
    resolution: tuple[float, float]
    dims: tuple[int, int]
    occupied: np.ndarray
    clearance: np.ndarray
    nearest: np.ndarray
    ridge: np.ndarray
    obstacle_clearance: np.ndarray

    def ridge_cells(self) -> np.ndarray:
        return np.argwhere(self.ridge)

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution[0],
            self.origin[1] + (iy + 0.5) * self.resolution[1],
        )


def build_gvg(scene: Scene, resolution_2d=(0.1, 0.1), clock: WorkClock | None = None) -> GvgGraph:
    """Workspace distance analysis on a raster of the given resolution."""
    rx, ry = resolution_2d
    b = scene.bounds
    nx = max(1, round(b.width / rx))
    ny = max(1, round(b.height / ry))
    dx, dy = b.width / nx, b.height / ny
    xs = b.xmin + (np.arange(nx) + 0.5) * dx
    ys = b.ymin + (np.arange(ny) + 0.5) * dy
    px, py = np.meshgrid(xs, ys, indexing="ij")

    fields = [point_field(obstacle, px, py) for obstacle in scene.obstacles]
    # the four bound walls are distinct sources so that an empty rectangle
    # still has a medial axis
    fields.append(px - b.xmin)
    fields.append(b.xmax - px)
    fields.append(py - b.ymin)
    fields.append(b.ymax - py)
    stack = np.stack(fields)
    if clock is not None:
        clock.charge(T_FIELD_CELL_SOURCE, stack.size)

    n_obstacles = len(scene.obstacles)
    occupied = (
        np.any(stack[:n_obstacles] <= 0.0, axis=0) if n_obstacles else np.zeros((nx, ny), bool)
    )
    nearest = np.argmin(stack, axis=0)
    clearance = np.min(stack, axis=0)
    obstacle_clearance = (
        np.min(stack[:n_obstacles], axis=0) if n_obstacles else np.full((nx, ny), np.inf)
    )

    two = np.partition(stack, 1, axis=0)[:2]
    diag = math.hypot(dx, dy)
    ridge = (~occupied) & ((two[1] - two[0]) <= diag)

    return GvgGraph(
        (b.xmin, b.ymin), (dx, dy), (nx, ny), occupied, clearance, nearest, ridge,
        obstacle_clearance,
    )


def reachability_cells(
    scene: Scene, grid: BaseGrid, seed: int = 0, clock: WorkClock | None = None
) -> dict[tuple[int, int, int], np.ndarray]:
    """Cells whose center base pose reaches the goal via collision-free IK.

    Returns {cell index: witness joints}.  IK runs per cell with a seed
    derived from (seed, flat index), so the set is deterministic and can
    be reproduced cell-by-cell.
    """
    model = scene.robot
    goal = scene.goal_pose
    nx, ny, nth = grid.dims
    if clock is not None:
        clock.charge(T_GRID_CELL, grid.n_cells)

    # conservative annulus pre-screen on the base xy (strictly wider than
    # the solver's own reach prefilter, so it never changes the result set)
    px, py = grid.xy_centers()
    mount = math.hypot(*model.arm_mount_offset)
    hi = model.max_reach + mount + 1e-6
    d_goal = np.hypot(px - goal.x, py - goal.y)
    xy_ok = d_goal <= hi

    out: dict[tuple[int, int, int], np.ndarray] = {}
    thetas = grid.theta_centers()
    for ix, iy in np.argwhere(xy_ok):
        for ith in range(nth):
            cx, cy, cth = grid.cell_center(ix, iy, ith)
            joints, iters = ik_solve(
                model, (cx, cy, cth), goal, rng_seed=(seed, grid.flat_index(ix, iy, ith))
            )
            if clock is not None:
                clock.charge(T_IK_ITER, iters)
            if joints is None:
                continue
            q = np.array([cx, cy, cth, *joints])
            if clock is not None:
                clock.charge(T_COLLISION)
            if robot_in_collision(model, q, scene):
                continue
            out[(int(ix), int(iy), int(ith))] = joints
    return out


def narrow_passage_cells(
    scene: Scene, gvg: GvgGraph, grid: BaseGrid, clock: WorkClock | None = None
) -> set[tuple[int, int, int]]:
    """Ridge cells where the base circle fits but the manipulator circle
    collides, tested for every orientation bin, then dilated by one cell
    in x and y."""
    model = scene.robot
    ridge = gvg.ridge_cells()
    if ridge.size == 0 or not scene.obstacles:
        return set()

    centers = np.array([gvg.cell_center(ix, iy) for ix, iy in ridge])
    rx = centers[:, 0]
    ry = centers[:, 1]

    def min_obstacle_distance(xs, ys):
        acc = np.full(xs.shape, np.inf)
        for obstacle in scene.obstacles:
            acc = np.minimum(acc, point_field(obstacle, xs, ys))
        return acc

    base_free = min_obstacle_distance(rx, ry) > model.sphere_base
    if clock is not None:
        clock.charge(T_SPHERE_TEST, len(ridge) * (1 + grid.dims[2]))

    ox, oy = model.sphere_manip_center
    added: set[tuple[int, int, int]] = set()
    nx, ny, nth = grid.dims
    for ith, theta in enumerate(grid.theta_centers()):
        c, s = math.cos(theta), math.sin(theta)
        mx = rx + c * ox - s * oy
        my = ry + s * ox + c * oy
        manip_hit = min_obstacle_distance(mx, my) <= model.sphere_manip
        for (ix, iy), bad in zip(ridge, base_free & manip_hit):
            if not bad:
                continue
            gx, gy = gvg.cell_center(ix, iy)
            cx, cy, _ = grid.locate(gx, gy, theta)
            for ddx in (-1, 0, 1):
                for ddy in (-1, 0, 1):
                    jx, jy = cx + ddx, cy + ddy
                    if 0 <= jx < nx and 0 <= jy < ny:
                        added.add((jx, jy, ith))
    return added


def identify_manipulation_regions(
    scene: Scene,
    grid: BaseGrid | None = None,
    seed: int = 0,
    clock: WorkClock | None = None,
    resolution=DEFAULT_RESOLUTION,
) -> BaseGrid:
    """Label the grid: reachability cells plus narrow-passage cells -> Rm."""
    own_clock = clock if clock is not None else WorkClock()
    t0 = own_clock.now
    if grid is None:
        grid = BaseGrid.for_scene(scene, resolution)

    reach = reachability_cells(scene, grid, seed=seed, clock=own_clock)
    gvg = build_gvg(scene, grid.resolution[:2], clock=own_clock)
    narrow = narrow_passage_cells(scene, gvg, grid, clock=own_clock)

    grid.labels[:] = False
    for cell in reach:
        grid.labels[cell] = True
    for cell in narrow:
        grid.labels[cell] = True
    grid.reach_cells = np.array(
        sorted(grid.flat_index(*cell) for cell in reach), dtype=np.int64
    )
    grid.reach_witness = {grid.flat_index(*cell): joints for cell, joints in reach.items()}
    grid.gvg = gvg
    grid.build_seconds = own_clock.now - t0
    if not reach:
        logger.warning(
            "scene '%s': goal pose unreachable from every base cell", scene.name
        )
    return grid
