"""Anytime planners: harmonious sampling plus the coupled and decoupled baselines.

All three planners share the same lazy roadmap machinery and the same
deterministic work clock; they differ only in how samples are drawn, how
goal configurations enter the roadmap, and which neighbor query connects
new samples.  Budgets, reported times, and traces are in virtual seconds
(see ``clock``), so a (scene, params, seed) triple fully determines the
result.

Region grids are memoized per (scene, resolution, seed, mode): rebuilding
them would produce bit-identical labels anyway, so cached hits simply
replay the recorded virtual cost onto the caller's clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clock import T_COLLISION, T_EDGE_INSERT, T_IK_ITER, T_IK_PREFILTER, T_SAMPLE, WorkClock
from .kinematics import (
    Configuration,
    RobotModel,
    ik_solve,
    pose_reaches_goal,
    robot_in_collision,
    weighted_distance,
)
from .regions import BaseGrid, DEFAULT_RESOLUTION, identify_manipulation_regions, reachability_cells
from .roadmap import (
    NnIndex,
    Roadmap,
    TAG_RB,
    TAG_RM,
    k_value,
    lazy_shortest_path,
    region_specific_knn,
)
from .sampling import HarmoniousSampler, SamplerParams, draw, finalize_pmf, uniform_configuration
from .scene import Scene

__all__ = [
    "PlannerParams",
    "PlanResult",
    "PLANNER_KINDS",
    "add_goal_configuration",
    "plan_harmonious",
    "plan_coupled",
    "plan_decoupled",
    "plan",
]

PLANNER_KINDS = ("harmonious_single", "harmonious_multi", "coupled", "decoupled")


@dataclass(frozen=True)
class PlannerParams:
    rho_goal: float = 0.01
    rho_sample: float = 0.8
    time_budget: float = 100.0
    seed: int = 0
    step: float = 0.05
    cadence: int = 50
    goal_pos_tol: float = 1e-3
    goal_ang_tol: float = 1e-2
    decoupled_split: tuple[float, float] = (0.15, 0.85)
    grid_resolution: tuple[float, float, float] = DEFAULT_RESOLUTION
    max_edge_length: float = 1.4  # connection-radius cap (weighted meters)
    record_samples: bool = False

    def __post_init__(self):
        if not (0.0 <= self.rho_goal <= 1.0 and 0.0 <= self.rho_sample <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.time_budget <= 0:
            raise ValueError("time budget must be positive")
        if abs(sum(self.decoupled_split) - 1.0) > 1e-12:
            raise ValueError("decoupled split must sum to 1")


@dataclass
class PlanResult:
    status: str  # solved | timeout | unreachable
    path: list[Configuration]
    cost: float
    initial_solution_time: float | None
    trace: list[tuple[float, float]]
    counters: dict
    sample_log: list[tuple[float, float]] | None = None


# ---------------------------------------------------------------------------
# region-grid memo (deterministic rebuilds, so sharing is free)

_GRID_CACHE: dict = {}


def _charged(clock: WorkClock, key, build):
    cached = _GRID_CACHE.get(key)
    if cached is None:
        probe = WorkClock()
        value = build(probe)
        cached = (value, probe.now, dict(probe.counts))
        _GRID_CACHE[key] = cached
    value, seconds, counts = cached
    clock.now += seconds
    for rate, count in counts.items():
        clock.counts[rate] = clock.counts.get(rate, 0) + count
    return value


def _full_grid(scene: Scene, params: PlannerParams, clock: WorkClock) -> BaseGrid:
    def build(probe):
        grid = identify_manipulation_regions(
            scene, seed=params.seed, clock=probe, resolution=params.grid_resolution
        )
        finalize_pmf(grid, scene.robot.weights, scene.robot.joint_limits)
        return grid

    return _charged(clock, (scene, params.grid_resolution, params.seed, "full"), build)


def _reach_grid(scene: Scene, params: PlannerParams, clock: WorkClock) -> BaseGrid:
    def build(probe):
        grid = BaseGrid.for_scene(scene, params.grid_resolution)
        reach = reachability_cells(scene, grid, seed=params.seed, clock=probe)
        grid.reach_cells = np.array(
            sorted(grid.flat_index(*cell) for cell in reach), dtype=np.int64
        )
        grid.reach_witness = {grid.flat_index(*c): j for c, j in reach.items()}
        return grid

    return _charged(clock, (scene, params.grid_resolution, params.seed, "reach"), build)


# ---------------------------------------------------------------------------
# goal injection


def add_goal_configuration(
    scene: Scene,
    grid: BaseGrid,
    rng: np.random.Generator,
    existing_goals=(),
    clock: WorkClock | None = None,
) -> np.ndarray | None:
    """One goal-configuration attempt.

    Picks a reachability cell uniformly, samples a base pose inside it,
    and solves IK to the goal pose.  Absent (None) is a normal miss:
    empty reachability set, IK failure, collision, or a duplicate within
    weighted distance 1e-6 of an existing goal.
    """
    if grid.reach_cells.size == 0:
        return None
    model = scene.robot
    flat = int(grid.reach_cells[rng.integers(grid.reach_cells.size)])
    ix, iy, ith = grid.unflat(flat)
    dx, dy, dth = grid.resolution
    x = grid.origin[0] + (ix + rng.random()) * dx
    y = grid.origin[1] + (iy + rng.random()) * dy
    theta = -math.pi + (ith + rng.random()) * dth
    ik_seed = int(rng.integers(2**63))
    joints, iters = ik_solve(model, (x, y, theta), scene.goal_pose, ik_seed)
    if clock is not None:
        clock.charge(T_IK_PREFILTER)
        clock.charge(T_IK_ITER, iters)
    if joints is None:
        return None
    q = np.array([x, y, theta, *joints])
    if clock is not None:
        clock.charge(T_COLLISION)
    if robot_in_collision(model, q, scene):
        return None
    for g in existing_goals:
        if weighted_distance(model, q, g) < 1e-6:
            return None
    return q


# ---------------------------------------------------------------------------
# shared anytime loop state


class _Search:
    """Tracks the incumbent solution and the cost-vs-time trace."""

    def __init__(self, roadmap: Roadmap, scene: Scene, params: PlannerParams, clock: WorkClock):
        self.roadmap = roadmap
        self.scene = scene
        self.params = params
        self.clock = clock
        self.best: tuple[list[int], float] | None = None
        self.trace: list[tuple[float, float]] = []
        self.initial_time: float | None = None
        self.inserts_since_search = 0

    def maybe_run(self, force: bool = False) -> None:
        if not force and self.inserts_since_search < self.params.cadence:
            return
        if not self.roadmap.goal_ids:
            return
        self.inserts_since_search = 0
        res = lazy_shortest_path(
            self.roadmap, self.scene, self.scene.robot, self.params.step, self.clock
        )
        if res is None:
            return
        if self.best is None or res[1] < self.best[1]:
            self.best = res
            if self.initial_time is None:
                self.initial_time = self.clock.now
            self.trace.append((self.clock.now, res[1]))


def _path_configs(roadmap: Roadmap, ids: list[int]) -> list[Configuration]:
    return [Configuration.from_array(roadmap.config(v)) for v in ids]


def _counters(clock: WorkClock, **extra) -> dict:
    out = {
        "samples": extra.pop("samples", 0),
        "collision_checks": clock.counts.get(T_COLLISION, 0),
        "edges_validated": extra.pop("edges_validated", 0),
        "goals_injected": extra.pop("goals_injected", 0),
    }
    out.update(extra)
    return out


# ---------------------------------------------------------------------------
# harmonious planner (single- and multi-goal)


def plan_harmonious(scene: Scene, params: PlannerParams, multi_goal: bool = True) -> PlanResult:
    """Anytime harmonious planner.

    Each iteration either injects a goal configuration (always while the
    goal set is empty; with probability rho_goal when multi-goal) or draws
    from the harmonious sampler, discards colliding samples, and connects
    survivors through the region-specific neighbor query.  The lazy search
    runs every ``cadence`` insertions and after every new goal.
    """
    model = scene.robot
    clock = WorkClock()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(params.seed)))
    grid = _full_grid(scene, params, clock)
    sampler = HarmoniousSampler(
        grid,
        SamplerParams(
            base_bounds=scene.bounds,
            joint_bounds=model.joint_limits,
            predefined_posture=model.predefined_posture,
            rho_sample=params.rho_sample,
            seed=params.seed,
        ),
    )
    roadmap = Roadmap(model)
    index = NnIndex(roadmap)
    start = scene.start.as_array()
    start_goal = pose_reaches_goal(
        model, scene.start, scene.goal_pose, params.goal_pos_tol, params.goal_ang_tol
    )
    roadmap.add_vertex(start, _tag_of(grid, start), is_goal=start_goal)
    index.add(0)

    search = _Search(roadmap, scene, params, clock)
    sample_log: list[tuple[float, float]] | None = [] if params.record_samples else None
    samples = goals_injected = goal_attempts = 0

    if start_goal:
        search.best = ([0], 0.0)
        search.initial_time = clock.now
        search.trace.append((clock.now, 0.0))

    while not clock.exhausted(params.time_budget):
        if not roadmap.goal_ids:
            inject = True
        else:
            # single-goal mode consumes the same draw, then caps the set at 1
            inject = rng.random() < params.rho_goal and multi_goal

        if inject:
            goal_attempts += 1
            existing = [roadmap.config(v) for v in roadmap.goal_ids]
            q = add_goal_configuration(scene, grid, rng, existing, clock)
            if q is None:
                if grid.reach_cells.size == 0 and not roadmap.goal_ids:
                    break  # no goal can ever exist
                continue
            goals_injected += 1
            _insert(roadmap, index, q, _tag_of(grid, q), clock, is_goal=True,
                    max_edge=params.max_edge_length)
            search.inserts_since_search += 1
            # a goal that cannot beat the incumbent (metric lower bound on
            # any path through it) waits for the next cadence search
            if search.best is None or (
                weighted_distance(model, start, q) < search.best[1]
            ):
                search.maybe_run(force=True)
        else:
            q = draw(sampler, rng)
            clock.charge(T_SAMPLE)
            samples += 1
            if sample_log is not None:
                sample_log.append((float(q[0]), float(q[1])))
            clock.charge(T_COLLISION)
            if robot_in_collision(model, q, scene):
                continue
            _insert(roadmap, index, q, _tag_of(grid, q), clock, max_edge=params.max_edge_length)
            search.inserts_since_search += 1
            search.maybe_run()

    search.maybe_run(force=True)
    return _finish(
        roadmap, search, clock,
        unreachable=(grid.reach_cells.size == 0 and goals_injected == 0),
        samples=samples, goals_injected=goals_injected, goal_attempts=goal_attempts,
        sample_log=sample_log,
        region_build_seconds=grid.build_seconds,
    )


def _tag_of(grid: BaseGrid, q: np.ndarray) -> int:
    return TAG_RM if grid.is_manipulation_cell(float(q[0]), float(q[1]), float(q[2])) else TAG_RB


def _insert(roadmap, index, q, tag, clock, is_goal=False, k_dof=None, max_edge=None):
    vid = roadmap.add_vertex(q, tag, is_goal=is_goal)
    k = k_value(roadmap.n_vertices, k_dof if k_dof is not None else roadmap.model.dof)
    neighbors = region_specific_knn(index, q, tag, k, clock=clock)
    index.add(vid)
    roadmap.add_edges(vid, neighbors, max_cost=max_edge)
    clock.charge(T_EDGE_INSERT, len(neighbors))
    return vid


def _finish(roadmap, search, clock, unreachable, sample_log=None, **extra):
    from .roadmap import EDGE_UNCHECKED

    validated = int(
        np.count_nonzero(roadmap._estatus[: roadmap.n_edges] != EDGE_UNCHECKED)
    )
    counters = _counters(clock, edges_validated=validated, **extra)
    if search.best is not None:
        path_ids, cost = search.best
        return PlanResult(
            "solved", _path_configs(roadmap, path_ids), cost,
            search.initial_time, search.trace, counters, sample_log,
        )
    status = "unreachable" if unreachable else "timeout"
    return PlanResult(status, [], math.inf, None, [], counters, sample_log)


# ---------------------------------------------------------------------------
# coupled baseline: uniform sampling in the full joint C-space


def plan_coupled(scene: Scene, params: PlannerParams) -> PlanResult:
    """Uniform full-dimensional planning with a single up-front goal."""
    model = scene.robot
    clock = WorkClock()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(params.seed)))
    grid = _reach_grid(scene, params, clock)
    roadmap = Roadmap(model)
    index = NnIndex(roadmap)
    start = scene.start.as_array()
    start_goal = pose_reaches_goal(
        model, scene.start, scene.goal_pose, params.goal_pos_tol, params.goal_ang_tol
    )
    roadmap.add_vertex(start, TAG_RB, is_goal=start_goal)
    index.add(0)
    search = _Search(roadmap, scene, params, clock)
    sample_log: list[tuple[float, float]] | None = [] if params.record_samples else None
    samples = goals_injected = goal_attempts = 0

    if start_goal:
        search.best = ([0], 0.0)
        search.initial_time = clock.now
        search.trace.append((clock.now, 0.0))

    # exactly one goal configuration, injected up front
    while not roadmap.goal_ids and not clock.exhausted(params.time_budget):
        if grid.reach_cells.size == 0:
            break
        goal_attempts += 1
        q = add_goal_configuration(scene, grid, rng, (), clock)
        if q is None:
            continue
        goals_injected += 1
        _insert(roadmap, index, q, TAG_RB, clock, is_goal=True, max_edge=params.max_edge_length)
        search.inserts_since_search += 1
        search.maybe_run(force=True)

    while not clock.exhausted(params.time_budget):
        q = uniform_configuration(rng, scene.bounds, model.joint_limits)
        clock.charge(T_SAMPLE)
        samples += 1
        if sample_log is not None:
            sample_log.append((float(q[0]), float(q[1])))
        clock.charge(T_COLLISION)
        if robot_in_collision(model, q, scene):
            continue
        _insert(roadmap, index, q, TAG_RB, clock, max_edge=params.max_edge_length)
        search.inserts_since_search += 1
        search.maybe_run()

    search.maybe_run(force=True)
    return _finish(
        roadmap, search, clock,
        unreachable=(grid.reach_cells.size == 0 and goals_injected == 0),
        samples=samples, goals_injected=goals_injected, goal_attempts=goal_attempts,
        sample_log=sample_log,
    )


# ---------------------------------------------------------------------------
# decoupled baseline: base phase then arm phase


def plan_decoupled(scene: Scene, params: PlannerParams) -> PlanResult:
    """Two-phase baseline: 3-DoF base planning with the arm frozen at the
    predefined posture, then arm-only planning at the chosen base pose.

    The phase budgets follow ``params.decoupled_split``.  Failure of
    either phase yields a timeout with the failed phase recorded.
    """
    model = scene.robot
    clock = WorkClock()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(params.seed)))
    grid = _reach_grid(scene, params, clock)
    q_pre = np.asarray(model.predefined_posture)
    budget = params.time_budget
    # the base:arm split divides the planning time left after the shared
    # reachability build
    phase1_end = clock.now + params.decoupled_split[0] * max(0.0, budget - clock.now)
    sample_log: list[tuple[float, float]] | None = [] if params.record_samples else None
    samples = goal_attempts = 0

    def fail(phase, goals=0):
        counters = _counters(
            clock, samples=samples, goals_injected=goals, goal_attempts=goal_attempts,
            failed_phase=phase, decoupled_base_time=None, decoupled_arm_time=None,
        )
        status = "unreachable" if grid.reach_cells.size == 0 else "timeout"
        return PlanResult(status, [], math.inf, None, [], counters, sample_log)

    # choose the goal: full configuration whose base also admits the frozen posture
    goal_cfg = None
    while goal_cfg is None and not clock.exhausted(phase1_end):
        if grid.reach_cells.size == 0:
            break
        goal_attempts += 1
        q = add_goal_configuration(scene, grid, rng, (), clock)
        if q is None:
            continue
        frozen_goal = np.concatenate([q[:3], q_pre])
        clock.charge(T_COLLISION)
        if robot_in_collision(model, frozen_goal, scene):
            continue
        goal_cfg = q
    if goal_cfg is None:
        return fail("base")

    # phase 1: base planning with the arm frozen
    start = scene.start.as_array()
    frozen_start = np.concatenate([start[:3], q_pre])
    if not np.array_equal(start[3:], q_pre):
        clock.charge(T_COLLISION)
        if robot_in_collision(model, frozen_start, scene):
            return fail("base", goals=1)
    base_map = Roadmap(model)
    base_index = NnIndex(base_map)
    base_map.add_vertex(frozen_start, TAG_RB)
    base_index.add(0)
    frozen_goal = np.concatenate([goal_cfg[:3], q_pre])
    base_search = _Search(base_map, scene, params, clock)
    _insert(base_map, base_index, frozen_goal, TAG_RB, clock, is_goal=True, k_dof=3,
            max_edge=params.max_edge_length)
    base_search.inserts_since_search += 1
    base_search.maybe_run(force=True)

    while not clock.exhausted(phase1_end):
        q = np.empty(model.dof)
        q[0] = rng.uniform(scene.bounds.xmin, scene.bounds.xmax)
        q[1] = rng.uniform(scene.bounds.ymin, scene.bounds.ymax)
        q[2] = rng.uniform(-math.pi, math.pi)
        q[3:] = q_pre
        clock.charge(T_SAMPLE)
        samples += 1
        if sample_log is not None:
            sample_log.append((float(q[0]), float(q[1])))
        clock.charge(T_COLLISION)
        if robot_in_collision(model, q, scene):
            continue
        _insert(base_map, base_index, q, TAG_RB, clock, k_dof=3, max_edge=params.max_edge_length)
        base_search.inserts_since_search += 1
        base_search.maybe_run()
    base_search.maybe_run(force=True)
    if base_search.best is None:
        return fail("base", goals=1)
    base_ids, base_cost = base_search.best
    base_time = base_search.initial_time

    # phase 2: arm planning at the fixed goal base pose
    arm_start_time = clock.now
    arm_map = Roadmap(model)
    arm_index = NnIndex(arm_map)
    arm_map.add_vertex(frozen_goal, TAG_RB)
    arm_index.add(0)
    arm_search = _Search(arm_map, scene, params, clock)
    _insert(arm_map, arm_index, goal_cfg, TAG_RB, clock, is_goal=True, k_dof=model.dof_arm,
            max_edge=params.max_edge_length)
    arm_search.inserts_since_search += 1
    arm_search.maybe_run(force=True)

    n_joints = model.dof_arm
    limits = model.joint_limits_array
    while not clock.exhausted(budget):
        q = frozen_goal.copy()
        q[3:] = rng.uniform(limits[:, 0], limits[:, 1])
        clock.charge(T_SAMPLE)
        samples += 1
        if sample_log is not None:
            sample_log.append((float(q[0]), float(q[1])))
        clock.charge(T_COLLISION)
        if robot_in_collision(model, q, scene):
            continue
        _insert(arm_map, arm_index, q, TAG_RB, clock, k_dof=n_joints, max_edge=params.max_edge_length)
        arm_search.inserts_since_search += 1
        arm_search.maybe_run()
    arm_search.maybe_run(force=True)
    if arm_search.best is None:
        return fail("arm", goals=1)
    arm_ids, arm_cost = arm_search.best

    path = _path_configs(base_map, base_ids) + _path_configs(arm_map, arm_ids)[1:]
    trace = [(t, base_cost + c) for t, c in arm_search.trace]
    from .roadmap import EDGE_UNCHECKED

    validated = int(
        np.count_nonzero(base_map._estatus[: base_map.n_edges] != EDGE_UNCHECKED)
    ) + int(np.count_nonzero(arm_map._estatus[: arm_map.n_edges] != EDGE_UNCHECKED))
    counters = _counters(
        clock,
        samples=samples,
        edges_validated=validated,
        goals_injected=1,
        goal_attempts=goal_attempts,
        decoupled_base_time=base_time,
        decoupled_arm_time=(arm_search.initial_time - arm_start_time),
        failed_phase=None,
    )
    return PlanResult(
        "solved", path, base_cost + arm_cost, arm_search.initial_time, trace,
        counters, sample_log,
    )


def plan(scene: Scene, kind: str, params: PlannerParams) -> PlanResult:
    """Dispatch by planner kind (see PLANNER_KINDS)."""
    if kind == "harmonious_single":
        return plan_harmonious(scene, params, multi_goal=False)
    if kind == "harmonious_multi":
        return plan_harmonious(scene, params, multi_goal=True)
    if kind == "coupled":
        return plan_coupled(scene, params)
    if kind == "decoupled":
        return plan_decoupled(scene, params)
    raise ValueError(f"unknown planner kind '{kind}'")
