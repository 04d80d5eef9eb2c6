"""Roadmap graph with region-tagged vertices and lazy edge validation.

Vertices and edges live in growable numpy arrays (struct-of-arrays) so
nearest-neighbor scans and graph searches stay vectorized.  Edge collision
checking is deferred: edges start ``unchecked`` and are only interpolated
against the scene when they appear on a candidate shortest path; statuses
move monotonically to ``valid`` or ``invalid`` and are never recomputed.

The nearest-neighbor index keeps one sub-index per region tag.  Queries
for manipulation-region samples run against both sub-indexes and return
the union, which forces connections across the Rm/Rb sampling-density
boundary; base-region queries use the plain search over all samples.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .clock import (
    T_COLLISION,
    T_KNN_BASE,
    T_KNN_VERTEX,
    T_SEARCH_BASE,
    T_SEARCH_EDGE,
    WorkClock,
)
from .kinematics import RobotModel, robot_in_collision, weighted_row_distances

__all__ = [
    "TAG_RB",
    "TAG_RM",
    "EDGE_UNCHECKED",
    "EDGE_VALID",
    "EDGE_INVALID",
    "Roadmap",
    "NnIndex",
    "k_value",
    "region_specific_knn",
    "validate_edge",
    "lazy_shortest_path",
    "export_edge_list",
]

TAG_RB = 0
TAG_RM = 1

EDGE_UNCHECKED = 0
EDGE_VALID = 1
EDGE_INVALID = 2

_2E = 2.0 * math.e


def k_value(n: int, dof: int) -> int:
    """PRM* connection count: ceil(2e(1 + 1/D) ln(n + 1)), at least 1."""
    if n < 1:
        raise ValueError("vertex count must be >= 1")
    return max(1, math.ceil(_2E * (1.0 + 1.0 / dof) * math.log(n + 1)))


class Roadmap:
    """Graph G = (V, E) over configuration arrays."""

    def __init__(self, model: RobotModel):
        self.model = model
        dof = model.dof
        self._configs = np.empty((64, dof))
        self._tags = np.empty(64, dtype=np.int8)
        self._goal_flags = np.zeros(64, dtype=bool)
        self.n_vertices = 0
        self._eu = np.empty(256, dtype=np.int32)
        self._ev = np.empty(256, dtype=np.int32)
        self._ecost = np.empty(256)
        self._estatus = np.empty(256, dtype=np.int8)
        self.n_edges = 0
        self._edge_ids: dict[tuple[int, int], int] = {}
        self.goal_ids: list[int] = []
        self.start_id = 0

    # -- vertices ---------------------------------------------------------

    def add_vertex(self, config: np.ndarray, tag: int, is_goal: bool = False) -> int:
        if self.n_vertices == len(self._configs):
            self._configs = np.concatenate([self._configs, np.empty_like(self._configs)])
            self._tags = np.concatenate([self._tags, np.empty_like(self._tags)])
            self._goal_flags = np.concatenate([self._goal_flags, np.zeros_like(self._goal_flags)])
        vid = self.n_vertices
        self._configs[vid] = config
        self._tags[vid] = tag
        self._goal_flags[vid] = is_goal
        self.n_vertices += 1
        if is_goal:
            self.goal_ids.append(vid)
        return vid

    def config(self, vid: int) -> np.ndarray:
        return self._configs[vid]

    def configs(self) -> np.ndarray:
        return self._configs[: self.n_vertices]

    def tag(self, vid: int) -> int:
        return int(self._tags[vid])

    def is_goal(self, vid: int) -> bool:
        return bool(self._goal_flags[vid])

    # -- edges ------------------------------------------------------------

    def add_edges(self, vid: int, neighbor_ids, max_cost: float | None = None) -> None:
        """Insert undirected edges vid<->each neighbor with cached metric cost.

        ``max_cost`` caps the connection radius: candidate edges longer than
        it are skipped (planners use this to keep the lazy search from
        drowning in long shortcut edges)."""
        neighbor_ids = [int(u) for u in neighbor_ids if int(u) != vid]
        if not neighbor_ids:
            return
        diffs = self._configs[neighbor_ids] - self._configs[vid]
        costs = weighted_row_distances(self.model.weights, diffs)
        for u, cost in zip(neighbor_ids, costs):
            if max_cost is not None and cost > max_cost:
                continue
            a, b = (u, vid) if u < vid else (vid, u)
            if (a, b) in self._edge_ids:
                continue
            if self.n_edges == len(self._eu):
                grow = self.n_edges
                self._eu = np.concatenate([self._eu, np.empty(grow, dtype=np.int32)])
                self._ev = np.concatenate([self._ev, np.empty(grow, dtype=np.int32)])
                self._ecost = np.concatenate([self._ecost, np.empty(grow)])
                self._estatus = np.concatenate([self._estatus, np.empty(grow, dtype=np.int8)])
            eid = self.n_edges
            self._eu[eid] = a
            self._ev[eid] = b
            self._ecost[eid] = cost
            self._estatus[eid] = EDGE_UNCHECKED
            self._edge_ids[(a, b)] = eid
            self.n_edges += 1

    def edge_id(self, u: int, v: int) -> int:
        a, b = (u, v) if u < v else (v, u)
        return self._edge_ids[(a, b)]

    def edge_cost(self, eid: int) -> float:
        return float(self._ecost[eid])

    def edge_status(self, eid: int) -> int:
        return int(self._estatus[eid])


class NnIndex:
    """Two region sub-indexes over the weighted metric (exact linear scans)."""

    def __init__(self, roadmap: Roadmap):
        self.roadmap = roadmap
        self._ids: dict[int, list[int]] = {TAG_RB: [], TAG_RM: []}

    def add(self, vid: int) -> None:
        self._ids[self.roadmap.tag(vid)].append(vid)

    def size(self, tag: int) -> int:
        return len(self._ids[tag])

    def _nearest(self, ids: list[int], q: np.ndarray, k: int, exclude: int | None,
                 clock: WorkClock | None):
        if not ids:
            return []
        id_arr = np.asarray(ids, dtype=np.int64)
        diffs = self.roadmap._configs[id_arr] - q
        dists = weighted_row_distances(self.roadmap.model.weights, diffs)
        if clock is not None:
            clock.charge(T_KNN_BASE)
            clock.charge(T_KNN_VERTEX, len(ids))
        if exclude is not None:
            keep = id_arr != exclude
            id_arr, dists = id_arr[keep], dists[keep]
        if len(id_arr) == 0:
            return []
        order = np.lexsort((id_arr, dists))[: min(k, len(id_arr))]
        return [(float(dists[i]), int(id_arr[i])) for i in order]

    def query_region(self, q, tag: int, k: int, exclude=None, clock=None):
        return self._nearest(self._ids[tag], q, k, exclude, clock)

    def query_all(self, q, k: int, exclude=None, clock=None):
        both = self._nearest(self._ids[TAG_RB] + self._ids[TAG_RM], q, k, exclude, clock)
        return both


def region_specific_knn(
    index: NnIndex, q: np.ndarray, tag: int, k: int, exclude: int | None = None,
    clock: WorkClock | None = None,
) -> list[int]:
    """Neighbor ids for a new sample tagged ``tag``.

    Manipulation-region samples take the union of the k nearest Rm samples
    and the k nearest Rb samples (ties broken by lower id); base-region
    samples use the plain k-NN over all samples.
    """
    if tag == TAG_RM:
        pairs = index.query_region(q, TAG_RM, k, exclude, clock) + index.query_region(
            q, TAG_RB, k, exclude, clock
        )
        pairs.sort()
        return [vid for _, vid in pairs]
    pairs = index.query_all(q, k, exclude, clock)
    return [vid for _, vid in pairs]


def interpolate_batch(qa: np.ndarray, qb: np.ndarray, n_steps: int) -> np.ndarray:
    """Configurations at i/n_steps for i = 0..n_steps, shortest-arc angles."""
    delta = qb - qa
    delta[2:] = (delta[2:] + math.pi) % (2 * math.pi) - math.pi
    t = np.linspace(0.0, 1.0, n_steps + 1)
    out = qa[None, :] + t[:, None] * delta[None, :]
    out[:, 2:] = (out[:, 2:] + math.pi) % (2 * math.pi) - math.pi
    return out


def _bisection_order(n: int) -> list[int]:
    """Indices 0..n in coarse-to-fine order (endpoints, midpoint, quarters, ...)
    so a colliding interpolated configuration is usually found early."""
    order = [0, n]
    seen = {0, n}
    queue = [(0, n)]
    while queue:
        lo, hi = queue.pop(0)
        mid = (lo + hi) // 2
        if mid in seen or mid in (lo, hi):
            continue
        seen.add(mid)
        order.append(mid)
        queue.append((lo, mid))
        queue.append((mid, hi))
    return order


def validate_edge(
    roadmap: Roadmap,
    eid: int,
    scene,
    model: RobotModel,
    step: float = 0.05,
    clock: WorkClock | None = None,
) -> bool:
    """Resolve an edge by interpolated collision checking (idempotent).

    Interpolation spacing is bounded by ``step`` in the weighted metric;
    both endpoints are included and checking stops at the first collision.
    Returns True iff the edge is valid.
    """
    status = roadmap.edge_status(eid)
    if status != EDGE_UNCHECKED:
        return status == EDGE_VALID
    u, v = int(roadmap._eu[eid]), int(roadmap._ev[eid])
    qa, qb = roadmap._configs[u].copy(), roadmap._configs[v]
    n_steps = max(1, math.ceil(roadmap.edge_cost(eid) / step))
    configs = interpolate_batch(qa, qb, n_steps)
    valid = True
    for i in _bisection_order(n_steps):
        if clock is not None:
            clock.charge(T_COLLISION)
        if robot_in_collision(model, configs[i], scene):
            valid = False
            break
    roadmap._estatus[eid] = EDGE_VALID if valid else EDGE_INVALID
    return valid


def lazy_shortest_path(
    roadmap: Roadmap,
    scene,
    model: RobotModel,
    step: float = 0.05,
    clock: WorkClock | None = None,
) -> tuple[list[int], float] | None:
    """Shortest start-to-goal path whose edges all validate.

    Repeatedly searches the graph over non-invalid edges, then validates
    the candidate's unchecked edges in path order, marking every invalid
    edge found; the search repeats until a candidate survives intact.
    Returns (vertex ids, cost) or None when no candidate connects the
    start to any goal.
    """
    if not roadmap.goal_ids:
        return None
    start = roadmap.start_id
    goal_arr = np.asarray(sorted(roadmap.goal_ids), dtype=np.int64)

    while True:
        m = roadmap.n_edges
        keep = roadmap._estatus[:m] != EDGE_INVALID
        u = roadmap._eu[:m][keep]
        v = roadmap._ev[:m][keep]
        w = roadmap._ecost[:m][keep]
        n = roadmap.n_vertices
        graph = csr_matrix(
            (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
            shape=(n, n),
        )
        if clock is not None:
            clock.charge(T_SEARCH_BASE)
            clock.charge(T_SEARCH_EDGE, int(2 * keep.sum()))
        dist, pred = dijkstra(
            graph, directed=False, indices=start, return_predecessors=True
        )
        goal_dists = dist[goal_arr]
        best = int(np.argmin(goal_dists))
        if not np.isfinite(goal_dists[best]):
            return None
        goal = int(goal_arr[best])

        path = [goal]
        while path[-1] != start:
            path.append(int(pred[path[-1]]))
        path.reverse()

        n_invalid = 0
        for a, b in zip(path[:-1], path[1:]):
            eid = roadmap.edge_id(a, b)
            if roadmap.edge_status(eid) == EDGE_UNCHECKED:
                if not validate_edge(roadmap, eid, scene, model, step, clock):
                    n_invalid += 1
        if n_invalid:
            continue
        cost = 0.0
        for a, b in zip(path[:-1], path[1:]):
            cost += roadmap.edge_cost(roadmap.edge_id(a, b))
        return path, cost


def export_edge_list(roadmap: Roadmap, path: str | Path) -> None:
    """Debug dump: vertices then edges, one record per line."""
    lines = ["# vertices: id tag goal x y theta joints..."]
    status_names = {EDGE_UNCHECKED: "unchecked", EDGE_VALID: "valid", EDGE_INVALID: "invalid"}
    for vid in range(roadmap.n_vertices):
        coords = " ".join(repr(float(c)) for c in roadmap._configs[vid])
        tag = "Rm" if roadmap.tag(vid) == TAG_RM else "Rb"
        lines.append(f"v {vid} {tag} {int(roadmap.is_goal(vid))} {coords}")
    lines.append("# edges: u v status cost")
    for eid in range(roadmap.n_edges):
        lines.append(
            f"e {int(roadmap._eu[eid])} {int(roadmap._ev[eid])} "
            f"{status_names[int(roadmap._estatus[eid])]} {repr(float(roadmap._ecost[eid]))}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
