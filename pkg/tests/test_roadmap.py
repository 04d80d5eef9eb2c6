import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
import pytest

from harmony.geometry import Box, Circle
from harmony.kinematics import interpolate, robot_in_collision, weighted_distance
from harmony.roadmap import (
    EDGE_INVALID,
    EDGE_UNCHECKED,
    EDGE_VALID,
    NnIndex,
    Roadmap,
    TAG_RB,
    TAG_RM,
    export_edge_list,
    k_value,
    lazy_shortest_path,
    region_specific_knn,
    validate_edge,
)


@dataclass(frozen=True)
class _MiniScene:
    bounds: Box
    obstacles: tuple


FREE = _MiniScene(Box(-10, -10, 10, 10), ())


def _q(x, y, th=0.0, joints=(0.0, 0.0, 0.0)):
    return np.array([x, y, th, *joints])


# ---------------------------------------------------------------------------
# k_value


def test_k_value_examples():
    assert k_value(1, 6) == 5
    assert k_value(1000, 6) == 44


def test_k_value_monotone():
    prev = 0
    for n in [1, 2, 5, 10, 100, 1000, 10_000, 100_000, 1_000_000]:
        k = k_value(n, 6)
        assert k >= prev
        prev = k


# ---------------------------------------------------------------------------
# region-specific k-NN


def _build_roadmap(model, configs, tags):
    rm = Roadmap(model)
    index = NnIndex(rm)
    for cfg, tag in zip(configs, tags):
        vid = rm.add_vertex(cfg, tag)
        index.add(vid)
    return rm, index


def test_knn_all_base_equals_plain(model, rng):
    configs = [_q(*rng.uniform(-3, 3, 2), rng.uniform(-3, 3),
                  rng.uniform(-2.6, 2.6, 3)) for _ in range(50)]
    rm, index = _build_roadmap(model, configs, [TAG_RB] * 50)
    q = _q(0.1, 0.2, 0.3, (0.0, 0.1, -0.1))
    got = region_specific_knn(index, q, TAG_RB, 5)
    dists = sorted(
        (weighted_distance(model, q, rm.config(v)), v) for v in range(50)
    )
    assert got == [v for _, v in dists[:5]]


def test_knn_rm_query_includes_base_nearest(model, rng):
    n = 60
    configs = [_q(*rng.uniform(-3, 3, 2), rng.uniform(-3, 3),
                  rng.uniform(-2.6, 2.6, 3)) for _ in range(n)]
    tags = [TAG_RM if i % 2 == 0 else TAG_RB for i in range(n)]
    rm, index = _build_roadmap(model, configs, tags)
    q = _q(0.0, 0.0)
    k = 4
    got = region_specific_knn(index, q, TAG_RM, k)
    assert k <= len(got) <= 2 * k
    rb_sorted = sorted(
        (weighted_distance(model, q, rm.config(v)), v)
        for v in range(n) if tags[v] == TAG_RB
    )
    for _, vid in rb_sorted[:k]:
        assert vid in got


def test_knn_small_population_returns_all(model):
    configs = [_q(0, 0), _q(1, 1), _q(2, 2)]
    rm, index = _build_roadmap(model, configs, [TAG_RB, TAG_RM, TAG_RB])
    assert set(region_specific_knn(index, _q(0.5, 0.5), TAG_RB, 10)) == {0, 1, 2}


def test_knn_excludes_query_vertex(model):
    configs = [_q(0, 0), _q(1, 0)]
    rm, index = _build_roadmap(model, configs, [TAG_RB, TAG_RB])
    got = region_specific_knn(index, rm.config(0), TAG_RB, 5, exclude=0)
    assert got == [1]


def test_knn_matches_bruteforce_oracle(model, rng):
    # randomized roadmaps against a linear-scan oracle, exact equality
    for _ in range(100):
        n = int(rng.integers(2, 120))
        configs = [
            _q(*rng.uniform(-3, 3, 2), rng.uniform(-math.pi, math.pi),
               rng.uniform(-2.6, 2.6, 3))
            for _ in range(n)
        ]
        tags = [int(rng.integers(0, 2)) for _ in range(n)]
        rm, index = _build_roadmap(model, configs, tags)
        q = _q(*rng.uniform(-3, 3, 2), rng.uniform(-math.pi, math.pi),
               rng.uniform(-2.6, 2.6, 3))
        k = int(rng.integers(1, 8))
        tag = int(rng.integers(0, 2))
        got = region_specific_knn(index, q, tag, k)

        pairs = sorted(
            (weighted_distance(model, q, rm.config(v)), v) for v in range(n)
        )
        if tag == TAG_RB:
            expected = [v for _, v in pairs[:k]]
        else:
            rm_pairs = [(d, v) for d, v in pairs if tags[v] == TAG_RM][:k]
            rb_pairs = [(d, v) for d, v in pairs if tags[v] == TAG_RB][:k]
            expected = [v for _, v in sorted(rm_pairs + rb_pairs)]
        assert got == expected


# ---------------------------------------------------------------------------
# edge validation


def test_validate_zero_length_edge(model):
    rm = Roadmap(model)
    a = rm.add_vertex(_q(0, 0), TAG_RB)
    b = rm.add_vertex(_q(0, 0), TAG_RB)
    rm.add_edges(b, [a])
    eid = rm.edge_id(a, b)
    assert validate_edge(rm, eid, FREE, model, 0.05)
    assert rm.edge_status(eid) == EDGE_VALID


def test_validate_midpoint_collision(model):
    scene = _MiniScene(Box(-10, -10, 10, 10), (Circle(1.0, 0.0, 0.4),))
    rm = Roadmap(model)
    a = rm.add_vertex(_q(-1, 2.0), TAG_RB)
    b = rm.add_vertex(_q(3, -2.0), TAG_RB)
    rm.add_edges(b, [a])
    eid = rm.edge_id(a, b)
    assert not validate_edge(rm, eid, scene, model, 0.05)
    assert rm.edge_status(eid) == EDGE_INVALID
    # idempotent: result cached
    assert not validate_edge(rm, eid, scene, model, 0.05)


def test_validate_step_refinement_agrees(model):
    # obstacle clearance exceeds the step bound: the coarse and the 10x
    # refined checks must agree on both a clear and a colliding edge
    clear = _MiniScene(Box(-10, -10, 10, 10), (Circle(0.0, 1.6, 0.25),))
    rm = Roadmap(model)
    a = rm.add_vertex(_q(-2, 0, 0, (2.0, -1.0, 1.0)), TAG_RB)
    b = rm.add_vertex(_q(2, 0, 0, (2.0, -1.0, 1.0)), TAG_RB)
    rm.add_edges(b, [a])
    eid = rm.edge_id(a, b)
    assert validate_edge(rm, eid, clear, model, 0.05)
    rm._estatus[eid] = EDGE_UNCHECKED
    assert validate_edge(rm, eid, clear, model, 0.005)

    blocking = _MiniScene(Box(-10, -10, 10, 10), (Circle(0.0, 0.0, 0.5),))
    rm2 = Roadmap(model)
    a2 = rm2.add_vertex(_q(-2, 0, 0, (2.0, -1.0, 1.0)), TAG_RB)
    b2 = rm2.add_vertex(_q(2, 0, 0, (2.0, -1.0, 1.0)), TAG_RB)
    rm2.add_edges(b2, [a2])
    eid2 = rm2.edge_id(a2, b2)
    assert not validate_edge(rm2, eid2, blocking, model, 0.05)
    rm2._estatus[eid2] = EDGE_UNCHECKED
    assert not validate_edge(rm2, eid2, blocking, model, 0.005)


# ---------------------------------------------------------------------------
# lazy shortest path


def test_lazy_start_is_goal(model):
    rm = Roadmap(model)
    rm.add_vertex(_q(0, 0), TAG_RB, is_goal=True)
    path, cost = lazy_shortest_path(rm, FREE, model)
    assert path == [0]
    assert cost == 0.0


def test_lazy_two_vertex_graph(model):
    rm = Roadmap(model)
    a = rm.add_vertex(_q(0, 0), TAG_RB)
    b = rm.add_vertex(_q(1, 1), TAG_RB, is_goal=True)
    rm.add_edges(b, [a])
    path, cost = lazy_shortest_path(rm, FREE, model)
    assert path == [a, b]
    assert cost == weighted_distance(model, rm.config(a), rm.config(b))


def test_lazy_diamond_prefers_valid_long_side(model):
    # short route passes through an obstacle, long route is clear
    scene = _MiniScene(Box(-10, -10, 10, 10), (Circle(1.0, 0.0, 0.45),))
    up = math.pi / 2  # arm points away from the obstacle throughout
    rm = Roadmap(model)
    s = rm.add_vertex(_q(0, 0, up), TAG_RB)
    short_mid = rm.add_vertex(_q(1.0, 0.35, up), TAG_RB)
    long_mid = rm.add_vertex(_q(1.0, 2.0, up), TAG_RB)
    g = rm.add_vertex(_q(2.0, 0.0, up), TAG_RB, is_goal=True)
    rm.add_edges(short_mid, [s, g])
    rm.add_edges(long_mid, [s, g])
    path, cost = lazy_shortest_path(rm, scene, model)
    assert path == [s, long_mid, g]
    invalid = [
        eid for eid in range(rm.n_edges) if rm.edge_status(eid) == EDGE_INVALID
    ]
    assert invalid  # the short side was tried and marked
    expected = weighted_distance(model, rm.config(s), rm.config(long_mid)) + (
        weighted_distance(model, rm.config(long_mid), rm.config(g))
    )
    assert cost == expected


def _exhaustive_best(rm, scene, model, step=0.05):
    """Enumerate all simple paths over truly-valid edges (test-local)."""
    n = rm.n_vertices
    adj = {v: [] for v in range(n)}
    for eid in range(rm.n_edges):
        u, v = int(rm._eu[eid]), int(rm._ev[eid])
        qa, qb = rm.config(u), rm.config(v)
        steps = max(1, math.ceil(rm.edge_cost(eid) / step))
        ok = all(
            not robot_in_collision(model, interpolate(qa, qb, i / steps), scene)
            for i in range(steps + 1)
        )
        if ok:
            adj[u].append(v)
            adj[v].append(u)
    best = None
    goals = set(rm.goal_ids)

    def dfs(v, visited, cost):
        nonlocal best
        if v in goals:
            if best is None or cost < best:
                best = cost
        for u in adj[v]:
            if u not in visited:
                visited.add(u)
                dfs(u, visited, cost + rm.edge_cost(rm.edge_id(v, u)))
                visited.remove(u)

    dfs(rm.start_id, {rm.start_id}, 0.0)
    return best


def test_lazy_matches_exhaustive_enumeration(model, rng):
    scene = _MiniScene(
        Box(-5, -5, 5, 5), (Circle(0.0, 0.0, 0.6), Box(1.5, -2.5, 2.5, -1.0))
    )
    for trial in range(100):
        n = int(rng.integers(4, 11))
        rm = Roadmap(model)
        for i in range(n):
            cfg = _q(*rng.uniform(-4, 4, 2), rng.uniform(-math.pi, math.pi),
                     rng.uniform(-2.6, 2.6, 3))
            rm.add_vertex(cfg, TAG_RB, is_goal=(i == n - 1 or rng.random() < 0.2))
        for v in range(1, n):
            others = rng.choice(v, size=min(v, 3), replace=False)
            rm.add_edges(v, list(others))
        got = lazy_shortest_path(rm, scene, model)
        expected = _exhaustive_best(rm, scene, model)
        if expected is None:
            assert got is None
        else:
            assert got is not None
            assert got[1] == expected


def test_edge_statuses_monotone(model, rng):
    scene = _MiniScene(Box(-5, -5, 5, 5), (Circle(0.0, 0.0, 0.8),))
    rm = Roadmap(model)
    for i in range(12):
        rm.add_vertex(_q(*rng.uniform(-4, 4, 2)), TAG_RB, is_goal=(i == 11))
        if i:
            rm.add_edges(i, list(range(max(0, i - 3), i)))
    seen = {}
    lazy_shortest_path(rm, scene, model)
    for eid in range(rm.n_edges):
        seen[eid] = rm.edge_status(eid)
    lazy_shortest_path(rm, scene, model)
    for eid in range(rm.n_edges):
        status = rm.edge_status(eid)
        if seen[eid] != EDGE_UNCHECKED:
            assert status == seen[eid]


def test_anytime_cost_non_increasing(model, rng):
    scene = _MiniScene(Box(-5, -5, 5, 5), (Circle(0.5, 0.5, 0.7),))
    rm = Roadmap(model)
    index = NnIndex(rm)
    s = rm.add_vertex(_q(-3, -3), TAG_RB)
    index.add(s)
    g = rm.add_vertex(_q(3, 3), TAG_RB, is_goal=True)
    index.add(g)
    rm.add_edges(g, [s])
    costs = []
    for i in range(150):
        cfg = _q(*rng.uniform(-4, 4, 2))
        vid = rm.add_vertex(cfg, TAG_RB)
        nbrs = region_specific_knn(index, cfg, TAG_RB, k_value(rm.n_vertices, 6), exclude=vid)
        index.add(vid)
        rm.add_edges(vid, nbrs)
        if i % 25 == 0:
            res = lazy_shortest_path(rm, scene, model)
            if res is not None:
                costs.append(res[1])
    assert len(costs) >= 2
    assert all(b <= a + 1e-12 for a, b in zip(costs, costs[1:]))


def test_export_edge_list(model, tmp_path):
    rm = Roadmap(model)
    a = rm.add_vertex(_q(0, 0), TAG_RB)
    b = rm.add_vertex(_q(1, 0), TAG_RM, is_goal=True)
    rm.add_edges(b, [a])
    out = tmp_path / "roadmap.txt"
    export_edge_list(rm, out)
    text = out.read_text()
    assert "v 0 Rb 0" in text
    assert "v 1 Rm 1" in text
    assert text.count("\ne ") == 1
