"""Deterministic planning clock.

Planning budgets and reported times are measured on a virtual clock that
charges a fixed cost per primitive operation (collision check, IK
iteration, nearest-neighbor scan, ...).  This keeps every run bit-for-bit
reproducible for a given (scene, params, seed) regardless of machine load
or parallelism, which the paired-seed comparisons and the CSV determinism
guarantees require; wall-clock timing would break both.

The rates are calibrated against measured desk-hardware costs of the same
operations so that one virtual second stays comparable to one real second
of planning work across all planner variants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# seconds of virtual time per operation (~3x the measured desk-hardware
# cost of each op, so a trial's real time stays well under its budget)
T_COLLISION = 1.0e-4  # one scalar full-configuration collision check
T_IK_ITER = 2.0e-4  # one damped-least-squares iteration
T_IK_PREFILTER = 4.0e-5  # reach-interval rejection
T_SAMPLE = 3.5e-5  # one sampler draw
T_KNN_BASE = 1.5e-4  # nearest-neighbor query overhead
T_KNN_VERTEX = 6.0e-7  # per candidate vertex scanned
T_EDGE_INSERT = 6.0e-6  # roadmap edge insertion
T_SEARCH_BASE = 1.0e-3  # shortest-path search overhead
T_SEARCH_EDGE = 2.3e-7  # per directed graph edge considered by the search
T_GRID_CELL = 3.0e-6  # per grid cell bookkeeping during region labeling
T_SPHERE_TEST = 1.0e-6  # one sphere-vs-obstacles test
T_FIELD_CELL_SOURCE = 3.0e-7  # distance-field evaluation per cell per source


@dataclass
class WorkClock:
    """Monotone virtual clock; ``charge`` advances it by op costs.

    Per-rate op counts are kept alongside the time so results can report
    deterministic counters (and cached region builds can replay their
    recorded cost exactly).
    """

    now: float = 0.0
    counts: dict = field(default_factory=dict)

    def charge(self, rate: float, count: int = 1) -> None:
        self.now += rate * count
        self.counts[rate] = self.counts.get(rate, 0) + count

    def exhausted(self, budget: float) -> bool:
        return self.now >= budget
