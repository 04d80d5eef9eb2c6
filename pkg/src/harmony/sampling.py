"""Harmonious sampling over the labeled base grid.

Each grid cell gets a sampling hyper-volume: the product of its own base
extents plus, for manipulation cells, the full weighted joint intervals
(the joints are not partitioned by the grid).  Normalizing the volumes
gives the cell PMF; draws pick a cell by inverse-transform sampling, then
fill the configuration per the cell's region: full-dimensional for Rm,
predefined posture for Rb.  A uniform draw over the whole joint C-space is
mixed in with probability 1 - rho_sample to keep the sampler complete.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Box
from .regions import BaseGrid

__all__ = [
    "SamplerParams",
    "HarmoniousSampler",
    "cell_volume",
    "finalize_pmf",
    "draw",
    "uniform_configuration",
]


@dataclass(frozen=True)
class SamplerParams:
    base_bounds: Box
    joint_bounds: tuple[tuple[float, float], ...]
    predefined_posture: tuple[float, ...]
    rho_sample: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.rho_sample <= 1.0):
            raise ValueError("rho_sample must lie in [0, 1]")
        if not self.joint_bounds:
            raise ValueError("joint bounds must be nonempty")


def cell_volume(grid: BaseGrid, cell, weights, joint_bounds) -> float:
    """Sampling hyper-volume of one cell.

    Base factors always use the cell's own extents; manipulation cells
    additionally multiply the full weighted joint intervals.
    """
    dx, dy, dth = grid.resolution
    w = np.asarray(weights, dtype=float)
    vol = (w[0] * dx) * (w[1] * dy) * (w[2] * dth)
    if grid.labels[tuple(cell)]:
        for j, (lo, hi) in enumerate(joint_bounds):
            vol *= w[3 + j] * (hi - lo)
    return vol


def finalize_pmf(grid: BaseGrid, weights, joint_bounds) -> BaseGrid:
    """Fill per-cell volumes, masses, and the cumulative sums in place."""
    dx, dy, dth = grid.resolution
    w = np.asarray(weights, dtype=float)
    base = (w[0] * dx) * (w[1] * dy) * (w[2] * dth)
    manip = base
    for j, (lo, hi) in enumerate(joint_bounds):
        manip *= w[3 + j] * (hi - lo)
    flat_labels = grid.labels.reshape(-1)
    volumes = np.where(flat_labels, manip, base)
    total = float(np.sum(volumes))
    if total <= 0.0:
        raise ValueError("empty sampling space: total cell volume is zero")
    masses = volumes / total
    grid.volumes = volumes
    grid.masses = masses
    grid.cumulative = np.cumsum(masses)
    return grid


@dataclass
class HarmoniousSampler:
    """Alg.-2 sampler bound to a finalized grid."""

    grid: BaseGrid
    params: SamplerParams
    dof_manip: int = field(init=False)

    def __post_init__(self):
        if self.grid.cumulative is None:
            raise ValueError("grid PMF must be finalized before sampling")
        if abs(float(self.grid.cumulative[-1]) - 1.0) > 1e-12:
            raise ValueError("grid cumulative masses must end at 1")
        self.dof_manip = len(self.params.joint_bounds)

    @property
    def dof_rm(self) -> int:
        return 3 + self.dof_manip

    @property
    def dof_rb(self) -> int:
        return 3


def uniform_configuration(rng: np.random.Generator, base_bounds: Box, joint_bounds) -> np.ndarray:
    """One uniform draw over the full joint C-space."""
    out = np.empty(3 + len(joint_bounds))
    out[0] = rng.uniform(base_bounds.xmin, base_bounds.xmax)
    out[1] = rng.uniform(base_bounds.ymin, base_bounds.ymax)
    out[2] = rng.uniform(-math.pi, math.pi)
    for j, (lo, hi) in enumerate(joint_bounds):
        out[3 + j] = rng.uniform(lo, hi)
    return out


def draw(sampler: HarmoniousSampler, rng: np.random.Generator) -> np.ndarray:
    """One configuration draw (no collision checking here).

    With probability rho_sample: inverse-transform a cell from the PMF,
    sample the base uniformly inside the cell, and fill the joints either
    uniformly (Rm cell) or with the predefined posture (Rb cell).
    Otherwise: uniform over the full space.
    """
    params = sampler.params
    if rng.random() >= params.rho_sample:
        return uniform_configuration(rng, params.base_bounds, params.joint_bounds)

    grid = sampler.grid
    u = rng.random()
    flat = int(np.searchsorted(grid.cumulative, u, side="right"))
    flat = min(flat, grid.n_cells - 1)
    ix, iy, ith = grid.unflat(flat)
    dx, dy, dth = grid.resolution
    out = np.empty(3 + sampler.dof_manip)
    out[0] = grid.origin[0] + (ix + rng.random()) * dx
    out[1] = grid.origin[1] + (iy + rng.random()) * dy
    out[2] = -math.pi + (ith + rng.random()) * dth
    if grid.labels[ix, iy, ith]:
        for j, (lo, hi) in enumerate(params.joint_bounds):
            out[3 + j] = rng.uniform(lo, hi)
    else:
        out[3:] = params.predefined_posture
    return out
