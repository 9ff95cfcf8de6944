"""Grid-based dynamic roadmap baseline.

Preprocessing voxelizes every posed body triangle of every sampled
configuration into a uniform grid of closed cubic cells; an update marks
every component mapped from a cell that meets an obstacle's AABB as GRAY.
The baseline never produces RED.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive
from .approximation import Obstacle
from .geometry import AABB, aabb_of
from .geometry.triangles import tris_overlap_boxes
from .kinematics import fk_batch
from .roadmap import Label, LabelMap, all_component_cfgs

DEFAULT_RESOLUTION = 4.0


@dataclass(eq=False)
class DrmIndex:
    bounds: AABB
    resolution: float
    shape: tuple
    cell_offsets: np.ndarray  # CSR over flat cell ids
    cell_components: np.ndarray
    n_nodes: int
    n_components: int

    @property
    def n_cells(self):
        return int(np.prod(self.shape))

    def cell_box(self, ijk):
        lo = self.bounds.min + np.asarray(ijk) * self.resolution
        return AABB(lo, np.minimum(lo + self.resolution, self.bounds.max))

    def flat_cell(self, ijk):
        i, j, k = ijk
        return (i * self.shape[1] + j) * self.shape[2] + k

    def components_of(self, flat_cell):
        return self.cell_components[self.cell_offsets[flat_cell] : self.cell_offsets[flat_cell + 1]]

    def cell_range(self, lo, hi):
        """Inclusive index range of closed cells meeting the closed box ``[lo, hi]``; None if empty."""
        return _cell_range(np.asarray(lo, float), np.asarray(hi, float), self.bounds, self.resolution, self.shape)


def _grid_shape(bounds, resolution):
    ext = bounds.max - bounds.min
    return tuple(max(1, math.ceil(e / resolution - 1e-9)) for e in ext)


def _cell_range(lo, hi, bounds, res, shape):
    if np.any(hi < bounds.min) or np.any(lo > bounds.max):
        return None
    n = np.array(shape)
    start = np.clip(np.ceil((lo - bounds.min) / res).astype(np.int64) - 1, 0, n - 1)
    end = np.clip(np.floor((hi - bounds.min) / res).astype(np.int64), 0, n - 1)
    return start, end


def _candidate_cells(lo, hi, bounds, res, shape):
    """Per-triangle inclusive cell ranges (vectorized), clipped to the grid."""
    n = np.array(shape)
    start = np.clip(np.ceil((lo - bounds.min) / res).astype(np.int64) - 1, 0, n - 1)
    end = np.clip(np.floor((hi - bounds.min) / res).astype(np.int64), 0, n - 1)
    outside = np.any(hi < bounds.min, axis=1) | np.any(lo > bounds.max, axis=1)
    return start, end, outside


def drm_preprocess(roadmap, robot, bounds, resolution=DEFAULT_RESOLUTION, chunk=512):
    """Map every grid cell to the components whose posed triangles touch it."""
    resolution = check_positive(resolution, "resolution")
    shape = _grid_shape(bounds, resolution)
    cfgs, owner = all_component_cfgs(roadmap)
    pairs = []
    for s in range(0, len(cfgs), chunk):
        c, own = cfgs[s : s + chunk], owner[s : s + chunk]
        rot, trans = fk_batch(robot, c)
        for b, body in enumerate(robot.bodies):
            tris = np.einsum("nij,tvj->ntvi", rot[:, b], body.tri_points) + trans[:, b, None, None, :]
            tri_owner = np.repeat(own, len(body.triangles))
            tris = tris.reshape(-1, 3, 3)
            pairs.append(_voxelize(tris, tri_owner, bounds, resolution, shape))
    pairs = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
    pairs = np.unique(pairs, axis=0) if len(pairs) else pairs
    n_cells = int(np.prod(shape))
    counts = np.bincount(pairs[:, 0], minlength=n_cells) if len(pairs) else np.zeros(n_cells, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return DrmIndex(bounds, resolution, shape, offsets, pairs[:, 1].copy(), roadmap.n_nodes, roadmap.n_components)


def _voxelize(tris, tri_owner, bounds, res, shape):
    """Unique ``(flat_cell, component)`` pairs for triangles overlapping closed cells."""
    start, end, outside = _candidate_cells(tris.min(axis=1), tris.max(axis=1), bounds, res, shape)
    keep = ~outside
    tris, tri_owner, start, end = tris[keep], tri_owner[keep], start[keep], end[keep]
    span = end - start + 1
    per_tri = span.prod(axis=1)
    tri_idx = np.repeat(np.arange(len(tris)), per_tri)
    local = np.arange(per_tri.sum()) - np.repeat(np.cumsum(per_tri) - per_tri, per_tri)
    sy, sz = span[tri_idx, 1], span[tri_idx, 2]
    ijk = start[tri_idx] + np.stack([local // (sy * sz), (local // sz) % sy, local % sz], axis=1)
    lo = bounds.min + ijk * res
    hi = np.minimum(lo + res, bounds.max)
    hit = tris_overlap_boxes(tris[tri_idx], lo, hi)
    ijk = ijk[hit]
    flat = (ijk[:, 0] * shape[1] + ijk[:, 1]) * shape[2] + ijk[:, 2]
    out = np.stack([flat, tri_owner[tri_idx[hit]]], axis=1)
    return np.unique(out, axis=0) if len(out) else out.reshape(0, 2)


def drm_update(index, obstacles, generation=0):
    """Label components GRAY when mapped from a cell meeting any posed obstacle's AABB, else GREEN.

    ``obstacles`` holds :class:`Obstacle` instances (mesh plus pose) or ready-made :class:`AABB` boxes.
    """
    t0 = time.perf_counter()
    gray = np.zeros(index.n_components, dtype=bool)
    for obs in obstacles:
        box = obs if isinstance(obs, AABB) else aabb_of(obs.pose.apply(obs.mesh.vertices))
        rng = index.cell_range(box.min, box.max)
        if rng is None:
            continue
        (i0, j0, k0), (i1, j1, k1) = rng
        ii, jj, kk = np.meshgrid(
            np.arange(i0, i1 + 1), np.arange(j0, j1 + 1), np.arange(k0, k1 + 1), indexing="ij"
        )
        cells = ((ii * index.shape[1] + jj) * index.shape[2] + kk).ravel()
        starts, ends = index.cell_offsets[cells], index.cell_offsets[cells + 1]
        counts = ends - starts
        idx = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts) + np.repeat(starts, counts)
        gray[index.cell_components[idx]] = True
    labels = np.where(gray, Label.GRAY, Label.GREEN).astype(np.int8)
    return LabelMap(labels, index.n_nodes, generation, timings={"update_ms": 1e3 * (time.perf_counter() - t0)})


class DRMLabeler(BaseEstimator):
    """Estimator-style front end for the grid baseline.

    Parameters
    ----------
    resolution : float
        Side length of the cubic cells.
    """

    def __init__(self, resolution=DEFAULT_RESOLUTION):
        self.resolution = resolution

    def fit(self, roadmap, robot, bounds, obstacles=()):
        self.index_ = drm_preprocess(roadmap, robot, bounds, self.resolution)
        self.obstacles_ = [o if isinstance(o, Obstacle) else Obstacle(*o) for o in obstacles]
        self.generation_ = 0
        return self

    def predict(self, obstacle_poses):
        check_is_fitted(self, "index_")
        obstacle_poses = list(obstacle_poses)
        if len(obstacle_poses) != len(self.obstacles_):
            raise ValueError(f"expected {len(self.obstacles_)} obstacle poses, got {len(obstacle_poses)}")
        self.generation_ += 1
        posed = [Obstacle(o.mesh, p) for o, p in zip(self.obstacles_, obstacle_poses)]
        return drm_update(self.index_, posed, generation=self.generation_)
