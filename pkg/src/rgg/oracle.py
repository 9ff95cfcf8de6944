"""Exact ground truth: per-configuration mesh/mesh collision at resolution eps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .approximation import Obstacle
from .geometry import points_in_mesh, tri_pairs_intersect
from .kinematics import fk_batch
from .roadmap import all_component_cfgs


def default_jobs():
    try:
        return max(1, int(os.environ.get("RGG_THREADS", "1")))
    except ValueError:
        return 1


def _posed_obstacles(obstacles, poses=None):
    if poses is None:
        return [o.posed_mesh() for o in obstacles]
    poses = list(poses)
    if len(poses) != len(obstacles):
        raise ValueError(f"expected {len(obstacles)} obstacle poses, got {len(poses)}")
    return [o.mesh.transformed(p) for o, p in zip(obstacles, poses)]


def collide_configs(robot, configs, obstacle_meshes):
    """Collision verdict per configuration against already-posed obstacle meshes.

    Broad phase: body AABB against obstacle AABB, then each body triangle's
    AABB against the obstacle AABB and against the obstacle triangle's AABB.
    Narrow phase: exact triangle/triangle overlap. Containment of a body in an
    obstacle (or the reverse) is caught by testing one vertex of each in the
    other.
    """
    configs = np.atleast_2d(np.asarray(configs, dtype=float))
    out = np.zeros(len(configs), dtype=bool)
    if len(configs) == 0 or not obstacle_meshes:
        return out
    rot, trans = fk_batch(robot, configs)
    for b, body in enumerate(robot.bodies):
        verts = np.einsum("nij,mj->nmi", rot[:, b], body.vertices) + trans[:, b, None, :]
        b_lo, b_hi = verts.min(axis=1), verts.max(axis=1)
        for obs in obstacle_meshes:
            box = obs.aabb
            cand = np.flatnonzero(~out & np.all((b_lo <= box.max) & (box.min <= b_hi), axis=1))
            if len(cand) == 0:
                continue
            tris = verts[cand][:, body.triangles]  # (n, T, 3, 3)
            t_lo, t_hi = tris.min(axis=2), tris.max(axis=2)
            o_tris = obs.tri_points
            o_lo, o_hi = o_tris.min(axis=1), o_tris.max(axis=1)
            near = np.all((t_lo <= box.max) & (box.min <= t_hi), axis=2)
            ci, ti = np.nonzero(near)
            if len(ci):
                ov = np.all(
                    (t_lo[ci, ti][:, None, :] <= o_hi[None]) & (o_lo[None] <= t_hi[ci, ti][:, None, :]), axis=2
                )
                pi, oi = np.nonzero(ov)
                hit = tri_pairs_intersect(tris[ci[pi], ti[pi]], o_tris[oi])
                out[cand[np.unique(ci[pi[hit]])]] = True
            rest = cand[~out[cand]]
            if len(rest) == 0:
                continue
            # no surface contact: either disjoint or one solid strictly inside the other
            inside = points_in_mesh(verts[rest, 0], obs)
            local = np.einsum("nji,nj->ni", rot[rest, b], obs.vertices[0] - trans[rest, b])
            inside |= points_in_mesh(local, body)
            out[rest[inside]] = True
    return out


def collide_config(robot, c, obstacle_meshes):
    return bool(collide_configs(robot, np.asarray(c, dtype=float)[None, :], obstacle_meshes)[0])


@dataclass(eq=False)
class GroundTruth:
    invalid: np.ndarray
    n_nodes: int

    @property
    def n_components(self):
        return len(self.invalid)

    @property
    def n_invalid(self):
        return int(self.invalid.sum())

    @property
    def n_valid(self):
        return self.n_components - self.n_invalid

    def counts(self, kind=None):
        inv = self.invalid
        if kind == "node":
            inv = inv[: self.n_nodes]
        elif kind == "edge":
            inv = inv[self.n_nodes :]
        return {"valid": int((~inv).sum()), "invalid": int(inv.sum())}


def ground_truth(roadmap, robot, obstacle_meshes, n_jobs=None, chunk=2048):
    """Invalid iff any sampled configuration of the component collides."""
    cfgs, owner = all_component_cfgs(roadmap)
    n_jobs = default_jobs() if n_jobs is None else max(1, int(n_jobs))
    spans = [(s, min(s + chunk, len(cfgs))) for s in range(0, len(cfgs), chunk)]

    def work(span):
        return collide_configs(robot, cfgs[span[0] : span[1]], obstacle_meshes)

    if n_jobs > 1 and len(spans) > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            parts = list(pool.map(work, spans))
    else:
        parts = [work(s) for s in spans]
    hits = np.concatenate(parts) if parts else np.zeros(0, dtype=bool)
    invalid = np.zeros(roadmap.n_components, dtype=bool)
    invalid[owner[hits]] = True
    return GroundTruth(invalid, roadmap.n_nodes)


class ExactLabeler(BaseEstimator):
    """Ground-truth estimator; ``predict`` returns a :class:`GroundTruth`."""

    def __init__(self, n_jobs=None):
        self.n_jobs = n_jobs

    def fit(self, roadmap, robot, obstacles):
        self.roadmap_ = roadmap
        self.robot_ = robot
        self.obstacles_ = [o if isinstance(o, Obstacle) else Obstacle(*o) for o in obstacles]
        return self

    def predict(self, obstacle_poses):
        check_is_fitted(self, "roadmap_")
        meshes = _posed_obstacles(self.obstacles_, obstacle_poses)
        return ground_truth(self.roadmap_, self.robot_, meshes, n_jobs=self.n_jobs)
