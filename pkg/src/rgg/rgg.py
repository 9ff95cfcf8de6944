"""Red-Green-Gray roadmap update.

A component is RED when an inner sphere of some obstacle touches one of its
inner splines, GREEN when none of its per-body OBBs meets any obstacle's
AABB, and GRAY otherwise.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numba
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive
from .approximation import (
    DEFAULT_DELTA,
    OBSTACLE_SPHERES,
    ROBOT_SPHERES,
    Obstacle,
    SphereGenParams,
    build_component_inner,
    build_component_outer,
    build_obstacle_approx,
    generate_spheres,
)
from .broadphase import AabbTree
from .geometry import Pose
from .geometry.obb import obbs_intersect_aabb
from .roadmap import Label, LabelMap, Witness, component_cfgs


@dataclass(eq=False)
class RggIndex:
    """Preprocessed approximations of every roadmap component, indexed in two AABB trees."""

    n_nodes: int
    n_components: int
    n_bodies: int
    obb_centers: np.ndarray  # (C, k, 3)
    obb_axes: np.ndarray  # (C, k, 3, 3)
    obb_half: np.ndarray  # (C, k, 3)
    splines: list
    spline_component: np.ndarray
    spline_radius: np.ndarray
    seg_a: np.ndarray
    seg_b: np.ndarray
    seg_offsets: np.ndarray
    outer_tree: AabbTree
    inner_tree: AabbTree
    obstacles: list
    body_spheres: list
    slack: float = 0.0
    params: dict = field(default_factory=dict)

    @property
    def n_obstacles(self):
        return len(self.obstacles)


def _segments_of(splines):
    seg_a, seg_b, offsets = [], [], [0]
    for s in splines:
        p = s.points
        if len(p) == 1:
            a, b = p, p
        else:
            a, b = p[:-1], p[1:]
        seg_a.append(a)
        seg_b.append(b)
        offsets.append(offsets[-1] + len(a))
    if not splines:
        return np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(1, dtype=np.int64)
    return np.concatenate(seg_a), np.concatenate(seg_b), np.array(offsets, dtype=np.int64)


def rgg_preprocess(
    roadmap,
    robot,
    obstacles,
    delta=DEFAULT_DELTA,
    sphere_params=None,
    obstacle_sphere_params=None,
    slack=0.0,
):
    """Build per-component OBBs and splines, the two trees, and obstacle approximations.

    ``obstacles`` is a list of :class:`Obstacle`; ``sphere_params`` configures
    the robot-body spheres (their seed is offset by the body index).
    """
    delta = check_positive(delta, "delta")
    sphere_params = sphere_params or SphereGenParams(k_spheres=ROBOT_SPHERES)
    obstacle_sphere_params = obstacle_sphere_params or SphereGenParams(k_spheres=OBSTACLE_SPHERES)
    body_spheres = [
        generate_spheres(body, _with_seed(sphere_params, sphere_params.seed + b)) for b, body in enumerate(robot.bodies)
    ]
    obstacle_approx = [
        build_obstacle_approx(o.mesh, o.pose, _with_seed(obstacle_sphere_params, obstacle_sphere_params.seed + i))
        for i, o in enumerate(obstacles)
    ]

    C, k = roadmap.n_components, len(robot.bodies)
    centers = np.zeros((C, k, 3))
    axes = np.zeros((C, k, 3, 3))
    half = np.zeros((C, k, 3))
    splines = []
    for flat, cid in enumerate(roadmap.component_ids()):
        cfgs = component_cfgs(roadmap, cid)
        for b, box in enumerate(build_component_outer(robot, cfgs, delta)):
            centers[flat, b], axes[flat, b], half[flat, b] = box.center, box.axes, box.half_extents
        splines.extend(build_component_inner(robot, cfgs, body_spheres, component=flat))

    ext = np.abs(axes.transpose(0, 1, 3, 2)) @ half[..., None]
    ext = ext[..., 0]
    outer_tree = AabbTree(
        np.arange(C * k), (centers - ext).reshape(-1, 3), (centers + ext).reshape(-1, 3)
    )
    radius = np.array([s.radius for s in splines])
    lo = np.array([s.points.min(axis=0) for s in splines]).reshape(-1, 3) - radius[:, None]
    hi = np.array([s.points.max(axis=0) for s in splines]).reshape(-1, 3) + radius[:, None]
    inner_tree = AabbTree(np.arange(len(splines)), lo, hi)
    seg_a, seg_b, offsets = _segments_of(splines)
    return RggIndex(
        n_nodes=roadmap.n_nodes,
        n_components=C,
        n_bodies=k,
        obb_centers=centers,
        obb_axes=axes,
        obb_half=half,
        splines=splines,
        spline_component=np.array([s.component for s in splines], dtype=np.int64),
        spline_radius=radius,
        seg_a=seg_a,
        seg_b=seg_b,
        seg_offsets=offsets,
        outer_tree=outer_tree,
        inner_tree=inner_tree,
        obstacles=obstacle_approx,
        body_spheres=body_spheres,
        slack=float(slack),
        params={"delta": delta, "sphere_params": sphere_params, "obstacle_sphere_params": obstacle_sphere_params},
    )


def _with_seed(params, seed):
    return SphereGenParams(params.n_samples, params.k_spheres, params.push_steps, params.mc_points, seed)


@numba.njit(cache=True)
def _pair_min_dist(points, q, spl, seg_a, seg_b, offsets):
    """Distance from ``points[q[i]]`` to the polyline of spline ``spl[i]``."""
    out = np.empty(len(q))
    for i in range(len(q)):
        p = points[q[i]]
        best = np.inf
        for s in range(offsets[spl[i]], offsets[spl[i] + 1]):
            a, b = seg_a[s], seg_b[s]
            ab0, ab1, ab2 = b[0] - a[0], b[1] - a[1], b[2] - a[2]
            ap0, ap1, ap2 = p[0] - a[0], p[1] - a[1], p[2] - a[2]
            den = ab0 * ab0 + ab1 * ab1 + ab2 * ab2
            t = 0.0
            if den > 0.0:
                t = min(max((ap0 * ab0 + ap1 * ab1 + ap2 * ab2) / den, 0.0), 1.0)
            d0, d1, d2 = ap0 - t * ab0, ap1 - t * ab1, ap2 - t * ab2
            d = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
            if d < best:
                best = d
        out[i] = best
    return out


def _red_hits(index, posed, slack):
    """Touching (obstacle sphere, spline) pairs as column arrays.

    Columns: component, obstacle, sphere, spline, distance, threshold.
    """
    cols = [[] for _ in range(6)]
    for o, approx in enumerate(posed):
        centers, radii = approx.posed_centers(), approx.radii
        if len(centers) == 0:
            continue
        q, spl = index.inner_tree.query_spheres(centers, np.maximum(radii + slack, 0.0))
        if len(q) == 0:
            continue
        dmin = _pair_min_dist(centers, q, spl, index.seg_a, index.seg_b, index.seg_offsets)
        thresh = radii[q] + index.spline_radius[spl] + slack
        hit = dmin <= thresh
        for col, v in zip(cols, (index.spline_component[spl[hit]], np.full(hit.sum(), o), q[hit], spl[hit], dmin[hit], thresh[hit])):
            col.append(v)
    if not cols[0]:
        return [np.zeros(0, dtype=np.int64)] * 4 + [np.zeros(0)] * 2
    return [np.concatenate(c) for c in cols]


def _first_witnesses(cols):
    """Per red component, the lexicographically smallest (obstacle, sphere, spline) witness."""
    comp, obs, sph, spl, dist, thresh = cols
    if len(comp) == 0:
        return np.zeros(0, dtype=np.int64), {}
    order = np.lexsort((spl, sph, obs, comp))
    comp_sorted = comp[order]
    first = order[np.flatnonzero(np.r_[True, comp_sorted[1:] != comp_sorted[:-1]])]
    witnesses = {
        int(comp[i]): Witness(int(obs[i]), int(sph[i]), int(spl[i]), float(dist[i]), float(thresh[i])) for i in first
    }
    return comp[first], witnesses


def _gray_mask(index, posed, skip):
    """Components with some body OBB meeting some obstacle AABB; components in ``skip`` are not tested."""
    touched = np.zeros(index.n_components, dtype=bool)
    k = index.n_bodies
    for approx in posed:
        box = approx.outer
        _, items = index.outer_tree.query_boxes(box.min, box.max)
        items = items[~skip[items // k]]
        if len(items) == 0:
            continue
        comp, body = items // k, items % k
        hit = obbs_intersect_aabb(
            index.obb_centers[comp, body], index.obb_axes[comp, body], index.obb_half[comp, body], box
        )
        touched[comp[hit]] = True
    return touched


def rgg_update(index, obstacle_poses, generation=0, slack=None):
    """Label every component for the given obstacle poses.

    ``slack`` overrides the index's sphere/spline contact slack.
    """
    slack = index.slack if slack is None else float(slack)
    obstacle_poses = list(obstacle_poses)
    if len(obstacle_poses) != index.n_obstacles:
        raise ValueError(f"expected {index.n_obstacles} obstacle poses, got {len(obstacle_poses)}")
    for p in obstacle_poses:
        if not isinstance(p, Pose):
            raise TypeError("obstacle poses must be Pose instances")
    t0 = time.perf_counter()
    posed = [a.posed(p) for a, p in zip(index.obstacles, obstacle_poses)]
    t1 = time.perf_counter()
    red, witnesses = _first_witnesses(_red_hits(index, posed, slack))
    t2 = time.perf_counter()
    is_red = np.zeros(index.n_components, dtype=bool)
    is_red[red] = True
    gray = _gray_mask(index, posed, is_red)
    t3 = time.perf_counter()

    labels = np.where(gray, Label.GRAY, Label.GREEN).astype(np.int8)
    labels[red] = Label.RED
    timings = {"pose_ms": 1e3 * (t1 - t0), "red_ms": 1e3 * (t2 - t1), "outer_ms": 1e3 * (t3 - t2)}
    return LabelMap(labels, index.n_nodes, generation, witnesses, timings)


class RGGLabeler(BaseEstimator):
    """Estimator-style front end: ``fit`` preprocesses a roadmap, ``predict`` labels it.

    Parameters
    ----------
    delta : float
        OBB approximation parameter.
    robot_spheres, obstacle_spheres : int
        Inner spheres per robot body and per obstacle.
    n_samples, push_steps, mc_points : int
        Sphere generation settings (candidate count, medial-axis pushes,
        Monte-Carlo samples for the union-volume selection).
    slack : float
        Added to the sphere/spline contact threshold; negative values make the
        red test stricter.
    seed : int
        Seed for sphere generation.
    """

    def __init__(
        self,
        delta=DEFAULT_DELTA,
        robot_spheres=ROBOT_SPHERES,
        obstacle_spheres=OBSTACLE_SPHERES,
        n_samples=32,
        push_steps=4,
        mc_points=4096,
        slack=0.0,
        seed=0,
    ):
        self.delta = delta
        self.robot_spheres = robot_spheres
        self.obstacle_spheres = obstacle_spheres
        self.n_samples = n_samples
        self.push_steps = push_steps
        self.mc_points = mc_points
        self.slack = slack
        self.seed = seed

    def fit(self, roadmap, robot, obstacles):
        obstacles = [o if isinstance(o, Obstacle) else Obstacle(*o) for o in obstacles]
        self.index_ = rgg_preprocess(
            roadmap,
            robot,
            obstacles,
            delta=self.delta,
            sphere_params=SphereGenParams(self.n_samples, self.robot_spheres, self.push_steps, self.mc_points, self.seed),
            obstacle_sphere_params=SphereGenParams(
                self.n_samples, self.obstacle_spheres, self.push_steps, self.mc_points, self.seed + 1000
            ),
            slack=self.slack,
        )
        self.generation_ = 0
        return self

    def predict(self, obstacle_poses):
        check_is_fitted(self, "index_")
        self.generation_ += 1
        return rgg_update(self.index_, obstacle_poses, generation=self.generation_)
