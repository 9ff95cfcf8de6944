"""Outer (OBB) and inner (sphere / spline) approximations of swept volumes and obstacles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_int, check_points, check_positive
from .geometry import AABB, Pose, Sphere, aabb_of, obb_fit, point_in_mesh, points_in_mesh, ray_exit_point
from .geometry.mesh import nearest_boundary_point, nearest_boundary_triangle
from .geometry.primitives import _dist_points_segments
from .kinematics import fk_batch

DEFAULT_DELTA = 0.1
ROBOT_SPHERES = 3
OBSTACLE_SPHERES = 6


@dataclass(frozen=True)
class SphereGenParams:
    n_samples: int = 32
    k_spheres: int = ROBOT_SPHERES
    push_steps: int = 4
    mc_points: int = 4096
    seed: int = 0

    def __post_init__(self):
        check_int(self.k_spheres, "k_spheres", 1)
        check_int(self.n_samples, "n_samples", self.k_spheres)
        check_int(self.push_steps, "push_steps", 0)
        check_int(self.mc_points, "mc_points", 1)


@dataclass(frozen=True, eq=False)
class Spline:
    """Shortcut polyline through one sphere's swept centers.

    ``indices`` point into the full list of swept centers, which is what the
    goodness property is checked against.
    """

    points: np.ndarray
    radius: float
    component: int = -1
    body: int = 0
    sphere: int = 0
    indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        pts = check_points(self.points, "points")
        if not self.radius > 0:
            raise ValueError("spline radius must be positive")
        object.__setattr__(self, "points", pts)

    @property
    def source(self):
        return (self.component, self.body, self.sphere)


@dataclass(frozen=True, eq=False)
class ComponentApprox:
    outer: list
    inner: list


@dataclass(frozen=True, eq=False)
class Obstacle:
    mesh: object
    pose: Pose = field(default_factory=Pose)

    def posed_mesh(self):
        return self.mesh.transformed(self.pose)


@dataclass(frozen=True, eq=False)
class ObstacleApprox:
    """Obstacle bounded by the AABB of its posed mesh and filled by rigid inner spheres."""

    mesh: object
    inner: list
    current_pose: Pose
    outer: AABB

    def posed(self, pose):
        """Same spheres, new pose: only the outer box and sphere centers change."""
        return ObstacleApprox(self.mesh, self.inner, pose, aabb_of(pose.apply(self.mesh.vertices)))

    def posed_spheres(self):
        return [s.transformed(self.current_pose) for s in self.inner]

    def posed_centers(self):
        if not self.inner:
            return np.zeros((0, 3))
        return self.current_pose.apply(np.array([s.center for s in self.inner]))

    @property
    def radii(self):
        return np.array([s.radius for s in self.inner])


def _random_interior_point(mesh, rng, max_batches=1000):
    lo, hi = mesh.aabb.min, mesh.aabb.max
    for _ in range(max_batches):
        cand = rng.uniform(lo, hi, size=(64, 3))
        inside = np.flatnonzero(points_in_mesh(cand, mesh))
        if len(inside):
            return cand[inside[0]]
    raise ValueError("could not sample an interior point")


def _push_to_medial_axis(p, mesh, steps, rng):
    extent = float(np.linalg.norm(mesh.aabb.max - mesh.aabb.min))
    for _ in range(steps):
        c, _, tri = nearest_boundary_triangle(p, mesh)
        direction = p - c
        if np.linalg.norm(direction) <= 1e-12 * extent:
            direction = -mesh.outward_normals[tri]
        opp = None
        for _attempt in range(8):
            try:
                opp = ray_exit_point(c, direction, mesh)
                break
            except ValueError:
                direction = direction + 1e-6 * extent * rng.standard_normal(3)
        if opp is None:
            break
        q = 0.5 * (c + opp)
        if not point_in_mesh(q, mesh):
            # non-convex pocket: the midpoint left the body, keep the last interior point
            break
        p = q
    return p


def generate_spheres(P, params=SphereGenParams()):
    """``k_spheres`` spheres inside the closed mesh ``P``.

    Each of ``n_samples`` random interior points is pushed ``push_steps`` times
    to the midpoint between its nearest boundary point and the opposite
    boundary point, then grown until it touches the boundary. A greedy
    large-union selection keeps ``k_spheres`` of them.
    """
    if P.volume <= 1e-12:
        raise ValueError("mesh encloses zero volume")
    rng = np.random.default_rng(params.seed)
    candidates = []
    for _ in range(params.n_samples):
        p = _random_interior_point(P, rng)
        p = _push_to_medial_axis(p, P, params.push_steps, rng)
        _, r = nearest_boundary_point(p, P)
        candidates.append(Sphere(p, r))
    candidates = [s for s in candidates if s.radius > 1e-9]
    if len(candidates) < params.k_spheres:
        raise ValueError("thin geometry")
    return large_union_k(candidates, params.k_spheres, params.mc_points, params.seed)


def _mc_membership(candidates, mc_points, seed):
    centers = np.array([s.center for s in candidates])
    radii = np.array([s.radius for s in candidates])
    lo = (centers - radii[:, None]).min(axis=0)
    hi = (centers + radii[:, None]).max(axis=0)
    samples = np.random.default_rng(seed).uniform(lo, hi, size=(mc_points, 3))
    d2 = ((samples[None, :, :] - centers[:, None, :]) ** 2).sum(axis=2)
    box_volume = float(np.prod(hi - lo))
    return d2 <= (radii**2)[:, None], box_volume


def union_volume_mc(candidates, subset, mc_points=4096, seed=0):
    """Monte-Carlo union volume of ``candidates[subset]`` on the sample set used by :func:`large_union_k`."""
    inside, box_volume = _mc_membership(candidates, mc_points, seed)
    covered = inside[list(subset)].any(axis=0)
    return box_volume * covered.mean()


def large_union_k(candidates, k, mc_points=4096, seed=0):
    """Greedy choice of ``k`` spheres with large union volume.

    Each round adds the candidate covering the most not-yet-covered Monte-Carlo
    samples; ties go to the lower index.
    """
    k = check_int(k, "k", 1)
    if len(candidates) < k:
        raise ValueError(f"need at least {k} candidates, got {len(candidates)}")
    if k == len(candidates):
        return list(candidates)
    inside, _ = _mc_membership(candidates, mc_points, seed)
    covered = np.zeros(inside.shape[1], dtype=bool)
    chosen = []
    for _ in range(k):
        gain = (inside & ~covered).sum(axis=1)
        gain[chosen] = -1
        best = int(np.argmax(gain))
        chosen.append(best)
        covered |= inside[best]
    return [candidates[i] for i in chosen]


def edge_point_cloud(robot, cfgs):
    """Per-body union of posed mesh vertices over the configurations."""
    cfgs = np.atleast_2d(np.asarray(cfgs, dtype=float))
    if len(cfgs) == 0:
        raise ValueError("need at least one configuration")
    rot, trans = fk_batch(robot, cfgs)
    clouds = []
    for b, body in enumerate(robot.bodies):
        v = np.einsum("nij,mj->nmi", rot[:, b], body.vertices) + trans[:, b, None, :]
        clouds.append(v.reshape(-1, 3))
    return clouds


def build_component_outer(robot, cfgs, delta=DEFAULT_DELTA):
    """One approximate minimum-volume OBB per body over the swept vertices."""
    delta = check_positive(delta, "delta")
    return [obb_fit(cloud, delta) for cloud in edge_point_cloud(robot, cfgs)]


def is_good_segment(centers, i, j, r):
    """Every center strictly between ``i`` and ``j`` lies closer than ``r`` to segment ``c_i c_j``."""
    if j - i < 2:
        return True
    inner = centers[i + 1 : j]
    d = _dist_points_segments(inner, centers[i][None, :], centers[j][None, :])
    return bool(d.max() < r)


def good_bad_pt(centers, i, lo, hi, r):
    """Index ``l`` in ``[lo, hi)`` with ``c_i c_l`` good and ``c_i c_{l+1}`` bad (binary search)."""
    centers = np.asarray(centers, dtype=float)
    if not lo < hi:
        raise ValueError("good_bad_pt needs lo < hi")
    if not is_good_segment(centers, i, lo, r) or is_good_segment(centers, i, hi, r):
        raise ValueError("good_bad_pt precondition violated: goodness is not monotone on this range")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if is_good_segment(centers, i, mid, r):
            lo = mid
        else:
            hi = mid
    return lo


def shortcut_indices(centers, r):
    """Indices kept by doubling search plus binary search for the farthest good shortcut."""
    centers = check_points(centers, "centers")
    r = check_positive(r, "r", strict=False)
    n = len(centers)
    kept = [0]
    i = 0
    while i < n - 1:
        j = 0
        while True:
            k = min(i + 2**j, n - 1)
            if not is_good_segment(centers, i, k, r):
                i = good_bad_pt(centers, i, i + 2 ** (j - 1), k, r)
                break
            if k == n - 1:
                i = k
                break
            j += 1
        kept.append(i)
    return np.array(kept, dtype=np.int64)


def shortcut_spline(centers, r):
    """Subsequence of ``centers`` whose segments keep every skipped center within ``r``."""
    centers = check_points(centers, "centers")
    return centers[shortcut_indices(centers, r)]


def swept_centers(robot, cfgs, body, center):
    """World positions of a body-local point over the configurations."""
    rot, trans = fk_batch(robot, np.atleast_2d(cfgs))
    return rot[:, body] @ np.asarray(center, dtype=float) + trans[:, body]


def build_component_inner(robot, cfgs, body_spheres, component=-1):
    """One shortcut spline per (body, sphere) over the component's configurations."""
    cfgs = np.atleast_2d(np.asarray(cfgs, dtype=float))
    rot, trans = fk_batch(robot, cfgs)
    splines = []
    for b, spheres in enumerate(body_spheres):
        for s_idx, s in enumerate(spheres):
            centers = rot[:, b] @ s.center + trans[:, b]
            idx = shortcut_indices(centers, s.radius)
            splines.append(Spline(centers[idx], s.radius, component, b, s_idx, idx))
    return splines


def build_obstacle_approx(m, pose=None, params=None):
    """AABB of the posed mesh plus ``k_spheres`` inner spheres in the mesh frame."""
    pose = pose if pose is not None else Pose()
    params = params if params is not None else SphereGenParams(k_spheres=OBSTACLE_SPHERES)
    spheres = generate_spheres(m, params)
    return ObstacleApprox(m, spheres, pose, aabb_of(pose.apply(m.vertices)))
