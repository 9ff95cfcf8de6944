"""Basic geometric types and the simplest predicates built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial.transform import Rotation

from .._validation import check_points, check_positive, check_vec3

TOL = 1e-9


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform ``x -> rotation @ x + translation``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=float)
        if rot.shape != (3, 3) or not np.all(np.isfinite(rot)):
            raise ValueError("rotation must be a finite 3x3 matrix")
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-9) or abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise ValueError("rotation must be orthonormal with determinant +1")
        object.__setattr__(self, "rotation", _frozen(rot))
        object.__setattr__(self, "translation", _frozen(check_vec3(self.translation, "translation")))

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_quaternion(cls, quat, translation=(0.0, 0.0, 0.0)):
        """Quaternion in scalar-last ``(x, y, z, w)`` order."""
        q = np.asarray(quat, dtype=float)
        if q.shape != (4,) or not np.all(np.isfinite(q)) or np.linalg.norm(q) == 0:
            raise ValueError("quaternion must be 4 finite values, not all zero")
        return cls(_orthonormalize(Rotation.from_quat(q).as_matrix()), translation)

    @classmethod
    def from_euler_zyx(cls, angles, translation=(0.0, 0.0, 0.0)):
        """Intrinsic Z-Y-X angles in radians."""
        return cls(_orthonormalize(Rotation.from_euler("ZYX", angles).as_matrix()), translation)

    def apply(self, points):
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def compose(self, other):
        """Return ``self * other`` (apply ``other`` first)."""
        return Pose(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def inverse(self):
        rt = self.rotation.T
        return Pose(rt, -rt @ self.translation)

    def with_translation(self, translation):
        return Pose(self.rotation, translation)

    def as_quaternion(self):
        return Rotation.from_matrix(self.rotation).as_quat()


def _orthonormalize(rot):
    u, _, vt = np.linalg.svd(rot)
    out = u @ vt
    if np.linalg.det(out) < 0:
        u[:, -1] *= -1
        out = u @ vt
    return out


@dataclass(frozen=True, eq=False)
class AABB:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = check_vec3(self.min, "min")
        hi = check_vec3(self.max, "max")
        if np.any(lo > hi):
            raise ValueError("AABB min must be <= max componentwise")
        object.__setattr__(self, "min", _frozen(lo))
        object.__setattr__(self, "max", _frozen(hi))

    @property
    def center(self):
        return 0.5 * (self.min + self.max)

    @property
    def half_extents(self):
        return 0.5 * (self.max - self.min)

    @property
    def volume(self):
        return float(np.prod(self.max - self.min))

    def corners(self):
        lo, hi = self.min, self.max
        return np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])

    def overlaps(self, other):
        return bool(np.all(self.min <= other.max) and np.all(other.min <= self.max))

    def contains(self, points, tol=TOL):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((pts >= self.min - tol) & (pts <= self.max + tol), axis=1)

    def inflate(self, amount):
        return AABB(self.min - amount, self.max + amount)

    def to_obb(self):
        return OBB(self.center, np.eye(3), self.half_extents)


@dataclass(frozen=True, eq=False)
class OBB:
    """Oriented box. ``axes`` holds one unit axis per row."""

    center: np.ndarray
    axes: np.ndarray
    half_extents: np.ndarray

    def __post_init__(self):
        c = check_vec3(self.center, "center")
        ax = np.asarray(self.axes, dtype=float)
        if ax.shape != (3, 3) or not np.all(np.isfinite(ax)):
            raise ValueError("axes must be a finite 3x3 array")
        if np.max(np.abs(ax @ ax.T - np.eye(3))) > 1e-9:
            raise ValueError("OBB axes must be orthonormal")
        he = check_vec3(self.half_extents, "half_extents")
        if np.any(he < 0):
            raise ValueError("half_extents must be nonnegative")
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "axes", _frozen(ax))
        object.__setattr__(self, "half_extents", _frozen(he))

    @property
    def volume(self):
        return float(np.prod(2.0 * self.half_extents))

    def corners(self):
        signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
        return self.center + (signs * self.half_extents) @ self.axes

    def to_local(self, points):
        return (np.asarray(points, dtype=float) - self.center) @ self.axes.T

    def signed_excess(self, points):
        """Largest per-axis excess of each point beyond the box faces (<= 0 inside)."""
        local = np.abs(self.to_local(np.atleast_2d(points)))
        return np.max(local - self.half_extents, axis=1)

    def contains(self, points, tol=TOL):
        return self.signed_excess(points) <= tol

    def aabb(self):
        ext = np.abs(self.axes.T) @ self.half_extents
        return AABB(self.center - ext, self.center + ext)


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(check_vec3(self.center, "center")))
        object.__setattr__(self, "radius", check_positive(float(self.radius), "radius", strict=False))

    def aabb(self):
        return AABB(self.center - self.radius, self.center + self.radius)

    def transformed(self, pose):
        return Sphere(pose.apply(self.center), self.radius)


@dataclass(frozen=True, eq=False)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen(check_vec3(self.a, "a")))
        object.__setattr__(self, "b", _frozen(check_vec3(self.b, "b")))


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Closed, watertight triangle mesh."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        verts = check_points(self.vertices, "vertices")
        tris = np.asarray(self.triangles)
        if tris.ndim != 2 or tris.shape[1] != 3 or len(tris) == 0:
            raise ValueError("triangles must have shape (m, 3) with m >= 1")
        if not np.issubdtype(tris.dtype, np.integer):
            if not np.all(np.equal(np.mod(tris, 1), 0)):
                raise ValueError("triangle indices must be integers")
        tris = tris.astype(np.int64)
        if tris.min() < 0 or tris.max() >= len(verts):
            raise ValueError("triangle index out of range")
        edges = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        if np.any(counts != 2):
            raise ValueError("mesh is not watertight: every edge must be shared by exactly 2 triangles")
        object.__setattr__(self, "vertices", _frozen(verts))
        tris.setflags(write=False)
        object.__setattr__(self, "triangles", tris)
        if abs(self.signed_volume) <= 1e-12:
            raise ValueError("mesh encloses zero volume")

    @cached_property
    def tri_points(self):
        """Triangle corner coordinates, shape (m, 3, 3)."""
        pts = self.vertices[self.triangles]
        pts.setflags(write=False)
        return pts

    @cached_property
    def signed_volume(self):
        t = self.vertices[self.triangles]
        return float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)

    @property
    def volume(self):
        return abs(self.signed_volume)

    @cached_property
    def outward_normals(self):
        t = self.tri_points
        n = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        n = np.divide(n, norm, out=np.zeros_like(n), where=norm > 0)
        return n if self.signed_volume > 0 else -n

    @cached_property
    def aabb(self):
        return aabb_of(self.vertices)

    def transformed(self, pose):
        return TriMesh(pose.apply(self.vertices), self.triangles)


def aabb_of(points):
    pts = check_points(points)
    return AABB(pts.min(axis=0), pts.max(axis=0))


def dist_point_segment(p, s):
    p = check_vec3(p, "p")
    return float(_dist_points_segments(p[None, :], s.a[None, :], s.b[None, :])[0])


def _dist_points_segments(p, a, b):
    """Row-wise distance from ``p[i]`` to segment ``a[i] b[i]`` (broadcasting)."""
    ab = b - a
    denom = np.einsum("...j,...j->...", ab, ab)
    t = np.einsum("...j,...j->...", p - a, ab)
    t = np.divide(t, denom, out=np.zeros_like(t), where=denom > 0)
    t = np.clip(t, 0.0, 1.0)
    foot = a + t[..., None] * ab
    return np.linalg.norm(p - foot, axis=-1)


def polyline_distance(p, pts):
    """Distance from point ``p`` to the polyline through ``pts``."""
    pts = np.asarray(pts, dtype=float)
    if len(pts) == 1:
        return float(np.linalg.norm(pts[0] - p))
    return float(_dist_points_segments(p[None, :], pts[:-1], pts[1:]).min())


def sphere_intersects_polyline(sp, pts, slack=0.0):
    """True when the polyline comes within ``radius + slack`` of the sphere center."""
    pts = check_points(pts, "pts")
    return polyline_distance(sp.center, pts) <= sp.radius + slack


def box_intersects_sphere(lo, hi, center, radius):
    """Exact closed box/sphere overlap; vectorized over boxes."""
    d = np.maximum(lo - center, 0.0) + np.maximum(center - hi, 0.0)
    return np.einsum("...j,...j->...", d, d) <= radius * radius
