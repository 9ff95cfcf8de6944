"""Approximate minimum-volume oriented bounding boxes and box/box overlap."""

from __future__ import annotations

import numba
import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .._validation import check_points, check_positive
from .primitives import OBB

_INITIAL_STEP = 0.3
_NEXT = np.array([1, 2, 0])
_NEXT2 = np.array([2, 0, 1])


def _hull_vertices(pts):
    if len(pts) <= 4:
        return pts
    try:
        return pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        # flat or collinear cloud; every point may be extreme in the fitting plane
        return np.unique(pts, axis=0)


def _hull_2d(p):
    """Convex hull vertices of planar points in counter-clockwise order; collinear inputs give their extremes."""
    if len(p) >= 3:
        try:
            return p[ConvexHull(p).vertices]
        except (QhullError, ValueError):
            pass
    return _hull_2d_chain(p)


def _hull_2d_chain(p):
    """Andrew's monotone chain, used for degenerate inputs qhull rejects."""
    pts = sorted(set(map(tuple, p)))
    if len(pts) <= 2:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for q in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    for q in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    return np.array(lower[:-1] + upper[:-1])


def _cross(a, b):
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def _orthonormal_basis(d):
    d = d / np.sqrt(d @ d)
    helper = np.eye(3)[np.argmin(np.abs(d))]
    u = _cross(d, helper)
    u /= np.sqrt(u @ u)
    return d, u, _cross(d, u)


def _box_for_direction(pts, d):
    """Best box whose first axis is ``d``: minimum-area rectangle of the projection."""
    d, u, v = _orthonormal_basis(d)
    proj = np.column_stack([pts @ u, pts @ v])
    hull = _hull_2d(proj)
    if len(hull) == 1:
        dirs = np.array([[1.0, 0.0]])
    else:
        edges = np.roll(hull, -1, axis=0) - hull
        lengths = np.linalg.norm(edges, axis=1)
        edges = edges[lengths > 0]
        dirs = edges / np.linalg.norm(edges, axis=1, keepdims=True)
    normals = np.column_stack([-dirs[:, 1], dirs[:, 0]])
    a = hull @ dirs.T
    b = hull @ normals.T
    areas = (a.max(axis=0) - a.min(axis=0)) * (b.max(axis=0) - b.min(axis=0))
    k = int(np.argmin(areas))
    e1 = dirs[k, 0] * u + dirs[k, 1] * v
    e2 = normals[k, 0] * u + normals[k, 1] * v
    axes = np.array([d, e1, e2])
    return axes, _box_volume(pts, axes)


def _box_volume(pts, axes):
    local = pts @ axes.T
    return float(np.prod(local.max(axis=0) - local.min(axis=0)))


def _approx_diameter_direction(pts):
    a = pts[0]
    b = a
    for _ in range(3):
        b = pts[np.argmax(np.linalg.norm(pts - a, axis=1))]
        a, b = b, a
    d = a - b
    return d if np.any(d) else np.array([1.0, 0.0, 0.0])


def _box_from_axes(pts, axes):
    axes = _reorthonormalize(axes)
    local = pts @ axes.T
    lo, hi = local.min(axis=0), local.max(axis=0)
    center = 0.5 * (lo + hi) @ axes
    return OBB(center, axes, 0.5 * (hi - lo))


def _reorthonormalize(axes):
    q, r = np.linalg.qr(axes.T)
    q = q * np.sign(np.diag(r))
    return q.T


def obb_fit(points, delta=0.1):
    """Approximate minimum-volume OBB of a point cloud.

    Candidate primary directions (the diameter estimate, the principal axes
    and the coordinate axes) are each completed by the minimum-area rectangle
    of the projected hull; the best one is then refined by a shrinking grid of
    perturbations of its primary axis, down to an angular step of ``delta / 4``.
    The identity orientation is always a candidate, so the result is never
    larger than the axis-aligned box.
    """
    pts = check_points(points)
    delta = check_positive(delta, "delta")
    hull = _hull_vertices(pts)
    centered = hull - hull.mean(axis=0)

    best_axes, best_vol = np.eye(3), _box_volume(hull, np.eye(3))
    if best_vol == 0.0 or len(hull) == 1:
        return _box_from_axes(pts, best_axes)

    directions = [_approx_diameter_direction(hull), *np.eye(3)]
    if len(hull) >= 3:
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        directions.extend(vt)
    for d in directions:
        axes, vol = _box_for_direction(hull, d)
        if vol < best_vol:
            best_axes, best_vol = axes, vol

    # every axis of the incumbent may serve as the primary direction
    for d in best_axes.copy():
        axes, vol = _box_for_direction(hull, d)
        if vol < best_vol:
            best_axes, best_vol = axes, vol

    step = _INITIAL_STEP
    while step >= 0.25 * delta:
        improved = False
        for primary in best_axes.copy():
            d, u, v = _orthonormal_basis(primary)
            for su, sv in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)):
                cand = d + step * (su * u + sv * v)
                axes, vol = _box_for_direction(hull, cand)
                if vol < best_vol * (1.0 - 1e-12):
                    best_axes, best_vol = axes, vol
                    improved = True
        if not improved:
            step *= 0.5
    box = _box_from_axes(pts, best_axes)
    aabb_vol = _box_volume(pts, np.eye(3))
    if box.volume > aabb_vol:
        return _box_from_axes(pts, np.eye(3))
    return box


def boxes_intersect(c1, ax1, h1, c2, ax2, h2, eps=1e-12):
    """Separating-axis test (15 axes) between stacked oriented boxes.

    ``ax*`` hold axes as rows, shape (n, 3, 3); all inputs broadcast. Closed
    boxes: touching counts as overlap.
    """
    c1, ax1, h1, c2, ax2, h2 = (np.asarray(x, dtype=float) for x in (c1, ax1, h1, c2, ax2, h2))
    # rotation of box 2 expressed in box 1's frame: r[i, j] = ax1_i . ax2_j
    r = np.einsum("...ik,...jk->...ij", ax1, ax2)
    t = np.einsum("...ik,...k->...i", ax1, c2 - c1)
    abs_r = np.abs(r) + eps
    sep = np.any(np.abs(t) > h1 + np.einsum("...ij,...j->...i", abs_r, h2), axis=-1)
    t2 = np.einsum("...ij,...i->...j", r, t)
    sep |= np.any(np.abs(t2) > np.einsum("...ij,...i->...j", abs_r, h1) + h2, axis=-1)
    # the nine edge/edge axes a_i x b_j, all at once
    n1, n2 = _NEXT, _NEXT2
    lhs = np.abs(t[..., n2, None] * r[..., n1, :] - t[..., n1, None] * r[..., n2, :])
    rhs = (
        h1[..., n1, None] * abs_r[..., n2, :]
        + h1[..., n2, None] * abs_r[..., n1, :]
        + h2[..., None, n1] * abs_r[..., :, n2]
        + h2[..., None, n2] * abs_r[..., :, n1]
    )
    sep |= np.any(lhs > rhs, axis=(-2, -1))
    return ~sep


def obb_intersects_aabb(o, a):
    """True iff the oriented box and the axis-aligned box share a point."""
    return bool(boxes_intersect(a.center, np.eye(3), a.half_extents, o.center, o.axes, o.half_extents))


@numba.njit(cache=True)
def _obbs_vs_aabb(centers, axes, half, box_center, box_half, eps):
    out = np.empty(len(centers), dtype=np.bool_)
    r = np.empty((3, 3))
    ar = np.empty((3, 3))
    t = np.empty(3)
    for n in range(len(centers)):
        # frame of the axis-aligned box: r[i, j] = e_i . b_j
        for i in range(3):
            t[i] = centers[n, i] - box_center[i]
            for j in range(3):
                r[i, j] = axes[n, j, i]
                ar[i, j] = abs(r[i, j]) + eps
        h2 = half[n]
        sep = False
        for i in range(3):
            if abs(t[i]) > box_half[i] + ar[i, 0] * h2[0] + ar[i, 1] * h2[1] + ar[i, 2] * h2[2]:
                sep = True
                break
        if not sep:
            for j in range(3):
                tj = t[0] * r[0, j] + t[1] * r[1, j] + t[2] * r[2, j]
                if abs(tj) > box_half[0] * ar[0, j] + box_half[1] * ar[1, j] + box_half[2] * ar[2, j] + h2[j]:
                    sep = True
                    break
        if not sep:
            for i in range(3):
                i1, i2 = (i + 1) % 3, (i + 2) % 3
                for j in range(3):
                    j1, j2 = (j + 1) % 3, (j + 2) % 3
                    lhs = abs(t[i2] * r[i1, j] - t[i1] * r[i2, j])
                    rhs = box_half[i1] * ar[i2, j] + box_half[i2] * ar[i1, j] + h2[j1] * ar[i, j2] + h2[j2] * ar[i, j1]
                    if lhs > rhs:
                        sep = True
                        break
                if sep:
                    break
        out[n] = not sep
    return out


def obbs_intersect_aabb(centers, axes, half_extents, a, eps=1e-12):
    """Vectorized :func:`obb_intersects_aabb` over a stack of OBBs (compiled loop)."""
    centers = np.ascontiguousarray(centers, dtype=float).reshape(-1, 3)
    axes = np.ascontiguousarray(axes, dtype=float).reshape(-1, 3, 3)
    half = np.ascontiguousarray(half_extents, dtype=float).reshape(-1, 3)
    return _obbs_vs_aabb(centers, axes, half, a.center, a.half_extents, eps)
