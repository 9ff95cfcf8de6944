"""Triangle predicates: triangle/triangle, triangle/box, closest points, ray casts.

The batch functions take stacked inputs of shape ``(n, 3, 3)`` and are the
ones used on hot paths; the scalar wrappers exist for clarity and tests.
"""

from __future__ import annotations

import numpy as np

from .._validation import check_triangle, check_vec3

_CHUNK = 20000


def _normalize_axes(axes, degree, scale):
    """Normalize axes; those negligible for their polynomial degree in ``scale`` become zero."""
    norm = np.linalg.norm(axes, axis=-1, keepdims=True)
    ok = norm > 1e-12 * scale[:, None, None] ** degree
    return np.where(ok, axes / np.where(ok, norm, 1.0), 0.0)


def _tri_tri_chunk(a, b):
    ea = np.stack([a[:, 1] - a[:, 0], a[:, 2] - a[:, 1], a[:, 0] - a[:, 2]], axis=1)
    eb = np.stack([b[:, 1] - b[:, 0], b[:, 2] - b[:, 1], b[:, 0] - b[:, 2]], axis=1)
    na = np.cross(ea[:, 0], ea[:, 1])[:, None, :]
    nb = np.cross(eb[:, 0], eb[:, 1])[:, None, :]
    cross_ee = np.cross(ea[:, :, None, :], eb[:, None, :, :]).reshape(-1, 9, 3)
    scale = np.maximum(np.abs(ea).max(axis=(1, 2)), np.abs(eb).max(axis=(1, 2)))
    scale = np.maximum(scale, 1e-300)
    axes = np.concatenate(
        [
            _normalize_axes(np.concatenate([na, nb, cross_ee], axis=1), 2, scale),
            _normalize_axes(
                np.concatenate([np.cross(na, ea), np.cross(nb, eb), np.cross(na, eb), np.cross(nb, ea)], axis=1),
                3,
                scale,
            ),
            _normalize_axes((b.mean(axis=1) - a.mean(axis=1))[:, None, :], 1, scale),
        ],
        axis=1,
    )
    pa = np.einsum("nvk,nak->nav", a, axes)
    pb = np.einsum("nvk,nak->nav", b, axes)
    sep = (pa.max(axis=2) < pb.min(axis=2)) | (pb.max(axis=2) < pa.min(axis=2))
    return ~sep.any(axis=1)


def tri_pairs_intersect(a, b):
    """Closed triangle/triangle overlap for stacked pairs ``a[i]``, ``b[i]``.

    Separating-axis test over face normals, edge/edge cross products and the
    in-plane edge normals of both triangles, which also covers coplanar pairs.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 3, 3)
    b = np.asarray(b, dtype=float).reshape(-1, 3, 3)
    out = np.empty(len(a), dtype=bool)
    for s in range(0, len(a), _CHUNK):
        out[s : s + _CHUNK] = _tri_tri_chunk(a[s : s + _CHUNK], b[s : s + _CHUNK])
    return out


def _is_degenerate(t):
    n = np.cross(t[1] - t[0], t[2] - t[0])
    scale = max(np.abs(t - t[0]).max(), 1e-300)
    return np.linalg.norm(n) <= 1e-12 * scale * scale


def _longest_edge(t):
    pairs = [(0, 1), (1, 2), (2, 0)]
    i, j = max(pairs, key=lambda ij: np.linalg.norm(t[ij[0]] - t[ij[1]]))
    return t[i], t[j]


def segment_segment_distance(p1, q1, p2, q2):
    """Distance between closed segments ``p1 q1`` and ``p2 q2``."""
    d1, d2, r = q1 - p1, q2 - p2, p1 - p2
    a, e, f = d1 @ d1, d2 @ d2, d2 @ r
    if a <= 1e-300 and e <= 1e-300:
        return float(np.linalg.norm(r))
    if a <= 1e-300:
        s, t = 0.0, np.clip(f / e, 0.0, 1.0)
    else:
        c = d1 @ r
        if e <= 1e-300:
            s, t = np.clip(-c / a, 0.0, 1.0), 0.0
        else:
            b = d1 @ d2
            denom = a * e - b * b
            s = np.clip((b * f - c * e) / denom, 0.0, 1.0) if denom > 1e-300 else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t, s = 0.0, np.clip(-c / a, 0.0, 1.0)
            elif t > 1.0:
                t, s = 1.0, np.clip((b - c) / a, 0.0, 1.0)
    return float(np.linalg.norm((p1 + d1 * s) - (p2 + d2 * t)))


def tri_intersects_tri(t1, t2):
    """True iff the two closed triangles share a point."""
    t1 = check_triangle(t1, "t1")
    t2 = check_triangle(t2, "t2")
    if _is_degenerate(t1) and _is_degenerate(t2):
        return segment_segment_distance(*_longest_edge(t1), *_longest_edge(t2)) <= 1e-12
    return bool(tri_pairs_intersect(t1[None], t2[None])[0])


def tris_overlap_boxes(tris, lo, hi):
    """Closed triangle/AABB overlap, vectorized; 13-axis separating-axis test."""
    tris = np.asarray(tris, dtype=float).reshape(-1, 3, 3)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (len(tris), 3))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (len(tris), 3))
    out = np.empty(len(tris), dtype=bool)
    for s in range(0, len(tris), _CHUNK):
        out[s : s + _CHUNK] = _tri_box_chunk(tris[s : s + _CHUNK], lo[s : s + _CHUNK], hi[s : s + _CHUNK])
    return out


def _tri_box_chunk(tris, lo, hi):
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    v = tris - c[:, None, :]
    # box face normals
    sep = np.any((v.min(axis=1) > h) | (v.max(axis=1) < -h), axis=1)
    e = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 1], v[:, 0] - v[:, 2]], axis=1)
    n = np.cross(e[:, 0], e[:, 1])[:, None, :]
    # cross(unit_k, e_j) for k = x, y, z
    zeros = np.zeros_like(e[..., 0])
    ax_x = np.stack([zeros, -e[..., 2], e[..., 1]], axis=-1)
    ax_y = np.stack([e[..., 2], zeros, -e[..., 0]], axis=-1)
    ax_z = np.stack([-e[..., 1], e[..., 0], zeros], axis=-1)
    scale = np.maximum(np.abs(e).max(axis=(1, 2)), 1e-300)
    axes = np.concatenate(
        [_normalize_axes(n, 2, scale), _normalize_axes(np.concatenate([ax_x, ax_y, ax_z], axis=1), 1, scale)],
        axis=1,
    )
    p = np.einsum("nvk,nak->nav", v, axes)
    r = np.einsum("nak,nk->na", np.abs(axes), h)
    sep |= np.any((p.min(axis=2) > r) | (p.max(axis=2) < -r), axis=1)
    return ~sep


def tri_overlaps_aabb(t, a):
    """True iff the closed triangle and the closed box intersect."""
    t = check_triangle(t)
    return bool(tris_overlap_boxes(t[None], a.min[None], a.max[None])[0])


def closest_point_on_triangle(p, a, b, c):
    """Closest point to ``p`` on triangle ``abc`` (region classification, scalar)."""
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = ab @ ap, ac @ ap
    if d1 <= 0 and d2 <= 0:
        return a.copy()
    bp = p - b
    d3, d4 = ab @ bp, ac @ bp
    if d3 >= 0 and d4 <= d3:
        return b.copy()
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        return a + ab * (d1 / (d1 - d3))
    cp = p - c
    d5, d6 = ab @ cp, ac @ cp
    if d6 >= 0 and d5 <= d6:
        return c.copy()
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        return a + ac * (d2 / (d2 - d6))
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)))
    denom = 1.0 / (va + vb + vc)
    return a + ab * (vb * denom) + ac * (vc * denom)


def closest_points_on_triangles(p, tris):
    """Vectorized form of :func:`closest_point_on_triangle`.

    ``p`` broadcasts against ``tris[:, 0]``; returns shape (n, 3).
    """
    tris = np.asarray(tris, dtype=float)
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    p = np.broadcast_to(np.asarray(p, dtype=float), a.shape)
    ab, ac, ap = b - a, c - a, p - a
    dot = lambda u, v: np.einsum("ij,ij->i", u, v)  # noqa: E731
    d1, d2 = dot(ab, ap), dot(ac, ap)
    bp = p - b
    d3, d4 = dot(ab, bp), dot(ac, bp)
    cp = p - c
    d5, d6 = dot(ab, cp), dot(ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    with np.errstate(divide="ignore", invalid="ignore"):
        denom = va + vb + vc
        out = a + ab * (vb / denom)[:, None] + ac * (vc / denom)[:, None]
        # later assignments take lower precedence, so go from the last branch to the first
        m = (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0)
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        out = np.where(m[:, None], b + (c - b) * w[:, None], out)
        m = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        out = np.where(m[:, None], a + ac * (d2 / (d2 - d6))[:, None], out)
        m = (d6 >= 0) & (d5 <= d6)
        out = np.where(m[:, None], c, out)
        m = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        out = np.where(m[:, None], a + ab * (d1 / (d1 - d3))[:, None], out)
        m = (d3 >= 0) & (d4 <= d3)
        out = np.where(m[:, None], b, out)
        m = (d1 <= 0) & (d2 <= 0)
        out = np.where(m[:, None], a, out)
    return out


def ray_triangles(origin, direction, tris):
    """Moller-Trumbore against every triangle.

    Returns ``(t, u, v, det)``; ``t`` is ``nan`` where the ray's line misses
    the closed triangle or is parallel to it.
    """
    origin = check_vec3(origin, "origin")
    direction = check_vec3(direction, "direction")
    tris = np.asarray(tris, dtype=float)
    v0 = tris[:, 0]
    e1 = tris[:, 1] - v0
    e2 = tris[:, 2] - v0
    pvec = np.cross(direction, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    scale = np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1) * np.linalg.norm(direction)
    parallel = np.abs(det) <= 1e-14 * np.maximum(scale, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(parallel, 0.0, 1.0 / det)
        tvec = origin - v0
        u = np.einsum("ij,ij->i", tvec, pvec) * inv
        qvec = np.cross(tvec, e1)
        v = (qvec @ direction) * inv
        t = np.einsum("ij,ij->i", e2, qvec) * inv
    hit = ~parallel & (u >= 0) & (v >= 0) & (u + v <= 1)
    return np.where(hit, t, np.nan), u, v, det
