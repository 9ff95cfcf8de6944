"""Mesh queries (containment, nearest boundary point, ray exit), OFF I/O and stock shapes."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .._validation import check_points, check_vec3
from .primitives import TriMesh
from .triangles import closest_points_on_triangles, ray_triangles

# Generic directions for parity rays; tried in order until no hit is degenerate.
_RAY_DIRECTIONS = np.array(
    [
        [0.5773502691896258, 0.5773502691896258, 0.5773502691896258],
        [0.2672612419124244, 0.5345224838248488, 0.8017837257372732],
        [-0.6337502141418018, 0.3169316254620489, 0.7055914046766245],
        [0.8164965809277260, -0.4082482904638631, 0.4082482904638631],
        [-0.1301889109808543, -0.9113223768659800, 0.3905667329425629],
        [0.4264014327112209, 0.8528028654224418, -0.3015113445777636],
    ]
)
_EDGE_TOL = 1e-9


def _parity_hits(points, direction, tris):
    """Crossing counts of rays ``points + t*direction`` (t > 0) and a degeneracy flag per point."""
    v0 = tris[:, 0]
    e1 = tris[:, 1] - v0
    e2 = tris[:, 2] - v0
    pvec = np.cross(direction, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    scale = np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
    parallel = np.abs(det) <= 1e-12 * scale
    inv = np.where(parallel, 0.0, 1.0 / np.where(parallel, 1.0, det))
    tvec = points[:, None, :] - v0[None, :, :]
    u = np.einsum("ptj,tj->pt", tvec, pvec) * inv
    qvec = np.cross(tvec, e1[None, :, :])
    v = (qvec @ direction) * inv
    t = np.einsum("tj,ptj->pt", e2, qvec) * inv
    inside = (u >= -_EDGE_TOL) & (v >= -_EDGE_TOL) & (u + v <= 1 + _EDGE_TOL) & ~parallel
    near_edge = inside & ((u <= _EDGE_TOL) | (v <= _EDGE_TOL) | (u + v >= 1 - _EDGE_TOL))
    length = np.sqrt(scale).max()
    on_surface = inside & (np.abs(t) <= 1e-12 * max(length, 1.0))
    crossing = inside & (t > 0)
    # a parallel triangle containing the ray origin's line is also ambiguous
    in_plane = parallel[None, :] & (np.abs(np.einsum("ptj,tj->pt", tvec, np.cross(e1, e2))) <= 1e-12 * scale)
    degenerate = np.any((near_edge & (t > 0)) | in_plane, axis=1)
    return crossing.sum(axis=1), degenerate, on_surface.any(axis=1)


def points_in_mesh(points, m):
    """Vectorized closed-set containment via ray-crossing parity.

    Points whose ray grazes an edge, vertex or coplanar face are re-cast along
    the next direction in a fixed list.
    """
    pts = check_points(points, allow_empty=True)
    result = np.zeros(len(pts), dtype=bool)
    pending = np.arange(len(pts))
    tris = m.tri_points
    for direction in _RAY_DIRECTIONS:
        if len(pending) == 0:
            break
        counts, degenerate, on_surface = _parity_hits(pts[pending], direction, tris)
        settled = ~degenerate | on_surface
        result[pending[settled]] = (counts[settled] % 2 == 1) | on_surface[settled]
        pending = pending[~settled]
    if len(pending):
        # every direction grazed: fall back to the winding number
        result[pending] = [abs(winding_number(p, m)) > 0.5 for p in pts[pending]]
    return result


def point_in_mesh(p, m):
    return bool(points_in_mesh(check_vec3(p, "p")[None], m)[0])


def winding_number(p, m):
    """Generalized winding number (solid-angle sum over 4*pi), oriented by the mesh."""
    p = check_vec3(p, "p")
    t = m.tri_points - p
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    la, lb, lc = (np.linalg.norm(x, axis=1) for x in (a, b, c))
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = (
        la * lb * lc
        + np.einsum("ij,ij->i", a, b) * lc
        + np.einsum("ij,ij->i", a, c) * lb
        + np.einsum("ij,ij->i", b, c) * la
    )
    w = 2.0 * np.arctan2(num, den).sum() / (4.0 * np.pi)
    return float(w if m.signed_volume > 0 else -w)


def nearest_boundary_point(p, m):
    """Closest point on the mesh surface and its distance."""
    p = check_vec3(p, "p")
    q = closest_points_on_triangles(p, m.tri_points)
    d = np.linalg.norm(q - p, axis=1)
    i = int(np.argmin(d))
    return q[i], float(d[i])


def nearest_boundary_triangle(p, m):
    """Like :func:`nearest_boundary_point` but also returns the triangle index."""
    p = check_vec3(p, "p")
    q = closest_points_on_triangles(p, m.tri_points)
    d = np.linalg.norm(q - p, axis=1)
    i = int(np.argmin(d))
    return q[i], float(d[i]), i


def boundary_distances(points, m):
    """Distance from each point to the mesh surface."""
    pts = check_points(points)
    tris = m.tri_points
    out = np.empty(len(pts))
    for i, p in enumerate(pts):
        out[i] = np.linalg.norm(closest_points_on_triangles(p, tris) - p, axis=1).min()
    return out


def ray_exit_point(origin, direction, m):
    """Farthest intersection of the ray with the mesh boundary."""
    origin = check_vec3(origin, "origin")
    direction = check_vec3(direction, "direction")
    if not np.any(direction):
        raise ValueError("direction must be nonzero")
    direction = direction / np.linalg.norm(direction)
    t, _, _, _ = ray_triangles(origin, direction, m.tri_points)
    extent = float(np.linalg.norm(m.aabb.max - m.aabb.min))
    t = t[np.isfinite(t) & (t > 1e-12 * max(extent, 1.0))]
    if len(t) == 0:
        raise ValueError("ray misses boundary")
    return origin + t.max() * direction


def read_off(path):
    """Read an ASCII OFF triangle mesh (``#`` comments allowed)."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens:
        raise ValueError(f"{path}: empty mesh file")
    if tokens[0].upper() == "OFF":
        tokens = tokens[1:]
    try:
        nv, nf = int(tokens[0]), int(tokens[1])
        pos = 3
        verts = np.array(tokens[pos : pos + 3 * nv], dtype=float).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            idx = [int(x) for x in tokens[pos + 1 : pos + 1 + k]]
            pos += 1 + k
            faces.extend([idx[0], idx[i], idx[i + 1]] for i in range(1, k - 1))
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed OFF file") from exc
    return TriMesh(verts, np.array(faces, dtype=np.int64))


def write_off(path, m):
    lines = ["OFF", f"{len(m.vertices)} {len(m.triangles)} 0"]
    lines += [" ".join(repr(float(x)) for x in v) for v in m.vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in t) for t in m.triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def box_mesh(lo, hi):
    """Axis-aligned box with outward-oriented triangles."""
    lo = check_vec3(lo, "lo")
    hi = check_vec3(hi, "hi")
    v = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    # vertex index = 4*ix + 2*iy + iz
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    tris = []
    for a, b, c, d in quads:
        tris += [(a, b, c), (a, c, d)]
    return TriMesh(v, np.array(tris))


def centered_box_mesh(extents):
    h = 0.5 * np.asarray(extents, dtype=float)
    return box_mesh(-h, h)


def tetrahedron_mesh(scale=1.0):
    """Regular tetrahedron centred at the origin with circumradius ``sqrt(3) * scale``."""
    v = scale * np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return TriMesh(v, np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]))


def icosphere_mesh(radius=1.0, subdivisions=2):
    t = (1.0 + 5**0.5) / 2.0
    verts = [
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ]  # fmt: skip
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]  # fmt: skip
    verts = [list(np.asarray(v) / np.linalg.norm(v)) for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                mid = np.add(verts[i], verts[j])
                verts.append(list(mid / np.linalg.norm(mid)))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new_faces
    return TriMesh(radius * np.array(verts), np.array(faces))
