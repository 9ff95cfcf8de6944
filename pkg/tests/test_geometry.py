import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.transform import Rotation
from shapely.geometry import Polygon

from rgg.geometry import (
    AABB,
    OBB,
    Pose,
    Segment,
    Sphere,
    TriMesh,
    aabb_of,
    box_mesh,
    boxes_intersect,
    centered_box_mesh,
    dist_point_segment,
    icosphere_mesh,
    nearest_boundary_point,
    obb_fit,
    obb_intersects_aabb,
    obbs_intersect_aabb,
    point_in_mesh,
    points_in_mesh,
    ray_exit_point,
    read_off,
    sphere_intersects_polyline,
    tetrahedron_mesh,
    tri_intersects_tri,
    tri_overlaps_aabb,
    tri_pairs_intersect,
    tris_overlap_boxes,
    write_off,
)

TAU = 1e-6
SIGNS = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
BOX_EDGES = [(i, i ^ bit) for i in range(8) for bit in (1, 2, 4) if i < i ^ bit]


# ---------------------------------------------------------------- oracles


def segments_hit_box(p, q, lo, hi):
    """Liang-Barsky clipping of closed segments p->q against a closed box."""
    d = q - p
    t0 = np.zeros(len(p))
    t1 = np.ones(len(p))
    ok = np.ones(len(p), dtype=bool)
    for k in range(3):
        flat = np.abs(d[:, k]) < 1e-300
        ok &= ~(flat & ((p[:, k] < lo[..., k]) | (p[:, k] > hi[..., k])))
        with np.errstate(divide="ignore", invalid="ignore"):
            a = (lo[..., k] - p[:, k]) / d[:, k]
            b = (hi[..., k] - p[:, k]) / d[:, k]
        t0 = np.where(flat, t0, np.maximum(t0, np.minimum(a, b)))
        t1 = np.where(flat, t1, np.minimum(t1, np.maximum(a, b)))
    return ok & (t0 <= t1)


def box_pair_oracle(center, axes, half, lo, hi):
    """Vertex containment plus edge clipping, both ways, in each box's own frame."""
    corners = center + (SIGNS * half) @ axes
    c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
    if np.all(np.abs(corners - c) <= h, axis=1).any():
        return True
    a_corners = c + SIGNS * h
    local = (a_corners - center) @ axes.T
    if np.all(np.abs(local) <= half, axis=1).any():
        return True
    i, j = np.array(BOX_EDGES).T
    if segments_hit_box(corners[i], corners[j], lo, hi).any():
        return True
    return bool(segments_hit_box(local[i], local[j], -half, half).any())


def segment_crosses_triangle(p, q, tri):
    """Ternary verdict for segment/triangle contact: +1 certain hit, -1 certain miss, 0 too close to call."""
    a, b, c = tri
    n = np.cross(b - a, c - a)
    n /= np.linalg.norm(n)
    sp, sq = n @ (p - a), n @ (q - a)
    if (sp > TAU and sq > TAU) or (sp < -TAU and sq < -TAU):
        return -1
    if abs(sp) <= TAU or abs(sq) <= TAU:
        return 0
    x = p + sp / (sp - sq) * (q - p)
    margin = np.inf
    for u, v in ((a, b), (b, c), (c, a)):
        inward = np.cross(n, v - u)
        margin = min(margin, inward @ (x - u) / np.linalg.norm(inward))
    if margin > TAU:
        return 1
    return -1 if margin < -TAU else 0


def tri_tri_oracle(t1, t2):
    """Closed triangles meet iff an edge of one meets the other; None when near-touching."""
    verdicts = [
        segment_crosses_triangle(s[i], s[(i + 1) % 3], o) for s, o in ((t1, t2), (t2, t1)) for i in range(3)
    ]
    if 1 in verdicts:
        return True
    if all(v == -1 for v in verdicts):
        return False
    return None


def tri_box_oracle(tri, lo, hi):
    """Triangle edges clipped against the box, box edges crossing the triangle."""
    if segments_hit_box(tri, np.roll(tri, -1, axis=0), lo, hi).any():
        return True
    corners = 0.5 * (lo + hi) + SIGNS * 0.5 * (hi - lo)
    a, b, c = tri
    e1, e2 = b - a, c - a
    for i, j in BOX_EDGES:
        p, d = corners[i], corners[j] - corners[i]
        h = np.cross(d, e2)
        det = e1 @ h
        if abs(det) < 1e-14:
            continue
        s = p - a
        u = (s @ h) / det
        qv = np.cross(s, e1)
        v = (d @ qv) / det
        t = (e2 @ qv) / det
        if u >= 0 and v >= 0 and u + v <= 1 and 0 <= t <= 1:
            return True
    return False


def solid_angle_winding(p, m):
    total = 0.0
    for tri in m.tri_points:
        a, b, c = tri - p
        la, lb, lc = np.linalg.norm(a), np.linalg.norm(b), np.linalg.norm(c)
        num = a @ np.cross(b, c)
        den = la * lb * lc + (a @ b) * lc + (a @ c) * lb + (b @ c) * la
        total += 2.0 * np.arctan2(num, den)
    return np.sign(m.signed_volume) * total / (4.0 * np.pi)


def point_segment(p, a, b):
    ab = b - a
    t = 0.0 if ab @ ab == 0 else np.clip((p - a) @ ab / (ab @ ab), 0.0, 1.0)
    return np.linalg.norm(p - (a + t * ab))


def point_triangle(p, tri):
    """Plane projection when the foot lands inside, otherwise the nearest edge."""
    a, b, c = tri
    n = np.cross(b - a, c - a)
    n /= np.linalg.norm(n)
    foot = p - (n @ (p - a)) * n
    inside = all(np.cross(v - u, foot - u) @ n >= 0 for u, v in ((a, b), (b, c), (c, a)))
    if inside:
        return abs(n @ (p - a))
    return min(point_segment(p, u, v) for u, v in ((a, b), (b, c), (c, a)))


def ray_cast_all(origin, d, m):
    ts = []
    for a, b, c in m.tri_points:
        e1, e2 = b - a, c - a
        h = np.cross(d, e2)
        det = e1 @ h
        if abs(det) < 1e-14:
            continue
        s = origin - a
        u = (s @ h) / det
        q = np.cross(s, e1)
        v = (d @ q) / det
        t = (e2 @ q) / det
        if u >= -1e-12 and v >= -1e-12 and u + v <= 1 + 1e-12 and t > 1e-9:
            ts.append(t)
    return ts


def random_rotations(rng, n):
    return Rotation.random(n, random_state=rng).as_matrix()


def star_mesh(rng):
    """Star-shaped, non-convex closed mesh: an icosphere with radially jittered vertices."""
    base = icosphere_mesh(1.0, 2)
    scale = rng.uniform(0.6, 1.4, size=len(base.vertices))
    return TriMesh(base.vertices * scale[:, None], base.triangles)


# ---------------------------------------------------------------- types


def test_pose_validation():
    with pytest.raises(ValueError, match="orthonormal"):
        Pose(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        Pose(np.eye(3), [0, np.nan, 0])
    p = Pose.from_euler_zyx([0.3, -0.2, 1.0], [1, 2, 3])
    x = np.array([[0.5, -1.0, 2.0]])
    assert np.allclose(p.inverse().apply(p.apply(x)), x)
    assert np.allclose(p.compose(p.inverse()).rotation, np.eye(3))


def test_aabb_rejects_inverted_bounds():
    with pytest.raises(ValueError):
        AABB([1, 0, 0], [0, 1, 1])


def test_obb_rejects_skew_axes():
    with pytest.raises(ValueError, match="orthonormal"):
        OBB([0, 0, 0], [[1, 0, 0], [1, 1, 0], [0, 0, 1]], [1, 1, 1])
    with pytest.raises(ValueError):
        OBB([0, 0, 0], np.eye(3), [1, -1, 1])


def test_sphere_rejects_negative_radius():
    with pytest.raises(ValueError):
        Sphere([0, 0, 0], -1)
    assert Sphere([0, 0, 0], 0).radius == 0


def test_trimesh_validation(tmp_path):
    cube = box_mesh([0, 0, 0], [1, 1, 1])
    with pytest.raises(ValueError, match="watertight"):
        TriMesh(cube.vertices, cube.triangles[:-1])
    with pytest.raises(ValueError, match="out of range"):
        TriMesh(cube.vertices, np.array([[0, 1, 99]]))
    flat = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    with pytest.raises(ValueError, match="zero volume"):
        TriMesh(flat, np.array([[0, 1, 2], [0, 2, 1]]))
    assert cube.volume == pytest.approx(1.0)
    path = tmp_path / "cube.off"
    write_off(path, cube)
    again = read_off(path)
    assert np.array_equal(again.vertices, cube.vertices)
    assert np.array_equal(again.triangles, cube.triangles)


def test_read_off_splits_quads(tmp_path):
    path = tmp_path / "quad.off"
    verts = box_mesh([0, 0, 0], [1, 1, 1]).vertices
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    lines = ["OFF", "# a comment", "8 6 0"]
    lines += [" ".join(map(str, v)) for v in verts]
    lines += ["4 " + " ".join(map(str, q)) for q in quads]
    path.write_text("\n".join(lines))
    m = read_off(path)
    assert len(m.triangles) == 12
    assert m.volume == pytest.approx(1.0)
    (tmp_path / "bad.off").write_text("OFF\n8 6\n0 0")
    with pytest.raises(ValueError, match="malformed"):
        read_off(tmp_path / "bad.off")


# ---------------------------------------------------------------- aabb_of


def test_aabb_of_examples():
    a = aabb_of([[0, 0, 0], [1, 2, 3]])
    assert np.array_equal(a.min, [0, 0, 0]) and np.array_equal(a.max, [1, 2, 3])
    b = aabb_of([[5, 5, 5]])
    assert np.array_equal(b.min, b.max)
    with pytest.raises(ValueError, match="empty point set"):
        aabb_of(np.zeros((0, 3)))


def test_aabb_of_random_points():
    pts = np.random.default_rng(0).random((100, 3))
    a = aabb_of(pts)
    assert np.all(a.min >= 0) and np.all(a.max <= 1)
    assert a.contains(pts).all()


# ---------------------------------------------------------------- obb_fit


def test_obb_fit_unit_cube():
    corners = box_mesh([0, 0, 0], [1, 1, 1]).vertices
    o = obb_fit(corners, 0.1)
    assert np.allclose(np.sort(o.half_extents), [0.5, 0.5, 0.5])
    assert o.volume == pytest.approx(1.0)


def test_obb_fit_collinear():
    o = obb_fit([[0, 0, 0], [2, 0, 0]], 0.1)
    assert np.allclose(np.sort(o.half_extents), [0, 0, 1])
    assert o.contains([[0, 0, 0], [2, 0, 0], [1, 0, 0]]).all()


def test_obb_fit_errors():
    with pytest.raises(ValueError):
        obb_fit(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        obb_fit([[0, 0, 0]], delta=0)


def _grid_min_volume(pts, yaw, pitch, roll):
    y, p, r = np.meshgrid(yaw, pitch, roll, indexing="ij")
    mats = Rotation.from_euler("ZYX", np.stack([y.ravel(), p.ravel(), r.ravel()], axis=1), degrees=True).as_matrix()
    best = (np.inf, None)
    for s in range(0, len(mats), 4096):
        proj = np.einsum("nij,mj->nmi", mats[s : s + 4096], pts)
        vol = np.prod(proj.max(axis=1) - proj.min(axis=1), axis=1)
        i = int(np.argmin(vol))
        if vol[i] < best[0]:
            best = (float(vol[i]), (y.ravel()[s + i], p.ravel()[s + i], r.ravel()[s + i]))
    return best


def test_obb_fit_rotated_box_against_rotation_grid():
    rng = np.random.default_rng(11)
    delta = 0.1
    pts = (rng.random((200, 3)) - 0.5) * [4, 1, 1]
    pts = pts @ Rotation.from_euler("z", 45, degrees=True).as_matrix().T
    coarse, (y0, p0, r0) = _grid_min_volume(pts, np.arange(0, 180, 5), np.arange(-90, 90, 5), np.arange(0, 180, 5))
    fine = np.arange(-5, 5.01, 0.5)
    brute, _ = _grid_min_volume(pts, y0 + fine, p0 + fine, r0 + fine)
    brute = min(brute, coarse)
    o = obb_fit(pts, delta)
    assert o.contains(pts, tol=1e-9).all()
    assert brute <= 4.0
    assert o.volume <= (1 + delta) ** 3 * brute
    assert o.volume <= (1 + delta) ** 3 * 4.0


point_clouds = arrays(
    np.float64,
    st.tuples(st.integers(1, 30), st.just(3)),
    elements=st.floats(-10, 10, allow_nan=False, width=64),
)


@settings(max_examples=40, deadline=None)
@given(point_clouds)
def test_obb_fit_contains_and_beats_aabb(pts):
    o = obb_fit(pts, 0.1)
    assert (o.signed_excess(pts) <= 1e-9).all()
    assert o.volume <= aabb_of(pts).volume + 1e-9
    assert np.allclose(o.axes @ o.axes.T, np.eye(3), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(point_clouds)
def test_aabb_of_contains(pts):
    assert aabb_of(pts).contains(pts, tol=1e-9).all()


# ---------------------------------------------------------------- box/box


def test_obb_intersects_aabb_examples():
    unit = AABB([0, 0, 0], [1, 1, 1])
    assert obb_intersects_aabb(unit.to_obb(), unit)
    assert not obb_intersects_aabb(OBB([10, 10, 10], np.eye(3), [0.5, 0.5, 0.5]), unit)
    touching = OBB([1.5, 0.5, 0.5], np.eye(3), [0.5, 0.5, 0.5])
    assert obb_intersects_aabb(touching, unit)


def _random_box_pairs(rng, n):
    centers = rng.uniform(-2, 2, (n, 3))
    axes = random_rotations(rng, n).transpose(0, 2, 1)
    half = rng.uniform(0.05, 1.5, (n, 3))
    lo = rng.uniform(-1.5, 0.5, (n, 3))
    hi = lo + rng.uniform(0.05, 2.0, (n, 3))
    return centers, axes, half, lo, hi


def test_obb_aabb_against_clipping_oracle():
    rng = np.random.default_rng(1)
    n = 10_000
    centers, axes, half, lo, hi = _random_box_pairs(rng, n)
    compared = disagree = 0
    for i in range(n):
        a = AABB(lo[i], hi[i])
        got = obbs_intersect_aabb(centers[i], axes[i], half[i], a)[0]
        shrunk = box_pair_oracle(centers[i], axes[i], half[i] - TAU, lo[i] + TAU, hi[i] - TAU)
        grown = box_pair_oracle(centers[i], axes[i], half[i] + TAU, lo[i] - TAU, hi[i] + TAU)
        if shrunk != grown:
            continue
        compared += 1
        disagree += got != shrunk
    assert compared > 0.99 * n
    assert disagree == 0


def test_obb_aabb_scalar_matches_batched():
    rng = np.random.default_rng(2)
    centers, axes, half, lo, hi = _random_box_pairs(rng, 500)
    for i in range(500):
        a = AABB(lo[i], hi[i])
        single = obb_intersects_aabb(OBB(centers[i], axes[i], half[i]), a)
        assert single == obbs_intersect_aabb(centers[i], axes[i], half[i], a)[0]


def test_obb_aabb_symmetric_under_frame_swap():
    rng = np.random.default_rng(3)
    centers, axes, half, lo, hi = _random_box_pairs(rng, 2000)
    for i in range(2000):
        a = AABB(lo[i], hi[i])
        forward = obb_intersects_aabb(OBB(centers[i], axes[i], half[i]), a)
        # the OBB in its own frame is axis aligned; the AABB becomes oriented
        own = AABB(-half[i], half[i])
        moved = OBB(axes[i] @ (a.center - centers[i]), axes[i].T, a.half_extents)
        assert forward == obb_intersects_aabb(moved, own)
        assert forward == bool(boxes_intersect(centers[i], axes[i], half[i], a.center, np.eye(3), a.half_extents))


# ---------------------------------------------------------------- points, segments, spheres


def test_dist_point_segment_examples():
    s = Segment([-1, 0, 0], [1, 0, 0])
    assert dist_point_segment([0, 1, 0], s) == pytest.approx(1.0)
    assert dist_point_segment([2, 0, 0], s) == pytest.approx(1.0)
    assert dist_point_segment(s.a, s) == 0.0
    assert dist_point_segment([0, 3, 4], Segment([0, 0, 0], [0, 0, 0])) == pytest.approx(5.0)


def test_sphere_intersects_polyline_examples():
    unit = Sphere([0, 0, 0], 1)
    assert sphere_intersects_polyline(unit, [[0, 0, 0.5]])
    assert not sphere_intersects_polyline(Sphere([0, 0, 5], 1), [[-3, 0, 0], [3, 0, 0]])
    assert sphere_intersects_polyline(Sphere([0, 2, 0], 1), [[-3, 0, 0], [3, 0, 0]], slack=1.0)
    assert not sphere_intersects_polyline(Sphere([0, 2, 0], 1), [[-3, 0, 0], [3, 0, 0]], slack=0.999)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, (3,), elements=st.floats(-5, 5)),
    arrays(np.float64, (3,), elements=st.floats(-5, 5)),
    arrays(np.float64, (3,), elements=st.floats(-5, 5)),
)
def test_dist_point_segment_matches_dense_sampling(p, a, b):
    ts = np.linspace(0, 1, 2001)[:, None]
    sampled = np.linalg.norm(a + ts * (b - a) - p, axis=1).min()
    d = dist_point_segment(p, Segment(a, b))
    assert d <= sampled + 1e-9
    assert sampled - d <= np.linalg.norm(b - a) / 2000 + 1e-9


# ---------------------------------------------------------------- triangles


def test_tri_tri_examples():
    t = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    assert tri_intersects_tri(t, t)
    assert not tri_intersects_tri(t, t + [3, 0, 0])
    assert tri_intersects_tri(t, t + [1, 0, 0])  # shared vertex
    pierce = np.array([[0.2, 0.2, -1], [0.3, 0.2, 1], [0.2, 0.3, 1]])
    assert tri_intersects_tri(t, pierce)
    assert not tri_intersects_tri(t, pierce + [0, 0, 1.5])


def test_tri_tri_degenerate_inputs():
    seg = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], dtype=float)
    assert tri_intersects_tri(seg, seg + [1, 0, 0])
    assert not tri_intersects_tri(seg, seg + [0, 1, 0])


def test_tri_tri_against_crossing_oracle():
    rng = np.random.default_rng(4)
    n = 10_000
    a = rng.random((n, 3, 3))
    b = rng.random((n, 3, 3)) * 0.8 + rng.uniform(0, 0.6, (n, 1, 3))
    got = tri_pairs_intersect(a, b)
    compared = disagree = hits = 0
    for i in range(n):
        want = tri_tri_oracle(a[i], b[i])
        if want is None:
            continue
        compared += 1
        hits += want
        disagree += got[i] != want
    assert compared > 0.99 * n
    assert 0.1 * compared < hits < 0.9 * compared
    assert disagree == 0


def test_tri_tri_coplanar_against_shapely():
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(2000):
        p = rng.random((2, 3, 2)) * 2
        ta, tb = Polygon(p[0]), Polygon(p[1])
        if ta.area < 1e-3 or tb.area < 1e-3:
            continue
        gap = ta.distance(tb)
        overlap = ta.intersection(tb).area
        if 0 < gap < TAU or (gap == 0 and overlap < TAU):
            continue
        lift = lambda t: np.column_stack([t, np.zeros(3)])  # noqa: E731
        assert tri_intersects_tri(lift(p[0]), lift(p[1])) == (gap == 0)
        checked += 1
    assert checked > 1500


def test_tri_box_examples():
    a = AABB([0, 0, 0], [1, 1, 1])
    assert tri_overlaps_aabb([[0.2, 0.2, 0.2], [0.8, 0.2, 0.2], [0.2, 0.8, 0.2]], a)
    assert not tri_overlaps_aabb([[0, 0, 5], [1, 0, 5], [0, 1, 5]], a)
    # large triangle slicing the box with all vertices outside
    assert tri_overlaps_aabb([[-10, -10, 0.5], [10, -10, 0.5], [0, 10, 0.5]], a)
    assert tri_overlaps_aabb([[1, 1, 1], [2, 1, 1], [1, 2, 1]], a)  # corner contact


def test_tri_box_against_clipping_oracle():
    rng = np.random.default_rng(6)
    n = 5000
    tris = rng.uniform(-1, 2, (n, 3, 3))
    lo = rng.uniform(0, 0.6, (n, 3))
    hi = lo + rng.uniform(0.1, 0.6, (n, 3))
    got = tris_overlap_boxes(tris, lo, hi)
    compared = disagree = 0
    for i in range(n):
        shrunk = tri_box_oracle(tris[i], lo[i] + TAU, hi[i] - TAU)
        grown = tri_box_oracle(tris[i], lo[i] - TAU, hi[i] + TAU)
        if shrunk != grown:
            continue
        compared += 1
        disagree += got[i] != shrunk
        if i < 300:
            assert tri_overlaps_aabb(tris[i], AABB(lo[i], hi[i])) == got[i]
    assert compared > 0.99 * n
    assert disagree == 0


# ---------------------------------------------------------------- meshes


def test_point_in_mesh_examples():
    tet = tetrahedron_mesh()
    assert point_in_mesh(tet.vertices.mean(axis=0), tet)
    assert not point_in_mesh([2 * np.sqrt(3), 0, 0], tet)
    cube = box_mesh([0, 0, 0], [1, 1, 1])
    assert point_in_mesh([1, 0.5, 0.5], cube)  # on a face
    assert point_in_mesh([1, 1, 1], cube)  # at a corner
    assert point_in_mesh([0.5, 0.5, 0.5], cube)


def test_point_in_mesh_against_winding_number():
    rng = np.random.default_rng(7)
    for m in (star_mesh(rng), box_mesh([0, 0, 0], [1, 2, 3]).transformed(Pose.from_euler_zyx([0.3, 0.2, 0.1]))):
        lo, hi = m.aabb.min - 0.3, m.aabb.max + 0.3
        pts = rng.uniform(lo, hi, (500, 3))
        got = points_in_mesh(pts, m)
        for p, g in zip(pts, got):
            w = solid_angle_winding(p, m)
            if abs(abs(w) - 0.5) < 0.45:
                continue  # within rounding of the surface
            assert g == (abs(w) > 0.5)


def test_point_in_mesh_grid_points_on_axis_aligned_faces():
    # grid points hit vertices and edges of the box mesh along many rays
    cube = box_mesh([0, 0, 0], [2, 2, 2])
    g = np.linspace(-1, 3, 9)
    pts = np.array(np.meshgrid(g, g, g)).reshape(3, -1).T
    want = np.all((pts >= 0) & (pts <= 2), axis=1)
    assert np.array_equal(points_in_mesh(pts, cube), want)


def test_nearest_boundary_point_examples():
    cube = box_mesh([0, 0, 0], [1, 1, 1])
    q, d = nearest_boundary_point([0.5, 0.5, 0.5], cube)
    assert d == pytest.approx(0.5)
    assert np.isclose(np.abs(q - 0.5).max(), 0.5)
    q, d = nearest_boundary_point([1, 0.3, 0.6], cube)
    assert d == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(q, [1, 0.3, 0.6])


def test_nearest_boundary_point_against_exhaustive():
    rng = np.random.default_rng(8)
    m = star_mesh(rng)
    for p in rng.uniform(-2, 2, (60, 3)):
        q, d = nearest_boundary_point(p, m)
        want = min(point_triangle(p, t) for t in m.tri_points)
        assert d == pytest.approx(want, abs=1e-9)
        assert np.linalg.norm(q - p) == pytest.approx(d, abs=1e-12)


def test_ray_exit_point_examples():
    cube = box_mesh([0, 0, 0], [1, 1, 1])
    assert np.allclose(ray_exit_point([0.5, 0.5, 0.5], [1, 0, 0], cube), [1, 0.5, 0.5])
    assert np.allclose(ray_exit_point([0.5, 0.5, 0], [0, 0, 1], cube), [0.5, 0.5, 1])
    with pytest.raises(ValueError, match="ray misses boundary"):
        ray_exit_point([5, 5, 5], [1, 0, 0], cube)
    with pytest.raises(ValueError):
        ray_exit_point([0.5, 0.5, 0.5], [0, 0, 0], cube)


def test_ray_exit_point_against_exhaustive():
    rng = np.random.default_rng(9)
    m = star_mesh(rng)
    for _ in range(100):
        origin = rng.uniform(-0.4, 0.4, 3)
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        ts = ray_cast_all(origin, d, m)
        assert ts, "interior ray must leave the mesh"
        assert np.allclose(ray_exit_point(origin, d, m), origin + max(ts) * d, atol=1e-9)


def test_stock_meshes_are_closed_and_oriented():
    for m in (centered_box_mesh([2, 2, 6]), tetrahedron_mesh(), icosphere_mesh(1.0, 1)):
        assert m.signed_volume > 0
    assert centered_box_mesh([2, 2, 6]).volume == pytest.approx(24.0)
    assert tetrahedron_mesh().volume == pytest.approx(8 / 3)


def test_predicates_are_deterministic():
    rng = np.random.default_rng(10)
    a, b = rng.random((200, 3, 3)), rng.random((200, 3, 3))
    assert np.array_equal(tri_pairs_intersect(a, b), tri_pairs_intersect(a.copy(), b.copy()))
