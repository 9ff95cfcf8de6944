"""Geometric types and predicates."""

from .mesh import (
    box_mesh,
    centered_box_mesh,
    icosphere_mesh,
    nearest_boundary_point,
    point_in_mesh,
    points_in_mesh,
    ray_exit_point,
    read_off,
    tetrahedron_mesh,
    winding_number,
    write_off,
)
from .obb import boxes_intersect, obb_fit, obb_intersects_aabb, obbs_intersect_aabb
from .primitives import (
    AABB,
    OBB,
    Pose,
    Segment,
    Sphere,
    TriMesh,
    aabb_of,
    box_intersects_sphere,
    dist_point_segment,
    polyline_distance,
    sphere_intersects_polyline,
)
from .triangles import (
    closest_point_on_triangle,
    closest_points_on_triangles,
    tri_intersects_tri,
    tri_overlaps_aabb,
    tri_pairs_intersect,
    tris_overlap_boxes,
)

__all__ = [
    "AABB",
    "OBB",
    "Pose",
    "Segment",
    "Sphere",
    "TriMesh",
    "aabb_of",
    "box_intersects_sphere",
    "box_mesh",
    "boxes_intersect",
    "centered_box_mesh",
    "closest_point_on_triangle",
    "closest_points_on_triangles",
    "dist_point_segment",
    "icosphere_mesh",
    "nearest_boundary_point",
    "obb_fit",
    "obb_intersects_aabb",
    "obbs_intersect_aabb",
    "point_in_mesh",
    "points_in_mesh",
    "polyline_distance",
    "ray_exit_point",
    "read_off",
    "sphere_intersects_polyline",
    "tetrahedron_mesh",
    "tri_intersects_tri",
    "tri_overlaps_aabb",
    "tri_pairs_intersect",
    "tris_overlap_boxes",
    "winding_number",
    "write_off",
]
