"""Red-Green-Gray labeling of probabilistic roadmaps against moving obstacles."""

from .approximation import Obstacle, SphereGenParams, generate_spheres, shortcut_spline
from .broadphase import AabbTree, build_tree, query_aabb, query_sphere
from .drm import DRMLabeler, drm_preprocess, drm_update
from .geometry import AABB, OBB, Pose, Sphere, TriMesh
from .kinematics import Joint, RobotModel, fk, load_robot
from .oracle import ExactLabeler, GroundTruth, collide_config, ground_truth
from .rgg import RGGLabeler, rgg_preprocess, rgg_update
from .roadmap import ComponentId, Kind, Label, LabelMap, Roadmap, build_prm

__all__ = [
    "AABB",
    "OBB",
    "AabbTree",
    "ComponentId",
    "DRMLabeler",
    "ExactLabeler",
    "GroundTruth",
    "Joint",
    "Kind",
    "Label",
    "LabelMap",
    "Obstacle",
    "Pose",
    "RGGLabeler",
    "RobotModel",
    "Roadmap",
    "Sphere",
    "SphereGenParams",
    "TriMesh",
    "build_prm",
    "build_tree",
    "collide_config",
    "drm_preprocess",
    "drm_update",
    "fk",
    "generate_spheres",
    "ground_truth",
    "load_robot",
    "query_aabb",
    "query_sphere",
    "rgg_preprocess",
    "rgg_update",
    "shortcut_spline",
]
