"""Robot model, forward kinematics and edge discretization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_positive, check_vec3
from .geometry import AABB, Pose, TriMesh, box_mesh, read_off
from .geometry.primitives import _frozen

JOINT_TYPES = ("spherical", "fixed")


@dataclass(frozen=True, eq=False)
class Joint:
    """Attachment of a body to its parent.

    A spherical joint rotates its body by intrinsic Z-Y-X angles about the
    attachment point ``offset`` (expressed in the parent's frame, or the base
    frame when ``parent == -1``). ``rotation`` is a constant pre-rotation.
    """

    parent: int = -1
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    kind: str = "spherical"
    lower: np.ndarray = field(default_factory=lambda: np.full(3, -math.pi))
    upper: np.ndarray = field(default_factory=lambda: np.full(3, math.pi))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        if self.kind not in JOINT_TYPES:
            raise ValueError(f"unknown joint type {self.kind!r}")
        object.__setattr__(self, "offset", _frozen(check_vec3(self.offset, "offset")))
        object.__setattr__(self, "lower", _frozen(np.asarray(self.lower, dtype=float).reshape(3)))
        object.__setattr__(self, "upper", _frozen(np.asarray(self.upper, dtype=float).reshape(3)))
        if np.any(self.lower > self.upper):
            raise ValueError("joint lower limit exceeds upper limit")
        object.__setattr__(self, "rotation", Pose(self.rotation).rotation)

    @property
    def dof(self):
        return 3 if self.kind == "spherical" else 0


@dataclass(frozen=True, eq=False)
class RobotModel:
    """Tree of rigid bodies; ``joints[i]`` attaches ``bodies[i]``.

    Parents must precede their children.
    """

    bodies: tuple
    joints: tuple
    base_pose: Pose = field(default_factory=Pose)

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))
        object.__setattr__(self, "joints", tuple(self.joints))
        if len(self.bodies) == 0 or len(self.bodies) != len(self.joints):
            raise ValueError("need one joint per body and at least one body")
        for i, j in enumerate(self.joints):
            if not -1 <= j.parent < i:
                raise ValueError(f"joint {i}: parent {j.parent} must be -1 or an earlier body")
        for b in self.bodies:
            if not isinstance(b, TriMesh):
                raise TypeError("bodies must be TriMesh instances")

    @property
    def dof_count(self):
        return sum(j.dof for j in self.joints)

    @property
    def lower(self):
        return np.concatenate([j.lower for j in self.joints if j.dof])

    @property
    def upper(self):
        return np.concatenate([j.upper for j in self.joints if j.dof])

    def check_config(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.dof_count,):
            raise ValueError(f"config has {c.size} coordinates, robot has {self.dof_count} DOF")
        if not np.all(np.isfinite(c)):
            raise ValueError("config contains non-finite values")
        return c

    def adjacent(self, i, j):
        return self.joints[i].parent == j or self.joints[j].parent == i


@dataclass(frozen=True, eq=False)
class PosedBody:
    body_index: int
    pose: Pose
    world_vertices: np.ndarray


@dataclass(frozen=True, eq=False)
class Edge:
    a: np.ndarray
    b: np.ndarray

    def cfgs(self, eps):
        return discretize_edge(self, eps)


@dataclass(frozen=True, eq=False)
class Node:
    """A configuration viewed as a degenerate edge."""

    c: np.ndarray

    def cfgs(self, eps):
        return np.asarray(self.c, dtype=float)[None, :].copy()


def euler_zyx_matrices(angles):
    """Stacked ``Rz(a) @ Ry(b) @ Rx(c)`` for angle triples of shape (..., 3)."""
    angles = np.asarray(angles, dtype=float)
    ca, cb, cc = np.cos(angles[..., 0]), np.cos(angles[..., 1]), np.cos(angles[..., 2])
    sa, sb, sc = np.sin(angles[..., 0]), np.sin(angles[..., 1]), np.sin(angles[..., 2])
    out = np.empty(angles.shape[:-1] + (3, 3))
    out[..., 0, 0] = ca * cb
    out[..., 0, 1] = ca * sb * sc - sa * cc
    out[..., 0, 2] = ca * sb * cc + sa * sc
    out[..., 1, 0] = sa * cb
    out[..., 1, 1] = sa * sb * sc + ca * cc
    out[..., 1, 2] = sa * sb * cc - ca * sc
    out[..., 2, 0] = -sb
    out[..., 2, 1] = cb * sc
    out[..., 2, 2] = cb * cc
    return out


def fk_batch(robot, configs):
    """Body poses for a stack of configurations.

    Returns ``(rotations, translations)`` of shapes (n, k, 3, 3) and (n, k, 3).
    """
    configs = np.asarray(configs, dtype=float)
    if configs.ndim != 2 or configs.shape[1] != robot.dof_count:
        raise ValueError(f"configs must have shape (n, {robot.dof_count})")
    n, k = len(configs), len(robot.bodies)
    rot = np.empty((n, k, 3, 3))
    trans = np.empty((n, k, 3))
    col = 0
    for i, joint in enumerate(robot.joints):
        if joint.parent < 0:
            prot = np.broadcast_to(robot.base_pose.rotation, (n, 3, 3))
            ptrans = np.broadcast_to(robot.base_pose.translation, (n, 3))
        else:
            prot, ptrans = rot[:, joint.parent], trans[:, joint.parent]
        local = np.broadcast_to(joint.rotation, (n, 3, 3))
        if joint.dof:
            local = local @ euler_zyx_matrices(configs[:, col : col + 3])
            col += 3
        rot[:, i] = prot @ local
        trans[:, i] = ptrans + np.einsum("nij,j->ni", prot, joint.offset)
    return rot, trans


def posed_vertices(robot, configs, body):
    """World vertices of one body for each configuration, shape (n, m, 3)."""
    rot, trans = fk_batch(robot, configs)
    return np.einsum("nij,mj->nmi", rot[:, body], robot.bodies[body].vertices) + trans[:, body, None, :]


def fk(robot, c):
    """Posed bodies for a single configuration."""
    c = robot.check_config(c)
    rot, trans = fk_batch(robot, c[None, :])
    out = []
    for i, body in enumerate(robot.bodies):
        pose = Pose(rot[0, i], trans[0, i])
        out.append(PosedBody(i, pose, body.vertices @ rot[0, i].T + trans[0, i]))
    return out


def edge_steps(length, eps):
    """Number of configurations on an edge of joint-space ``length``."""
    # shave float noise so exact multiples of eps do not gain a step
    return max(2, math.ceil(length / eps - 1e-9) + 1)


def discretize_edge(e, eps):
    """Uniform joint-space samples from ``e.a`` to ``e.b``, endpoints included."""
    eps = check_positive(eps, "eps")
    a = np.asarray(e.a, dtype=float)
    b = np.asarray(e.b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("edge endpoints have different dimensions")
    n = edge_steps(float(np.linalg.norm(b - a)), eps)
    t = np.arange(n, dtype=float) / (n - 1)
    return (1.0 - t)[:, None] * a + t[:, None] * b


def _pose_from_doc(doc):
    doc = doc or {}
    translation = doc.get("translation", [0.0, 0.0, 0.0])
    if "rotation_quat" in doc:
        return Pose.from_quaternion(doc["rotation_quat"], translation)
    if "rotation_euler_zyx" in doc:
        return Pose.from_euler_zyx(doc["rotation_euler_zyx"], translation)
    return Pose(np.eye(3), translation)


def mesh_from_doc(doc, base_dir):
    """A mesh given either as ``{"mesh": "file.off"}`` or ``{"box": {"min": .., "max": ..}}``."""
    if "mesh" in doc:
        return read_off(Path(base_dir) / doc["mesh"])
    if "box" in doc:
        return box_mesh(doc["box"]["min"], doc["box"]["max"])
    raise ValueError("body needs a 'mesh' file or a 'box'")


def load_robot(path):
    """Load a robot description (JSON) with mesh paths relative to the file."""
    path = Path(path)
    doc = json.loads(path.read_text())
    return robot_from_doc(doc, path.parent)


def robot_from_doc(doc, base_dir="."):
    bodies, joints = [], []
    for entry in doc["bodies"]:
        bodies.append(mesh_from_doc(entry, base_dir))
        jd = entry.get("joint", {})
        limits = np.asarray(jd.get("limits", [[-math.pi, math.pi]] * 3), dtype=float)
        joints.append(
            Joint(
                parent=int(jd.get("parent", -1)),
                offset=jd.get("offset", [0.0, 0.0, 0.0]),
                kind=jd.get("type", "spherical"),
                lower=limits[:, 0],
                upper=limits[:, 1],
                rotation=_pose_from_doc(jd.get("pose")).rotation,
            )
        )
    return RobotModel(tuple(bodies), tuple(joints), _pose_from_doc(doc.get("base_pose")))


def robot_aabb(robot, configs):
    """Bounding box of all bodies over the given configurations."""
    pts = np.concatenate([posed_vertices(robot, configs, b).reshape(-1, 3) for b in range(len(robot.bodies))])
    return AABB(pts.min(axis=0), pts.max(axis=0))
