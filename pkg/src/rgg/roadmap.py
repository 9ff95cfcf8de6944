"""PRM roadmap construction and per-component label storage.

Components are addressed either by :class:`ComponentId` or by a flat index:
nodes occupy ``0 .. V-1`` and edges ``V .. V+E-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np
from scipy.spatial import cKDTree

from ._validation import check_int, check_positive
from .kinematics import Edge, discretize_edge, fk_batch


class Label(IntEnum):
    GREEN = 0
    GRAY = 1
    RED = 2


class Kind(str, Enum):
    NODE = "node"
    EDGE = "edge"


@dataclass(frozen=True)
class ComponentId:
    kind: Kind
    index: int


@dataclass(frozen=True, eq=False)
class Roadmap:
    nodes: np.ndarray
    edges: np.ndarray
    eps: float
    seed: int = 0

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        edges = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        if nodes.ndim != 2:
            nodes = nodes.reshape(0, 0) if nodes.size == 0 else nodes
        if len(edges):
            if edges.min() < 0 or edges.max() >= len(nodes):
                raise ValueError("edge endpoint is not a valid node id")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValueError("self-loop edge")
            if len(np.unique(np.sort(edges, axis=1), axis=0)) != len(edges):
                raise ValueError("duplicate undirected edge")
        check_positive(self.eps, "eps")
        nodes.setflags(write=False)
        edges.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_components(self):
        return self.n_nodes + self.n_edges

    def component_ids(self):
        return [ComponentId(Kind.NODE, i) for i in range(self.n_nodes)] + [
            ComponentId(Kind.EDGE, i) for i in range(self.n_edges)
        ]

    def flat_index(self, cid):
        kind = Kind(cid.kind)
        limit = self.n_nodes if kind is Kind.NODE else self.n_edges
        if not 0 <= cid.index < limit:
            raise IndexError(f"{kind.value} index {cid.index} out of range")
        return cid.index if kind is Kind.NODE else self.n_nodes + cid.index

    def component_id(self, flat):
        if flat < self.n_nodes:
            return ComponentId(Kind.NODE, int(flat))
        return ComponentId(Kind.EDGE, int(flat - self.n_nodes))

    def kinds(self):
        """Array of kind strings per flat component index."""
        return np.array(["node"] * self.n_nodes + ["edge"] * self.n_edges)


def component_cfgs(r, cid):
    """The sampled configurations of a component (a node yields exactly one)."""
    flat = r.flat_index(cid)
    if flat < r.n_nodes:
        return r.nodes[flat][None, :].copy()
    a, b = r.edges[flat - r.n_nodes]
    return discretize_edge(Edge(r.nodes[a], r.nodes[b]), r.eps)


def all_component_cfgs(r):
    """``(cfgs, owner)``: every sampled configuration stacked, with its flat component index."""
    chunks = [r.nodes]
    owners = [np.arange(r.n_nodes)]
    for e, (a, b) in enumerate(r.edges):
        c = discretize_edge(Edge(r.nodes[a], r.nodes[b]), r.eps)
        chunks.append(c)
        owners.append(np.full(len(c), r.n_nodes + e))
    if r.n_components == 0:
        return np.zeros((0, r.nodes.shape[1] if r.nodes.ndim == 2 else 0)), np.zeros(0, dtype=np.int64)
    return np.concatenate(chunks), np.concatenate(owners)


def _inside_bounds(robot, configs, bounds):
    rot, trans = fk_batch(robot, configs)
    ok = np.ones(len(configs), dtype=bool)
    for b, body in enumerate(robot.bodies):
        v = np.einsum("nij,mj->nmi", rot[:, b], body.vertices) + trans[:, b, None, :]
        ok &= np.all((v >= bounds.min) & (v <= bounds.max), axis=(1, 2))
    return ok


def build_prm(robot, bounds, n_nodes, k_neighbors, seed=0, eps=0.1):
    """Obstacle-free k-nearest-neighbour PRM.

    Nodes are drawn uniformly within the joint limits and kept only when every
    body lies inside ``bounds``; each node is joined to its ``k_neighbors``
    nearest nodes in joint space (Euclidean metric).
    """
    n_nodes = check_int(n_nodes, "n_nodes", 2)
    k_neighbors = check_int(k_neighbors, "k_neighbors", 1)
    rng = np.random.default_rng(seed)
    lower, upper = robot.lower, robot.upper
    nodes = []
    attempts = 0
    max_attempts = 100 * n_nodes
    while len(nodes) < n_nodes:
        if attempts >= max_attempts:
            raise RuntimeError("workspace bounds too tight")
        batch = min(n_nodes, max_attempts - attempts)
        cand = rng.uniform(lower, upper, size=(batch, robot.dof_count))
        attempts += batch
        ok = _inside_bounds(robot, cand, bounds)
        nodes.extend(cand[ok][: n_nodes - len(nodes)])
    nodes = np.array(nodes)
    k = min(k_neighbors, n_nodes - 1)
    _, nbrs = cKDTree(nodes).query(nodes, k + 1)
    pairs = set()
    for i, row in enumerate(nbrs):
        for j in row:
            if j != i:
                pairs.add((min(i, int(j)), max(i, int(j))))
    edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    return Roadmap(nodes, edges, eps, seed)


@dataclass(frozen=True)
class Witness:
    """Evidence for a red label: an obstacle sphere touching a component spline."""

    obstacle: int
    sphere: int
    spline: int
    distance: float
    threshold: float

    def __str__(self):
        return f"{self.obstacle}:{self.sphere}:{self.spline}:{self.distance:.6g}"


@dataclass(eq=False)
class LabelMap:
    """One label per component plus the update epoch that produced it."""

    labels: np.ndarray
    n_nodes: int
    generation: int = 0
    witnesses: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if np.any((self.labels < Label.GREEN) | (self.labels > Label.RED)):
            raise ValueError("labels must be GREEN, GRAY or RED")
        self.labels.setflags(write=False)

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, cid):
        if isinstance(cid, ComponentId):
            flat = cid.index if Kind(cid.kind) is Kind.NODE else self.n_nodes + cid.index
        else:
            flat = int(cid)
        return Label(int(self.labels[flat]))

    def mask(self, label, kind=None):
        m = self.labels == int(label)
        if kind is not None:
            sel = np.zeros(len(m), dtype=bool)
            if Kind(kind) is Kind.NODE:
                sel[: self.n_nodes] = True
            else:
                sel[self.n_nodes :] = True
            m &= sel
        return m

    def counts(self, kind=None):
        return {lab: int(self.mask(lab, kind).sum()) for lab in Label}
