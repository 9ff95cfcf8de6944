import json

import numpy as np
import pytest

from rgg.approximation import Obstacle
from rgg.drm import drm_preprocess
from rgg.geometry import AABB, Pose, centered_box_mesh, points_in_mesh, tri_pairs_intersect
from rgg.harness import build_cache, load_scene, run_trials, scene_from_doc, scene_path
from rgg.kinematics import fk_batch, load_robot
from rgg.rgg import rgg_preprocess
from rgg.roadmap import build_prm

WORKSPACE = AABB([0, 0, 0], [32, 32, 16])
DESK_EDGES = 300
DESK_TRIALS = 25

_acceptance_key = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_acceptance_key] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_acceptance_key, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for the terminal summary (and print it)."""

    def _report(number, name, ok, detail):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        request.config.stash[_acceptance_key].append(line)
        print(line)
        return ok

    return _report


@pytest.fixture(scope="session")
def robot():
    return load_robot(scene_path("default").parent / "robot.json")


@pytest.fixture(scope="session")
def small_roadmap(robot):
    return build_prm(robot, WORKSPACE, 12, 3, seed=3)


@pytest.fixture(scope="session")
def prism():
    return centered_box_mesh([2, 2, 6])


@pytest.fixture(scope="session")
def prism_obstacle(prism):
    return Obstacle(prism, Pose(np.eye(3), [20, 18, 8]))


@pytest.fixture(scope="session")
def desk_cache():
    return build_cache(load_scene("default"), edges=DESK_EDGES)


@pytest.fixture(scope="session")
def desk_stats(desk_cache):
    return run_trials(desk_cache, DESK_TRIALS, seed=0)


@pytest.fixture(scope="session")
def small_rgg(small_roadmap, robot, prism_obstacle):
    return rgg_preprocess(small_roadmap, robot, [prism_obstacle])


@pytest.fixture(scope="session")
def small_drm(small_roadmap, robot):
    return drm_preprocess(small_roadmap, robot, WORKSPACE, 4.0)


def exhaustive_collide(robot, configs, obstacle_meshes):
    """Every body triangle against every obstacle triangle, no culling, plus full containment checks."""
    configs = np.atleast_2d(configs)
    out = np.zeros(len(configs), dtype=bool)
    rot, trans = fk_batch(robot, configs)
    for b, body in enumerate(robot.bodies):
        tris = np.einsum("nij,tvj->ntvi", rot[:, b], body.tri_points) + trans[:, b, None, None, :]
        for obs in obstacle_meshes:
            o = obs.tri_points
            n, t, m = len(configs), len(body.triangles), len(o)
            a = np.broadcast_to(tris[:, :, None], (n, t, m, 3, 3)).reshape(-1, 3, 3)
            c = np.broadcast_to(o[None, None], (n, t, m, 3, 3)).reshape(-1, 3, 3)
            out |= tri_pairs_intersect(a, c).reshape(n, t * m).any(axis=1)
            verts = np.einsum("nij,mj->nmi", rot[:, b], body.vertices) + trans[:, b, None, :]
            out |= points_in_mesh(verts.reshape(-1, 3), obs).reshape(n, -1).any(axis=1)
            for i in range(n):
                local = (obs.vertices - trans[i, b]) @ rot[i, b]
                out[i] |= points_in_mesh(local, body).any()
    return out


def tiny_scene_doc(n_nodes=10, obstacles=True):
    """The default scene as a JSON document with absolute paths and a small roadmap."""
    data = scene_path("default").parent
    doc = json.loads(scene_path("default").read_text())
    doc["robot"] = str(data / "robot.json")
    for o in doc["obstacles"]:
        o["mesh"] = str(data / o["mesh"])
    if not obstacles:
        doc["obstacles"] = []
    doc["params"]["n_nodes"] = n_nodes
    doc["params"]["k_neighbors"] = 3
    return doc


@pytest.fixture(scope="session")
def tiny_cache():
    return build_cache(scene_from_doc(tiny_scene_doc()))
