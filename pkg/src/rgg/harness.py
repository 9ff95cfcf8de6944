"""Scenes, cached indexes, the randomized trial protocol and its statistics."""

from __future__ import annotations

import csv
import io
import json
import pickle
import statistics
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from .approximation import Obstacle, SphereGenParams
from .drm import drm_preprocess, drm_update
from .geometry import AABB, Pose
from .kinematics import _pose_from_doc, load_robot, mesh_from_doc
from .oracle import ground_truth
from .rgg import rgg_preprocess, rgg_update
from .roadmap import Label, build_prm

CACHE_VERSION = 1
ALGORITHMS = ("RGG", "DRM", "ORACLE")
KINDS = ("node", "edge")
CSV_HEADER = [
    "trial",
    "algorithm",
    "kind",
    "valid",
    "invalid",
    "unknown",
    "valid_star",
    "invalid_star",
    "mislabels",
    "update_ms",
]

DEFAULT_PARAMS = {
    "eps": 0.1,
    "delta": 0.1,
    "robot_spheres": 3,
    "obstacle_spheres": 6,
    "sphere_samples": 32,
    "push_steps": 4,
    "mc_points": 4096,
    "resolution": 4.0,
    "n_nodes": 115,
    "k_neighbors": 4,
    "slack": 0.0,
    "seed": 0,
}


@dataclass(eq=False)
class SceneDoc:
    """Workspace bounds, robot, obstacles with their initial poses, and build parameters."""

    bounds: AABB
    robot_path: Path
    obstacles: list
    params: dict
    name: str = "scene"

    @property
    def robot(self):
        return load_robot(self.robot_path)


def scene_path(name_or_path):
    """A scene file path; bare preset names (``default``, ``cube``, ``slab``, ``thin``) resolve to packaged scenes."""
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return p
    data = resources.files("rgg") / "data"
    fname = "scene.json" if name_or_path == "default" else f"scene_{name_or_path}.json"
    candidate = Path(str(data / fname))
    if not candidate.exists():
        raise FileNotFoundError(f"no scene file or preset named {name_or_path!r}")
    return candidate


def preset_names():
    data = Path(str(resources.files("rgg") / "data"))
    return ["default"] + sorted(p.stem[len("scene_") :] for p in data.glob("scene_*.json"))


def load_scene(path):
    path = scene_path(path)
    doc = json.loads(Path(path).read_text())
    return scene_from_doc(doc, Path(path).parent)


def scene_from_doc(doc, base_dir="."):
    base_dir = Path(base_dir)
    b = doc.get("bounds", {"min": [0, 0, 0], "max": [32, 32, 16]})
    bounds = AABB(b["min"], b["max"])
    if np.any(bounds.max - bounds.min <= 0):
        raise ValueError("scene bounds must have positive extent")
    robot_path = base_dir / doc["robot"]
    if not robot_path.exists():
        raise FileNotFoundError(f"robot description not found: {robot_path}")
    obstacles = []
    for entry in doc.get("obstacles", []):
        if "mesh" in entry and not (base_dir / entry["mesh"]).exists():
            raise FileNotFoundError(f"obstacle mesh not found: {base_dir / entry['mesh']}")
        obstacles.append(Obstacle(mesh_from_doc(entry, base_dir), _pose_from_doc(entry.get("pose"))))
    unknown = set(doc.get("params", {})) - set(DEFAULT_PARAMS)
    if unknown:
        raise ValueError(f"unknown scene parameters: {sorted(unknown)}")
    params = {**DEFAULT_PARAMS, **doc.get("params", {})}
    return SceneDoc(bounds, robot_path, obstacles, params, doc.get("name", "scene"))


@dataclass(eq=False)
class Cache:
    """Everything ``build`` produces; the unit that ``update``/``bench``/``validate`` load."""

    scene: SceneDoc
    robot: object
    roadmap: object
    rgg: object
    drm: object
    version: int = CACHE_VERSION
    build_s: dict = field(default_factory=dict)


def _roadmap_for_edges(robot, scene, edges, seed):
    """Smallest node count whose k-NN roadmap has at least ``edges`` edges (or the closest count)."""
    k, eps = scene.params["k_neighbors"], scene.params["eps"]

    def build(n):
        return build_prm(robot, scene.bounds, n, k, seed=seed, eps=eps)

    lo, hi = 2, max(4, edges)
    while build(hi).n_edges < edges:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if build(mid).n_edges >= edges:
            hi = mid
        else:
            lo = mid
    a, b = build(lo), build(hi)
    return a if abs(a.n_edges - edges) < abs(b.n_edges - edges) else b


def build_cache(scene, edges=None, seed=None):
    p = scene.params
    seed = p["seed"] if seed is None else int(seed)
    robot = scene.robot
    t0 = time.perf_counter()
    if edges is None:
        roadmap = build_prm(robot, scene.bounds, p["n_nodes"], p["k_neighbors"], seed=seed, eps=p["eps"])
    else:
        roadmap = _roadmap_for_edges(robot, scene, int(edges), seed)
    t1 = time.perf_counter()
    rgg = rgg_preprocess(
        roadmap,
        robot,
        scene.obstacles,
        delta=p["delta"],
        sphere_params=SphereGenParams(p["sphere_samples"], p["robot_spheres"], p["push_steps"], p["mc_points"], seed),
        obstacle_sphere_params=SphereGenParams(
            p["sphere_samples"], p["obstacle_spheres"], p["push_steps"], p["mc_points"], seed + 1000
        ),
        slack=p["slack"],
    )
    t2 = time.perf_counter()
    drm = drm_preprocess(roadmap, robot, scene.bounds, p["resolution"])
    t3 = time.perf_counter()
    return Cache(scene, robot, roadmap, rgg, drm, build_s={"roadmap": t1 - t0, "rgg": t2 - t1, "drm": t3 - t2})


def save_cache(cache, path):
    with open(path, "wb") as f:
        pickle.dump({"version": CACHE_VERSION, "cache": cache}, f, protocol=pickle.HIGHEST_PROTOCOL)


def load_cache(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"cache {path} not found; run `rgg build` first")
    with open(path, "rb") as f:
        doc = pickle.load(f)
    if not isinstance(doc, dict) or doc.get("version") != CACHE_VERSION:
        raise ValueError(f"cache {path} has an unsupported version; rebuild it with `rgg build`")
    return doc["cache"]


@dataclass(frozen=True)
class Row:
    trial: int
    algorithm: str
    kind: str
    valid: int
    invalid: int
    unknown: int
    valid_star: int
    invalid_star: int
    mislabels: int
    update_ms: float


@dataclass(eq=False)
class TrialStats:
    """Counts of one trial: one row per algorithm and component kind."""

    trial: int
    rows: list

    def total(self, algorithm, column):
        return sum(getattr(r, column) for r in self.rows if r.algorithm == algorithm)

    def row(self, algorithm, kind):
        for r in self.rows:
            if r.algorithm == algorithm and r.kind == kind:
                return r
        raise KeyError((algorithm, kind))

    def update_ms(self, algorithm):
        return self.rows_for(algorithm)[0].update_ms

    def rows_for(self, algorithm):
        return [r for r in self.rows if r.algorithm == algorithm]

    @property
    def mislabels(self):
        return {a: self.total(a, "mislabels") for a in ("RGG", "DRM")}


def random_poses(scene, rng):
    """Uniformly random orientation per obstacle; translations stay at the scene's."""
    poses = []
    for o in scene.obstacles:
        rot = Rotation.random(random_state=rng).as_matrix()
        poses.append(Pose(rot, o.pose.translation))
    return poses


def trial_rows(trial, n_nodes, rgg_labels, drm_labels, invalid, times):
    rows = []
    sel = {"node": slice(0, n_nodes), "edge": slice(n_nodes, None)}
    for kind in KINDS:
        inv = invalid[sel[kind]]
        vs, ist = int((~inv).sum()), int(inv.sum())
        for alg, labels in (("RGG", rgg_labels), ("DRM", drm_labels)):
            lab = labels[sel[kind]]
            green, red, gray = lab == Label.GREEN, lab == Label.RED, lab == Label.GRAY
            mis = int((green & inv).sum() + (red & ~inv).sum())
            rows.append(Row(trial, alg, kind, int(green.sum()), int(red.sum()), int(gray.sum()), vs, ist, mis, times[alg]))
        rows.append(Row(trial, "ORACLE", kind, vs, ist, 0, vs, ist, 0, times["ORACLE"]))
    return rows


def run_trials(cache, trials, seed=0, n_jobs=None):
    """Randomly re-orient the obstacles ``trials`` times; label with RGG and DRM, then validate exactly."""
    if cache is None or cache.rgg is None or cache.drm is None:
        raise ValueError("no preprocessed indexes; run `rgg build` first")
    rng = np.random.default_rng(seed)
    scene, roadmap = cache.scene, cache.roadmap
    # compile the kernels outside the timed region
    rgg_update(cache.rgg, [o.pose for o in scene.obstacles])
    out = []
    for trial in range(int(trials)):
        poses = random_poses(scene, rng)
        posed = [Obstacle(o.mesh, p) for o, p in zip(scene.obstacles, poses)]
        t0 = time.perf_counter()
        rl = rgg_update(cache.rgg, poses, generation=trial + 1)
        t1 = time.perf_counter()
        dl = drm_update(cache.drm, posed, generation=trial + 1)
        t2 = time.perf_counter()
        gt = ground_truth(roadmap, cache.robot, [o.posed_mesh() for o in posed], n_jobs=n_jobs)
        t3 = time.perf_counter()
        times = {"RGG": 1e3 * (t1 - t0), "DRM": 1e3 * (t2 - t1), "ORACLE": 1e3 * (t3 - t2)}
        out.append(TrialStats(trial, trial_rows(trial, roadmap.n_nodes, rl.labels, dl.labels, gt.invalid, times)))
    return out


@dataclass(frozen=True)
class Describe:
    mean: float
    median: float
    min: float
    max: float
    std: float
    n: int
    skipped: int


def describe(values, skipped=0):
    """Five descriptive statistics; the standard deviation is the population one (ddof 0)."""
    if not values:
        nan = float("nan")
        return Describe(nan, nan, nan, nan, nan, 0, skipped)
    return Describe(
        statistics.fmean(values),
        statistics.median(values),
        min(values),
        max(values),
        statistics.pstdev(values),
        len(values),
        skipped,
    )


def _ratio_series(stats, num, den, kinds):
    values, skipped = [], 0
    for s in stats:
        n = sum(getattr(r, num[1]) for r in s.rows if r.algorithm == num[0] and r.kind in kinds)
        d = sum(getattr(r, den[1]) for r in s.rows if r.algorithm == den[0] and r.kind in kinds)
        if d == 0:
            skipped += 1
        else:
            values.append(n / d)
    return describe(values, skipped)


def summarize(stats, kind=None):
    """Ratio and runtime statistics over trials; ``kind`` restricts counts to nodes or edges."""
    stats = list(stats)
    if not stats:
        raise ValueError("no trial statistics to summarize")
    kinds = KINDS if kind is None else (kind,)
    out = {
        "valid_RGG/valid*": _ratio_series(stats, ("RGG", "valid"), ("ORACLE", "valid"), kinds),
        "valid_DRM/valid*": _ratio_series(stats, ("DRM", "valid"), ("ORACLE", "valid"), kinds),
        "invalid_RGG/invalid*": _ratio_series(stats, ("RGG", "invalid"), ("ORACLE", "invalid"), kinds),
        "unknown_RGG/unknown_DRM": _ratio_series(stats, ("RGG", "unknown"), ("DRM", "unknown"), kinds),
    }
    for alg in ALGORITHMS:
        out[f"{alg}_ms"] = describe([s.update_ms(alg) for s in stats])
    return out


def format_summary(summary):
    lines = [f"{'series':<26}{'mean':>10}{'median':>10}{'min':>10}{'max':>10}{'std':>10}{'n':>5}{'skip':>6}"]
    for name, d in summary.items():
        lines.append(
            f"{name:<26}{d.mean:>10.4f}{d.median:>10.4f}{d.min:>10.4f}{d.max:>10.4f}{d.std:>10.4f}{d.n:>5}{d.skipped:>6}"
        )
    return "\n".join(lines)


def write_csv(stats, f):
    """One row per trial, algorithm and kind; ``update_ms`` is written with full precision."""
    w = csv.writer(f, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in stats:
        for r in s.rows:
            w.writerow([r.trial, r.algorithm, r.kind, r.valid, r.invalid, r.unknown, r.valid_star, r.invalid_star, r.mislabels, repr(r.update_ms)])


def csv_text(stats):
    buf = io.StringIO()
    write_csv(stats, buf)
    return buf.getvalue()


def read_csv(f):
    reader = csv.DictReader(f)
    if reader.fieldnames != CSV_HEADER:
        raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
    by_trial = {}
    for rec in reader:
        row = Row(
            int(rec["trial"]),
            rec["algorithm"],
            rec["kind"],
            *(int(rec[c]) for c in CSV_HEADER[3:9]),
            float(rec["update_ms"]),
        )
        by_trial.setdefault(row.trial, []).append(row)
    return [TrialStats(t, rows) for t, rows in sorted(by_trial.items())]
