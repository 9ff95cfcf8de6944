"""Command line interface: ``rgg build | update | bench | validate``."""

from __future__ import annotations

import argparse
import csv
import sys

from . import harness
from .approximation import Obstacle
from .drm import drm_update
from .geometry import Pose
from .rgg import rgg_update
from .roadmap import Label


def _pose_arg(values, translation):
    """Obstacle pose from 4 numbers (quaternion x y z w) or 3 (Z-Y-X Euler angles, radians)."""
    if len(values) == 4:
        return Pose.from_quaternion(values, translation)
    if len(values) == 3:
        return Pose.from_euler_zyx(values, translation)
    raise ValueError("--pose takes 4 numbers (quaternion x y z w) or 3 (Euler z y x)")


def cmd_build(args):
    scene = harness.load_scene(args.scene)
    cache = harness.build_cache(scene, edges=args.edges, seed=args.seed)
    harness.save_cache(cache, args.out)
    r = cache.roadmap
    print(
        f"built {args.out}: {r.n_nodes} nodes, {r.n_edges} edges, "
        f"{len(cache.rgg.splines)} splines, {cache.drm.n_cells} cells",
        file=sys.stderr,
    )
    return 0


def cmd_update(args):
    cache = harness.load_cache(args.cache)
    scene = cache.scene
    if not scene.obstacles:
        raise ValueError("scene has no obstacles to pose")
    poses = [o.pose for o in scene.obstacles]
    poses[0] = _pose_arg(args.pose, scene.obstacles[0].pose.translation)
    rl = rgg_update(cache.rgg, poses, generation=1)
    dl = drm_update(cache.drm, [Obstacle(o.mesh, p) for o, p in zip(scene.obstacles, poses)], generation=1)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["component", "kind", "index", "rgg", "drm", "witness"])
    r = cache.roadmap
    for flat, cid in enumerate(r.component_ids()):
        wit = rl.witnesses.get(flat)
        w.writerow(
            [flat, cid.kind.value, cid.index, Label(rl.labels[flat]).name, Label(dl.labels[flat]).name, "" if wit is None else str(wit)]
        )
    timing = " ".join(f"{k}={v:.3f}" for k, v in {**rl.timings, "drm_ms": dl.timings["update_ms"]}.items())
    print(timing, file=sys.stderr)
    return 0


def _run(args):
    cache = harness.load_cache(args.cache)
    return harness.run_trials(cache, args.trials, seed=args.seed)


def cmd_bench(args):
    stats = _run(args)
    with open(args.out, "w", newline="") as f:
        harness.write_csv(stats, f)
    print(harness.format_summary(harness.summarize(stats)))
    print("\nedges only")
    print(harness.format_summary(harness.summarize(stats, kind="edge")))
    return 0


def cmd_validate(args):
    stats = _run(args)
    bad = [(s.trial, alg, n) for s in stats for alg, n in s.mislabels.items() if n]
    for trial, alg, n in bad:
        print(f"trial {trial}: {alg} mislabeled {n} components")
    print(f"{len(stats)} trials, {len(bad)} with mislabels")
    return 1 if bad else 0


def make_parser():
    p = argparse.ArgumentParser(prog="rgg", description="Red-Green-Gray roadmap labeling experiments")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a roadmap and both label indexes, then cache them")
    b.add_argument("--scene", default="default", help="scene JSON file or preset name")
    b.add_argument("--out", required=True)
    b.add_argument("--edges", type=int, help="choose the node count to reach about this many edges")
    b.add_argument("--seed", type=int)
    b.set_defaults(func=cmd_build)

    u = sub.add_parser("update", help="label the cached roadmap for one obstacle pose")
    u.add_argument("--cache", required=True)
    u.add_argument("--pose", type=float, nargs="+", required=True, metavar="X")
    u.set_defaults(func=cmd_update)

    for name, func, help_ in (
        ("bench", cmd_bench, "run randomized trials and write the per-trial CSV"),
        ("validate", cmd_validate, "run randomized trials; exit 1 on any mislabel"),
    ):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--cache", required=True)
        c.add_argument("--trials", type=int, default=100)
        c.add_argument("--seed", type=int, default=0)
        if name == "bench":
            c.add_argument("--out", required=True)
        c.set_defaults(func=func)
    return p


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be at least 1")
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as e:
        print(f"rgg: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
