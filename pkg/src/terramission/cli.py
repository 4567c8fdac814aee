"""Command-line entry point.

Subcommands: plan, refine, eval, scene, config show. Human-readable output
goes to stderr; machine-readable artifacts go to files or stdout. Exit
codes: 0 success, 1 input/config error, 2 runtime failure.
"""

import argparse
import json
import os
import sys

from . import __version__
from .camera import annotate_angles
from .errors import InputError, MissionError, RuntimeFailure, StandoffUnresolved
from .evaluation import (
    DEFAULT_THRESHOLDS,
    coverage_metrics,
    render_report_table,
)
from .missionio import (
    config_document,
    mission_bytes,
    read_config,
    read_paths,
    write_file_atomic,
    write_mission,
)
from .planner import boustrophedon
from .pointcloud import build_index, load_cloud, save_cloud
from .refine import adjust_path, densify, lateral_standoff
from .scenes import KINDS, SceneSpec, generate_scene


def _load_config(path):
    path = path or os.environ.get("MISSION_CONFIG")
    if not path:
        raise InputError("no config: pass --config or set MISSION_CONFIG")
    try:
        with open(path, "rb") as f:
            return read_config(f.read())
    except OSError as e:
        raise InputError(f"cannot read config {path}: {e.strerror}")


def _load_json(path, what):
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise InputError(f"cannot read {what} {path}: {e.strerror}")


def cmd_plan(args):
    cfg = _load_config(args.config)
    paths = boustrophedon(cfg.plan, cfg.cam_model, cfg.origin)
    doc = write_mission(cfg.origin, paths)
    write_file_atomic(args.output, mission_bytes(doc))
    total = sum(len(p) for p in paths)
    print(
        f"planned {len(paths)} path(s), {total} waypoints -> {args.output}",
        file=sys.stderr,
    )
    return 0


def run_refine_pipeline(origin, paths, index, cfg, workers=1):
    """plan-output paths -> terrain-following, angle-annotated paths.

    Returns (refined paths, warnings).
    """
    warnings = []
    refined = []
    for path in paths:
        path = adjust_path(path, index, cfg.refine, origin, workers=workers)
        path = densify(
            path, index, cfg.refine, origin,
            capture_on_inserted=cfg.capture_on_inserted,
        )
        if cfg.refine.x_offset > 0:
            moved = []
            for i, wp in enumerate(path.waypoints):
                try:
                    moved.append(lateral_standoff(wp, index, cfg.refine, origin))
                except StandoffUnresolved as e:
                    warnings.append(f"{path.drone_id} waypoint {i}: {e}")
                    moved.append(wp)
            path = type(path)(path.drone_id, moved)
        refined.append(path)
    refined, angle_warnings = annotate_angles(
        refined, index, cfg.camera, workers=workers
    )
    warnings.extend(angle_warnings)
    return refined, warnings


def cmd_refine(args):
    cfg = _load_config(args.config)
    origin, paths = read_paths(_load_json(args.paths, "paths file"))
    try:
        cloud = load_cloud(args.cloud)
    except OSError as e:
        raise InputError(f"cannot read cloud {args.cloud}: {e.strerror}")
    index = build_index(cloud)
    refined, warnings = run_refine_pipeline(
        origin, paths, index, cfg, workers=args.threads
    )
    doc = write_mission(origin, refined)
    write_file_atomic(args.output, mission_bytes(doc))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    total = sum(len(p) for p in refined)
    inserted = sum(wp.inserted for p in refined for wp in p.waypoints)
    print(
        f"refined {len(refined)} path(s), {total} waypoints "
        f"({inserted} inserted) -> {args.output}",
        file=sys.stderr,
    )
    return 0


def cmd_eval(args):
    try:
        reconstructed = load_cloud(args.reconstructed)
        truth = load_cloud(args.truth)
    except OSError as e:
        raise InputError(f"cannot read cloud: {e.strerror}")
    report = coverage_metrics(reconstructed, truth, args.thresholds)
    table = render_report_table({"reconstructed": report})
    print(table, file=sys.stderr)
    payload = (report.to_json() + "\n").encode("ascii")
    if args.json:
        write_file_atomic(args.json, payload)
    else:
        sys.stdout.write(payload.decode("ascii"))
    return 0


def cmd_scene(args):
    spec = SceneSpec(
        kind=args.kind,
        size_x=args.size_x,
        size_y=args.size_y,
        density=args.density,
        seed=args.seed,
        slope=args.slope,
        box_x=args.box_x,
        box_y=args.box_y,
        box_height=args.box_height,
        pile_height=args.pile_height,
        pile_sigma=args.pile_sigma,
        step_rise=args.step_rise,
        step_run=args.step_run,
    )
    cloud = generate_scene(spec)
    tmp = args.output + ".partial"
    try:
        save_cloud(tmp, cloud)
        os.replace(tmp, args.output)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    print(f"wrote {cloud.count} points -> {args.output}", file=sys.stderr)
    return 0


def cmd_config_show(args):
    cfg = _load_config(args.config)
    doc = config_document(cfg)
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="terramission",
        description=(
            "Terrain-following 3D mission planning for multi-UAV coverage: "
            "plan 2D paths, refine them over a pre-scan cloud, and evaluate "
            "coverage."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="generate fixed-altitude coverage paths")
    p.add_argument("--config", help="config JSON (or MISSION_CONFIG env)")
    p.add_argument("--output", required=True, help="path JSON output file")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser(
        "refine", help="terrain-adjust paths and annotate gimbal angles"
    )
    p.add_argument("--paths", required=True, help="path JSON from 'plan'")
    p.add_argument("--cloud", required=True, help="pre-scan cloud (PLY/XYZ)")
    p.add_argument("--config", help="config JSON (or MISSION_CONFIG env)")
    p.add_argument("--output", required=True, help="mission JSON output file")
    p.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker threads (output is identical for any count)",
    )
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("eval", help="cloud-to-cloud coverage metrics")
    p.add_argument("--reconstructed", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument(
        "--thresholds",
        type=float,
        nargs="+",
        default=list(DEFAULT_THRESHOLDS),
        help="distance thresholds in meters (default: 0.05 0.10)",
    )
    p.add_argument("--json", help="write the report JSON here instead of stdout")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scene", help="generate a synthetic test scene (PLY)")
    p.add_argument("--kind", required=True, help=f"one of {', '.join(KINDS)}")
    p.add_argument("--size-x", type=float, default=10.0)
    p.add_argument("--size-y", type=float, default=10.0)
    p.add_argument("--density", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slope", type=float, default=0.5)
    p.add_argument("--box-x", type=float, default=4.0)
    p.add_argument("--box-y", type=float, default=4.0)
    p.add_argument("--box-height", type=float, default=5.0)
    p.add_argument("--pile-height", type=float, default=3.0)
    p.add_argument("--pile-sigma", type=float, default=2.0)
    p.add_argument("--step-rise", type=float, default=1.0)
    p.add_argument("--step-run", type=float, default=2.0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_scene)

    p = sub.add_parser("config", help="configuration utilities")
    csub = p.add_subparsers(dest="config_command", required=True)
    c = csub.add_parser("show", help="print the normalized effective config")
    c.add_argument("--config", help="config JSON (or MISSION_CONFIG env)")
    c.set_defaults(func=cmd_config_show)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except RuntimeFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except MissionError as e:  # pragma: no cover - catch-all safety net
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
