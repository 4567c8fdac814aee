#!/usr/bin/env python3
"""Benchmark the visibility kernel backends (numba vs pure numpy).

Runs the frustum + ray-marched occlusion kernel over a box-on-plane scene
from a ring of oblique viewpoints, times both backends on identical inputs,
and verifies their outputs are bit-equal.

Usage:
    python3 benchmarks/bench_visibility.py [--density D] [--viewpoints N]
"""

import argparse
import math
import time

import numpy as np

from terramission._kernels import (
    HAVE_NUMBA,
    visible_mask,
    visible_mask_numpy,
)
from terramission.evaluation import VisibilityConfig, _camera_basis, _occupancy
from terramission.planner import CameraModel
from terramission.scenes import SceneSpec, generate_scene


def build_inputs(density, n_viewpoints):
    truth = generate_scene(
        SceneSpec("box-on-plane", 60, 60, density,
                  box_x=15.0, box_y=15.0, box_height=12.0)
    )
    cfg = VisibilityConfig(
        camera=CameraModel(hfov_deg=60.0, vfov_deg=45.0),
        max_range=90.0, voxel=1.0, occlusion_slack=1.0,
    )
    occ, gmin = _occupancy(truth, cfg.voxel)
    tan_h = math.tan(math.radians(cfg.camera.hfov_deg) / 2.0)
    tan_v = math.tan(math.radians(cfg.camera.vfov_deg) / 2.0)

    views = []
    for i in range(n_viewpoints):
        angle = 2.0 * math.pi * i / n_viewpoints
        cam = np.array([30.0 + 25.0 * math.cos(angle),
                        30.0 + 25.0 * math.sin(angle), 18.0])
        yaw = math.degrees(math.atan2(30.0 - cam[0], 30.0 - cam[1]))
        fwd, right, up = _camera_basis(yaw, -35.0)
        views.append((cam, fwd, right, up))

    def run(kernel):
        mask = np.zeros(truth.count, dtype=np.bool_)
        for cam, fwd, right, up in views:
            mask |= kernel(truth.xyz, cam, fwd, right, up, tan_h, tan_v,
                           cfg.max_range, occ, gmin, cfg.voxel,
                           cfg.occlusion_slack)
        return mask

    return truth, run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--density", type=float, default=16.0,
                        help="scene density, points per square meter")
    parser.add_argument("--viewpoints", type=int, default=32)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    truth, run = build_inputs(args.density, args.viewpoints)
    print(f"scene: {truth.count} points, {args.viewpoints} viewpoints")
    print(f"numba available: {HAVE_NUMBA}")

    backends = [("numpy", visible_mask_numpy)]
    if HAVE_NUMBA:
        run(visible_mask)  # warm-up: trigger JIT compilation
        backends.insert(0, ("numba", visible_mask))

    results = {}
    for name, kernel in backends:
        best = math.inf
        for _ in range(args.repeats):
            start = time.perf_counter()
            mask = run(kernel)
            best = min(best, time.perf_counter() - start)
        results[name] = (best, mask)
        rate = truth.count * args.viewpoints / best / 1e6
        print(f"{name:>6}: {best * 1e3:8.1f} ms  "
              f"({rate:.1f} M point-view tests/s, {int(mask.sum())} visible)")

    if len(results) == 2:
        (fast, (t_fast, m_fast)), (slow, (t_slow, m_slow)) = results.items()
        agree = np.array_equal(m_fast, m_slow)
        print(f"outputs bit-equal: {agree}")
        print(f"speedup {slow} -> {fast}: {t_slow / t_fast:.2f}x")
        if not agree:
            raise SystemExit("backend outputs differ")


if __name__ == "__main__":
    main()
