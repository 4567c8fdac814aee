"""Deterministic synthetic test scenes.

Grid-sampled point clouds used as stand-ins for pre-scan and ground-truth
models: a flat plane, a linear ramp, a staircase, a rounded pile, and a box
on a plane (the high-relief case with true vertical faces).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .pointcloud import PointCloud

KINDS = ("plane", "ramp", "box-on-plane", "pile", "staircase")


@dataclass(frozen=True)
class SceneSpec:
    kind: str
    size_x: float = 10.0
    size_y: float = 10.0
    density: float = 100.0  # points per square meter
    seed: int = 0
    slope: float = 0.5  # ramp: z = slope * x
    box_x: float = 4.0  # box-on-plane footprint
    box_y: float = 4.0
    box_height: float = 5.0
    pile_height: float = 3.0
    pile_sigma: float = 2.0  # gaussian mound spread
    step_rise: float = 1.0  # staircase
    step_run: float = 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown scene kind {self.kind!r}; one of {KINDS}")
        if not self.density > 0:
            raise InputError(f"density must be positive, got {self.density}")
        if self.size_x <= 0 or self.size_y <= 0:
            raise InputError("scene size must be positive")


def _grid(size_x, size_y, density):
    """Cell-center grid over [0, size_x] x [0, size_y] at the given density."""
    spacing = 1.0 / math.sqrt(density)
    nx = max(1, round(size_x / spacing))
    ny = max(1, round(size_y / spacing))
    xs = (np.arange(nx) + 0.5) * (size_x / nx)
    ys = (np.arange(ny) + 0.5) * (size_y / ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return gx.ravel(), gy.ravel()


def _face_grid(u_len, v_len, density):
    spacing = 1.0 / math.sqrt(density)
    nu = max(1, round(u_len / spacing))
    nv = max(1, round(v_len / spacing))
    us = (np.arange(nu) + 0.5) * (u_len / nu)
    vs = (np.arange(nv) + 0.5) * (v_len / nv)
    gu, gv = np.meshgrid(us, vs, indexing="ij")
    return gu.ravel(), gv.ravel()


def generate_scene(spec: SceneSpec) -> PointCloud:
    """Deterministic cloud for the spec; identical bytes for identical specs."""
    x, y = _grid(spec.size_x, spec.size_y, spec.density)

    if spec.kind == "plane":
        z = np.zeros_like(x)
        pts = np.column_stack([x, y, z])

    elif spec.kind == "ramp":
        pts = np.column_stack([x, y, spec.slope * x])

    elif spec.kind == "staircase":
        z = spec.step_rise * np.floor(x / spec.step_run)
        pts = np.column_stack([x, y, z])

    elif spec.kind == "pile":
        cx, cy = spec.size_x / 2.0, spec.size_y / 2.0
        r2 = (x - cx) ** 2 + (y - cy) ** 2
        z = spec.pile_height * np.exp(-r2 / (2.0 * spec.pile_sigma**2))
        pts = np.column_stack([x, y, z])

    elif spec.kind == "box-on-plane":
        cx, cy = spec.size_x / 2.0, spec.size_y / 2.0
        x0, x1 = cx - spec.box_x / 2.0, cx + spec.box_x / 2.0
        y0, y1 = cy - spec.box_y / 2.0, cy + spec.box_y / 2.0
        h = spec.box_height
        # Ground plane outside the box footprint.
        outside = ~((x > x0) & (x < x1) & (y > y0) & (y < y1))
        parts = [np.column_stack([x[outside], y[outside], np.zeros(outside.sum())])]
        # Box top.
        tu, tv = _face_grid(spec.box_x, spec.box_y, spec.density)
        parts.append(np.column_stack([x0 + tu, y0 + tv, np.full_like(tu, h)]))
        # Four vertical faces.
        fu, fv = _face_grid(spec.box_x, h, spec.density)
        parts.append(np.column_stack([x0 + fu, np.full_like(fu, y0), fv]))
        parts.append(np.column_stack([x0 + fu, np.full_like(fu, y1), fv]))
        gu, gv = _face_grid(spec.box_y, h, spec.density)
        parts.append(np.column_stack([np.full_like(gu, x0), y0 + gu, gv]))
        parts.append(np.column_stack([np.full_like(gu, x1), y0 + gu, gv]))
        pts = np.vstack(parts)

    else:  # pragma: no cover - guarded by SceneSpec validation
        raise InputError(f"unknown scene kind {spec.kind!r}")

    return PointCloud(np.ascontiguousarray(pts, dtype=np.float64))
