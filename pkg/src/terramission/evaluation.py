"""Coverage evaluation: cloud-to-cloud metrics and a visibility oracle.

Cloud-to-cloud distance is plain nearest-neighbor Euclidean distance.
Precision at threshold t = fraction of reconstructed points within t of the
truth cloud; recall swaps the roles; F1 is their harmonic mean (0 when both
are 0). The visibility oracle stands in for photogrammetric reconstruction
at desk scale: a truth point counts as covered when at least one annotated
viewpoint sees it inside its camera frustum with an unobstructed sight ray
over the voxelized truth cloud.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import visible_mask
from .errors import InputError
from .planner import CameraModel
from .pointcloud import PointCloud, PointSet, build_index

DEFAULT_THRESHOLDS = (0.05, 0.10)


@dataclass(frozen=True)
class CoverageReport:
    thresholds: tuple
    precision: tuple
    recall: tuple
    f1: tuple

    def to_dict(self):
        return {
            "thresholds_m": list(self.thresholds),
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class VisibilityConfig:
    camera: CameraModel
    max_range: float = 100.0
    voxel: float = 0.5
    occlusion_slack: float = 0.5

    def __post_init__(self):
        for name in ("max_range", "voxel", "occlusion_slack"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")


def c2c_distances(a: PointCloud, b: PointCloud) -> np.ndarray:
    """For each point of a, the Euclidean distance to its nearest point in b."""
    if a.count == 0 or b.count == 0:
        raise InputError("cloud-to-cloud distance needs two non-empty clouds")
    index = build_index(b)
    d, _ = index.tree3d.query(a.xyz)
    return np.asarray(d, dtype=np.float64)


def coverage_metrics(
    reconstructed: PointCloud, truth: PointCloud, thresholds
) -> CoverageReport:
    """Thresholded precision/recall/F1 between a reconstruction and the truth."""
    thresholds = tuple(float(t) for t in thresholds)
    if not thresholds:
        raise InputError("at least one threshold required")
    d_rec = c2c_distances(reconstructed, truth)
    d_tru = c2c_distances(truth, reconstructed)
    precision, recall, f1 = [], [], []
    for t in thresholds:
        p = float(np.count_nonzero(d_rec <= t)) / d_rec.size
        r = float(np.count_nonzero(d_tru <= t)) / d_tru.size
        precision.append(p)
        recall.append(r)
        f1.append(2.0 * p * r / (p + r) if p + r > 0 else 0.0)
    return CoverageReport(
        thresholds=thresholds,
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
    )


def render_report_table(reports: dict) -> str:
    """Aligned text table: one row per method, columns per threshold x metric."""
    any_report = next(iter(reports.values()))
    ths = any_report.thresholds
    header = ["Method"]
    for name in ("Precision (%)", "Recall (%)", "F1-Score (%)"):
        for t in ths:
            header.append(f"{name.split(' ')[0]}@{t * 100:g}cm")
    lines = []
    rows = [header]
    for method, rep in reports.items():
        row = [method]
        for series in (rep.precision, rep.recall, rep.f1):
            for v in series:
                row.append(f"{v * 100:.2f}")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    for r in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)


def _camera_basis(yaw_deg: float, pitch_deg: float):
    """Orthonormal (forward, right, up) for aeronautical yaw + depression pitch."""
    yaw = math.radians(yaw_deg)
    pitch = math.radians(pitch_deg)
    fwd = np.array(
        [
            math.sin(yaw) * math.cos(pitch),
            math.cos(yaw) * math.cos(pitch),
            math.sin(pitch),
        ]
    )
    right = np.array([math.cos(yaw), -math.sin(yaw), 0.0])
    up = np.cross(right, fwd)
    return fwd, right, up


def _occupancy(truth: PointCloud, voxel: float):
    gmin = truth.xyz.min(axis=0)
    extent = truth.xyz.max(axis=0) - gmin
    shape = np.maximum(np.floor(extent / voxel).astype(np.int64) + 1, 1)
    occ = np.zeros(tuple(shape), dtype=np.bool_)
    cells = np.floor((truth.xyz - gmin) / voxel).astype(np.int64)
    occ[cells[:, 0], cells[:, 1], cells[:, 2]] = True
    return occ, gmin


def visible_points(viewpoints, truth: PointCloud, cfg: VisibilityConfig) -> PointSet:
    """Truth points seen, unoccluded, by at least one annotated viewpoint."""
    if truth.count == 0:
        raise InputError("truth cloud is empty")
    tan_h = math.tan(math.radians(cfg.camera.hfov_deg) / 2.0)
    tan_v = math.tan(math.radians(cfg.camera.vfov_deg) / 2.0)
    occ, gmin = _occupancy(truth, cfg.voxel)
    mask = np.zeros(truth.count, dtype=np.bool_)
    for wp in viewpoints:
        if wp.gimbal is None:
            raise InputError("viewpoint without gimbal angles")
        fwd, right, up = _camera_basis(wp.gimbal.yaw_deg, wp.gimbal.pitch_deg)
        cam = np.array(wp.local.as_tuple())
        mask |= visible_mask(
            truth.xyz,
            cam,
            fwd,
            right,
            up,
            tan_h,
            tan_v,
            cfg.max_range,
            occ,
            gmin,
            cfg.voxel,
            cfg.occlusion_slack,
        )
    idx = np.flatnonzero(mask).astype(np.int64)
    return PointSet(indices=idx, points=truth.xyz[idx])


def classify_vertical(truth: PointCloud, k: int = 16, normal_z_max: float = 0.5):
    """Boolean mask of truth points lying on steep (near-vertical) surfaces.

    A point is vertical-surface when the best-fit plane of its k nearest
    neighbors has |normal_z| < normal_z_max.
    """
    if truth.count < k:
        raise InputError(f"cloud too sparse for {k}-point neighborhoods")
    index = build_index(truth)
    _, nn = index.tree3d.query(truth.xyz, k=k)
    neigh = truth.xyz[nn]  # (n, k, 3)
    centered = neigh - neigh.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / k
    _, vecs = np.linalg.eigh(cov)
    normals = vecs[:, :, 0]  # smallest-eigenvalue direction
    return np.abs(normals[:, 2]) < normal_z_max


def surface_coverage(viewpoints, truth: PointCloud, cfg: VisibilityConfig):
    """Fractions of vertical- and horizontal-surface truth points visible.

    Returns (vertical_fraction, horizontal_fraction); a fraction is NaN when
    its surface class is empty.
    """
    vertical = classify_vertical(truth)
    visible = np.zeros(truth.count, dtype=np.bool_)
    vis = visible_points(viewpoints, truth, cfg)
    visible[vis.indices] = True

    def frac(mask):
        total = int(mask.sum())
        if total == 0:
            return float("nan")
        return float(np.count_nonzero(visible & mask)) / total

    return frac(vertical), frac(~vertical)
