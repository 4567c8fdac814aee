"""Fixed-altitude boustrophedon coverage planner.

Stands in for an external area-division planner: lawnmower rows over a
polygonal region at a constant altitude, row spacing set by sidelap and the
camera footprint, capture spacing along rows set by frontlap; rows are
partitioned contiguously among drones by as-equal-as-possible total length.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from shapely.geometry import LineString, Polygon

from .errors import InputError, PlanEmpty
from .geo import LocalPoint, Origin
from .refine import DronePath, Waypoint


@dataclass(frozen=True)
class CameraModel:
    hfov_deg: float = 84.0
    vfov_deg: float = 62.0
    image_width_px: int = 4000
    image_height_px: int = 3000

    def __post_init__(self):
        for name in ("hfov_deg", "vfov_deg"):
            v = getattr(self, name)
            if not (0.0 < v < 180.0):
                raise InputError(f"{name} must be in (0, 180), got {v}")
        for name in ("image_width_px", "image_height_px"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")


@dataclass(frozen=True)
class PlanConfig:
    altitude: float = 80.0
    sidelap: float = 0.8
    frontlap: float = 0.8
    n_drones: int = 1
    roi: Optional[Sequence] = None  # [(x, y), ...] local meters, z ignored

    def __post_init__(self):
        if not self.altitude > 0:
            raise InputError(f"altitude must be positive, got {self.altitude}")
        for name in ("sidelap", "frontlap"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise InputError(f"{name} must be in [0, 1), got {v}")
        if self.n_drones < 1:
            raise InputError(f"n_drones must be >= 1, got {self.n_drones}")


def footprint(altitude: float, cam: CameraModel):
    """Ground footprint (width, height) of one image from a nadir camera."""
    if not altitude > 0:
        raise InputError(f"altitude must be positive, got {altitude}")
    w = 2.0 * altitude * math.tan(math.radians(cam.hfov_deg) / 2.0)
    h = 2.0 * altitude * math.tan(math.radians(cam.vfov_deg) / 2.0)
    return w, h


def _roi_polygon(cfg: PlanConfig) -> Polygon:
    if cfg.roi is None or len(cfg.roi) < 3:
        raise PlanEmpty("roi: polygon with >= 3 vertices required")
    poly = Polygon([(float(p[0]), float(p[1])) for p in cfg.roi])
    if not poly.is_valid:
        raise PlanEmpty("roi: polygon is self-intersecting or degenerate")
    if poly.area <= 0:
        raise PlanEmpty("roi: polygon has zero area")
    return poly


def _sample_along(seg: LineString, spacing: float):
    """Points every `spacing` meters along a segment, both endpoints included."""
    length = seg.length
    n = int(math.floor(length / spacing + 1e-9))
    offsets = [k * spacing for k in range(n + 1)]
    if length - offsets[-1] > 1e-9:
        offsets.append(length)
    return [seg.interpolate(d) for d in offsets]


def boustrophedon(cfg: PlanConfig, cam: CameraModel, origin: Origin = None):
    """Serpentine coverage paths over the region, one DronePath per drone."""
    if origin is None:
        from .geo import GeoPoint

        origin = Origin(GeoPoint(0.0, 0.0, 0.0))
    poly = _roi_polygon(cfg)
    fw, fh = footprint(cfg.altitude, cam)
    row_spacing = fw * (1.0 - cfg.sidelap)
    cap_spacing = fh * (1.0 - cfg.frontlap)
    if row_spacing <= 0 or cap_spacing <= 0:
        raise InputError("overlap leaves zero spacing")

    minx, miny, maxx, maxy = poly.bounds
    # Rows run along the dominant (longer) bounding-box axis.
    along_x = (maxx - minx) >= (maxy - miny)
    lo, hi = (miny, maxy) if along_x else (minx, maxx)
    n_rows = int(math.floor((hi - lo) / row_spacing + 1e-9)) + 1

    rows = []  # (offset, [LineString segments clipped to the polygon])
    for k in range(n_rows):
        c = lo + k * row_spacing
        if along_x:
            line = LineString([(minx - 1.0, c), (maxx + 1.0, c)])
        else:
            line = LineString([(c, miny - 1.0), (c, maxy + 1.0)])
        clipped = poly.intersection(line)
        segs = []
        if clipped.geom_type == "LineString" and clipped.length > 0:
            segs = [clipped]
        elif clipped.geom_type == "MultiLineString":
            segs = sorted(
                (g for g in clipped.geoms if g.length > 0),
                key=lambda g: g.bounds,
            )
        if segs:
            rows.append(segs)
    if not rows:
        raise PlanEmpty("roi: polygon too small for a single coverage row")
    if len(rows) < cfg.n_drones:
        raise PlanEmpty(
            f"roi: only {len(rows)} rows for {cfg.n_drones} drones"
        )

    row_lengths = [sum(s.length for s in segs) for segs in rows]
    groups = _split_contiguous(row_lengths, cfg.n_drones)

    paths = []
    row_idx = 0
    for d, count in enumerate(groups):
        waypoints = []
        for j in range(count):
            segs = rows[row_idx + j]
            reverse = j % 2 == 1
            ordered = list(reversed(segs)) if reverse else segs
            for seg in ordered:
                pts = _sample_along(seg, cap_spacing)
                if reverse:
                    pts = list(reversed(pts))
                for p in pts:
                    waypoints.append(
                        Waypoint.from_local(
                            origin, LocalPoint(p.x, p.y, cfg.altitude)
                        )
                    )
        row_idx += count
        if len(waypoints) < 2:
            raise PlanEmpty(f"roi: drone {d} received fewer than 2 waypoints")
        paths.append(DronePath(f"drone-{d}", waypoints))
    return paths


def _split_contiguous(lengths, n):
    """Split lengths into n contiguous groups of near-equal totals.

    Returns the group sizes. Greedy cut at the cumulative-length fractions
    k/n; every group gets at least one row.
    """
    total = sum(lengths)
    m = len(lengths)
    cuts = [0]
    cum = 0.0
    j = 0
    for k in range(1, n):
        target = total * k / n
        while j < m - (n - k) and cum + lengths[j] / 2 < target:
            cum += lengths[j]
            j += 1
        j = max(j, cuts[-1] + 1)
        cuts.append(j)
        cum = sum(lengths[:j])
    cuts.append(m)
    return [cuts[i + 1] - cuts[i] for i in range(n)]
