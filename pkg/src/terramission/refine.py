"""Terrain-following waypoint refinement.

Three passes over fixed-altitude paths, all driven by the pre-scan cloud:

* altitude adjustment: expanding-tolerance column search, new altitude =
  mean terrain z under the waypoint + z_offset;
* densification: walk each leg with a fixed stride and insert a waypoint
  whenever the terrain-adjusted altitude drifts more than delta_z from the
  last emitted waypoint;
* lateral standoff: push waypoints horizontally away from structures that
  intrude within x_offset in the waypoint's altitude band.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

from .errors import InputError, NoTerrainFound, StandoffUnresolved
from .geo import GeoPoint, LocalPoint, Origin, to_local, to_wgs84
from .pointcloud import PointSet, SpatialIndex, query_disk_xy


@dataclass(frozen=True)
class GimbalAngles:
    """Camera orientation: yaw clockwise from north in (-180, 180],
    pitch in [-90, 0] with -90 = nadir."""

    yaw_deg: float
    pitch_deg: float

    def __post_init__(self):
        if not (-180.0 < self.yaw_deg <= 180.0):
            raise InputError(f"yaw {self.yaw_deg} outside (-180, 180]")
        if not (-90.0 <= self.pitch_deg <= 0.0):
            raise InputError(f"pitch {self.pitch_deg} outside [-90, 0]")


@dataclass(frozen=True)
class Waypoint:
    position: GeoPoint
    local: LocalPoint
    gimbal: Optional[GimbalAngles] = None
    inserted: bool = False
    capture: bool = True

    @classmethod
    def from_geo(cls, origin: Origin, position: GeoPoint, **kw) -> "Waypoint":
        return cls(position=position, local=to_local(origin, position), **kw)

    @classmethod
    def from_local(cls, origin: Origin, local: LocalPoint, **kw) -> "Waypoint":
        return cls(position=to_wgs84(origin, local), local=local, **kw)

    def moved_to(self, origin: Origin, local: LocalPoint) -> "Waypoint":
        return replace(self, local=local, position=to_wgs84(origin, local))


@dataclass(frozen=True)
class DronePath:
    drone_id: str
    waypoints: tuple

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))

    def __len__(self):
        return len(self.waypoints)


@dataclass(frozen=True)
class RefineConfig:
    z_offset: float
    tol0: float = 0.5
    dtol: float = 0.5
    tol_max: float = 50.0
    x_offset: float = 0.0
    step: float = 1.0
    delta_z: float = 2.0
    standoff_band: float = 2.0

    def __post_init__(self):
        for name in ("tol0", "dtol", "step", "delta_z"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("z_offset", "x_offset", "standoff_band"):
            if getattr(self, name) < 0:
                raise InputError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.tol0 > self.tol_max:
            raise InputError(f"tol0 {self.tol0} exceeds tol_max {self.tol_max}")
        for name in (
            "z_offset", "tol0", "dtol", "tol_max", "x_offset",
            "step", "delta_z", "standoff_band",
        ):
            if not math.isfinite(getattr(self, name)):
                raise InputError(f"{name} must be finite")


def terrain_column(
    index: SpatialIndex, x: float, y: float, cfg: RefineConfig
) -> tuple[PointSet, float]:
    """First non-empty disk query on the tolerance schedule tol0 + k*dtol.

    Returns (points, tolerance actually used). Raises NoTerrainFound if the
    schedule passes tol_max with nothing found.
    """
    k = 0
    while True:
        tol = cfg.tol0 + k * cfg.dtol
        if tol > cfg.tol_max:
            raise NoTerrainFound(x, y, cfg.tol_max)
        found = query_disk_xy(index, x, y, tol)
        if not found.empty:
            return found, tol
        k += 1


def adjust_altitude(
    wp: Waypoint, index: SpatialIndex, cfg: RefineConfig, origin: Origin
) -> Waypoint:
    """Set the waypoint altitude to mean terrain z under it + z_offset."""
    column, _ = terrain_column(index, wp.local.x, wp.local.y, cfg)
    new_local = LocalPoint(wp.local.x, wp.local.y, column.mean_z() + cfg.z_offset)
    return wp.moved_to(origin, new_local)


def adjust_path(
    path: DronePath,
    index: SpatialIndex,
    cfg: RefineConfig,
    origin: Origin,
    workers: int = 1,
) -> DronePath:
    """Altitude-adjust every waypoint independently; order and count preserved."""
    if len(path) == 0:
        raise InputError(f"path {path.drone_id!r} has no waypoints")

    def one(item):
        i, wp = item
        try:
            return adjust_altitude(wp, index, cfg, origin)
        except NoTerrainFound as e:
            raise NoTerrainFound(
                e.x, e.y, e.tol_max, drone_id=path.drone_id, waypoint_index=i
            ) from None

    items = list(enumerate(path.waypoints))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            adjusted = list(pool.map(one, items))
    else:
        adjusted = [one(it) for it in items]
    return DronePath(path.drone_id, adjusted)


def densify(
    path: DronePath,
    index: SpatialIndex,
    cfg: RefineConfig,
    origin: Origin,
    capture_on_inserted: bool = True,
) -> DronePath:
    """Insert waypoints where terrain-adjusted altitude drifts beyond delta_z.

    Walks each leg between consecutive original waypoints in horizontal
    strides of cfg.step; a sample whose adjusted altitude differs from the
    most recently emitted waypoint's altitude by more than delta_z becomes
    a new waypoint (inserted=True). Originals are always retained.
    """
    if len(path) == 0:
        raise InputError(f"path {path.drone_id!r} has no waypoints")
    out = [path.waypoints[0]]
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        dx = b.local.x - a.local.x
        dy = b.local.y - a.local.y
        length = math.hypot(dx, dy)
        if length > 0:
            ux, uy = dx / length, dy / length
            k = 1
            while k * cfg.step < length:
                sx = a.local.x + ux * k * cfg.step
                sy = a.local.y + uy * k * cfg.step
                column, _ = terrain_column(index, sx, sy, cfg)
                alt = column.mean_z() + cfg.z_offset
                if abs(alt - out[-1].local.z) > cfg.delta_z:
                    out.append(
                        Waypoint.from_local(
                            origin,
                            LocalPoint(sx, sy, alt),
                            inserted=True,
                            capture=capture_on_inserted,
                        )
                    )
                k += 1
        out.append(b)
    return DronePath(path.drone_id, out)


def _offending(index, wp_local, cfg) -> PointSet:
    disk = query_disk_xy(index, wp_local.x, wp_local.y, cfg.x_offset)
    if disk.empty:
        return disk
    keep = abs(disk.points[:, 2] - wp_local.z) <= cfg.standoff_band
    return PointSet(indices=disk.indices[keep], points=disk.points[keep])


def lateral_standoff(
    wp: Waypoint, index: SpatialIndex, cfg: RefineConfig, origin: Origin
) -> Waypoint:
    """Push the waypoint horizontally clear of structures within x_offset.

    Displacement steps of dtol along the direction from the offenders'
    centroid toward the waypoint, re-evaluated each step; bounded by
    ceil(2 * x_offset / dtol) iterations. No-op when x_offset == 0.
    """
    if cfg.x_offset == 0:
        return wp
    local = wp.local
    offending = _offending(index, local, cfg)
    if offending.empty:
        return wp
    max_iters = math.ceil(2 * cfg.x_offset / cfg.dtol)
    for _ in range(max_iters):
        cx = float(offending.points[:, 0].mean())
        cy = float(offending.points[:, 1].mean())
        dx, dy = local.x - cx, local.y - cy
        norm = math.hypot(dx, dy)
        if norm < 1e-12:
            # Centroid coincides with the waypoint: no escape direction.
            raise StandoffUnresolved(local.x, local.y, local.z)
        local = LocalPoint(
            local.x + dx / norm * cfg.dtol,
            local.y + dy / norm * cfg.dtol,
            local.z,
        )
        offending = _offending(index, local, cfg)
        if offending.empty:
            return wp.moved_to(origin, local)
    raise StandoffUnresolved(local.x, local.y, local.z)
