"""Per-waypoint gimbal orientation via downward-hemisphere target search.

For each waypoint, spheres of growing radius are queried until at least one
cloud point strictly below the waypoint is found; the point whose z is
closest to the found cluster's mean z becomes the view target, and yaw/pitch
are the angles aligning the camera with it.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NoTargetFound
from .geo import LocalPoint
from .pointcloud import SpatialIndex, query_sphere
from .refine import DronePath, GimbalAngles, Waypoint


@dataclass(frozen=True)
class CameraConfig:
    r0: float = 1.0
    dr: float = 1.0
    r_max: float = 200.0
    eps_horizontal: float = 0.1

    def __post_init__(self):
        if not self.r0 > 0:
            raise InputError(f"r0 must be positive, got {self.r0}")
        if not self.dr > 0:
            raise InputError(f"dr must be positive, got {self.dr}")
        if self.r0 > self.r_max:
            raise InputError(f"r0 {self.r0} exceeds r_max {self.r_max}")
        if self.eps_horizontal < 0:
            raise InputError(f"eps_horizontal must be >= 0, got {self.eps_horizontal}")


def hemisphere_target(
    wp: Waypoint, index: SpatialIndex, cfg: CameraConfig
) -> LocalPoint:
    """First point strictly below the waypoint on the expanding-sphere schedule.

    Among the first non-empty below-plane set, picks the point with z closest
    to the set's mean z; ties broken by distance to the waypoint, then by
    lexicographic (x, y, z).
    """
    wx, wy, wz = wp.local.as_tuple()
    k = 0
    while True:
        r = cfg.r0 + k * cfg.dr
        if r > cfg.r_max:
            raise NoTargetFound(wx, wy, wz, cfg.r_max)
        sphere = query_sphere(index, wp.local, r)
        if not sphere.empty:
            below = sphere.points[sphere.points[:, 2] < wz]
            if below.shape[0]:
                mean_z = below[:, 2].mean()
                px, py, pz = below[:, 0], below[:, 1], below[:, 2]
                d2 = (px - wx) ** 2 + (py - wy) ** 2 + (pz - wz) ** 2
                # lexsort: last key is primary, so this minimizes the tuple
                # (|pz - mean_z|, d2, px, py, pz).
                best = np.lexsort((pz, py, px, d2, np.abs(pz - mean_z)))[0]
                return LocalPoint(
                    float(px[best]), float(py[best]), float(pz[best])
                )
        k += 1


def _heading_deg(dx: float, dy: float) -> float:
    yaw = math.degrees(math.atan2(dx, dy))
    if yaw <= -180.0:
        yaw += 360.0
    return yaw


def compute_yaw(
    wp: Waypoint,
    target: LocalPoint,
    cfg: CameraConfig,
    next_wp: Waypoint = None,
) -> float:
    """Heading toward the target, clockwise from north, in (-180, 180].

    When the target sits (nearly) straight below, falls back to the heading
    toward the next waypoint, or 0 if there is none.
    """
    dx = target.x - wp.local.x
    dy = target.y - wp.local.y
    if math.hypot(dx, dy) < cfg.eps_horizontal:
        if next_wp is not None:
            ndx = next_wp.local.x - wp.local.x
            ndy = next_wp.local.y - wp.local.y
            if math.hypot(ndx, ndy) > 0:
                return _heading_deg(ndx, ndy)
        return 0.0
    return _heading_deg(dx, dy)


def compute_pitch(wp: Waypoint, target: LocalPoint) -> float:
    """Depression angle toward the target, in [-90, 0); -90 is nadir."""
    dz = wp.local.z - target.z
    if dz <= 0:
        raise InputError("target must be strictly below the waypoint")
    dh = math.hypot(target.x - wp.local.x, target.y - wp.local.y)
    return -math.degrees(math.atan2(dz, dh))


def annotate_angles(
    paths, index: SpatialIndex, cfg: CameraConfig, workers: int = 1
):
    """Attach GimbalAngles to every waypoint of every path.

    Waypoints whose hemisphere search exhausts r_max degrade to nadir and are
    reported in the returned warnings list rather than aborting the mission.
    Returns (annotated paths, warnings).
    """
    warnings = []

    def one(job):
        path, i, wp = job
        nxt = path.waypoints[i + 1] if i + 1 < len(path) else None
        try:
            target = hemisphere_target(wp, index, cfg)
        except NoTargetFound as e:
            yaw = compute_yaw(wp, wp.local, cfg, next_wp=nxt)
            return wp, GimbalAngles(yaw_deg=yaw, pitch_deg=-90.0), str(e)
        yaw = compute_yaw(wp, target, cfg, next_wp=nxt)
        pitch = compute_pitch(wp, target)
        return wp, GimbalAngles(yaw_deg=yaw, pitch_deg=max(pitch, -90.0)), None

    jobs = [(p, i, wp) for p in paths for i, wp in enumerate(p.waypoints)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(j) for j in jobs]

    out = []
    cursor = 0
    for path in paths:
        annotated = []
        for _ in path.waypoints:
            wp, angles, warning = results[cursor]
            cursor += 1
            annotated.append(
                Waypoint(
                    position=wp.position,
                    local=wp.local,
                    gimbal=angles,
                    inserted=wp.inserted,
                    capture=wp.capture,
                )
            )
            if warning is not None:
                warnings.append(warning)
        out.append(DronePath(path.drone_id, annotated))
    return out, warnings
