"""Mission and configuration JSON I/O.

The mission schema (version "1"):

    {
      "version": "1",
      "frame": "WGS84",
      "origin": {"lat": .., "lon": .., "alt_m": ..},
      "drones": [
        {"id": "drone-0",
         "waypoints": [
           {"lat": .., "lon": .., "alt_m": ..,
            "yaw_deg": ..,            # optional, (-180, 180]
            "gimbal_pitch_deg": ..,   # optional, [-90, 0]
            "capture": true, "inserted": false}, ...]}]}

Serialization is deterministic: fixed key order, shortest round-trip float
repr (full precision preserved), two-space indent, trailing newline.
Every parse error names the JSON path of the offending field.
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass

from .camera import CameraConfig
from .errors import ConfigError, InputError, ParseError
from .geo import GeoPoint, Origin
from .planner import CameraModel, PlanConfig
from .refine import DronePath, GimbalAngles, RefineConfig, Waypoint

MISSION_VERSION = "1"

CONFIG_KEYS = {
    # refine
    "tol0", "dtol", "tol_max", "z_offset", "x_offset", "step", "delta_z",
    "standoff_band",
    # camera search
    "r0", "dr", "r_max", "eps_horizontal",
    # planner
    "altitude", "sidelap", "frontlap", "n_drones", "roi",
    # camera model
    "hfov_deg", "vfov_deg", "image_width_px", "image_height_px",
    # mission-level
    "origin", "capture_on_inserted",
}


def _get(obj, key, path, types, required=True, default=None):
    if not isinstance(obj, dict):
        raise ParseError(f"expected an object, got {type(obj).__name__}", json_path=path)
    if key not in obj:
        if required:
            raise ParseError("missing required field", json_path=f"{path}.{key}")
        return default
    v = obj[key]
    if types is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError("expected a number", json_path=f"{path}.{key}")
        return float(v)
    if not isinstance(v, types):
        raise ParseError(
            f"expected {getattr(types, '__name__', types)}",
            json_path=f"{path}.{key}",
        )
    return v


def _parse_waypoint(obj, path, origin):
    lat = _get(obj, "lat", path, float)
    lon = _get(obj, "lon", path, float)
    alt = _get(obj, "alt_m", path, float)
    try:
        pos = GeoPoint(lat, lon, alt)
    except InputError as e:
        raise ParseError(str(e), json_path=path)
    gimbal = None
    yaw = _get(obj, "yaw_deg", path, float, required=False)
    pitch = _get(obj, "gimbal_pitch_deg", path, float, required=False)
    if (yaw is None) != (pitch is None):
        raise ParseError(
            "yaw_deg and gimbal_pitch_deg must appear together", json_path=path
        )
    if yaw is not None:
        try:
            gimbal = GimbalAngles(yaw_deg=yaw, pitch_deg=pitch)
        except InputError as e:
            raise ParseError(str(e), json_path=path)
    capture = _get(obj, "capture", path, bool, required=False, default=True)
    inserted = _get(obj, "inserted", path, bool, required=False, default=False)
    return Waypoint.from_geo(
        origin, pos, gimbal=gimbal, capture=capture, inserted=inserted
    )


def read_paths(doc):
    """Parse a mission document into (Origin, [DronePath]).

    `doc` may be a dict or a JSON string. A missing origin defaults to the
    first waypoint of the first drone.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", offset=e.pos)
    version = _get(doc, "version", "$", str)
    if version != MISSION_VERSION:
        raise ParseError(
            f"unsupported version {version!r}", json_path="$.version"
        )
    frame = _get(doc, "frame", "$", str, required=False, default="WGS84")
    if frame != "WGS84":
        raise ParseError(f"unsupported frame {frame!r}", json_path="$.frame")

    drones = _get(doc, "drones", "$", list)
    if not drones:
        raise ParseError("at least one drone required", json_path="$.drones")

    origin_obj = _get(doc, "origin", "$", dict, required=False)
    if origin_obj is not None:
        origin = Origin(
            GeoPoint(
                _get(origin_obj, "lat", "$.origin", float),
                _get(origin_obj, "lon", "$.origin", float),
                _get(origin_obj, "alt_m", "$.origin", float),
            )
        )
    else:
        first = _get(drones[0], "waypoints", "$.drones[0]", list)
        if not first:
            raise ParseError(
                "cannot default origin from empty waypoint list",
                json_path="$.drones[0].waypoints",
            )
        wp0 = first[0]
        path0 = "$.drones[0].waypoints[0]"
        origin = Origin(
            GeoPoint(
                _get(wp0, "lat", path0, float),
                _get(wp0, "lon", path0, float),
                _get(wp0, "alt_m", path0, float),
            )
        )

    paths = []
    for di, dobj in enumerate(drones):
        dpath = f"$.drones[{di}]"
        drone_id = _get(dobj, "id", dpath, str)
        wps_obj = _get(dobj, "waypoints", dpath, list)
        if len(wps_obj) < 2:
            raise ParseError(
                "a flyable path needs at least 2 waypoints",
                json_path=f"{dpath}.waypoints",
            )
        wps = [
            _parse_waypoint(w, f"{dpath}.waypoints[{wi}]", origin)
            for wi, w in enumerate(wps_obj)
        ]
        paths.append(DronePath(drone_id, wps))
    return origin, paths


def write_mission(origin: Origin, paths) -> dict:
    """Build the mission document (plain dict, schema version 1)."""
    drones = []
    for path in paths:
        wps = []
        for wp in path.waypoints:
            entry = {
                "lat": wp.position.lat,
                "lon": wp.position.lon,
                "alt_m": wp.position.alt,
            }
            if wp.gimbal is not None:
                entry["yaw_deg"] = wp.gimbal.yaw_deg
                entry["gimbal_pitch_deg"] = wp.gimbal.pitch_deg
            entry["capture"] = wp.capture
            entry["inserted"] = wp.inserted
            wps.append(entry)
        drones.append({"id": path.drone_id, "waypoints": wps})
    return {
        "version": MISSION_VERSION,
        "frame": "WGS84",
        "origin": {
            "lat": origin.anchor.lat,
            "lon": origin.anchor.lon,
            "alt_m": origin.anchor.alt,
        },
        "drones": drones,
    }


def mission_bytes(doc: dict) -> bytes:
    """Deterministic serialization of a mission or config document."""
    return (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode("ascii")


def write_file_atomic(path, payload: bytes):
    """Write via a temp file + rename so failures never leave partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class MissionConfig:
    """All tunables parsed from a config document."""

    refine: RefineConfig
    camera: CameraConfig
    plan: PlanConfig
    cam_model: CameraModel
    origin: Origin
    capture_on_inserted: bool

    def __iter__(self):
        # Unpacks as (refine, camera, plan, cam_model).
        return iter((self.refine, self.camera, self.plan, self.cam_model))


def read_config(doc) -> MissionConfig:
    """Parse a config document; unknown keys are rejected, z_offset is mandatory."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", offset=e.pos)
    if not isinstance(doc, dict):
        raise ParseError("config must be a JSON object", json_path="$")

    for key in doc:
        if key not in CONFIG_KEYS:
            raise ConfigError(key, "unknown key")
    if "z_offset" not in doc:
        raise ConfigError("z_offset", "mandatory key is absent")

    def num(key, default=None):
        v = doc.get(key, default)
        if v is default and key not in doc:
            return default
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(key, "expected a number")
        if not math.isfinite(float(v)):
            raise ConfigError(key, "must be finite")
        return float(v)

    def wrap(cls, **kw):
        try:
            return cls(**kw)
        except InputError as e:
            raise ConfigError(cls.__name__, str(e)) from None

    refine_kw = {}
    for key in ("tol0", "dtol", "tol_max", "x_offset", "step", "delta_z",
                "standoff_band"):
        if key in doc:
            refine_kw[key] = num(key)
    try:
        refine = RefineConfig(z_offset=num("z_offset"), **refine_kw)
    except InputError as e:
        raise ConfigError("z_offset", str(e)) from None

    camera_kw = {k: num(k) for k in ("r0", "dr", "r_max", "eps_horizontal")
                 if k in doc}
    camera = wrap(CameraConfig, **camera_kw)

    roi = None
    if "roi" in doc:
        raw = doc["roi"]
        if not isinstance(raw, list) or any(
            not isinstance(p, list) or len(p) < 2 for p in raw
        ):
            raise ConfigError("roi", "expected a list of [x, y] vertices")
        roi = tuple((float(p[0]), float(p[1])) for p in raw)

    plan_kw = {k: num(k) for k in ("altitude", "sidelap", "frontlap")
               if k in doc}
    if "n_drones" in doc:
        v = doc["n_drones"]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError("n_drones", "expected an integer")
        plan_kw["n_drones"] = v
    plan = wrap(PlanConfig, roi=roi, **plan_kw)

    cam_kw = {k: num(k) for k in ("hfov_deg", "vfov_deg") if k in doc}
    for k in ("image_width_px", "image_height_px"):
        if k in doc:
            v = doc[k]
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(k, "expected an integer")
            cam_kw[k] = v
    cam_model = wrap(CameraModel, **cam_kw)

    if "origin" in doc:
        raw = doc["origin"]
        if not isinstance(raw, list) or len(raw) != 3:
            raise ConfigError("origin", "expected [lat, lon, alt]")
        try:
            origin = Origin(GeoPoint(float(raw[0]), float(raw[1]), float(raw[2])))
        except InputError as e:
            raise ConfigError("origin", str(e)) from None
    else:
        origin = Origin(GeoPoint(0.0, 0.0, 0.0))

    cap = doc.get("capture_on_inserted", True)
    if not isinstance(cap, bool):
        raise ConfigError("capture_on_inserted", "expected a boolean")

    return MissionConfig(
        refine=refine,
        camera=camera,
        plan=plan,
        cam_model=cam_model,
        origin=origin,
        capture_on_inserted=cap,
    )


def config_document(cfg: MissionConfig) -> dict:
    """Normalized config echo; feeding it back to read_config is a fixed point."""
    doc = {
        "tol0": cfg.refine.tol0,
        "dtol": cfg.refine.dtol,
        "tol_max": cfg.refine.tol_max,
        "z_offset": cfg.refine.z_offset,
        "x_offset": cfg.refine.x_offset,
        "step": cfg.refine.step,
        "delta_z": cfg.refine.delta_z,
        "standoff_band": cfg.refine.standoff_band,
        "r0": cfg.camera.r0,
        "dr": cfg.camera.dr,
        "r_max": cfg.camera.r_max,
        "eps_horizontal": cfg.camera.eps_horizontal,
        "altitude": cfg.plan.altitude,
        "sidelap": cfg.plan.sidelap,
        "frontlap": cfg.plan.frontlap,
        "n_drones": cfg.plan.n_drones,
        "hfov_deg": cfg.cam_model.hfov_deg,
        "vfov_deg": cfg.cam_model.vfov_deg,
        "image_width_px": cfg.cam_model.image_width_px,
        "image_height_px": cfg.cam_model.image_height_px,
        "capture_on_inserted": cfg.capture_on_inserted,
        "origin": [cfg.origin.anchor.lat, cfg.origin.anchor.lon,
                   cfg.origin.anchor.alt],
    }
    if cfg.plan.roi is not None:
        doc["roi"] = [[x, y] for x, y in cfg.plan.roi]
    return doc
