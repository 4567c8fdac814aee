"""Terrain-following 3D mission planning for multi-UAV coverage."""

__version__ = "0.1.0"

from .camera import CameraConfig, annotate_angles, compute_pitch, compute_yaw, hemisphere_target
from .errors import (
    ConfigError,
    InputError,
    MissionError,
    NoTargetFound,
    NoTerrainFound,
    ParseError,
    PlanEmpty,
    RuntimeFailure,
    StandoffUnresolved,
)
from .evaluation import (
    CoverageReport,
    VisibilityConfig,
    c2c_distances,
    coverage_metrics,
    surface_coverage,
    visible_points,
)
from .geo import GeoPoint, LocalPoint, Origin, to_local, to_wgs84
from .missionio import MissionConfig, read_config, read_paths, write_mission
from .planner import CameraModel, PlanConfig, boustrophedon, footprint
from .pointcloud import (
    PointCloud,
    PointSet,
    SpatialIndex,
    build_index,
    load_cloud,
    query_disk_xy,
    query_sphere,
    save_cloud,
)
from .refine import (
    DronePath,
    GimbalAngles,
    RefineConfig,
    Waypoint,
    adjust_altitude,
    adjust_path,
    densify,
    lateral_standoff,
)
from .scenes import SceneSpec, generate_scene
