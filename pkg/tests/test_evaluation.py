import math

import numpy as np
import pytest

from terramission._kernels import visible_mask_numpy, visible_mask_python
from terramission.errors import InputError
from terramission.evaluation import (
    DEFAULT_THRESHOLDS,
    VisibilityConfig,
    c2c_distances,
    classify_vertical,
    coverage_metrics,
    render_report_table,
    surface_coverage,
    visible_points,
)
from terramission.geo import LocalPoint
from terramission.planner import CameraModel
from terramission.pointcloud import PointCloud
from terramission.refine import GimbalAngles, Waypoint
from terramission.scenes import SceneSpec, generate_scene

from conftest import grid_cloud


def _viewpoint(origin, x, y, z, yaw, pitch):
    return Waypoint.from_local(
        origin, LocalPoint(x, y, z), gimbal=GimbalAngles(yaw, pitch)
    )


def _vis_cfg(hfov=60.0, vfov=45.0, **kw):
    return VisibilityConfig(CameraModel(hfov_deg=hfov, vfov_deg=vfov), **kw)


def test_c2c_identity():
    cloud = generate_scene(SceneSpec("pile", density=4.0))
    assert (c2c_distances(cloud, cloud) == 0.0).all()


def test_c2c_single_pair():
    a = PointCloud([[0.0, 0.0, 0.0]])
    b = PointCloud([[0.0, 0.0, 0.04]])
    assert c2c_distances(a, b) == pytest.approx([0.04])


def test_c2c_matches_brute_force():
    rng = np.random.default_rng(9)
    a = PointCloud(rng.uniform(-5, 5, size=(800, 3)))
    b = PointCloud(rng.uniform(-5, 5, size=(600, 3)))
    got = c2c_distances(a, b)
    diff = a.xyz[:, None, :] - b.xyz[None, :, :]
    want = np.sqrt((diff**2).sum(axis=2)).min(axis=1)
    assert np.array_equal(got, want) or np.allclose(got, want, atol=0)


def test_metrics_identity():
    cloud = generate_scene(SceneSpec("ramp", density=4.0))
    rep = coverage_metrics(cloud, cloud, DEFAULT_THRESHOLDS)
    assert rep.precision == (1.0, 1.0)
    assert rep.recall == (1.0, 1.0)
    assert rep.f1 == (1.0, 1.0)


def test_metrics_rigid_shift():
    truth = generate_scene(SceneSpec("plane", density=25.0))
    shifted = PointCloud(truth.xyz + [0.0, 0.0, 0.07])
    rep = coverage_metrics(shifted, truth, (0.05, 0.10))
    assert rep.precision == (0.0, 1.0)
    assert rep.recall == (0.0, 1.0)
    assert rep.f1 == (0.0, 1.0)


def test_metrics_symmetry():
    rng = np.random.default_rng(4)
    a = PointCloud(rng.uniform(0, 5, size=(300, 3)))
    b = PointCloud(rng.uniform(0, 5, size=(400, 3)))
    ts = (0.1, 0.5, 1.0)
    ab = coverage_metrics(a, b, ts)
    ba = coverage_metrics(b, a, ts)
    assert ab.precision == ba.recall
    assert ab.recall == ba.precision


def test_metrics_monotone_in_threshold():
    rng = np.random.default_rng(8)
    a = PointCloud(rng.uniform(0, 5, size=(200, 3)))
    b = PointCloud(rng.uniform(0, 5, size=(200, 3)))
    ts = (0.05, 0.1, 0.2, 0.4, 0.8)
    rep = coverage_metrics(a, b, ts)
    assert list(rep.precision) == sorted(rep.precision)
    assert list(rep.recall) == sorted(rep.recall)


def test_metrics_empty_thresholds():
    cloud = PointCloud([[0.0, 0.0, 0.0]])
    with pytest.raises(InputError):
        coverage_metrics(cloud, cloud, ())


def test_report_table_layout():
    cloud = PointCloud([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    rep = coverage_metrics(cloud, cloud, (0.05, 0.10))
    table = render_report_table({"baseline": rep, "refined": rep})
    lines = table.splitlines()
    assert "Precision@5cm" in lines[0] and "F1-Score@10cm" in lines[0]
    assert lines[1].startswith("baseline") and "100.00" in lines[1]


def test_nadir_sees_plane(origin):
    truth = grid_cloud(-5, 5, -5, 5, 0.5, lambda x, y: np.zeros_like(x))
    vp = _viewpoint(origin, 0, 0, 20, 0.0, -90.0)
    # Slack of one meter keeps the plane's own voxels from shadowing
    # shallow-incidence neighbors at the patch edge.
    vis = visible_points(
        [vp], truth, _vis_cfg(hfov=90.0, vfov=90.0, occlusion_slack=1.0)
    )
    # Every plane point is inside the frustum and unoccluded.
    assert len(vis) == truth.count


def test_occlusion_behind_wall(origin):
    # Camera looks north; a wall point sits between it and the far point.
    truth = PointCloud([
        [0.0, 5.0, 0.0],    # wall (occluder)
        [0.0, 10.0, 0.0],   # behind the wall
        [3.0, 5.0, 0.0],    # off to the side, clear line of sight
    ])
    cfg = _vis_cfg(hfov=90.0, vfov=90.0, voxel=0.5, occlusion_slack=0.25)
    vp = _viewpoint(origin, 0.0, 0.0, 0.0, 0.0, -0.0)
    vis = visible_points([vp], truth, cfg)
    assert 0 in vis.indices        # the wall itself is seen
    assert 1 not in vis.indices    # the point behind it is not
    assert 2 in vis.indices


def test_out_of_range_invisible(origin):
    truth = PointCloud([[0.0, 50.0, 0.0], [0.0, 2.0, 0.0]])
    cfg = _vis_cfg(hfov=90.0, vfov=90.0, max_range=10.0)
    vp = _viewpoint(origin, 0.0, 0.0, 0.0, 0.0, -0.0)
    vis = visible_points([vp], truth, cfg)
    assert list(vis.indices) == [1]


def test_hfov_monotonic(origin):
    truth = grid_cloud(-8, 8, -8, 8, 0.5, lambda x, y: np.zeros_like(x))
    vp = _viewpoint(origin, 0, 0, 10, 0.0, -90.0)
    narrow = visible_points([vp], truth, _vis_cfg(hfov=30.0, vfov=30.0))
    wide = visible_points([vp], truth, _vis_cfg(hfov=90.0, vfov=90.0))
    assert set(narrow.indices) <= set(wide.indices)
    assert len(wide) > len(narrow)


def test_more_viewpoints_monotonic(origin):
    truth = grid_cloud(-8, 8, -8, 8, 0.5, lambda x, y: np.zeros_like(x))
    cfg = _vis_cfg(hfov=40.0, vfov=40.0)
    a = _viewpoint(origin, -4, 0, 10, 0.0, -90.0)
    b = _viewpoint(origin, 4, 0, 10, 0.0, -90.0)
    one = visible_points([a], truth, cfg)
    two = visible_points([a, b], truth, cfg)
    assert set(one.indices) <= set(two.indices)


def test_unannotated_viewpoint_rejected(origin):
    truth = PointCloud([[0.0, 0.0, 0.0]])
    bare = Waypoint.from_local(origin, LocalPoint(0, 0, 10))
    with pytest.raises(InputError):
        visible_points([bare], truth, _vis_cfg())


def test_kernel_backends_agree(origin):
    truth = generate_scene(SceneSpec("box-on-plane", density=25.0))
    cfg = _vis_cfg(hfov=70.0, vfov=50.0, voxel=0.5, occlusion_slack=0.5)
    vps = [
        _viewpoint(origin, 2.0, 2.0, 8.0, 45.0, -60.0),
        _viewpoint(origin, 8.0, 5.0, 7.0, -90.0, -45.0),
    ]
    tan_h = math.tan(math.radians(cfg.camera.hfov_deg) / 2)
    tan_v = math.tan(math.radians(cfg.camera.vfov_deg) / 2)
    from terramission.evaluation import _camera_basis, _occupancy

    occ, gmin = _occupancy(truth, cfg.voxel)
    for wp in vps:
        fwd, right, up = _camera_basis(wp.gimbal.yaw_deg, wp.gimbal.pitch_deg)
        cam = np.array(wp.local.as_tuple())
        args = (truth.xyz, cam, fwd, right, up, tan_h, tan_v,
                cfg.max_range, occ, gmin, cfg.voxel, cfg.occlusion_slack)
        assert np.array_equal(visible_mask_python(*args), visible_mask_numpy(*args))


def test_classify_vertical_box():
    truth = generate_scene(SceneSpec("box-on-plane", density=25.0))
    vertical = classify_vertical(truth)
    xyz = truth.xyz
    side = (xyz[:, 2] > 1.0) & (xyz[:, 2] < 4.0)  # strictly on the faces
    flat = (xyz[:, 2] == 0.0) | (xyz[:, 2] == 5.0)
    assert vertical[side].mean() > 0.95
    assert vertical[flat].mean() < 0.05


def test_classify_vertical_too_sparse():
    with pytest.raises(InputError):
        classify_vertical(PointCloud(np.zeros((5, 3))))


def test_surface_coverage_plane_has_no_vertical(origin):
    truth = generate_scene(SceneSpec("plane", density=25.0))
    vp = _viewpoint(origin, 5, 5, 15, 0.0, -90.0)
    v_frac, h_frac = surface_coverage([vp], truth, _vis_cfg(hfov=90.0, vfov=90.0))
    assert math.isnan(v_frac)  # no vertical class on a flat scene
    assert h_frac > 0.5
