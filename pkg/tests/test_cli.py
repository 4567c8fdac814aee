import json
import math

import numpy as np
import pytest

from terramission.cli import main
from terramission.pointcloud import load_cloud, save_cloud
from terramission.scenes import SceneSpec, generate_scene

from conftest import grid_cloud

BASE_CONFIG = {
    "z_offset": 30.0,
    "altitude": 80.0,
    "sidelap": 0.8,
    "frontlap": 0.8,
    # FOV chosen for an exact 100 x 75 m footprint at 80 m altitude.
    "hfov_deg": 2 * math.degrees(math.atan(50 / 80)),
    "vfov_deg": 2 * math.degrees(math.atan(37.5 / 80)),
    "roi": [[0, 0], [120, 0], [120, 120], [0, 120]],
    "origin": [37.0, 23.0, 0.0],
}


@pytest.fixture
def config_file(tmp_path):
    def make(**overrides):
        doc = dict(BASE_CONFIG)
        doc.update(overrides)
        p = tmp_path / "config.json"
        p.write_text(json.dumps(doc))
        return str(p)

    return make


def _plan(tmp_path, config):
    out = tmp_path / "paths.json"
    assert main(["plan", "--config", config, "--output", str(out)]) == 0
    return out


def test_plan_success(tmp_path, config_file):
    out = _plan(tmp_path, config_file())
    doc = json.loads(out.read_text())
    assert doc["version"] == "1"
    assert len(doc["drones"]) == 1
    assert len(doc["drones"][0]["waypoints"]) == 63  # 7 rows x 9 captures


def test_plan_degenerate_roi(tmp_path, config_file, capsys):
    cfg = config_file(roi=[[0, 0], [1, 0], [2, 0]])
    rc = main(["plan", "--config", cfg, "--output", str(tmp_path / "p.json")])
    assert rc == 1
    assert "roi" in capsys.readouterr().err
    assert not (tmp_path / "p.json").exists()  # no partial output


def test_plan_golden_bytes(tmp_path, config_file):
    cfg = config_file()
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert main(["plan", "--config", cfg, "--output", str(a)]) == 0
    assert main(["plan", "--config", cfg, "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_via_environment(tmp_path, config_file, monkeypatch):
    monkeypatch.setenv("MISSION_CONFIG", config_file())
    out = tmp_path / "paths.json"
    assert main(["plan", "--output", str(out)]) == 0
    assert out.exists()


def test_missing_config(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("MISSION_CONFIG", raising=False)
    rc = main(["plan", "--output", str(tmp_path / "p.json")])
    assert rc == 1
    assert "config" in capsys.readouterr().err


def _flat_cloud_file(tmp_path):
    cloud = grid_cloud(-20, 140, -20, 140, 1.0, lambda x, y: np.zeros_like(x))
    p = tmp_path / "flat.ply"
    save_cloud(p, cloud)
    return str(p)


def test_refine_flat_all_nadir(tmp_path, config_file):
    paths = _plan(tmp_path, config_file())
    cloud = _flat_cloud_file(tmp_path)
    out = tmp_path / "mission.json"
    rc = main([
        "refine", "--paths", str(paths), "--cloud", cloud,
        "--config", config_file(), "--output", str(out),
    ])
    assert rc == 0
    doc = json.loads(out.read_text())
    for wp in doc["drones"][0]["waypoints"]:
        assert wp["gimbal_pitch_deg"] == pytest.approx(-90.0, abs=1e-6)
        assert wp["alt_m"] == pytest.approx(30.0, abs=1e-6)


def test_refine_cliff_inserts_waypoints(tmp_path, config_file):
    paths = _plan(tmp_path, config_file())
    cloud = grid_cloud(
        -20, 140, -20, 140, 1.0, lambda x, y: np.where(x > 60, 12.0, 0.0)
    )
    cloud_path = tmp_path / "cliff.ply"
    save_cloud(cloud_path, cloud)
    out = tmp_path / "mission.json"
    rc = main([
        "refine", "--paths", str(paths), "--cloud", str(cloud_path),
        "--config", config_file(delta_z=5.0, step=1.0), "--output", str(out),
    ])
    assert rc == 0
    doc = json.loads(out.read_text())
    inserted = [w for w in doc["drones"][0]["waypoints"] if w["inserted"]]
    assert inserted  # the 12 m cliff crosses delta_z on every row


def test_refine_missing_cloud(tmp_path, config_file, capsys):
    paths = _plan(tmp_path, config_file())
    rc = main([
        "refine", "--paths", str(paths), "--cloud", str(tmp_path / "no.ply"),
        "--config", config_file(), "--output", str(tmp_path / "m.json"),
    ])
    assert rc == 1


def test_refine_no_terrain_exit_2(tmp_path, config_file, capsys):
    paths = _plan(tmp_path, config_file())
    # Cloud nowhere near the planned region.
    far = grid_cloud(5000, 5040, 5000, 5040, 1.0, lambda x, y: np.zeros_like(x))
    cloud_path = tmp_path / "far.ply"
    save_cloud(cloud_path, far)
    out = tmp_path / "m.json"
    rc = main([
        "refine", "--paths", str(paths), "--cloud", str(cloud_path),
        "--config", config_file(tol_max=20.0), "--output", str(out),
    ])
    assert rc == 2
    assert "no terrain" in capsys.readouterr().err
    assert not out.exists()  # nothing written on failure


def test_refine_thread_counts_identical(tmp_path, config_file):
    paths = _plan(tmp_path, config_file())
    cloud = _flat_cloud_file(tmp_path)
    outs = []
    for threads in (1, 4):
        out = tmp_path / f"m{threads}.json"
        rc = main([
            "refine", "--paths", str(paths), "--cloud", cloud,
            "--config", config_file(), "--output", str(out),
            "--threads", str(threads),
        ])
        assert rc == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_eval_identical_clouds(tmp_path, capsys):
    cloud = generate_scene(SceneSpec("pile", density=25.0))
    p = tmp_path / "c.ply"
    save_cloud(p, cloud)
    report = tmp_path / "report.json"
    rc = main([
        "eval", "--reconstructed", str(p), "--truth", str(p),
        "--json", str(report),
    ])
    assert rc == 0
    doc = json.loads(report.read_text())
    assert doc["precision"] == [1.0, 1.0]
    assert doc["recall"] == [1.0, 1.0]
    assert "100.00" in capsys.readouterr().err


def test_eval_shifted_cloud(tmp_path):
    truth = generate_scene(SceneSpec("plane", density=25.0))
    shifted = truth.xyz + [0.0, 0.0, 0.07]
    t, s = tmp_path / "t.ply", tmp_path / "s.ply"
    save_cloud(t, truth)
    from terramission.pointcloud import PointCloud

    save_cloud(s, PointCloud(shifted))
    report = tmp_path / "report.json"
    rc = main([
        "eval", "--reconstructed", str(s), "--truth", str(t),
        "--thresholds", "0.05", "0.10", "--json", str(report),
    ])
    assert rc == 0
    doc = json.loads(report.read_text())
    assert doc["f1"] == [0.0, 1.0]


def test_eval_malformed_ply(tmp_path, capsys):
    bad = tmp_path / "bad.ply"
    bad.write_text("ply\nformat ascii 1.0\nelement vertex nope\nend_header\n")
    good = tmp_path / "good.ply"
    save_cloud(good, generate_scene(SceneSpec("plane", density=4.0)))
    rc = main(["eval", "--reconstructed", str(bad), "--truth", str(good)])
    assert rc == 1
    assert "offset" in capsys.readouterr().err


def test_scene_generation(tmp_path):
    out = tmp_path / "scene.ply"
    rc = main([
        "scene", "--kind", "plane", "--size-x", "10", "--size-y", "10",
        "--density", "100", "--output", str(out),
    ])
    assert rc == 0
    assert load_cloud(out).count == 10_000


def test_scene_seed_determinism(tmp_path):
    a, b = tmp_path / "a.ply", tmp_path / "b.ply"
    args = ["scene", "--kind", "pile", "--seed", "3"]
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_scene_unknown_kind(tmp_path, capsys):
    rc = main(["scene", "--kind", "volcano", "--output", str(tmp_path / "x.ply")])
    assert rc == 1
    assert "volcano" in capsys.readouterr().err


def test_config_show_round_trip(tmp_path, config_file, capsys):
    cfg = config_file()
    assert main(["config", "show", "--config", cfg]) == 0
    shown = capsys.readouterr().out
    echoed = tmp_path / "echoed.json"
    echoed.write_text(shown)
    assert main(["config", "show", "--config", str(echoed)]) == 0
    assert capsys.readouterr().out == shown


def test_config_unknown_key(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"z_offset": 10.0, "zz_offset": 1.0}))
    rc = main(["config", "show", "--config", str(p)])
    assert rc == 1
    assert "zz_offset" in capsys.readouterr().err
