import math

import numpy as np
import pytest

import mapfree


def test_pose_basics():
    r = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    p = mapfree.Pose(r, np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(p.camera_center(), [0.0, 1.0, 0.0], atol=1e-15)
    ident = p @ p.inverse()
    np.testing.assert_allclose(ident.rotation, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(ident.translation, np.zeros(3), atol=1e-15)

    q = mapfree.pose_from_quaternion(math.cos(0.1), 0.0, 0.0, math.sin(0.1), [0, 0, 0])
    assert mapfree.rotation_error_deg(q, mapfree.Pose()) == pytest.approx(
        math.degrees(0.2), abs=1e-12)
    with pytest.raises(mapfree.Error):
        mapfree.pose_from_quaternion(0, 0, 0, 0, [0, 0, 0])


def test_camera_and_vcre():
    k = mapfree.CameraIntrinsics(500, 500, 320, 240, 640, 480)
    assert k.diagonal() == 800.0
    np.testing.assert_allclose(k.project([0.1, -0.2, 2.0]), [345.0, 190.0])
    np.testing.assert_allclose(k.backproject([345.0, 190.0], 2.0), [0.1, -0.2, 2.0])
    with pytest.raises(mapfree.InvalidParameterError):
        mapfree.CameraIntrinsics(-1, 500, 320, 240, 640, 480)

    assert mapfree.build_virtual_grid().shape == (196, 3)
    est = mapfree.Pose(np.eye(3), np.array([0.05, 0.0, 0.0]))
    expected = sum(500 * 0.05 / (1.8 + 0.3 * i) for i in range(7)) / 7
    assert mapfree.vcre(est, mapfree.Pose(), k) == pytest.approx(expected, abs=1e-9)


def test_scale_consensus():
    scale, support = mapfree.scale_consensus([1.98, 2.0, 2.02, 1.99, 2.01, 2.0, 0.1, 5, 9, 20])
    assert scale == pytest.approx(2.0)
    assert support == 6
    with pytest.raises(mapfree.ScaleFailureError):
        mapfree.scale_consensus([-1.0, 0.0])


@pytest.mark.parametrize("estimator", ["essmat-dscale", "pnp", "procrustes"])
def test_estimate_synthetic(estimator):
    scene = mapfree.synthetic_scene({"num_points": "150"}, seed=4)
    q = scene.queries[0]
    assert q.depth.dtype == np.float32
    assert q.depth.shape == (480, 640)
    assert q.matches.shape[1] == 5
    cfg = mapfree.EstimatorConfig()
    cfg.rng_seed = 3
    e = mapfree.estimate(estimator, q.matches, scene.depth_ref, q.depth,
                         scene.k_ref, q.k, cfg)
    assert e.status == "ok"
    assert e.confidence == sum(e.inlier_mask)
    assert mapfree.rotation_error_deg(e.pose, q.pose) < 1e-5
    assert mapfree.translation_error_m(e.pose, q.pose) < 1e-5


def test_estimate_too_few_matches():
    scene = mapfree.synthetic_scene(seed=2)
    q = scene.queries[0]
    e = mapfree.estimate("essmat-dscale", q.matches[:4, :4], scene.depth_ref,
                         q.depth, scene.k_ref, q.k)
    assert e.status == "no_estimate"
    assert e.pose is None


def test_files_and_cli(tmp_path):
    depth = np.arange(12, dtype=np.float32).reshape(3, 4)
    mapfree.write_depth_map(tmp_path / "d.mfdm", depth)
    np.testing.assert_array_equal(mapfree.read_depth_map(tmp_path / "d.mfdm"), depth)

    (tmp_path / "bad.mfdm").write_bytes(b"MFDM\x04\x00\x00\x00")
    with pytest.raises(mapfree.FormatError):
        mapfree.read_depth_map(tmp_path / "bad.mfdm")

    data = tmp_path / "data"
    assert mapfree.run_cli(["synth", "--out", str(data), "--num-scenes", "1"]) == 0
    est = tmp_path / "est.txt"
    assert mapfree.run_cli(["estimate", "--dataset", str(data), "--out", str(est)]) == 0
    assert est.read_text().startswith("scene_000 query_000 ok ")
    assert mapfree.run_cli(["estimate", "--estimator", "nope"]) == 1
